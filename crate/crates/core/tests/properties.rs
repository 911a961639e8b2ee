use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use emsr_core::codec::{bytes_to_symbols, dc_decode, encode, symbols_to_bytes, Message};
use emsr_core::construct::{
    build_2k, build_53, build_general, dual_coefficients_hold, eigen_relations_hold,
    fixture_42_gf5, orthogonal_code, CodeKind, MsrCode, SeedOverrides,
};
use emsr_core::gf::Field;
use emsr_core::linalg::{dual_basis, eigen_small, subsets, Matrix, Vector};
use emsr_core::repair::{execute_repair, plan_is_exact, plan_repair};
use emsr_core::sim::{run_scenario, Cluster, Scenario};
use emsr_core::verify::{verify_all, verify_construction, Status};

fn field_strategy() -> impl Strategy<Value = Field> {
    prop::sample::select(vec![3u32, 4, 5, 7, 8, 11, 16, 32, 256])
        .prop_map(|q| Field::with_order(q).unwrap())
}

fn matrix(field: &Field, rows: usize, cols: usize, seed: u64) -> Matrix {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(0..field.order()))
        .collect();
    Matrix::from_vec(field, rows, cols, data).unwrap()
}

/// Codes covered by the constructors, small enough for exhaustive checks.
fn code_strategy() -> impl Strategy<Value = MsrCode> {
    prop_oneof![
        Just(orthogonal_code()),
        Just(fixture_42_gf5()),
        (1u32..3, 1u32..3).prop_map(|(a, b)| build_53(a, b).unwrap()),
        (2usize..=8)
            .prop_flat_map(|n| (Just(n), 1..=n / 2))
            .prop_flat_map(|(n, k)| (Just(n), Just(k), 2 * k - 1..n))
            .prop_map(|(n, k, d)| build_general(n, k, d, None, &SeedOverrides::default()).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms_on_random_triples(f in field_strategy(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let q = f.order();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.add(a, f.add(b, c)), f.add(f.add(a, b), c));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            let inv = f.inv(a).unwrap();
            prop_assert_eq!(f.mul(a, inv), 1);
            prop_assert_eq!(f.inv(inv), Some(a));
        }
    }

    #[test]
    fn inverse_round_trip(q in prop::sample::select(vec![3u32, 4, 5, 8]), n in 1usize..=6, seed in any::<u64>()) {
        let f = Field::with_order(q).unwrap();
        let a = matrix(&f, n, n, seed);
        match a.inverse() {
            Ok(inv) => {
                prop_assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(&f, n));
                prop_assert_eq!(inv.mul(&a).unwrap(), Matrix::identity(&f, n));
            }
            Err(_) => prop_assert!(a.rank() < n),
        }
    }

    #[test]
    fn rank_of_transpose(f in field_strategy(), r in 1usize..6, c in 1usize..6, seed in any::<u64>()) {
        let a = matrix(&f, r, c, seed);
        prop_assert_eq!(a.rank(), a.transpose().rank());
    }

    #[test]
    fn dual_basis_is_biorthogonal(f in field_strategy(), n in 1usize..5, seed in any::<u64>()) {
        let v = matrix(&f, n, n, seed);
        if let Ok(vp) = dual_basis(&v) {
            prop_assert_eq!(vp.transpose().mul(&v).unwrap(), Matrix::identity(&f, n));
        }
    }

    #[test]
    fn eigenpairs_are_exact(f in field_strategy(), n in 1usize..=3, seed in any::<u64>()) {
        let a = matrix(&f, n, n, seed);
        for (lambda, v) in eigen_small(&a).unwrap() {
            prop_assert!(!v.is_zero());
            prop_assert_eq!(a.mul_vec(&v).unwrap(), v.scale(lambda));
        }
    }

    #[test]
    fn structured_codes_have_common_eigenvectors(q in prop::sample::select(vec![5u32, 7, 8, 11, 13, 16]), k in 1usize..=4) {
        let f = Field::with_order(q).unwrap();
        if let Ok(code) = build_2k(k, &f, &SeedOverrides::default()) {
            prop_assert!(eigen_relations_hold(&code));
            prop_assert!(dual_coefficients_hold(code.seed().unwrap()));
            prop_assert_eq!(verify_construction(&code).status, Status::Pass);
        }
    }

    #[test]
    fn general_at_2k_matches_build_2k(k in 1usize..=5) {
        let general = build_general(2 * k, k, 2 * k - 1, None, &SeedOverrides::default()).unwrap();
        if general.kind() == &CodeKind::Replication {
            return Ok(());
        }
        let direct = build_2k(k, general.field(), &SeedOverrides::default()).unwrap();
        prop_assert_eq!(general.enc_table(), direct.enc_table());
    }

    #[test]
    fn punctured_shares_embed_in_parent(
        params in (3usize..=9)
            .prop_flat_map(|n| (Just(n), 1..=n / 2))
            .prop_flat_map(|(n, k)| (Just(n), Just(k), 2 * k - 1..n)),
        seed in any::<u64>(),
    ) {
        let (n, k, d) = params;
        let big_k = n - k;
        if big_k < 2 {
            return Ok(());
        }
        let code = build_general(n, k, d, None, &SeedOverrides::default()).unwrap();
        let parent = build_2k(big_k, code.field(), &SeedOverrides::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg = Message::random(&code, &mut rng);
        let a = code.alpha();
        let f = code.field();
        let units: Vec<Vector> = (0..big_k)
            .map(|l| {
                let mut v = vec![0u32; parent.alpha()];
                if l < k {
                    v[..a].copy_from_slice(msg.units()[l].as_slice());
                }
                Vector::new(f, v).unwrap()
            })
            .collect();
        let parent_shares = encode(&parent, &Message::new(&parent, units).unwrap()).unwrap();
        let shares = encode(&code, &msg).unwrap();
        for share in &shares {
            let parent_node = if share.node <= k { share.node } else { share.node - k + big_k };
            let cropped = &parent_shares[parent_node - 1].symbols.as_slice()[..a];
            prop_assert_eq!(share.symbols.as_slice(), cropped);
        }
    }

    #[test]
    fn decode_from_random_subset(code in code_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg = Message::random(&code, &mut rng);
        let shares = encode(&code, &msg).unwrap();
        let sets = subsets(code.n(), code.k());
        let set = &sets[(seed as usize) % sets.len()];
        let chosen: Vec<_> = set.iter().map(|&i| shares[i].clone()).collect();
        prop_assert_eq!(dc_decode(&code, &chosen).unwrap(), msg);
    }

    #[test]
    fn encoding_is_linear(code in code_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m1, m2) = (Message::random(&code, &mut rng), Message::random(&code, &mut rng));
        let sum = encode(&code, &m1.add(&m2).unwrap()).unwrap();
        let parts: Vec<_> = encode(&code, &m1).unwrap().iter()
            .zip(encode(&code, &m2).unwrap())
            .map(|(a, b)| a.add(&b).unwrap())
            .collect();
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn every_plan_is_exact_with_d_downloads(code in code_strategy(), seed in any::<u64>()) {
        let node = 1 + (seed as usize) % code.n();
        let plan = plan_repair(&code, node, None).unwrap();
        prop_assert!(plan_is_exact(&code, &plan));
        prop_assert_eq!(plan.survivors.len(), code.d());
        if code.k() >= 2 && code.d() > code.k() {
            prop_assert!(code.d() < code.k() * code.alpha());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shares = encode(&code, &Message::random(&code, &mut rng)).unwrap();
        let helpers: Vec<_> = shares.iter().filter(|s| plan.survivors.contains(&s.node)).cloned().collect();
        let (rebuilt, bw) = execute_repair(&code, &plan, &helpers).unwrap();
        prop_assert_eq!(&rebuilt, &shares[node - 1]);
        prop_assert_eq!(bw.symbols, code.d());
    }

    #[test]
    fn systematic_plans_align_interference(k in 2usize..=4, node_seed in any::<usize>()) {
        let code = build_2k(k, &Field::with_order(8).unwrap(), &SeedOverrides::default()).unwrap();
        let node = 1 + node_seed % k;
        let plan = plan_repair(&code, node, None).unwrap();
        let a = code.alpha();
        for unit in 0..k {
            // rows of the download matrix belonging to this unit
            let cols: Vec<Vector> = plan.survivors.iter().zip(&plan.projections)
                .map(|(&s, p)| code.node_generator(s).mul_vec(p).unwrap())
                .collect();
            let block = Matrix::from_columns(code.field(), &cols).unwrap()
                .submatrix(unit * a, 0, a, cols.len()).unwrap();
            let expected = if unit == node - 1 { a } else { 1 };
            prop_assert_eq!(block.rank(), expected);
        }
    }

    #[test]
    fn bytes_frame_round_trip(q in prop::sample::select(vec![4u32, 8, 16, 32, 256]), data in prop::collection::vec(any::<u8>(), 0..64), chunk in 1usize..10) {
        let f = Field::with_order(q).unwrap();
        let symbols = bytes_to_symbols(&f, &data, chunk).unwrap();
        prop_assert_eq!(symbols.len() % chunk, 0);
        prop_assert_eq!(symbols_to_bytes(&f, &symbols, data.len()).unwrap(), data);
    }

    #[test]
    fn alternating_failures_keep_cluster_exact(code in code_strategy(), failures in prop::collection::vec(any::<usize>(), 0..6), seed in any::<u64>()) {
        let mut text = format!("ingest random {} seed={seed}\n", 3 * code.k() * code.alpha());
        for f in &failures {
            let node = 1 + f % code.n();
            text.push_str(&format!("fail {node}\nrepair {node}\n"));
        }
        text.push_str("assert\n");
        let scenario: Scenario = text.parse().unwrap();
        let mut cluster = Cluster::new(code.clone());
        let report = run_scenario(&mut cluster, &scenario).unwrap();
        for r in &report.repairs {
            prop_assert!(r.exact);
            prop_assert_eq!(r.symbols_per_stripe, code.d());
        }
        let mut pristine = Cluster::new(code.clone());
        run_scenario(&mut pristine, &text.lines().next().unwrap().parse().unwrap()).unwrap();
        for node in 1..=code.n() {
            prop_assert_eq!(cluster.stored(node), pristine.stored(node));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verification_is_deterministic(code in code_strategy()) {
        let a = verify_all(&code, 3, 1);
        let b = verify_all(&code, 3, 1);
        prop_assert!(a.passed);
        prop_assert_eq!(a.deterministic_hash(), b.deterministic_hash());
    }
}

/// Data collector on nodes (3, 4, 5) of the orthogonal (6,3,5) code: once
/// `c` is read from node 3 and cancelled, parities 1 and 2 leave a 6x6
/// system in `a, b` that is invertible, and so is the 2x2 block of the
/// coefficient matrix for those units and parities.
#[test]
fn collector_345_reduces_to_two_unit_system() {
    let code = orthogonal_code();
    let f = code.field();
    let m = &code.seed().unwrap().m;
    let m2 = m.submatrix(0, 0, 2, 2).unwrap();
    assert!(m2.is_invertible());
    let rows: Vec<Vec<Matrix>> = (0..2)
        .map(|unit| {
            (0..2)
                .map(|parity| code.enc(parity, unit).clone())
                .collect()
        })
        .collect();
    let reduced = emsr_core::linalg::block_compose(&rows).unwrap();
    assert_eq!(reduced.rank(), 6);

    let mut rng = ChaCha8Rng::seed_from_u64(345);
    let msg = Message::random(&code, &mut rng);
    let shares = encode(&code, &msg).unwrap();
    let c = shares[2].symbols.clone();
    assert_eq!(&c, &msg.units()[2]);
    let mut y = Vec::new();
    for parity in 0..2 {
        let cancelled = shares[3 + parity]
            .symbols
            .add(
                &code
                    .enc(parity, 2)
                    .transpose()
                    .mul_vec(&c)
                    .unwrap()
                    .scale(f.neg(1)),
            )
            .unwrap();
        y.extend_from_slice(cancelled.as_slice());
    }
    let ab = reduced
        .transpose()
        .solve(&Vector::new(f, y).unwrap())
        .unwrap();
    assert_eq!(&ab.as_slice()[..3], msg.units()[0].as_slice());
    assert_eq!(&ab.as_slice()[3..], msg.units()[1].as_slice());
}
