//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Runs without the
//! libtest harness so the lines always reach the output.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emsr_core::codec::{encode, Message};
use emsr_core::construct::{
    biorthogonal_code, build_2k, build_53, build_elementary, build_general, composite,
    dual_closed_form, dual_structure, fixture_42_gf5, orthogonal_code, parse_code_spec,
    reference_coefficient_matrix, MsrCode, SeedOverrides,
};
use emsr_core::gf::Field;
use emsr_core::linalg::{all_submatrices_invertible, Matrix};
use emsr_core::repair::{bruteforce_plan_search, execute_repair, plan_repair, RepairPlan};
use emsr_core::verify::{verify_bandwidth, verify_dual, verify_exact_repair, verify_mds, Status};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn gf4() -> Field {
    Field::binary(2, 0b111).unwrap()
}

fn rows(field: &Field, data: &[[u32; 9]; 9]) -> Matrix {
    let v: Vec<Vec<u32>> = data.iter().map(|r| r.to_vec()).collect();
    Matrix::from_rows(field, &v).unwrap()
}

const ORTHOGONAL_G: [[u32; 9]; 9] = [
    [3, 0, 0, 3, 0, 0, 3, 0, 0],
    [2, 1, 0, 3, 1, 0, 1, 1, 0],
    [2, 0, 1, 1, 0, 1, 3, 0, 1],
    [1, 2, 0, 2, 2, 0, 3, 2, 0],
    [0, 3, 0, 0, 1, 0, 0, 2, 0],
    [0, 2, 1, 0, 1, 2, 0, 3, 3],
    [1, 0, 2, 3, 0, 2, 2, 0, 2],
    [0, 1, 2, 0, 3, 3, 0, 2, 1],
    [0, 0, 3, 0, 0, 2, 0, 0, 1],
];

const ORTHOGONAL_G_INV: [[u32; 9]; 9] = [
    [2, 1, 1, 3, 0, 0, 3, 0, 0],
    [0, 3, 0, 1, 2, 1, 0, 3, 0],
    [0, 0, 3, 0, 0, 3, 1, 1, 2],
    [2, 3, 2, 2, 0, 0, 1, 0, 0],
    [0, 3, 0, 1, 1, 2, 0, 1, 0],
    [0, 0, 3, 0, 0, 2, 1, 3, 3],
    [2, 2, 3, 1, 0, 0, 2, 0, 0],
    [0, 3, 0, 1, 3, 3, 0, 2, 0],
    [0, 0, 3, 0, 0, 1, 1, 2, 1],
];

const BIORTHOGONAL_G: [[u32; 9]; 9] = [
    [3, 2, 2, 1, 0, 0, 1, 0, 0],
    [0, 1, 0, 2, 3, 2, 0, 1, 0],
    [0, 0, 1, 0, 0, 1, 2, 2, 3],
    [3, 3, 1, 2, 0, 0, 3, 0, 0],
    [0, 1, 0, 2, 1, 1, 0, 3, 0],
    [0, 0, 1, 0, 0, 2, 2, 3, 2],
    [3, 1, 3, 3, 0, 0, 2, 0, 0],
    [0, 1, 0, 2, 2, 3, 0, 2, 0],
    [0, 0, 1, 0, 0, 3, 2, 1, 1],
];

const BIORTHOGONAL_G_INV: [[u32; 9]; 9] = [
    [2, 0, 0, 2, 0, 0, 2, 0, 0],
    [1, 3, 0, 3, 3, 0, 2, 3, 0],
    [1, 0, 3, 2, 0, 3, 3, 0, 3],
    [3, 1, 0, 2, 1, 0, 1, 1, 0],
    [0, 2, 0, 0, 1, 0, 0, 3, 0],
    [0, 1, 3, 0, 2, 2, 0, 3, 1],
    [3, 0, 1, 1, 0, 1, 2, 0, 1],
    [0, 3, 1, 0, 1, 3, 0, 2, 2],
    [0, 0, 2, 0, 0, 2, 0, 0, 1],
];

fn reference_family_check(
    name: &str,
    code: &MsrCode,
    g: &[[u32; 9]; 9],
    g_inv: &[[u32; 9]; 9],
    fixture_text: &str,
) -> Result<(), String> {
    let f = gf4();
    if code.parity_composite() != rows(&f, g) {
        return Err(format!("{name}: G differs"));
    }
    let bundled = parse_code_spec(fixture_text).map_err(|e| format!("{name}: {e}"))?;
    if &bundled != code {
        return Err(format!(
            "{name}: bundled fixture differs from the construction"
        ));
    }
    let dual = dual_structure(code).map_err(|e| format!("{name}: {e}"))?;
    let computed = composite(&dual.enc_prime);
    let reference = rows(&f, g_inv);
    if computed != reference {
        let diffs: Vec<String> = (0..9)
            .flat_map(|r| (0..9).map(move |c| (r, c)))
            .filter(|&(r, c)| computed.get(r, c) != reference.get(r, c))
            .map(|(r, c)| {
                format!(
                    "({},{}) reference {} computed {}",
                    r + 1,
                    c + 1,
                    reference.get(r, c),
                    computed.get(r, c)
                )
            })
            .collect();
        let consistent = reference.mul(&rows(&f, g)).unwrap() == Matrix::identity(&f, 9);
        return Err(format!(
            "{name}: G^-1 differs at {}; reference G^-1 times G is {}the identity",
            diffs.join(", "),
            if consistent { "" } else { "not " }
        ));
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let f = gf4();
    let m = reference_coefficient_matrix();
    let orth = build_2k(
        3,
        &f,
        &SeedOverrides {
            v: None,
            m: Some(m.clone()),
            kappa: Some(3),
        },
    )
    .unwrap();
    let bi = build_2k(
        3,
        &f,
        &SeedOverrides {
            v: Some(m.transpose().scale(2)),
            m: Some(m),
            kappa: Some(3),
        },
    )
    .unwrap();
    if bi.seed().unwrap().u != Matrix::identity(&f, 3) {
        return fail("bi-orthogonal seed does not give U = I");
    }
    let results = [
        reference_family_check(
            "orthogonal",
            &orth,
            &ORTHOGONAL_G,
            &ORTHOGONAL_G_INV,
            include_str!("../fixtures/orthogonal.spec"),
        ),
        reference_family_check(
            "bi-orthogonal",
            &bi,
            &BIORTHOGONAL_G,
            &BIORTHOGONAL_G_INV,
            include_str!("../fixtures/biorthogonal.spec"),
        ),
    ];
    let errors: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    match errors.is_empty() {
        false => fail(errors.join("; ")),
        true => pass("both 9x9 G and G^-1 match entry for entry"),
    }
}

fn gf(order: u32) -> Field {
    Field::with_order(order).unwrap()
}

/// The codes of criteria 2 and 3.
fn repair_suite() -> Vec<(String, MsrCode)> {
    let mut codes = vec![
        ("(4,2,3) GF(5) fixture".to_string(), fixture_42_gf5()),
        ("(6,3,5) orthogonal".to_string(), orthogonal_code()),
        ("(6,3,5) bi-orthogonal".to_string(), biorthogonal_code()),
    ];
    for (a, b) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        codes.push((
            format!("(5,3,4) alpha={a} beta={b}"),
            build_53(a, b).unwrap(),
        ));
    }
    let none = SeedOverrides::default();
    codes.push((
        "(5,2,3) punctured".to_string(),
        build_general(5, 2, 3, None, &none).unwrap(),
    ));
    codes.push((
        "(8,4,7) GF(8)".to_string(),
        build_general(8, 4, 7, Some(&gf(8)), &none).unwrap(),
    ));
    codes.push((
        "(10,4,8) GF(16)".to_string(),
        build_general(10, 4, 8, Some(&gf(16)), &none).unwrap(),
    ));
    codes
}

fn criterion_2(codes: &[(String, MsrCode)]) -> Outcome {
    let mut bad = Vec::new();
    let mut nodes = 0;
    for (name, code) in codes {
        let check = verify_exact_repair(code, 20, 2024);
        nodes += check.nodes.len();
        for n in &check.nodes {
            if n.status != Status::Pass || n.samples_passed != 20 || !n.symbolic_exact {
                bad.push(format!("{name} node {}: {:?}", n.node, n.error));
            }
        }
    }
    if bad.is_empty() {
        pass(format!(
            "{nodes} nodes over {} codes, 20 messages each",
            codes.len()
        ))
    } else {
        fail(bad.join("; "))
    }
}

fn criterion_3(codes: &[(String, MsrCode)]) -> Outcome {
    let mut counts = Vec::new();
    let mut bad = Vec::new();
    for (name, code) in codes {
        match verify_mds(code) {
            Ok(m) if m.status == Status::Pass => counts.push(m.subsets_checked),
            Ok(m) => bad.push(format!("{name}: singular {:?}", m.failing)),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    let expected = [6, 20, 20, 10, 10, 10, 10, 10, 70, 210];
    if bad.is_empty() && counts != expected {
        bad.push(format!("subset counts {counts:?}, expected {expected:?}"));
    }
    if bad.is_empty() {
        pass(format!("subsets per code {counts:?}"))
    } else {
        fail(bad.join("; "))
    }
}

fn criterion_4(codes: &[(String, MsrCode)]) -> Outcome {
    let mut bad = Vec::new();
    for (name, code) in codes {
        let plans: Vec<(usize, Option<RepairPlan>)> = (1..=code.n())
            .map(|n| (n, plan_repair(code, n, None).ok()))
            .collect();
        let bw = verify_bandwidth(code, &plans);
        let (k, d) = (code.k() as u64, code.d() as u64);
        let formula = Ratio::new(k * (d - k + 1), d);
        if bw.status != Status::Pass || bw.savings_factor != formula.to_string() {
            bad.push(format!("{name}: {:?}", bw.witnesses));
        }
        for (node, symbols) in &bw.downloads {
            if *symbols != code.d() {
                bad.push(format!("{name} node {node} downloads {symbols}"));
            }
        }
    }
    let savings = |code: &MsrCode| {
        let plans: Vec<_> = (1..=code.n())
            .map(|n| (n, plan_repair(code, n, None).ok()))
            .collect();
        verify_bandwidth(code, &plans).savings_factor
    };
    let s635 = savings(&orthogonal_code());
    let s423 = savings(&fixture_42_gf5());
    if s635 != "9/5" || s423 != "4/3" {
        bad.push(format!("savings (6,3,5) {s635}, (4,2,3) {s423}"));
    }
    if bad.is_empty() {
        pass(format!(
            "d symbols per repair; (6,3,5) {s635}, (4,2,3) {s423}"
        ))
    } else {
        fail(bad.join("; "))
    }
}

fn projections(code: &MsrCode, node: usize) -> Vec<Vec<u32>> {
    plan_repair(code, node, None)
        .unwrap()
        .projections
        .iter()
        .map(|p| p.as_slice().to_vec())
        .collect()
}

fn criterion_5() -> Outcome {
    let e1 = vec![vec![1, 0, 0]; 5];
    let ones = vec![vec![1, 1, 1]; 5];
    let cases = [
        (
            "orthogonal systematic 1",
            projections(&orthogonal_code(), 1),
            &e1,
        ),
        (
            "orthogonal parity 1",
            projections(&orthogonal_code(), 4),
            &ones,
        ),
        (
            "bi-orthogonal systematic 1",
            projections(&biorthogonal_code(), 1),
            &ones,
        ),
        (
            "bi-orthogonal parity 1",
            projections(&biorthogonal_code(), 4),
            &e1,
        ),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(_, got, want)| got != *want)
        .map(|(name, got, _)| format!("{name}: {got:?}"))
        .collect();
    if bad.is_empty() {
        pass("(1,0,0) and (1,1,1) projections, swapped between the two codes")
    } else {
        fail(bad.join("; "))
    }
}

/// `m_ij = c_i d_j / (x_i - y_j)` with distinct random points.
fn random_cauchy(field: &Field, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut points: Vec<u32> = field.elements().collect();
    for i in 0..2 * k {
        let j = rng.gen_range(i..points.len());
        points.swap(i, j);
    }
    let (x, y) = points[..2 * k].split_at(k);
    let nonzero = |rng: &mut ChaCha8Rng| rng.gen_range(1..field.order());
    let c: Vec<u32> = (0..k).map(|_| nonzero(rng)).collect();
    let d: Vec<u32> = (0..k).map(|_| nonzero(rng)).collect();
    let mut m = Matrix::zeros(field, k, k);
    for i in 0..k {
        for j in 0..k {
            let denom = field.inv(field.sub(x[i], y[j])).unwrap();
            m.set(i, j, field.mul(field.mul(c[i], d[j]), denom))
                .unwrap();
        }
    }
    m
}

fn random_matrix(field: &Field, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..k * k)
        .map(|_| rng.gen_range(0..field.order()))
        .collect();
    Matrix::from_vec(field, k, k, data).unwrap()
}

fn random_invertible(field: &Field, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = random_matrix(field, k, rng);
        if m.is_invertible() {
            return m;
        }
    }
}

/// A seed valid for the dual identities, with a superregular `M` whenever
/// the field admits one.
fn random_code(field: &Field, k: usize, rng: &mut ChaCha8Rng) -> MsrCode {
    let q = field.order() as usize;
    let kappas: Vec<u32> = field
        .elements()
        .filter(|&x| field.kappa_admissible(x))
        .collect();
    let kappa = kappas[rng.gen_range(0..kappas.len())];
    let v = random_invertible(field, k, rng);
    if q >= 2 * k {
        let m = random_cauchy(field, k, rng);
        let overrides = SeedOverrides {
            v: Some(v),
            m: Some(m),
            kappa: Some(kappa),
        };
        return build_2k(k, field, &overrides).unwrap();
    }
    if k <= 3 {
        loop {
            let m = random_matrix(field, k, rng);
            if all_submatrices_invertible(&m).unwrap() {
                let overrides = SeedOverrides {
                    v: Some(v),
                    m: Some(m),
                    kappa: Some(kappa),
                };
                return build_2k(k, field, &overrides).unwrap();
            }
        }
    }
    // no 4x4 superregular matrix exists over GF(4)
    let m = random_invertible(field, k, rng);
    build_elementary(k, field, v, m, kappa).unwrap()
}

fn dual_identities_hold(code: &MsrCode) -> Result<(), String> {
    let seed = code.seed().unwrap();
    let f = code.field();
    let n = code.k() * code.alpha();
    let closed = dual_closed_form(seed).map_err(|e| e.to_string())?;
    let product = code
        .parity_composite()
        .mul(&composite(&closed.enc_prime))
        .unwrap();
    if product != Matrix::identity(f, n) {
        return Err("G G' != I".into());
    }
    let u_prime_t = seed.u.transpose().inverse().unwrap().transpose();
    let rhs = seed
        .m
        .inverse()
        .unwrap()
        .mul(&seed.v.transpose())
        .unwrap()
        .scale(seed.kappa);
    if u_prime_t != rhs {
        return Err("U'^t != kappa M^-1 V^t".into());
    }
    if verify_dual(code).status != Status::Pass {
        return Err("verify_dual rejects the seed".into());
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    let mut count = 0;
    for order in [4, 8, 16] {
        let field = if order == 4 { gf4() } else { gf(order) };
        for k in 2..=4 {
            for trial in 0..50 {
                let code = random_code(&field, k, &mut rng);
                count += 1;
                if let Err(e) = dual_identities_hold(&code) {
                    bad.push(format!("GF({order}) k={k} seed {trial}: {e}"));
                }
            }
        }
    }
    if bad.is_empty() {
        pass(format!(
            "{count} random seeds over GF(4), GF(8), GF(16), k = 2..4"
        ))
    } else {
        fail(bad.join("; "))
    }
}

fn criterion_7() -> Outcome {
    let mut bad = Vec::new();
    let mut built = 0;
    for n in 2..=12usize {
        for k in 1..=n / 2 {
            for d in 2 * k - 1..n {
                let mut bound = (2 * (n - k)) as u32;
                while !Field::is_supported_order(bound) {
                    bound += 1;
                }
                match build_general(n, k, d, None, &SeedOverrides::default()) {
                    Ok(code) => {
                        built += 1;
                        if code.field().order() > bound {
                            bad.push(format!("({n},{k},{d}) uses {}", code.field()));
                        }
                        if (code.n(), code.k(), code.d()) != (n, k, d) {
                            bad.push(format!("({n},{k},{d}) built the wrong shape"));
                        }
                        let exact = (1..=n).all(|node| {
                            plan_repair(&code, node, None)
                                .map(|p| emsr_core::repair::plan_is_exact(&code, &p))
                                .unwrap_or(false)
                        });
                        if !exact {
                            bad.push(format!("({n},{k},{d}) has a node without an exact plan"));
                        }
                    }
                    Err(e) => bad.push(format!("({n},{k},{d}): {e}")),
                }
            }
        }
    }
    if bad.is_empty() {
        pass(format!(
            "{built} parameter sets, every node exactly repairable"
        ))
    } else {
        fail(bad.join("; "))
    }
}

/// Every message of the code, in counting order.
fn all_messages(code: &MsrCode) -> Vec<Message> {
    let q = code.field().order() as u64;
    let len = code.k() * code.alpha();
    let total = q.pow(len as u32);
    (0..total)
        .map(|mut idx| {
            let symbols: Vec<u32> = (0..len)
                .map(|_| {
                    let s = (idx % q) as u32;
                    idx /= q;
                    s
                })
                .collect();
            Message::from_symbols(code, &symbols).unwrap()
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let codes = [
        ("(4,2,3)", fixture_42_gf5()),
        (
            "(5,2,3)",
            build_general(5, 2, 3, None, &SeedOverrides::default()).unwrap(),
        ),
    ];
    let mut bad = Vec::new();
    let mut compared = 0usize;
    for (name, code) in &codes {
        let messages = all_messages(code);
        for node in 1..=code.n() {
            let structural = plan_repair(code, node, None).unwrap();
            let brute = match bruteforce_plan_search(code, node, &structural.survivors) {
                Ok(p) => p,
                Err(e) => {
                    bad.push(format!("{name} node {node}: {e}"));
                    continue;
                }
            };
            for msg in &messages {
                let shares = encode(code, msg).unwrap();
                let helpers: Vec<_> = shares
                    .iter()
                    .filter(|s| structural.survivors.contains(&s.node))
                    .cloned()
                    .collect();
                let a = execute_repair(code, &structural, &helpers).unwrap().0;
                let b = execute_repair(code, &brute, &helpers).unwrap().0;
                compared += 1;
                if a != b || a != shares[node - 1] {
                    bad.push(format!(
                        "{name} node {node} differs on {:?}",
                        msg.to_symbols()
                    ));
                    break;
                }
            }
        }
    }
    if bad.is_empty() {
        pass(format!("{compared} repairs identical across all messages"))
    } else {
        fail(bad.join("; "))
    }
}

fn criterion_9() -> Outcome {
    let base = orthogonal_code();
    let q = base.field().order();
    let mut undetected = Vec::new();
    let mut count = 0;
    for parity in 0..3 {
        for unit in 0..3 {
            for row in 0..3 {
                for col in 0..3 {
                    let original = base.enc(parity, unit).get(row, col);
                    for value in (0..q).filter(|&v| v != original) {
                        count += 1;
                        let code = base
                            .with_perturbed_entry(parity, unit, row, col, value)
                            .unwrap();
                        let mds = verify_mds(&code).unwrap();
                        let mds_witness = mds.status == Status::Fail && !mds.failing.is_empty();
                        let dual = verify_dual(&code);
                        let dual_witness =
                            dual.status == Status::Fail && !dual.witnesses.is_empty();
                        let repair = verify_exact_repair(&code, 4, 9);
                        let repair_witness =
                            repair.status == Status::Fail && !repair.failing_nodes().is_empty();
                        if !(mds_witness || dual_witness || repair_witness) {
                            undetected.push(format!(
                                "parity {} unit {} ({row},{col}) -> {value}",
                                parity + 1,
                                unit + 1
                            ));
                        }
                    }
                }
            }
        }
    }
    if undetected.is_empty() {
        pass(format!("all {count} single-entry perturbations detected"))
    } else {
        fail(format!("undetected: {}", undetected.join("; ")))
    }
}

fn run(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut outcome = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            outcome.ok = false;
            outcome.detail = format!("{} (over the {limit:?} limit)", outcome.detail);
        }
    }
    println!(
        "[{}] {name}: {} ({:.2?})",
        if outcome.ok { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed
    );
    outcome.ok
}

fn main() -> ExitCode {
    let suite = repair_suite();
    let results = [
        run(
            "1 fixture reproduction",
            Some(Duration::from_secs(1)),
            criterion_1,
        ),
        run(
            "2 exact repair, all nodes",
            Some(Duration::from_secs(30)),
            || criterion_2(&suite),
        ),
        run("3 MDS exhaustive", Some(Duration::from_secs(60)), || {
            criterion_3(&suite)
        }),
        run("4 bandwidth at the MSR point", None, || criterion_4(&suite)),
        run("5 reference repair projections", None, criterion_5),
        run(
            "6 dual identities",
            Some(Duration::from_secs(30)),
            criterion_6,
        ),
        run("7 field-size bound", None, criterion_7),
        run("8 brute-force cross-check", None, criterion_8),
        run("9 negative controls", None, criterion_9),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
