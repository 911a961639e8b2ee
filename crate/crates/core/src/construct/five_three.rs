//! The (5,3,4) code over GF(3), parameterized by two nonzero scalars.

use crate::gf::Field;
use crate::linalg::{block_compose, Matrix};

use super::{split_composite, CodeKind, CodeParams, ConstructError, DualStructure, MsrCode};

fn gf3() -> Field {
    Field::prime(3).expect("3 is prime")
}

fn check_pair(alpha: u32, beta: u32) -> Result<(), ConstructError> {
    if !(1..=2).contains(&alpha) || !(1..=2).contains(&beta) {
        return Err(ConstructError::Params(format!(
            "alpha and beta must be nonzero elements of gf(3), got ({alpha},{beta})"
        )));
    }
    Ok(())
}

/// `[[A1, B1, C1], [A2, B2, C2]]`, indexed `[parity][unit]`.
pub fn five_three_matrices(alpha: u32, beta: u32) -> Result<Vec<Vec<Matrix>>, ConstructError> {
    check_pair(alpha, beta)?;
    let f = gf3();
    let (a, b) = (alpha, beta);
    let (a2, b2) = (f.mul(2, a), f.mul(2, b));
    let mat = |rows: [[u32; 2]; 2]| {
        Matrix::from_rows(&f, &[rows[0].to_vec(), rows[1].to_vec()]).expect("2x2")
    };
    Ok(vec![
        vec![
            mat([[a2, 0], [b2, b]]),
            mat([[a, a2], [0, b2]]),
            mat([[a2, 0], [b, b2]]),
        ],
        vec![
            mat([[a2, 0], [b, b2]]),
            mat([[a, a2], [0, b]]),
            mat([[a, 0], [b2, b2]]),
        ],
    ])
}

/// Closed-form remapped matrices `[[A1', B1', C1'], [A2', B2', C2']]`.
pub fn five_three_dual_closed_form(
    alpha: u32,
    beta: u32,
) -> Result<Vec<Vec<Matrix>>, ConstructError> {
    check_pair(alpha, beta)?;
    let f = gf3();
    let ia = f.inv(alpha).expect("nonzero");
    let ib = f.inv(beta).expect("nonzero");
    let two_ib = f.mul(2, ib);
    let c_entry_hi = f.mul(f.mul(2, alpha), ib);
    let c_entry_lo = f.mul(f.mul(2, beta), ia);
    let mat = |rows: [[u32; 2]; 2]| {
        Matrix::from_rows(&f, &[rows[0].to_vec(), rows[1].to_vec()]).expect("2x2")
    };
    let c_prime = mat([[0, c_entry_hi], [c_entry_lo, 1]]);
    Ok(vec![
        vec![
            mat([[ia, ib], [ia, 0]]),
            mat([[ia, two_ib], [ia, 0]]),
            c_prime.clone(),
        ],
        vec![
            mat([[0, ib], [ia, ib]]),
            mat([[0, two_ib], [ia, two_ib]]),
            c_prime,
        ],
    ])
}

/// The (5,3,4) code with parity 1 storing `aᵗA1 + bᵗB1 + cᵗC1` and parity 2
/// storing `aᵗA2 + bᵗB2 + cᵗC2`.
pub fn build_53(alpha: u32, beta: u32) -> Result<MsrCode, ConstructError> {
    let enc = five_three_matrices(alpha, beta)?;
    let params = CodeParams::new(5, 3, 4, gf3())?;
    MsrCode::from_parts(params, CodeKind::FiveThree { alpha, beta }, enc, None)
}

/// The remap composite `[[A1, A2, 0], [B1, B2, 0], [C1, C2, I]]`: parities
/// and the third systematic node taken as the new information units.
pub fn remap_composite(code: &MsrCode) -> Matrix {
    let f = code.field();
    let z = Matrix::zeros(f, 2, 2);
    let i = Matrix::identity(f, 2);
    let e = |p: usize, u: usize| code.enc(p, u).clone();
    block_compose(&[
        vec![e(0, 0), e(1, 0), z.clone()],
        vec![e(0, 1), e(1, 1), z],
        vec![e(0, 2), e(1, 2), i],
    ])
    .expect("2x2 blocks")
}

/// Inverts the remap composite and checks the result against the closed
/// forms. `enc_prime[c][r]` is block `(r, c)` of the inverse, so
/// `enc_prime = [[A1', B1', C1'], [A2', B2', C2']]`.
pub fn build_53_dual(code: &MsrCode) -> Result<DualStructure, ConstructError> {
    let CodeKind::FiveThree { alpha, beta } = *code.kind() else {
        return Err(ConstructError::WrongKind {
            expected: "five-three".into(),
            found: code.kind().label().into(),
        });
    };
    let inverse = remap_composite(code).inverse()?;
    let table = split_composite(&inverse, 2)?;
    let closed = five_three_dual_closed_form(alpha, beta)?;
    for c in 0..2 {
        for r in 0..3 {
            if table[c][r] != closed[c][r] {
                return Err(ConstructError::DualMismatch { row: r, col: c });
            }
        }
    }
    let f = code.field();
    for (r, block) in table[2].iter().enumerate() {
        let expected = if r == 2 {
            Matrix::identity(f, 2)
        } else {
            Matrix::zeros(f, 2, 2)
        };
        if *block != expected {
            return Err(ConstructError::DualMismatch { row: r, col: 2 });
        }
    }
    Ok(DualStructure {
        enc_prime: table[..2].to_vec(),
        bases: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_parameters_match_display() {
        let enc = five_three_matrices(1, 1).unwrap();
        let lit: Vec<Vec<String>> = enc
            .iter()
            .map(|r| r.iter().map(Matrix::to_literal).collect())
            .collect();
        assert_eq!(lit[0], ["2,0;2,1", "1,2;0,2", "2,0;1,2"]);
        assert_eq!(lit[1], ["2,0;1,2", "1,2;0,1", "1,0;2,2"]);
    }

    #[test]
    fn dual_closed_forms_agree_for_all_pairs() {
        for a in 1..=2 {
            for b in 1..=2 {
                let code = build_53(a, b).unwrap();
                let dual = build_53_dual(&code).unwrap();
                let comp = remap_composite(&code);
                assert!(
                    comp.mul(&comp.inverse().unwrap()).unwrap()
                        == Matrix::identity(code.field(), 6)
                );
                assert_eq!(dual.enc_prime.len(), 2);
            }
        }
        let dual = build_53_dual(&build_53(1, 1).unwrap()).unwrap();
        assert_eq!(dual.enc_prime[0][0].to_literal(), "1,1;1,0");
        assert_eq!(dual.enc_prime[1][2].to_literal(), "0,2;2,1");
    }

    #[test]
    fn zero_parameter_rejected() {
        assert!(build_53(0, 1).is_err());
        assert!(build_53(1, 0).is_err());
    }
}
