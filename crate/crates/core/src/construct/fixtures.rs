//! Codes with fixed, well-known parameters.

use crate::gf::Field;
use crate::linalg::Matrix;

use super::{build_2k, CodeKind, CodeParams, MsrCode, SeedOverrides};

pub const FIXTURE_42_GF5: &str = "gf5-4-2-3";

fn gf4() -> Field {
    Field::binary(2, 0b111).expect("x^2+x+1 is irreducible")
}

/// `[[1,1,1],[1,2,3],[1,3,2]]` over GF(4) with `g(x) = x^2 + x + 1`.
pub fn reference_coefficient_matrix() -> Matrix {
    Matrix::from_rows(&gf4(), &[vec![1, 1, 1], vec![1, 2, 3], vec![1, 3, 2]])
        .expect("valid literal")
}

/// (6,3,5) over GF(4) with `V = I` and κ = 3, so `U = 2M`.
pub fn orthogonal_code() -> MsrCode {
    build_2k(
        3,
        &gf4(),
        &SeedOverrides {
            v: None,
            m: Some(reference_coefficient_matrix()),
            kappa: Some(3),
        },
    )
    .expect("valid seed")
}

/// (6,3,5) over GF(4) with `V = 2Mᵗ` and κ = 3, so `U = I`.
pub fn biorthogonal_code() -> MsrCode {
    let m = reference_coefficient_matrix();
    build_2k(
        3,
        &gf4(),
        &SeedOverrides {
            v: Some(m.transpose().scale(2)),
            m: Some(m),
            kappa: Some(3),
        },
    )
    .expect("valid seed")
}

/// The (4,2,3) code over GF(5) with `A1 = diag(1,2)`, `B1 = I`,
/// `A2 = diag(2,1)`, `B2 = I`.
pub fn fixture_42_gf5() -> MsrCode {
    let f = Field::prime(5).expect("5 is prime");
    let d = |a, b| Matrix::diag(&f, &[a, b]).expect("diag");
    let params = CodeParams::new(4, 2, 3, f.clone()).expect("valid params");
    MsrCode::from_parts(
        params,
        CodeKind::Fixture {
            name: FIXTURE_42_GF5.into(),
        },
        vec![vec![d(1, 2), d(1, 1)], vec![d(2, 1), d(1, 1)]],
        None,
    )
    .expect("valid fixture")
}

pub(super) fn by_name(name: &str) -> Option<MsrCode> {
    (name == FIXTURE_42_GF5).then(fixture_42_gf5)
}

/// Names accepted by [`named_code`].
pub const NAMED_CODES: [&str; 4] = ["orthogonal", "biorthogonal", "five-three", FIXTURE_42_GF5];

/// Bundled codes by name; `five-three` is the (5,3,4) code with α = β = 1.
pub fn named_code(name: &str) -> Option<MsrCode> {
    match name {
        "orthogonal" => Some(orthogonal_code()),
        "biorthogonal" => Some(biorthogonal_code()),
        "five-three" => super::build_53(1, 1).ok(),
        FIXTURE_42_GF5 => Some(fixture_42_gf5()),
        _ => None,
    }
}
