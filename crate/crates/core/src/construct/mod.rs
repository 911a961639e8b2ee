//! Code constructions: the structured (2k, k, 2k-1) family, its dual,
//! punctured (n, k, d) codes, the (5,3) code over GF(3) and fixed fixtures.
//!
//! Encoding matrices are stored as `enc[i][l]`, the α×α matrix applied by
//! parity `i` to information unit `l` (both 0-based). A parity node stores the
//! row vector `Σ_l w_lᵗ · enc[i][l]`.

mod five_three;
mod fixtures;
mod spec_file;

use std::fmt;

use thiserror::Error;

use crate::gf::{Field, FieldError};
use crate::linalg::{
    all_submatrices_invertible, block_compose, block_split, cauchy_certificate, default_cauchy,
    dual_basis, LinalgError, Matrix, SUBMATRIX_CHECK_CAP,
};

pub use five_three::{
    build_53, build_53_dual, five_three_dual_closed_form, five_three_matrices,
    remap_composite as five_three_remap,
};
pub use fixtures::{
    biorthogonal_code, fixture_42_gf5, named_code, orthogonal_code, reference_coefficient_matrix,
    FIXTURE_42_GF5, NAMED_CODES,
};
pub use spec_file::{code_hash, parse_code_spec, write_code_spec, SPEC_HEADER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("{field} is too small: {reason}")]
    FieldTooSmall { field: String, reason: String },
    #[error("no admissible kappa (kappa != 0, 1 - kappa^2 != 0) exists in {0}")]
    NoKappa(String),
    #[error("constraint violated: {0}")]
    Constraint(ConstraintViolation),
    #[error("dual structure paths disagree at block ({row},{col})")]
    DualMismatch { row: usize, col: usize },
    #[error("operation needs a {expected} code, got {found}")]
    WrongKind { expected: String, found: String },
    #[error("invalid code spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A single failed construction constraint.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintViolation {
    #[error("singular-V: basis matrix V is not invertible")]
    SingularV,
    #[error("singular-M: coefficient matrix is not invertible")]
    SingularM,
    #[error("submatrix-singular: some square submatrix of the coefficient matrix is singular")]
    SubmatrixSingular,
    #[error("submatrix-unchecked: {0}")]
    SubmatrixUnchecked(String),
    #[error("bad-kappa: kappa is zero")]
    KappaZero,
    #[error("bad-kappa: 1 - kappa^2 is zero")]
    KappaSquare,
    #[error("seed-shape: {0}")]
    SeedShape(String),
    #[error("u-relation: kappa*U differs from V'*M")]
    URelation,
    #[error(
        "encoding-mismatch: block (parity {parity}, unit {unit}) differs from the construction"
    )]
    Encoding { parity: usize, unit: usize },
    #[error("bad-parameter: {0}")]
    Parameter(String),
}

/// `(n, k, d)` over a field, normalized so each link carries one symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub field: Field,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d: usize, field: Field) -> Result<Self, ConstructError> {
        if k == 0 || d < k || d + 1 > n {
            return Err(ConstructError::Params(format!(
                "need 1 <= k <= d <= n-1, got (n,k,d) = ({n},{k},{d})"
            )));
        }
        Ok(CodeParams { n, k, d, field })
    }

    /// Symbols stored per node, `d - k + 1`.
    pub fn alpha(&self) -> usize {
        self.d - self.k + 1
    }

    /// Source symbols per stripe, `k * alpha`.
    pub fn stripe_size(&self) -> usize {
        self.k * self.alpha()
    }

    pub fn parity_count(&self) -> usize {
        self.n - self.k
    }

    /// Repair download in symbols (one per helper).
    pub fn repair_bandwidth(&self) -> usize {
        self.d
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{}) over {}", self.n, self.k, self.d, self.field)
    }
}

/// Seed of the structured family: `G_l^(i) = u_i v_lᵗ + m[l][i] I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionSeed {
    /// Columns are the basis vectors `v_l`.
    pub v: Matrix,
    /// Columns are `u_i`.
    pub u: Matrix,
    /// Coefficient matrix, entry `(l, i)` is the scalar of parity `i` on unit `l`.
    pub m: Matrix,
    pub kappa: u32,
}

/// Optional user overrides for the structured seed.
#[derive(Debug, Clone, Default)]
pub struct SeedOverrides {
    pub v: Option<Matrix>,
    pub m: Option<Matrix>,
    pub kappa: Option<u32>,
}

/// How a punctured code was derived from its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub parent_n: usize,
    pub parent_k: usize,
    pub parent_d: usize,
    /// 1-based indices of the removed parent information units.
    pub removed_units: Vec<usize>,
    /// Trailing coordinates dropped from every node and unit.
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeKind {
    Structured,
    Punctured(Provenance),
    FiveThree {
        alpha: u32,
        beta: u32,
    },
    Fixture {
        name: String,
    },
    /// `k = 1` with a single parity copying the unit.
    Replication,
}

impl CodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            CodeKind::Structured => "structured",
            CodeKind::Punctured(_) => "punctured",
            CodeKind::FiveThree { .. } => "five-three",
            CodeKind::Fixture { .. } => "fixture",
            CodeKind::Replication => "replication",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsrCode {
    params: CodeParams,
    kind: CodeKind,
    enc: Vec<Vec<Matrix>>,
    seed: Option<ConstructionSeed>,
}

impl MsrCode {
    /// Assembles a code from raw parts after checking shapes only.
    pub fn from_parts(
        params: CodeParams,
        kind: CodeKind,
        enc: Vec<Vec<Matrix>>,
        seed: Option<ConstructionSeed>,
    ) -> Result<Self, ConstructError> {
        let alpha = params.alpha();
        if enc.len() != params.parity_count() {
            return Err(ConstructError::Spec(format!(
                "expected {} parity rows of encoding blocks, got {}",
                params.parity_count(),
                enc.len()
            )));
        }
        for (i, row) in enc.iter().enumerate() {
            if row.len() != params.k {
                return Err(ConstructError::Spec(format!(
                    "parity {} has {} blocks, expected {}",
                    i + 1,
                    row.len(),
                    params.k
                )));
            }
            for (l, b) in row.iter().enumerate() {
                if b.rows() != alpha || b.cols() != alpha || b.field() != &params.field {
                    return Err(ConstructError::Spec(format!(
                        "block (parity {}, unit {}) must be {alpha}x{alpha} over {}",
                        i + 1,
                        l + 1,
                        params.field
                    )));
                }
            }
        }
        if let Some(s) = &seed {
            if s.v.field() != &params.field {
                return Err(ConstructError::Spec(
                    "seed field differs from code field".into(),
                ));
            }
        }
        Ok(MsrCode {
            params,
            kind,
            enc,
            seed,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn kind(&self) -> &CodeKind {
        &self.kind
    }

    pub fn seed(&self) -> Option<&ConstructionSeed> {
        self.seed.as_ref()
    }

    pub fn field(&self) -> &Field {
        &self.params.field
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn alpha(&self) -> usize {
        self.params.alpha()
    }

    /// Encoding block of parity `parity` on unit `unit` (0-based).
    pub fn enc(&self, parity: usize, unit: usize) -> &Matrix {
        &self.enc[parity][unit]
    }

    pub fn enc_table(&self) -> &[Vec<Matrix>] {
        &self.enc
    }

    /// Replaces one encoding entry; used for fault injection.
    pub fn with_perturbed_entry(
        &self,
        parity: usize,
        unit: usize,
        row: usize,
        col: usize,
        value: u32,
    ) -> Result<MsrCode, ConstructError> {
        let mut out = self.clone();
        let block = out
            .enc
            .get_mut(parity)
            .and_then(|r| r.get_mut(unit))
            .ok_or_else(|| ConstructError::Params("block index out of range".into()))?;
        block.set(row, col, value)?;
        Ok(out)
    }

    /// Whether the 1-based `node` stores an information unit verbatim.
    pub fn is_systematic(&self, node: usize) -> bool {
        (1..=self.k()).contains(&node)
    }

    /// `kα × α` matrix `N` such that node `node` (1-based) stores `wᵗ N`.
    pub fn node_generator(&self, node: usize) -> Matrix {
        let (k, a) = (self.k(), self.alpha());
        let f = self.field();
        assert!((1..=self.n()).contains(&node), "node {node} out of range");
        if node <= k {
            let mut blocks = vec![vec![Matrix::zeros(f, a, a)]; k];
            blocks[node - 1][0] = Matrix::identity(f, a);
            block_compose(&blocks).expect("conforming blocks")
        } else {
            let i = node - k - 1;
            let blocks: Vec<Vec<Matrix>> = (0..k).map(|l| vec![self.enc[i][l].clone()]).collect();
            block_compose(&blocks).expect("conforming blocks")
        }
    }

    /// `kα × kα` data-collector matrix for the given 1-based node set.
    pub fn collector_matrix(&self, nodes: &[usize]) -> Matrix {
        let row: Vec<Matrix> = nodes.iter().map(|&n| self.node_generator(n)).collect();
        block_compose(&[row]).expect("conforming blocks")
    }

    /// Parity composite with block `(l, i) = enc[i][l]`; square when `n = 2k`.
    pub fn parity_composite(&self) -> Matrix {
        composite(&self.enc)
    }
}

/// Block `(l, i)` of the result is `enc[i][l]`.
pub fn composite(enc: &[Vec<Matrix>]) -> Matrix {
    let units = enc[0].len();
    let table: Vec<Vec<Matrix>> = (0..units)
        .map(|l| enc.iter().map(|row| row[l].clone()).collect())
        .collect();
    block_compose(&table).expect("conforming blocks")
}

/// Inverse of [`composite`].
pub fn split_composite(m: &Matrix, alpha: usize) -> Result<Vec<Vec<Matrix>>, LinalgError> {
    let blocks = block_split(m, alpha, alpha)?;
    let parities = blocks.first().map_or(0, Vec::len);
    Ok((0..parities)
        .map(|i| blocks.iter().map(|row| row[i].clone()).collect())
        .collect())
}

/// Dual (remapped) encoding of a code whose parity composite is square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualStructure {
    /// `enc_prime[c][r]` is block `(r, c)` of the inverse composite.
    pub enc_prime: Vec<Vec<Matrix>>,
    pub bases: Option<DualBases>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualBases {
    /// `(Uᵗ)⁻¹`, columns `u'_i`.
    pub u_prime: Matrix,
    /// `(Vᵗ)⁻¹`, columns `v'_l`.
    pub v_prime: Matrix,
    /// Inverse coefficient matrix.
    pub m_prime: Matrix,
}

fn check_kappa(field: &Field, kappa: u32) -> Result<(), ConstraintViolation> {
    if kappa == 0 {
        return Err(ConstraintViolation::KappaZero);
    }
    if field.sub(1, field.mul(kappa, kappa)) == 0 {
        return Err(ConstraintViolation::KappaSquare);
    }
    Ok(())
}

/// True when every square submatrix is invertible. Matrices recognised as
/// Cauchy are accepted directly; others are enumerated up to the size cap.
pub fn coefficient_matrix_superregular(m: &Matrix) -> Result<bool, LinalgError> {
    if cauchy_certificate(m).is_some() {
        return Ok(true);
    }
    all_submatrices_invertible(m)
}

/// `G_l^(i) = u_i v_lᵗ + m[l][i] I` for all `i`, `l`.
fn structured_blocks(seed: &ConstructionSeed) -> Result<Vec<Vec<Matrix>>, LinalgError> {
    let f = seed.v.field();
    let k = seed.v.cols();
    let a = seed.v.rows();
    (0..seed.u.cols())
        .map(|i| {
            let ui = seed.u.column(i);
            (0..k)
                .map(|l| {
                    Matrix::outer(&ui, &seed.v.column(l))?.add(&Matrix::scalar(
                        f,
                        a,
                        seed.m.get(l, i),
                    ))
                })
                .collect()
        })
        .collect()
}

/// Builds the (2k, k, 2k-1) code from seed parts, requiring only the
/// hypotheses of the dual-structure identities: V and M invertible and κ
/// admissible. The all-submatrix condition on M is not checked.
pub fn build_elementary(
    k: usize,
    field: &Field,
    v: Matrix,
    m: Matrix,
    kappa: u32,
) -> Result<MsrCode, ConstructError> {
    if k == 0 {
        return Err(ConstructError::Params("k must be positive".into()));
    }
    for (name, mat) in [("V", &v), ("M", &m)] {
        if mat.rows() != k || mat.cols() != k || mat.field() != field {
            return Err(ConstructError::Constraint(ConstraintViolation::SeedShape(
                format!("{name} must be {k}x{k} over {field}"),
            )));
        }
    }
    if !field.contains(kappa) {
        return Err(FieldError::OutOfRange {
            value: kappa,
            order: field.order(),
        }
        .into());
    }
    check_kappa(field, kappa).map_err(ConstructError::Constraint)?;
    let v_prime =
        dual_basis(&v).map_err(|_| ConstructError::Constraint(ConstraintViolation::SingularV))?;
    if !m.is_invertible() {
        return Err(ConstructError::Constraint(ConstraintViolation::SingularM));
    }
    let kappa_inv = field.inv(kappa).expect("kappa nonzero");
    let u = v_prime.mul(&m)?.scale(kappa_inv);
    let seed = ConstructionSeed { v, u, m, kappa };
    let enc = structured_blocks(&seed)?;
    let params = CodeParams::new(2 * k, k, 2 * k - 1, field.clone())?;
    MsrCode::from_parts(params, CodeKind::Structured, enc, Some(seed))
}

/// The (2k, k, 2k-1) code with `U = κ⁻¹ V' M`.
///
/// Defaults: `V = I`, `M` the default Cauchy matrix (needs `q >= 2k`), κ the
/// first admissible element.
pub fn build_2k(
    k: usize,
    field: &Field,
    overrides: &SeedOverrides,
) -> Result<MsrCode, ConstructError> {
    if k == 0 {
        return Err(ConstructError::Params("k must be positive".into()));
    }
    let kappa = match overrides.kappa {
        Some(kp) => kp,
        None => field
            .default_kappa()
            .ok_or_else(|| ConstructError::NoKappa(field.descriptor()))?,
    };
    let v = overrides
        .v
        .clone()
        .unwrap_or_else(|| Matrix::identity(field, k));
    let m = match &overrides.m {
        Some(m) => m.clone(),
        None => default_cauchy(field, k, k).map_err(|_| ConstructError::FieldTooSmall {
            field: field.descriptor(),
            reason: format!("a {k}x{k} Cauchy matrix needs {} distinct elements", 2 * k),
        })?,
    };
    let code = build_elementary(k, field, v, m, kappa)?;
    let violations = constraint_violations(&code);
    if let Some(v) = violations.into_iter().next() {
        return Err(ConstructError::Constraint(v));
    }
    Ok(code)
}

/// Checks every construction constraint that applies to the code's kind.
pub fn constraint_violations(code: &MsrCode) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    match code.kind() {
        CodeKind::Structured | CodeKind::Punctured(_) => {
            let Some(seed) = code.seed() else {
                out.push(ConstraintViolation::SeedShape("seed missing".into()));
                return out;
            };
            seed_violations(seed, &mut out);
            if !out.is_empty() {
                return out;
            }
            let Ok(full) = structured_blocks(seed) else {
                out.push(ConstraintViolation::SeedShape("seed blocks".into()));
                return out;
            };
            if let CodeKind::Punctured(p) = code.kind() {
                if p.parent_k != seed.v.cols() || p.parent_k != code.n() - code.k() {
                    out.push(ConstraintViolation::Parameter(
                        "provenance parent does not match seed".into(),
                    ));
                    return out;
                }
            } else if code.n() != 2 * code.k() || code.d() != 2 * code.k() - 1 {
                out.push(ConstraintViolation::Parameter(
                    "structured codes are (2k, k, 2k-1)".into(),
                ));
                return out;
            }
            compare_blocks(
                code,
                |i, l| full[i][l].crop(code.alpha(), code.alpha()).ok(),
                &mut out,
            );
        }
        CodeKind::FiveThree { alpha, beta } => {
            let (alpha, beta) = (*alpha, *beta);
            if code.field() != &Field::prime(3).expect("prime")
                || (code.n(), code.k(), code.d()) != (5, 3, 4)
            {
                out.push(ConstraintViolation::Parameter(
                    "five-three codes are (5,3,4) over gf(3)".into(),
                ));
                return out;
            }
            if !(1..=2).contains(&alpha) || !(1..=2).contains(&beta) {
                out.push(ConstraintViolation::Parameter(
                    "alpha and beta must be nonzero elements of gf(3)".into(),
                ));
                return out;
            }
            let reference = five_three_matrices(alpha, beta).expect("valid parameters");
            compare_blocks(code, |i, l| Some(reference[i][l].clone()), &mut out);
        }
        CodeKind::Fixture { name } => match fixtures::by_name(name) {
            Some(reference) if reference.params() == code.params() => {
                compare_blocks(code, |i, l| Some(reference.enc(i, l).clone()), &mut out)
            }
            _ => out.push(ConstraintViolation::Parameter(format!(
                "unknown fixture {name:?} for {}",
                code.params()
            ))),
        },
        CodeKind::Replication => {
            if code.k() != 1 || code.n() != 2 {
                out.push(ConstraintViolation::Parameter(
                    "replication codes are (2,1,1)".into(),
                ));
                return out;
            }
            let id = Matrix::identity(code.field(), code.alpha());
            compare_blocks(code, |_, _| Some(id.clone()), &mut out);
        }
    }
    out
}

fn seed_violations(seed: &ConstructionSeed, out: &mut Vec<ConstraintViolation>) {
    let f = seed.v.field().clone();
    let k = seed.v.cols();
    if !seed.v.is_square() || !seed.m.is_square() || seed.m.rows() != k || seed.u.rows() != k {
        out.push(ConstraintViolation::SeedShape(
            "V, U and M must be k x k".into(),
        ));
        return;
    }
    if let Err(e) = check_kappa(&f, seed.kappa) {
        out.push(e);
    }
    let v_prime = dual_basis(&seed.v);
    if v_prime.is_err() {
        out.push(ConstraintViolation::SingularV);
    }
    if !seed.m.is_invertible() {
        out.push(ConstraintViolation::SingularM);
    }
    match coefficient_matrix_superregular(&seed.m) {
        Ok(true) => {}
        Ok(false) => out.push(ConstraintViolation::SubmatrixSingular),
        Err(e) => out.push(ConstraintViolation::SubmatrixUnchecked(format!(
            "{e}; not a recognisable Cauchy matrix and larger than {SUBMATRIX_CHECK_CAP}x{SUBMATRIX_CHECK_CAP}"
        ))),
    }
    if let Ok(vp) = v_prime {
        let lhs = seed.u.scale(seed.kappa);
        if vp.mul(&seed.m).ok() != Some(lhs) {
            out.push(ConstraintViolation::URelation);
        }
    }
}

fn compare_blocks(
    code: &MsrCode,
    reference: impl Fn(usize, usize) -> Option<Matrix>,
    out: &mut Vec<ConstraintViolation>,
) {
    for i in 0..code.n() - code.k() {
        for l in 0..code.k() {
            if reference(i, l).as_ref() != Some(code.enc(i, l)) {
                out.push(ConstraintViolation::Encoding {
                    parity: i + 1,
                    unit: l + 1,
                });
            }
        }
    }
}

/// Dual structure of a structured code, computed by the closed form and by
/// inverting the parity composite; the two must agree.
pub fn dual_structure(code: &MsrCode) -> Result<DualStructure, ConstructError> {
    if code.kind() != &CodeKind::Structured {
        return Err(ConstructError::WrongKind {
            expected: "structured".into(),
            found: code.kind().label().into(),
        });
    }
    let seed = code
        .seed()
        .ok_or_else(|| ConstructError::Spec("seed missing".into()))?;
    let closed = dual_closed_form(seed)?;
    let inverse = code.parity_composite().inverse()?;
    let by_inversion = split_composite(&inverse, code.alpha())?;
    for (c, row) in closed.enc_prime.iter().enumerate() {
        for (r, block) in row.iter().enumerate() {
            if block != &by_inversion[c][r] {
                return Err(ConstructError::DualMismatch { row: r, col: c });
            }
        }
    }
    Ok(closed)
}

/// Closed-form dual: block `(r, c)` of `G⁻¹` is
/// `(v'_c u'_rᵗ − κ² m'[r][c] I) / (1 − κ²)`.
pub fn dual_closed_form(seed: &ConstructionSeed) -> Result<DualStructure, ConstructError> {
    let f = seed.v.field().clone();
    let k = seed.v.cols();
    let v_prime = dual_basis(&seed.v)?;
    let u_prime = dual_basis(&seed.u)?;
    let m_prime = seed.m.inverse()?;
    let k2 = f.mul(seed.kappa, seed.kappa);
    let denom = f
        .inv(f.sub(1, k2))
        .ok_or(ConstructError::Constraint(ConstraintViolation::KappaSquare))?;
    let mut enc_prime = Vec::with_capacity(k);
    for c in 0..k {
        let mut row = Vec::with_capacity(k);
        for r in 0..k {
            let outer = Matrix::outer(&v_prime.column(c), &u_prime.column(r))?;
            let diag = Matrix::scalar(&f, k, f.mul(k2, m_prime.get(r, c)));
            row.push(outer.sub(&diag)?.scale(denom));
        }
        enc_prime.push(row);
    }
    Ok(DualStructure {
        enc_prime,
        bases: Some(DualBases {
            u_prime,
            v_prime,
            m_prime,
        }),
    })
}

/// Derives an (n, k, d) code from a (2K, K, 2K-1) structured parent with
/// `K = n - k`: drops the last `n - 2k` units and the trailing `n - 1 - d`
/// coordinates of every node and unit.
pub fn puncture(parent: &MsrCode, n: usize, k: usize, d: usize) -> Result<MsrCode, ConstructError> {
    if parent.kind() != &CodeKind::Structured {
        return Err(ConstructError::WrongKind {
            expected: "structured".into(),
            found: parent.kind().label().into(),
        });
    }
    check_general_range(n, k, d)?;
    let big_k = parent.k();
    if n - k != big_k {
        return Err(ConstructError::Params(format!(
            "parent has {big_k} parities but ({n},{k},{d}) needs {}",
            n - k
        )));
    }
    if k == big_k && d == 2 * big_k - 1 {
        return Ok(parent.clone());
    }
    let params = CodeParams::new(n, k, d, parent.field().clone())?;
    let a = params.alpha();
    let enc = (0..big_k)
        .map(|i| (0..k).map(|l| parent.enc(i, l).crop(a, a)).collect())
        .collect::<Result<Vec<Vec<Matrix>>, _>>()?;
    let provenance = Provenance {
        parent_n: parent.n(),
        parent_k: big_k,
        parent_d: parent.d(),
        removed_units: (k + 1..=big_k).collect(),
        pruned: n - 1 - d,
    };
    MsrCode::from_parts(
        params,
        CodeKind::Punctured(provenance),
        enc,
        parent.seed().cloned(),
    )
}

fn check_general_range(n: usize, k: usize, d: usize) -> Result<(), ConstructError> {
    if k == 0 || n < 2 * k || d + 1 < 2 * k || d + 1 > n {
        return Err(ConstructError::Params(format!(
            "need n >= 2k and 2k-1 <= d <= n-1, got (n,k,d) = ({n},{k},{d})"
        )));
    }
    Ok(())
}

/// Smallest supported field order `>= 2 * parities`.
pub fn default_field(parities: usize) -> Result<Field, ConstructError> {
    let mut q = (2 * parities).max(2) as u32;
    while !Field::is_supported_order(q) {
        q += 1;
    }
    Ok(Field::with_order(q)?)
}

/// Any (n, k, d) with `n >= 2k`, `d >= 2k-1`: builds the (2K, K, 2K-1)
/// parent with `K = n - k` and punctures it.
///
/// When `K = 1` and the field has no admissible κ (GF(2), GF(3)), the
/// result is the (2,1,1) replication code.
pub fn build_general(
    n: usize,
    k: usize,
    d: usize,
    field: Option<&Field>,
    overrides: &SeedOverrides,
) -> Result<MsrCode, ConstructError> {
    check_general_range(n, k, d)?;
    let parities = n - k;
    let field = match field {
        Some(f) => f.clone(),
        None => default_field(parities)?,
    };
    if parities == 1 && field.default_kappa().is_none() && overrides.kappa.is_none() {
        return replication(&field);
    }
    let parent = build_2k(parities, &field, overrides)?;
    puncture(&parent, n, k, d)
}

/// The (2,1,1) code: the parity node stores a copy of the single unit.
pub fn replication(field: &Field) -> Result<MsrCode, ConstructError> {
    let params = CodeParams::new(2, 1, 1, field.clone())?;
    MsrCode::from_parts(
        params,
        CodeKind::Replication,
        vec![vec![Matrix::identity(field, 1)]],
        None,
    )
}

/// Checks the common-eigenvector relations of a structured seed:
/// `G_l^(i) v'_j = m[l][i] v'_j` for `l != j` and `G_j^(i) v'_j = m[j][i] v'_j + u_i`.
pub fn eigen_relations_hold(code: &MsrCode) -> bool {
    let Some(seed) = code.seed() else {
        return false;
    };
    let Ok(vp) = dual_basis(&seed.v) else {
        return false;
    };
    for i in 0..code.n() - code.k() {
        for j in 0..code.k() {
            let vj = vp.column(j);
            for l in 0..code.k() {
                let scaled = vj.scale(seed.m.get(l, i));
                let lhs = code.enc(i, l).mul_vec(&vj).expect("shapes");
                let rhs = if l == j {
                    scaled.add(&seed.u.column(i)).expect("shapes")
                } else {
                    scaled
                };
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Dual coefficient identity `U'ᵗ = κ M⁻¹ Vᵗ`.
pub fn dual_coefficients_hold(seed: &ConstructionSeed) -> bool {
    let (Ok(u_prime), Ok(m_inv)) = (dual_basis(&seed.u), seed.m.inverse()) else {
        return false;
    };
    let rhs = m_inv.mul(&seed.v.transpose()).map(|x| x.scale(seed.kappa));
    rhs.ok() == Some(u_prime.transpose())
}
