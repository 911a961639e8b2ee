//! Exact repair of a single failed node from `d` helpers, one symbol each.
//!
//! Every planner picks one projection vector per helper; the reconstruction
//! map `R` (α×d) is then the unique-up-to-kernel solution of `D Rᵗ = N_f`,
//! where column `s` of `D` is the coefficient vector (over the message) of the
//! symbol downloaded from helper `s`, and `N_f` is the failed node's generator.
//! A plan is accepted only if that identity holds exactly.

mod planners;
mod search;

use num_rational::Ratio;
use thiserror::Error;

use crate::codec::{check_node_set, CodecError, NodeShare};
use crate::construct::{CodeKind, ConstructError, MsrCode};
use crate::gf::Field;
use crate::linalg::{block_compose, LinalgError, Matrix, Vector};

pub use planners::{plan_53, plan_parity, plan_systematic};
pub use search::{bruteforce_plan_search, normalized_vectors, SEARCH_LIMIT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepairError {
    #[error("node {node} is not a {expected} node")]
    WrongNodeType { node: usize, expected: &'static str },
    #[error("no structural planner for {0} codes")]
    UnsupportedKind(String),
    #[error("invalid survivor set: {0}")]
    Survivors(String),
    #[error("alignment failure: interference from unit {unit} spans rank {rank}")]
    Alignment { unit: usize, rank: usize },
    #[error("desired signal has rank {rank}, need {needed}")]
    DesiredRank { rank: usize, needed: usize },
    #[error("no eigenvector of the alignment matrix in {0}")]
    NoEigenvector(String),
    #[error("projections do not determine node {0} exactly")]
    Inexact(usize),
    #[error("brute-force search space {space} exceeds the limit {limit}")]
    SearchTooLarge { space: u128, limit: u128 },
    #[error("brute-force search found no plan for node {0}")]
    SearchExhausted(usize),
    #[error("shares do not match the plan: {0}")]
    ShareMismatch(String),
    #[error("invalid plan text: {0}")]
    PlanFormat(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which path produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanSource {
    Structural,
    CroppedParent,
    BruteForce,
}

impl PlanSource {
    pub fn label(self) -> &'static str {
        match self {
            PlanSource::Structural => "structural",
            PlanSource::CroppedParent => "cropped-parent",
            PlanSource::BruteForce => "brute-force",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPlan {
    pub failed: usize,
    pub survivors: Vec<usize>,
    /// One α-dim projection per survivor, first nonzero entry 1.
    pub projections: Vec<Vector>,
    /// α×d map from downloads to the lost share.
    pub reconstruction: Matrix,
    pub source: PlanSource,
}

/// One downloaded symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Download {
    pub survivor: usize,
    pub symbol: u32,
}

/// Traffic of one repair, in symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandwidthReport {
    pub links: usize,
    pub symbols: usize,
    /// Symbols a full decode would move, `k·α`.
    pub naive: usize,
}

impl BandwidthReport {
    /// `naive / symbols`, which is `k(d-k+1)/d` at the MSR point.
    pub fn savings_factor(&self) -> Ratio<u64> {
        Ratio::new(self.naive as u64, self.symbols as u64)
    }
}

/// The `d` lowest-numbered nodes other than `failed`.
pub fn default_survivors(code: &MsrCode, failed: usize) -> Vec<usize> {
    (1..=code.n())
        .filter(|&s| s != failed)
        .take(code.d())
        .collect()
}

pub(crate) fn resolve_survivors(
    code: &MsrCode,
    failed: usize,
    survivors: Option<&[usize]>,
) -> Result<Vec<usize>, RepairError> {
    check_node_set(code, &[failed])?;
    let list = match survivors {
        Some(s) => s.to_vec(),
        None => default_survivors(code, failed),
    };
    if list.len() != code.d() {
        return Err(RepairError::Survivors(format!(
            "need exactly d = {} survivors, got {}",
            code.d(),
            list.len()
        )));
    }
    if list.contains(&failed) {
        return Err(RepairError::Survivors(format!(
            "failed node {failed} cannot be a survivor"
        )));
    }
    check_node_set(code, &list)?;
    Ok(list)
}

/// `kα × d` matrix whose column `s` is `N_s p_s`.
pub fn download_matrix(
    code: &MsrCode,
    survivors: &[usize],
    projections: &[Vector],
) -> Result<Matrix, RepairError> {
    let cols: Vec<Matrix> = survivors
        .iter()
        .zip(projections)
        .map(|(&s, p)| code.node_generator(s).mul(&p.as_column()))
        .collect::<Result<_, _>>()?;
    Ok(block_compose(&[cols])?)
}

/// Solves for `R`, or reports that the projections are insufficient.
pub(crate) fn finish_plan(
    code: &MsrCode,
    failed: usize,
    survivors: Vec<usize>,
    projections: Vec<Vector>,
    source: PlanSource,
) -> Result<RepairPlan, RepairError> {
    let projections: Vec<Vector> = projections.iter().map(Vector::normalized).collect();
    if projections
        .iter()
        .any(|p| p.is_zero() || p.len() != code.alpha())
    {
        return Err(RepairError::Survivors(
            "projections must be nonzero α-vectors".into(),
        ));
    }
    let d = download_matrix(code, &survivors, &projections)?;
    let target = code.node_generator(failed);
    let x = d
        .solve_system(&target)?
        .ok_or(RepairError::Inexact(failed))?;
    Ok(RepairPlan {
        failed,
        survivors,
        projections,
        reconstruction: x.transpose(),
        source,
    })
}

/// Symbolic check `D Rᵗ = N_f`: the plan rebuilds the share for every message.
pub fn plan_is_exact(code: &MsrCode, plan: &RepairPlan) -> bool {
    if plan.survivors.len() != code.d()
        || plan.projections.len() != plan.survivors.len()
        || plan.reconstruction.rows() != code.alpha()
        || plan.reconstruction.cols() != plan.survivors.len()
        || plan.survivors.contains(&plan.failed)
        || check_node_set(code, &plan.survivors).is_err()
        || check_node_set(code, &[plan.failed]).is_err()
    {
        return false;
    }
    let Ok(d) = download_matrix(code, &plan.survivors, &plan.projections) else {
        return false;
    };
    d.mul(&plan.reconstruction.transpose()).ok() == Some(code.node_generator(plan.failed))
}

/// Structural plan for any node: dispatches on code kind and node type.
pub fn plan_repair(
    code: &MsrCode,
    failed: usize,
    survivors: Option<&[usize]>,
) -> Result<RepairPlan, RepairError> {
    check_node_set(code, &[failed])?;
    match code.kind() {
        CodeKind::FiveThree { .. } => plan_53(code, failed, survivors),
        CodeKind::Replication => planners::plan_replication(code, failed, survivors),
        _ if code.is_systematic(failed) => plan_systematic(code, failed, survivors),
        _ => plan_parity(code, failed, survivors),
    }
}

/// Computes the downloads a plan asks for.
pub fn downloads(plan: &RepairPlan, shares: &[NodeShare]) -> Result<Vec<Download>, RepairError> {
    plan.survivors
        .iter()
        .zip(&plan.projections)
        .map(|(&s, p)| {
            let share = shares
                .iter()
                .find(|x| x.node == s)
                .ok_or_else(|| RepairError::ShareMismatch(format!("no share for node {s}")))?;
            if share.symbols.len() != p.len() {
                return Err(RepairError::ShareMismatch(format!(
                    "share of node {s} has {} symbols",
                    share.symbols.len()
                )));
            }
            Ok(Download {
                survivor: s,
                symbol: share.symbols.dot(p)?,
            })
        })
        .collect()
}

/// Regenerates the failed share from survivor shares.
pub fn execute_repair(
    code: &MsrCode,
    plan: &RepairPlan,
    shares: &[NodeShare],
) -> Result<(NodeShare, BandwidthReport), RepairError> {
    for s in shares {
        if !plan.survivors.contains(&s.node) {
            return Err(RepairError::ShareMismatch(format!(
                "node {} is not a survivor in this plan",
                s.node
            )));
        }
    }
    let dl = downloads(plan, shares)?;
    let y = Vector::new(code.field(), dl.iter().map(|d| d.symbol).collect())?;
    let symbols = plan.reconstruction.mul_vec(&y)?;
    let report = BandwidthReport {
        links: dl.len(),
        symbols: dl.len(),
        naive: code.k() * code.alpha(),
    };
    Ok((
        NodeShare {
            node: plan.failed,
            symbols,
        },
        report,
    ))
}

pub const PLAN_HEADER: &str = "emsr-plan v1";

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Text form of a plan.
pub fn write_plan(plan: &RepairPlan) -> String {
    let mut out = format!(
        "{PLAN_HEADER}\nfailed {}\nsurvivors {}\nsource {}\n",
        plan.failed,
        join(&plan.survivors),
        plan.source.label()
    );
    for (s, p) in plan.survivors.iter().zip(&plan.projections) {
        out.push_str(&format!("projection {s} {}\n", p.to_literal()));
    }
    out.push_str(&format!(
        "reconstruction {}\n",
        plan.reconstruction.to_literal()
    ));
    out
}

/// Parses [`write_plan`] output.
pub fn parse_plan(field: &Field, text: &str) -> Result<RepairPlan, RepairError> {
    let err = |m: &str| RepairError::PlanFormat(m.to_string());
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(PLAN_HEADER) {
        return Err(err("missing header"));
    }
    let mut failed = None;
    let mut survivors: Vec<usize> = Vec::new();
    let mut source = None;
    let mut projections = Vec::new();
    let mut reconstruction = None;
    for line in lines {
        let (key, rest) = line.split_once(' ').ok_or_else(|| err(line))?;
        match key {
            "failed" => failed = Some(rest.parse().map_err(|_| err("bad failed id"))?),
            "survivors" => {
                survivors = rest
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| err("bad survivor id")))
                    .collect::<Result<_, _>>()?
            }
            "source" => {
                source = Some(match rest {
                    "structural" => PlanSource::Structural,
                    "cropped-parent" => PlanSource::CroppedParent,
                    "brute-force" => PlanSource::BruteForce,
                    _ => return Err(err("unknown source")),
                })
            }
            "projection" => {
                let (id, lit) = rest.split_once(' ').ok_or_else(|| err(line))?;
                let id: usize = id.parse().map_err(|_| err("bad projection id"))?;
                if survivors.get(projections.len()) != Some(&id) {
                    return Err(err("projections must follow survivor order"));
                }
                projections
                    .push(Vector::parse_literal(field, lit).map_err(|e| err(&e.to_string()))?);
            }
            "reconstruction" => {
                reconstruction =
                    Some(Matrix::parse_literal(field, rest).map_err(|e| err(&e.to_string()))?)
            }
            _ => return Err(err(line)),
        }
    }
    if projections.len() != survivors.len() {
        return Err(err("one projection per survivor required"));
    }
    Ok(RepairPlan {
        failed: failed.ok_or_else(|| err("missing failed"))?,
        survivors,
        projections,
        reconstruction: reconstruction.ok_or_else(|| err("missing reconstruction"))?,
        source: source.ok_or_else(|| err("missing source"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, Message};
    use crate::construct::{biorthogonal_code, fixture_42_gf5, orthogonal_code};

    #[test]
    fn reference_projection_vectors() {
        let one = |code: &MsrCode| {
            let f = code.field().clone();
            (
                Vector::new(&f, vec![1, 0, 0]).unwrap(),
                Vector::new(&f, vec![1, 1, 1]).unwrap(),
            )
        };
        let c19 = orthogonal_code();
        let (e1, ones) = one(&c19);
        let sys = plan_repair(&c19, 1, None).unwrap();
        assert!(sys.projections.iter().all(|p| p == &e1));
        let par = plan_repair(&c19, 4, None).unwrap();
        assert!(par.projections.iter().all(|p| p == &ones));
        let c21 = biorthogonal_code();
        let sys = plan_repair(&c21, 1, None).unwrap();
        assert!(sys.projections.iter().all(|p| p == &ones));
        let par = plan_repair(&c21, 4, None).unwrap();
        assert!(par.projections.iter().all(|p| p == &e1));
    }

    #[test]
    fn zero_shares_repair_to_zero() {
        let code = orthogonal_code();
        let shares = encode(&code, &Message::zeros(&code)).unwrap();
        let plan = plan_repair(&code, 2, None).unwrap();
        let (out, bw) = execute_repair(
            &code,
            &plan,
            &shares[..1]
                .iter()
                .chain(&shares[2..])
                .cloned()
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(out.symbols.is_zero());
        assert_eq!(
            bw,
            BandwidthReport {
                links: 5,
                symbols: 5,
                naive: 9
            }
        );
        assert_eq!(bw.savings_factor(), Ratio::new(9, 5));
    }

    #[test]
    fn plan_text_round_trip() {
        let code = fixture_42_gf5();
        for node in 1..=4 {
            let plan = plan_repair(&code, node, None).unwrap();
            let back = parse_plan(code.field(), &write_plan(&plan)).unwrap();
            assert_eq!(back, plan);
        }
        assert!(parse_plan(code.field(), "emsr-plan v2").is_err());
    }

    #[test]
    fn survivor_validation() {
        let code = fixture_42_gf5();
        assert!(matches!(
            plan_repair(&code, 1, Some(&[2, 3])),
            Err(RepairError::Survivors(_))
        ));
        assert!(matches!(
            plan_repair(&code, 1, Some(&[1, 2, 3])),
            Err(RepairError::Survivors(_))
        ));
        assert!(plan_repair(&code, 9, None).is_err());
    }
}
