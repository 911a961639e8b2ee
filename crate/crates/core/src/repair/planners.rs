//! Structural planners.

use crate::construct::five_three_remap;
use crate::construct::{
    build_53_dual, composite, dual_structure, split_composite, CodeKind, MsrCode,
};
use crate::linalg::{dual_basis, eigen_small, Matrix, Vector};

use super::search::{bruteforce_plan_search, normalized_vectors};
use super::{download_matrix, finish_plan, resolve_survivors, PlanSource, RepairError, RepairPlan};

/// A coordinate system in which some nodes play information units and the
/// rest play parities, `enc[p][u]` as in [`MsrCode`].
struct View {
    enc: Vec<Vec<Matrix>>,
    unit_nodes: Vec<usize>,
    parity_nodes: Vec<usize>,
    /// Maps download coefficients over the message into view coordinates.
    to_view: Option<Matrix>,
}

impl View {
    fn original(code: &MsrCode) -> View {
        View {
            enc: code.enc_table().to_vec(),
            unit_nodes: (1..=code.k()).collect(),
            parity_nodes: (code.k() + 1..=code.n()).collect(),
            to_view: None,
        }
    }

    /// Parities become the units: `w' = Hᵗ w`, so coefficients map by `H⁻¹`.
    fn primed(code: &MsrCode) -> Result<View, RepairError> {
        let (k, n) = (code.k(), code.n());
        match code.kind() {
            CodeKind::FiveThree { .. } => {
                let dual = build_53_dual(code)?;
                let inverse = five_three_remap(code).inverse()?;
                Ok(View {
                    enc: dual.enc_prime,
                    unit_nodes: vec![4, 5, 3],
                    parity_nodes: vec![1, 2],
                    to_view: Some(inverse),
                })
            }
            _ if n == 2 * k => {
                let enc = match code.kind() {
                    CodeKind::Structured => dual_structure(code)?.enc_prime,
                    _ => split_composite(&code.parity_composite().inverse()?, code.alpha())?,
                };
                let inverse = composite(&enc);
                Ok(View {
                    enc,
                    unit_nodes: (k + 1..=n).collect(),
                    parity_nodes: (1..=k).collect(),
                    to_view: Some(inverse),
                })
            }
            other => Err(RepairError::UnsupportedKind(format!(
                "{} (no square remap)",
                other.label()
            ))),
        }
    }

    fn unit_of(&self, node: usize) -> Option<usize> {
        self.unit_nodes.iter().position(|&x| x == node)
    }

    /// Interference from every other unit must have rank at most 1 and the
    /// desired unit must reach rank α.
    fn check_alignment(
        &self,
        download: &Matrix,
        desired: usize,
        alpha: usize,
    ) -> Result<(), RepairError> {
        let d = match &self.to_view {
            Some(t) => t.mul(download)?,
            None => download.clone(),
        };
        for u in 0..self.unit_nodes.len() {
            let rank = d.submatrix(u * alpha, 0, alpha, d.cols())?.rank();
            if u == desired {
                if rank != alpha {
                    return Err(RepairError::DesiredRank {
                        rank,
                        needed: alpha,
                    });
                }
            } else if rank > 1 {
                return Err(RepairError::Alignment { unit: u + 1, rank });
            }
        }
        Ok(())
    }
}

fn all_others(code: &MsrCode, failed: usize, survivors: &[usize]) -> Result<(), RepairError> {
    let mut sorted = survivors.to_vec();
    sorted.sort_unstable();
    let expected: Vec<usize> = (1..=code.n()).filter(|&x| x != failed).collect();
    if sorted != expected {
        return Err(RepairError::Survivors(format!(
            "this code repairs from all other nodes {expected:?}"
        )));
    }
    Ok(())
}

fn cropped(v: &Vector, len: usize) -> Vector {
    Vector::new(v.field(), v.as_slice()[..len].to_vec()).expect("valid entries")
}

/// Uniform projection, or the cropped parent projection with brute-force
/// fallback for punctured codes.
fn uniform_plan(
    code: &MsrCode,
    failed: usize,
    survivors: Vec<usize>,
    projection: Vector,
    view: Option<(View, usize)>,
) -> Result<RepairPlan, RepairError> {
    let projections = vec![projection.normalized(); survivors.len()];
    match code.kind() {
        CodeKind::Punctured(_) if projection.is_zero() => {
            bruteforce_plan_search(code, failed, &survivors)
        }
        CodeKind::Punctured(_) => {
            match finish_plan(
                code,
                failed,
                survivors.clone(),
                projections,
                PlanSource::CroppedParent,
            ) {
                Ok(plan) => Ok(plan),
                Err(RepairError::Inexact(_)) => bruteforce_plan_search(code, failed, &survivors),
                Err(e) => Err(e),
            }
        }
        _ => {
            if let Some((view, desired)) = view {
                let d = download_matrix(code, &survivors, &projections)?;
                view.check_alignment(&d, desired, code.alpha())?;
            }
            finish_plan(code, failed, survivors, projections, PlanSource::Structural)
        }
    }
}

/// Repair of systematic node `failed`: every helper projects onto `v'_j`.
pub fn plan_systematic(
    code: &MsrCode,
    failed: usize,
    survivors: Option<&[usize]>,
) -> Result<RepairPlan, RepairError> {
    if !code.is_systematic(failed) {
        return Err(RepairError::WrongNodeType {
            node: failed,
            expected: "systematic",
        });
    }
    let survivors = resolve_survivors(code, failed, survivors)?;
    let j = failed - 1;
    match code.kind() {
        CodeKind::Structured | CodeKind::Punctured(_) => {
            let seed = code
                .seed()
                .ok_or_else(|| RepairError::UnsupportedKind("seedless structured".into()))?;
            let v_prime = dual_basis(&seed.v)?;
            let p = cropped(&v_prime.column(j), code.alpha());
            uniform_plan(code, failed, survivors, p, Some((View::original(code), j)))
        }
        CodeKind::Fixture { .. } if code.k() == 2 && code.n() == 4 => {
            all_others(code, failed, &survivors)?;
            two_unit_plan(code, &View::original(code), failed, &survivors)
        }
        CodeKind::Fixture { .. } => bruteforce_plan_search(code, failed, &survivors),
        CodeKind::FiveThree { .. } => plan_53(code, failed, Some(&survivors)),
        CodeKind::Replication => plan_replication(code, failed, Some(&survivors)),
    }
}

/// Repair of parity node `failed`: every helper projects onto `u_i`.
pub fn plan_parity(
    code: &MsrCode,
    failed: usize,
    survivors: Option<&[usize]>,
) -> Result<RepairPlan, RepairError> {
    if code.is_systematic(failed) || failed == 0 || failed > code.n() {
        return Err(RepairError::WrongNodeType {
            node: failed,
            expected: "parity",
        });
    }
    let survivors = resolve_survivors(code, failed, survivors)?;
    let i = failed - code.k() - 1;
    match code.kind() {
        CodeKind::Structured | CodeKind::Punctured(_) => {
            let seed = code
                .seed()
                .ok_or_else(|| RepairError::UnsupportedKind("seedless structured".into()))?;
            let p = cropped(&seed.u.column(i), code.alpha());
            let view = match code.kind() {
                CodeKind::Structured => Some((View::primed(code)?, i)),
                _ => None,
            };
            uniform_plan(code, failed, survivors, p, view)
        }
        CodeKind::Fixture { .. } if code.k() == 2 && code.n() == 4 => {
            all_others(code, failed, &survivors)?;
            two_unit_plan(code, &View::primed(code)?, failed, &survivors)
        }
        CodeKind::Fixture { .. } => bruteforce_plan_search(code, failed, &survivors),
        CodeKind::FiveThree { .. } => plan_53(code, failed, Some(&survivors)),
        CodeKind::Replication => plan_replication(code, failed, Some(&survivors)),
    }
}

fn assemble(
    code: &MsrCode,
    failed: usize,
    survivors: &[usize],
    by_node: &[(usize, Vector)],
) -> Result<RepairPlan, RepairError> {
    let projections = survivors
        .iter()
        .map(|s| {
            by_node
                .iter()
                .find(|(n, _)| n == s)
                .map(|(_, p)| p.clone())
                .ok_or_else(|| RepairError::Survivors(format!("no projection for node {s}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    finish_plan(
        code,
        failed,
        survivors.to_vec(),
        projections,
        PlanSource::Structural,
    )
}

/// k = 2: the other unit's helper sends `v`, parity `p` sends `E[p][o]⁻¹ v`,
/// which aligns all interference along `v`. Scans normalized `v` until the
/// desired columns `E[p][t] E[p][o]⁻¹ v` have full rank.
fn two_unit_plan(
    code: &MsrCode,
    view: &View,
    failed: usize,
    survivors: &[usize],
) -> Result<RepairPlan, RepairError> {
    let t = view
        .unit_of(failed)
        .expect("failed node is a unit in this view");
    let o = 1 - t;
    let inv: Vec<Matrix> = view
        .enc
        .iter()
        .map(|row| row[o].inverse())
        .collect::<Result<_, _>>()?;
    let mut last = RepairError::DesiredRank {
        rank: 0,
        needed: code.alpha(),
    };
    for v in normalized_vectors(code.field(), code.alpha()) {
        let mut by_node = vec![(view.unit_nodes[o], v.clone())];
        let mut desired = Vec::new();
        for (p, row) in view.enc.iter().enumerate() {
            let q = inv[p].mul_vec(&v)?;
            desired.push(row[t].mul_vec(&q)?);
            by_node.push((view.parity_nodes[p], q));
        }
        if Matrix::from_columns(code.field(), &desired)?.rank() < code.alpha() {
            continue;
        }
        let plan = assemble(code, failed, survivors, &by_node);
        match plan {
            Ok(plan) => {
                let d = download_matrix(code, &plan.survivors, &plan.projections)?;
                view.check_alignment(&d, t, code.alpha())?;
                return Ok(plan);
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// (5,3,4) repair. For failed unit `t` with the other units `x`, `y` (cyclic),
/// `v` is an eigenvector of `E1[x] E1[y]⁻¹ E0[y] E0[x]⁻¹`; unit `x` sends `v`,
/// unit `y` sends `E0[y] E0[x]⁻¹ v` and parity `p` sends `E_p[x]⁻¹ v`.
/// Parity failures use the same rule in the remapped coordinates.
pub fn plan_53(
    code: &MsrCode,
    failed: usize,
    survivors: Option<&[usize]>,
) -> Result<RepairPlan, RepairError> {
    if !matches!(code.kind(), CodeKind::FiveThree { .. }) {
        return Err(RepairError::UnsupportedKind(code.kind().label().into()));
    }
    let survivors = resolve_survivors(code, failed, survivors)?;
    all_others(code, failed, &survivors)?;
    let view = if code.is_systematic(failed) {
        View::original(code)
    } else {
        View::primed(code)?
    };
    let t = view
        .unit_of(failed)
        .expect("failed node is a unit in this view");
    let (x, y) = ((t + 1) % 3, (t + 2) % 3);
    let e0 = &view.enc[0];
    let e1 = &view.enc[1];
    let e0x_inv = e0[x].inverse()?;
    let e1x_inv = e1[x].inverse()?;
    let align = e1[x].mul(&e1[y].inverse()?)?.mul(&e0[y])?.mul(&e0x_inv)?;
    let pairs = eigen_small(&align)?;
    if pairs.is_empty() {
        return Err(RepairError::NoEigenvector(code.field().descriptor()));
    }
    let mut last = None;
    for (_, v) in pairs {
        let q0 = e0x_inv.mul_vec(&v)?;
        let q1 = e1x_inv.mul_vec(&v)?;
        let desired =
            Matrix::from_columns(code.field(), &[e0[t].mul_vec(&q0)?, e1[t].mul_vec(&q1)?])?;
        let rank = desired.rank();
        if rank < 2 {
            last = Some(RepairError::DesiredRank { rank, needed: 2 });
            continue;
        }
        let by_node = vec![
            (view.unit_nodes[x], v.clone()),
            (view.unit_nodes[y], e0[y].mul(&e0x_inv)?.mul_vec(&v)?),
            (view.parity_nodes[0], q0),
            (view.parity_nodes[1], q1),
        ];
        match assemble(code, failed, &survivors, &by_node) {
            Ok(plan) => {
                let d = download_matrix(code, &plan.survivors, &plan.projections)?;
                view.check_alignment(&d, t, code.alpha())?;
                return Ok(plan);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one eigenpair was tried"))
}

/// `k = 1`: helper `s` sends coordinate `s` of its copy.
pub(super) fn plan_replication(
    code: &MsrCode,
    failed: usize,
    survivors: Option<&[usize]>,
) -> Result<RepairPlan, RepairError> {
    let survivors = resolve_survivors(code, failed, survivors)?;
    let projections = (0..survivors.len())
        .map(|s| Vector::unit(code.field(), code.alpha(), s))
        .collect();
    finish_plan(code, failed, survivors, projections, PlanSource::Structural)
}
