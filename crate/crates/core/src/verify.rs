//! Certification of a code: MDS property, exact repair of every node,
//! construction constraints, dual identities and repair bandwidth.

use std::time::Instant;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{decoding_matrix, encode, CodecError, Message};
use crate::construct::{
    build_53_dual, code_hash, composite, constraint_violations, dual_coefficients_hold,
    dual_structure, five_three_remap, CodeKind, MsrCode,
};
use crate::linalg::{subsets, Matrix};
use crate::repair::{execute_repair, plan_is_exact, plan_repair, RepairPlan};

pub const REPORT_SCHEMA: &str = "emsr-verification/1";
/// Largest number of data-collector subsets swept.
pub const MDS_SUBSET_LIMIT: u128 = 100_000;
pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("C({n},{k}) = {count} subsets exceeds the limit {MDS_SUBSET_LIMIT}")]
    TooManySubsets { n: usize, k: usize, count: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn from_ok(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MdsCheck {
    pub status: Status,
    pub subsets_checked: usize,
    /// 1-based node sets whose data-collector matrix is singular.
    pub failing: Vec<Vec<usize>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeRepairResult {
    pub node: usize,
    pub status: Status,
    pub source: Option<String>,
    pub survivors: Vec<usize>,
    pub symbolic_exact: bool,
    pub samples_passed: usize,
    pub samples: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairCheck {
    pub status: Status,
    pub nodes: Vec<NodeRepairResult>,
}

impl RepairCheck {
    /// Node ids whose repair failed.
    pub fn failing_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.status.is_failure())
            .map(|n| n.node)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstructionCheck {
    pub status: Status,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualCheck {
    pub status: Status,
    pub witnesses: Vec<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BandwidthCheck {
    pub status: Status,
    pub alpha: usize,
    pub d: usize,
    pub stripe_size: usize,
    /// Symbols downloaded by each node's plan, `(node, symbols)`.
    pub downloads: Vec<(usize, usize)>,
    pub savings_factor: String,
    pub expected_savings_factor: String,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub mds_ms: f64,
    pub repair_ms: f64,
    pub constraints_ms: f64,
    pub dual_ms: f64,
    pub bandwidth_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub code_hash: String,
    pub params: String,
    pub kind: String,
    pub mds: MdsCheck,
    pub repair: RepairCheck,
    pub constraints: ConstructionCheck,
    pub dual: DualCheck,
    pub bandwidth: BandwidthCheck,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl VerificationReport {
    /// Pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// SHA-256 of the report without timing; equal codes give equal hashes.
    pub fn deterministic_hash(&self) -> String {
        let mut copy = self.clone();
        copy.timing = None;
        let json = serde_json::to_string(&copy).expect("report serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Tests every `k`-subset of nodes for decodability.
pub fn verify_mds(code: &MsrCode) -> Result<MdsCheck, VerifyError> {
    let count = binomial(code.n(), code.k());
    if count > MDS_SUBSET_LIMIT {
        return Err(VerifyError::TooManySubsets {
            n: code.n(),
            k: code.k(),
            count,
        });
    }
    let mut failing = Vec::new();
    let sets = subsets(code.n(), code.k());
    for set in &sets {
        let nodes: Vec<usize> = set.iter().map(|&i| i + 1).collect();
        match decoding_matrix(code, &nodes) {
            Ok(_) => {}
            Err(CodecError::MdsViolation { nodes }) => failing.push(nodes),
            Err(_) => failing.push(nodes),
        }
    }
    Ok(MdsCheck {
        status: Status::from_ok(failing.is_empty()),
        subsets_checked: sets.len(),
        failing,
        note: None,
    })
}

/// Plans every node, checks the symbolic identity, then repairs `samples`
/// random messages end to end.
pub fn verify_exact_repair(code: &MsrCode, samples: usize, seed: u64) -> RepairCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let messages: Vec<Message> = (0..samples)
        .map(|_| Message::random(code, &mut rng))
        .collect();
    let nodes: Vec<NodeRepairResult> = (1..=code.n())
        .map(|node| repair_one(code, node, &messages))
        .collect();
    RepairCheck {
        status: Status::from_ok(nodes.iter().all(|n| n.status == Status::Pass)),
        nodes,
    }
}

fn repair_one(code: &MsrCode, node: usize, messages: &[Message]) -> NodeRepairResult {
    let mut result = NodeRepairResult {
        node,
        status: Status::Fail,
        source: None,
        survivors: Vec::new(),
        symbolic_exact: false,
        samples_passed: 0,
        samples: messages.len(),
        error: None,
    };
    let plan = match plan_repair(code, node, None) {
        Ok(p) => p,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    result.source = Some(plan.source.label().to_string());
    result.survivors = plan.survivors.clone();
    result.symbolic_exact = plan_is_exact(code, &plan);
    for msg in messages {
        let Ok(shares) = encode(code, msg) else {
            continue;
        };
        let helpers: Vec<_> = shares
            .iter()
            .filter(|s| plan.survivors.contains(&s.node))
            .cloned()
            .collect();
        if let Ok((rebuilt, bw)) = execute_repair(code, &plan, &helpers) {
            if rebuilt == shares[node - 1] && bw.symbols == code.d() {
                result.samples_passed += 1;
            }
        }
    }
    if !result.symbolic_exact {
        result.error = Some("reconstruction map does not reproduce the share".into());
    } else if result.samples_passed != messages.len() {
        result.error = Some(format!(
            "{} of {} sampled repairs differ",
            messages.len() - result.samples_passed,
            messages.len()
        ));
    } else {
        result.status = Status::Pass;
    }
    result
}

/// Construction constraints for the code's kind.
pub fn verify_construction(code: &MsrCode) -> ConstructionCheck {
    let violations: Vec<String> = constraint_violations(code)
        .iter()
        .map(ToString::to_string)
        .collect();
    ConstructionCheck {
        status: Status::from_ok(violations.is_empty()),
        violations,
    }
}

/// Composite times dual composite is the identity (both dual paths), plus
/// `U'ᵗ = κ M⁻¹ Vᵗ` for structured codes.
pub fn verify_dual(code: &MsrCode) -> DualCheck {
    let mut witnesses = Vec::new();
    match code.kind() {
        CodeKind::Structured => {
            match dual_structure(code) {
                Ok(dual) => {
                    let product = code.parity_composite().mul(&composite(&dual.enc_prime));
                    let id = Matrix::identity(code.field(), code.k() * code.alpha());
                    if product.ok() != Some(id) {
                        witnesses.push("G * G' differs from identity".to_string());
                    }
                }
                Err(e) => witnesses.push(e.to_string()),
            }
            match code.seed() {
                Some(seed) if dual_coefficients_hold(seed) => {}
                Some(_) => witnesses.push("U'^t differs from kappa * M^-1 * V^t".into()),
                None => witnesses.push("seed missing".into()),
            }
        }
        CodeKind::FiveThree { .. } => match build_53_dual(code) {
            Ok(dual) => {
                let mut table = dual.enc_prime.clone();
                let f = code.field();
                table.push(vec![
                    Matrix::zeros(f, 2, 2),
                    Matrix::zeros(f, 2, 2),
                    Matrix::identity(f, 2),
                ]);
                let product = five_three_remap(code).mul(&composite(&table));
                if product.ok() != Some(Matrix::identity(f, 6)) {
                    witnesses.push("remap composite times its dual differs from identity".into());
                }
            }
            Err(e) => witnesses.push(e.to_string()),
        },
        other => {
            return DualCheck {
                status: Status::Skipped,
                witnesses,
                note: Some(format!("no dual identities for {} codes", other.label())),
            }
        }
    }
    DualCheck {
        status: Status::from_ok(witnesses.is_empty()),
        witnesses,
        note: None,
    }
}

/// Every plan downloads `d` symbols and the savings factor is `k(d-k+1)/d`.
pub fn verify_bandwidth(code: &MsrCode, plans: &[(usize, Option<RepairPlan>)]) -> BandwidthCheck {
    let (k, d, a) = (code.k(), code.d(), code.alpha());
    let mut witnesses = Vec::new();
    let mut downloads = Vec::new();
    for (node, plan) in plans {
        match plan {
            Some(p) => {
                downloads.push((*node, p.survivors.len()));
                if p.survivors.len() != d || p.projections.len() != d {
                    witnesses.push(format!(
                        "node {node} downloads {} symbols",
                        p.survivors.len()
                    ));
                }
            }
            None => witnesses.push(format!("node {node} has no repair plan")),
        }
    }
    if a * k != code.params().stripe_size() {
        witnesses.push("alpha differs from M/k".into());
    }
    let measured = Ratio::new((k * a) as u64, d as u64);
    let expected = Ratio::new((k * (d - k + 1)) as u64, d as u64);
    if measured != expected {
        witnesses.push(format!("savings {measured} differs from {expected}"));
    }
    BandwidthCheck {
        status: Status::from_ok(witnesses.is_empty()),
        alpha: a,
        d,
        stripe_size: code.params().stripe_size(),
        downloads,
        savings_factor: measured.to_string(),
        expected_savings_factor: expected.to_string(),
        witnesses,
    }
}

/// Runs every check. A refused subset sweep counts as an MDS failure.
pub fn verify_all(code: &MsrCode, samples: usize, seed: u64) -> VerificationReport {
    let t = Instant::now();
    let mds = verify_mds(code).unwrap_or_else(|e| MdsCheck {
        status: Status::Fail,
        subsets_checked: 0,
        failing: vec![],
        note: Some(e.to_string()),
    });
    let mds_ms = ms(t);
    let t = Instant::now();
    let repair = verify_exact_repair(code, samples, seed);
    let repair_ms = ms(t);
    let t = Instant::now();
    let constraints = verify_construction(code);
    let constraints_ms = ms(t);
    let t = Instant::now();
    let dual = verify_dual(code);
    let dual_ms = ms(t);
    let t = Instant::now();
    let plans: Vec<(usize, Option<RepairPlan>)> = (1..=code.n())
        .map(|n| (n, plan_repair(code, n, None).ok()))
        .collect();
    let bandwidth = verify_bandwidth(code, &plans);
    let bandwidth_ms = ms(t);
    let passed = ![
        mds.status,
        repair.status,
        constraints.status,
        dual.status,
        bandwidth.status,
    ]
    .iter()
    .any(|s| s.is_failure());
    VerificationReport {
        schema: REPORT_SCHEMA,
        code_hash: code_hash(code),
        params: code.params().to_string(),
        kind: code.kind().label().to_string(),
        mds,
        repair,
        constraints,
        dual,
        bandwidth,
        passed,
        timing: Some(Timing {
            mds_ms,
            repair_ms,
            constraints_ms,
            dual_ms,
            bandwidth_ms,
        }),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
