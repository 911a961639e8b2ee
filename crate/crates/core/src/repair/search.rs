//! Exhaustive search over projection tuples.

use crate::construct::MsrCode;
use crate::gf::Field;
use crate::linalg::{Matrix, Vector};

use super::{resolve_survivors, PlanSource, RepairError, RepairPlan};

/// Largest raw search space `q^(α·d)` accepted.
pub const SEARCH_LIMIT: u128 = 10_000_000;

/// Nonzero vectors of length `len` whose first nonzero entry is 1, in
/// lexicographic order.
pub fn normalized_vectors(field: &Field, len: usize) -> Vec<Vector> {
    let q = field.order();
    let mut out = Vec::new();
    for lead in (0..len).rev() {
        // entries before `lead` are 0, entry `lead` is 1, the rest are free
        let tail = len - lead - 1;
        let count = (q as u64).pow(tail as u32);
        for idx in 0..count {
            let mut v = vec![0u32; len];
            v[lead] = 1;
            let mut rest = idx;
            for pos in (lead + 1..len).rev() {
                v[pos] = (rest % q as u64) as u32;
                rest /= q as u64;
            }
            out.push(Vector::new(field, v).expect("field elements"));
        }
    }
    out
}

/// Tries projection tuples in lexicographic order (first survivor slowest)
/// and returns the first whose downloads determine the failed share.
pub fn bruteforce_plan_search(
    code: &MsrCode,
    failed: usize,
    survivors: &[usize],
) -> Result<RepairPlan, RepairError> {
    let survivors = resolve_survivors(code, failed, Some(survivors))?;
    let q = u128::from(code.field().order());
    let space = (code.alpha() * survivors.len()) as u32;
    let size = q.checked_pow(space).unwrap_or(u128::MAX);
    if size > SEARCH_LIMIT {
        return Err(RepairError::SearchTooLarge {
            space: size,
            limit: SEARCH_LIMIT,
        });
    }
    let candidates = normalized_vectors(code.field(), code.alpha());
    let columns: Vec<Vec<Matrix>> = survivors
        .iter()
        .map(|&s| {
            let gen = code.node_generator(s);
            candidates
                .iter()
                .map(|p| gen.mul(&p.as_column()).expect("shapes"))
                .collect()
        })
        .collect();
    let target = code.node_generator(failed);
    let rows = code.k() * code.alpha();
    let d = survivors.len();
    let mut idx = vec![0usize; d];
    loop {
        let mut data = vec![0u32; rows * d];
        for (s, &i) in idx.iter().enumerate() {
            for r in 0..rows {
                data[r * d + s] = columns[s][i].get(r, 0);
            }
        }
        let download = Matrix::from_vec(code.field(), rows, d, data)?;
        if let Some(x) = download.solve_system(&target)? {
            return Ok(RepairPlan {
                failed,
                survivors,
                projections: idx.iter().map(|&i| candidates[i].clone()).collect(),
                reconstruction: x.transpose(),
                source: PlanSource::BruteForce,
            });
        }
        let mut pos = d;
        loop {
            if pos == 0 {
                return Err(RepairError::SearchExhausted(failed));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < candidates.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}
