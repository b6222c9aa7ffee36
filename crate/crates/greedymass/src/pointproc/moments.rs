use serde::{Deserialize, Serialize};

use super::MarkedRealization;
use crate::error::{Error, Result};

/// Axis-aligned box region for moment estimation, `min ≤ z < max`
/// coordinatewise (half-open so disjoint tilings stay disjoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoxRegion {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::invalid("box region dims mismatch"));
        }
        if min.iter().zip(&max).any(|(a, b)| a >= b) {
            return Err(Error::invalid("box region needs min < max"));
        }
        Ok(BoxRegion { min, max })
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(zi, (lo, hi))| *zi >= *lo && *zi < *hi)
    }

    pub fn count(&self, r: &MarkedRealization) -> usize {
        r.atoms.iter().filter(|a| self.contains(&a.loc)).count()
    }
}

/// Monte Carlo estimate of the k-th factorial moment measure of the point
/// process over the product of the boxes, `k ∈ {1, 2}`.
///
/// For `k = 2` this counts ordered pairs of DISTINCT atoms with the first
/// in `boxes[0]` and the second in `boxes[1]`, averaged over the batch.
pub fn estimate_factorial_moment(
    batch: &[MarkedRealization],
    boxes: &[BoxRegion],
    k: usize,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("factorial moment needs a nonempty batch"));
    }
    match k {
        1 => {
            if boxes.is_empty() {
                return Err(Error::invalid("k = 1 needs one box"));
            }
            let total: usize = batch.iter().map(|r| boxes[0].count(r)).sum();
            Ok(total as f64 / batch.len() as f64)
        }
        2 => {
            if boxes.len() < 2 {
                return Err(Error::invalid("k = 2 needs two boxes"));
            }
            let mut total = 0u64;
            for r in batch {
                total += ordered_distinct_pairs(r, &boxes[0], &boxes[1]);
            }
            Ok(total as f64 / batch.len() as f64)
        }
        _ => Err(Error::Unsupported(format!(
            "factorial moments implemented for k in {{1,2}}, got {k}"
        ))),
    }
}

/// Ordered pairs of distinct atoms with the first in `b1`, second in `b2`.
pub fn ordered_distinct_pairs(r: &MarkedRealization, b1: &BoxRegion, b2: &BoxRegion) -> u64 {
    let n1 = b1.count(r) as u64;
    let n2 = b2.count(r) as u64;
    let both = r
        .atoms
        .iter()
        .filter(|a| b1.contains(&a.loc) && b2.contains(&a.loc))
        .count() as u64;
    // n1·n2 ordered pairs minus the diagonal (atoms in both boxes)
    n1 * n2 - both
}
