use serde::{Deserialize, Serialize};

use super::report::{CheckLine, Diagnostic};
use crate::error::{Error, Result};
use crate::pointproc::{ordered_distinct_pairs, BoxRegion, MarkedRealization};

/// Second-order moment property check: the estimated 2nd factorial moment
/// over each box pair must not exceed `C²` times the product of the
/// estimated means, within 3σ (delta method over the replica batch).
pub fn moment_property_check(
    batch: &[MarkedRealization],
    box_pairs: &[(BoxRegion, BoxRegion)],
    c: f64,
) -> Result<Diagnostic> {
    if batch.len() < 2 {
        return Err(Error::invalid("moment check needs a batch of >= 2 realizations"));
    }
    if box_pairs.is_empty() {
        return Err(Error::invalid("moment check needs at least one box pair"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("moment constant C must be positive"));
    }
    let r = batch.len() as f64;
    let mut lines = Vec::new();
    for (pi, (b1, b2)) in box_pairs.iter().enumerate() {
        // per-replica statistics (f, n1, n2)
        let mut fs = Vec::with_capacity(batch.len());
        let mut n1s = Vec::with_capacity(batch.len());
        let mut n2s = Vec::with_capacity(batch.len());
        for real in batch {
            fs.push(ordered_distinct_pairs(real, b1, b2) as f64);
            n1s.push(b1.count(real) as f64);
            n2s.push(b2.count(real) as f64);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / r;
        let (mf, m1, m2) = (mean(&fs), mean(&n1s), mean(&n2s));
        // D = F̄ − C²·N̄1·N̄2, σ via the delta method with the sample
        // covariance of (f, n1, n2)
        let d = mf - c * c * m1 * m2;
        let grad = [1.0, -c * c * m2, -c * c * m1];
        let cols = [&fs, &n1s, &n2s];
        let means = [mf, m1, m2];
        let mut var_d = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut cov = 0.0;
                for k in 0..batch.len() {
                    cov += (cols[i][k] - means[i]) * (cols[j][k] - means[j]);
                }
                cov /= r - 1.0;
                var_d += grad[i] * grad[j] * cov;
            }
        }
        let sigma_d = (var_d / r).sqrt();
        lines.push(CheckLine::le(
            format!("pair{pi}"),
            d,
            0.0,
            3.0 * sigma_d + 1e-9,
        ));
    }
    Ok(Diagnostic::from_lines("moment_property", lines, 0))
}

/// Convenience: disjoint and coincident unit box pairs inside a square
/// window of the given half-width.
pub fn standard_box_pairs(half: f64, count: usize) -> Vec<(BoxRegion, BoxRegion)> {
    let mut pairs = Vec::new();
    let mut k = 0usize;
    while pairs.len() < count {
        let off = -half + 0.25 + (k as f64 * 0.7) % (2.0 * half - 1.5);
        let b1 = BoxRegion::new(vec![off, -half + 0.25], vec![off + 1.0, -half + 1.25]).unwrap();
        let b2 = if k % 3 == 2 {
            b1.clone() // same box: diagonal-dropping case
        } else {
            BoxRegion::new(vec![off, half - 1.25], vec![off + 1.0, half - 0.25]).unwrap()
        };
        pairs.push((b1, b2));
        k += 1;
    }
    pairs
}

/// Serializable summary of a moment-property run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub diagnostic: Diagnostic,
    pub constant: f64,
    pub pairs: usize,
}
