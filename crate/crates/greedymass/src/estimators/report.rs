use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 95% normal-approximation confidence convention.
pub const CI_Z: f64 = 1.96;
/// Minimal replica count for any CI-slacked diagnostic.
pub const REPLICA_FLOOR: usize = 50;

/// One grid point of a Monte Carlo report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// Grid parameter (ℓ, β, α, n, ... depending on the pipeline).
    pub parameter: f64,
    /// Series label when a report carries several curves.
    pub series: String,
    /// Secondary scale parameter (e.g. ℓ for directional β-grids).
    pub scale: f64,
    pub mean: f64,
    pub ci_half_width: f64,
    pub replicas: usize,
}

/// Seed lineage: every stream used by a pipeline is derived from
/// `(master, stage, grid index, replica index)` via the documented
/// splitmix64 chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master: u64,
    pub stage: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub grid: Vec<GridPoint>,
    pub seeds: SeedLineage,
    /// Count of solver results returned without an optimality proof
    /// (node budget exhausted). Such values are lower bounds.
    pub solver_flags: u64,
    /// Largest per-length mean over the grid (the running lower estimate
    /// of the time constant).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fekete_sup: Option<f64>,
}

/// Sample mean and CI half-width (`CI_Z`·std/√n); needs ≥ 2 samples.
pub fn mean_ci(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("mean_ci needs at least 2 replicas"));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, CI_Z * (var / n as f64).sqrt()))
}

/// One line of a pass/fail diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl CheckLine {
    /// `lhs ≤ rhs + slack`.
    pub fn le(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        CheckLine {
            label: label.into(),
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs + slack,
        }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs - self.slack
    }
}

/// Aggregated diagnostic: passes iff every line passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub pass: bool,
    pub worst_margin: f64,
    pub lines: Vec<CheckLine>,
    pub solver_flags: u64,
}

impl Diagnostic {
    pub fn from_lines(name: impl Into<String>, lines: Vec<CheckLine>, solver_flags: u64) -> Self {
        let pass = lines.iter().all(|l| l.pass);
        let worst = lines
            .iter()
            .map(CheckLine::margin)
            .fold(f64::NEG_INFINITY, f64::max);
        Diagnostic {
            name: name.into(),
            pass,
            worst_margin: if worst.is_finite() { worst } else { 0.0 },
            lines,
            solver_flags,
        }
    }
}
