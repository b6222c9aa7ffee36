//! Configuration-driven experiment runner: JSON config in, reproducible
//! JSON/CSV/SVG artifacts out.

mod replay;
mod run;
mod svg;

pub use replay::replay;
pub use run::{execute, run_config, RunOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    DirectionalQuery, DivergenceClass, DivergenceFamily, DivergenceThresholds, ProcessSpec,
    SolverMode, SuperadditiveProcessSpec, REPLICA_FLOOR,
};
use crate::pointproc::{MarkedRealization, Window};
use crate::solvers::{AnimalQuery, PathQuery};

/// Exit codes for the binary.
pub mod exit_code {
    /// Success, all structural assertions held.
    pub const OK: i32 = 0;
    /// A structural assertion failed (verify suite or replay mismatch).
    pub const STRUCTURAL: i32 = 1;
    /// Config/schema/input error.
    pub const CONFIG: i32 = 2;
    /// Solver node budget exhausted in a mode requiring optimality proofs.
    pub const BUDGET: i32 = 3;
}

/// Top-level experiment configuration.
///
/// Wire shape: `{"kind": "...", "seed": N, "spec": {...}, ...}` with
/// unknown keys rejected everywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default)]
    pub plots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_budget: Option<u64>,
    /// When true (default for `solve`), budget-capped results terminate
    /// the run with exit code 3. Divergence probes are exempt: their
    /// capped values are valid lower bounds by design.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub require_proof: Option<bool>,
    pub spec: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub process: ProcessSpec,
    pub window: Window,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolveJob {
    Path { query: PathQuery },
    AnimalInf { query: AnimalQuery },
    Bracket { query: AnimalQuery },
    LatticeAnimal { n: usize, anchors: Vec<Vec<i64>> },
    LatticePath {
        steps: usize,
        anchor: Vec<i64>,
        self_avoiding: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<MarkedRealization>,
    pub job: SolveJob,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimateSpec {
    Lln {
        process: ProcessSpec,
        mode: SolverMode,
        ell_grid: Vec<f64>,
        replicas: usize,
    },
    Directional {
        process: ProcessSpec,
        query: DirectionalQuery,
        replicas: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifySuite {
    Sandwich {
        process: ProcessSpec,
        instances: usize,
    },
    TailBound {
        lambda: f64,
        dim: usize,
        alpha_grid: Vec<f64>,
        ell_max: f64,
        replicas: usize,
    },
    MaximalInequality {
        process: SuperadditiveProcessSpec,
        alpha_grid: Vec<f64>,
        n_max: usize,
        replicas: usize,
    },
    MomentProperty {
        process: ProcessSpec,
        window_half: f64,
        pairs: usize,
        replicas: usize,
        constant: f64,
        /// Negative controls: the suite passes when the check FAILS.
        #[serde(default)]
        expect_violation: bool,
    },
    Divergence {
        family: DivergenceFamily,
        window_grid: Vec<f64>,
        replicas: usize,
        #[serde(default)]
        thresholds: Option<DivergenceThresholds>,
        expect: DivergenceClass,
    },
    FewTsp {
        n_values: Vec<usize>,
        dims: Vec<usize>,
        side: f64,
        instances_per: usize,
    },
    DirectionalChecks {
        process: ProcessSpec,
        query: DirectionalQuery,
        replicas: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub suites: Vec<VerifySuite>,
}

/// Parsed and validated experiment.
#[derive(Debug, Clone)]
pub enum Experiment {
    Generate(GenerateSpec),
    Solve(SolveSpec),
    Estimate(EstimateSpec),
    Verify(VerifySpec),
}

impl ExperimentConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_slice(bytes)
            .map_err(|e| Error::config("$", format!("{e}")))?;
        Ok(cfg)
    }

    /// Parse the kind-specific payload and validate all parameters.
    pub fn experiment(&self) -> Result<Experiment> {
        let spec = self.spec.clone();
        let exp = match self.kind.as_str() {
            "generate" => Experiment::Generate(
                serde_json::from_value(spec)
                    .map_err(|e| Error::config("spec", format!("{e}")))?,
            ),
            "solve" => Experiment::Solve(
                serde_json::from_value(spec)
                    .map_err(|e| Error::config("spec", format!("{e}")))?,
            ),
            "estimate" => Experiment::Estimate(
                serde_json::from_value(spec)
                    .map_err(|e| Error::config("spec", format!("{e}")))?,
            ),
            "verify" => Experiment::Verify(
                serde_json::from_value(spec)
                    .map_err(|e| Error::config("spec", format!("{e}")))?,
            ),
            other => {
                return Err(Error::config(
                    "kind",
                    format!("unknown experiment kind {other:?}"),
                ))
            }
        };
        validate_experiment(&exp)?;
        Ok(exp)
    }
}

fn validate_experiment(exp: &Experiment) -> Result<()> {
    match exp {
        Experiment::Generate(g) => {
            g.process.validate()?;
            g.window.validate()?;
            if g.count == 0 {
                return Err(Error::config("spec.count", "need count >= 1"));
            }
        }
        Experiment::Solve(s) => {
            if s.realization.is_none() == s.realization_file.is_none() {
                return Err(Error::config(
                    "spec.realization",
                    "provide exactly one of realization / realization_file",
                ));
            }
        }
        Experiment::Estimate(e) => match e {
            EstimateSpec::Lln {
                process, replicas, ..
            } => {
                process.validate()?;
                floor(*replicas, "spec.replicas")?;
            }
            EstimateSpec::Directional {
                process,
                query,
                replicas,
            } => {
                process.validate()?;
                query.validate()?;
                floor(*replicas, "spec.replicas")?;
            }
        },
        Experiment::Verify(v) => {
            if v.suites.is_empty() {
                return Err(Error::config("spec.suites", "need at least one suite"));
            }
            for (i, s) in v.suites.iter().enumerate() {
                let path = format!("spec.suites[{i}]");
                match s {
                    VerifySuite::Sandwich { process, instances } => {
                        process.validate()?;
                        if *instances == 0 {
                            return Err(Error::config(path, "need instances >= 1"));
                        }
                    }
                    VerifySuite::TailBound { replicas, .. }
                    | VerifySuite::MaximalInequality { replicas, .. }
                    | VerifySuite::MomentProperty { replicas, .. }
                    | VerifySuite::DirectionalChecks { replicas, .. } => {
                        floor(*replicas, &path)?;
                    }
                    VerifySuite::Divergence {
                        family: _,
                        window_grid,
                        replicas,
                        ..
                    } => {
                        floor(*replicas, &path)?;
                        if window_grid.len() < 2 {
                            return Err(Error::config(path, "need >= 2 windows"));
                        }
                    }
                    VerifySuite::FewTsp {
                        n_values,
                        dims,
                        side,
                        instances_per,
                    } => {
                        if n_values.is_empty() || dims.is_empty() || *instances_per == 0 {
                            return Err(Error::config(path, "empty grids"));
                        }
                        if !(*side > 0.0) {
                            return Err(Error::config(path, "side must be positive"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn floor(replicas: usize, path: &str) -> Result<()> {
    if replicas < REPLICA_FLOOR {
        return Err(Error::config(
            path,
            format!("CI-reporting runs need at least {REPLICA_FLOOR} replicas, got {replicas}"),
        ));
    }
    Ok(())
}
