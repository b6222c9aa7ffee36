//! Monte Carlo estimation of the scaling limits and empirical verification
//! of the model's inequalities, bounds and identities.

mod checks;
mod directional;
mod divergence;
mod fekete;
mod lln;
mod moments;
mod process;
mod report;
mod sandwich;
mod tail;
mod tsp;

pub use checks::{check_concavity, check_monotonicity, check_symmetry};
pub use directional::{estimate_directional_limit, DirectionalQuery};
pub use divergence::{
    divergence_probe, DivergenceClass, DivergenceFamily, DivergenceReport, DivergenceThresholds,
};
pub use fekete::{
    fekete_time_constant, maximal_inequality_check, FeketeReport, FeketeSample,
    MaximalInequalityReport, SuperadditiveProcessSpec, SuperadditiveReplica,
};
pub use lln::{estimate_lln_curve, SolverMode};
pub use moments::{moment_property_check, standard_box_pairs, MomentReport};
pub use process::{lattice_box_in, ProcessSpec};
pub use report::{
    mean_ci, CheckLine, Diagnostic, EstimateReport, GridPoint, SeedLineage, CI_Z, REPLICA_FLOOR,
};
pub use sandwich::{sandwich_and_identity_suite, SandwichReport};
pub use tail::{tail_bound_check, TailBoundReport};
pub use tsp::{few_tsp_path, C5_SWEEP};
