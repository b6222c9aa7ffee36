use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::process::ProcessSpec;
use super::report::{mean_ci, EstimateReport, GridPoint, SeedLineage};
use crate::error::{Error, Result};
use crate::pointproc::Window;
use crate::rng::stage;
use crate::solvers::{
    lattice_max_animal, lattice_max_path, max_mass_animal_inf, max_mass_path, Anchors,
    AnimalQuery, NormParam, PathMode, PathQuery, QValue, Restriction,
};

/// Which optimizer drives the per-length values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Path,
    AnimalInf,
    LatticeAnimal,
    LatticePathSa,
    LatticePathFree,
}

impl SolverMode {
    pub fn is_lattice(&self) -> bool {
        matches!(
            self,
            SolverMode::LatticeAnimal | SolverMode::LatticePathSa | SolverMode::LatticePathFree
        )
    }
}

/// Monte Carlo estimate of `value(ℓ)/ℓ` per grid point, from independent
/// replicas anchored at the origin, with auto-sized windows.
pub fn estimate_lln_curve(
    process: &ProcessSpec,
    mode: SolverMode,
    ell_grid: &[f64],
    replicas: usize,
    seed: u64,
    node_budget: Option<u64>,
) -> Result<EstimateReport> {
    process.validate()?;
    if ell_grid.is_empty() || ell_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ell grid must be nonempty and increasing"));
    }
    if ell_grid[0] <= 0.0 {
        return Err(Error::invalid("ell grid must be positive"));
    }
    if replicas < 2 {
        return Err(Error::invalid("need at least 2 replicas"));
    }
    if mode.is_lattice() != process.is_lattice() {
        return Err(Error::invalid(
            "lattice solver modes need lattice processes and vice versa",
        ));
    }
    if mode.is_lattice() {
        for &l in ell_grid {
            if l.fract() != 0.0 {
                return Err(Error::invalid("lattice grids need integer lengths"));
            }
        }
    }

    let jobs: Vec<(usize, usize)> = (0..ell_grid.len())
        .flat_map(|gi| (0..replicas).map(move |ri| (gi, ri)))
        .collect();
    let outcomes: Vec<Result<(f64, bool)>> = jobs
        .par_iter()
        .map(|&(gi, ri)| {
            let ell = ell_grid[gi];
            let rep_seed = seed;
            let tags = [stage::LLN, gi as u64, ri as u64];
            run_one(process, mode, ell, rep_seed, &tags, node_budget)
        })
        .collect();

    let mut grid = Vec::new();
    let mut flags = 0u64;
    for (gi, &ell) in ell_grid.iter().enumerate() {
        let mut values = Vec::with_capacity(replicas);
        for ri in 0..replicas {
            let (v, capped) = match &outcomes[gi * replicas + ri] {
                Ok(pair) => *pair,
                Err(e) => return Err(Error::invalid(format!("replica failed: {e}"))),
            };
            if capped {
                flags += 1;
            }
            values.push(v / ell);
        }
        let (mean, ci) = mean_ci(&values)?;
        grid.push(GridPoint {
            parameter: ell,
            series: "per_length".into(),
            scale: ell,
            mean,
            ci_half_width: ci,
            replicas,
        });
    }
    let fekete_sup = grid
        .iter()
        .map(|g| g.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EstimateReport {
        grid,
        seeds: SeedLineage {
            master: seed,
            stage: stage::LLN,
        },
        solver_flags: flags,
        fekete_sup: Some(fekete_sup),
    })
}

fn run_one(
    process: &ProcessSpec,
    mode: SolverMode,
    ell: f64,
    seed: u64,
    tags: &[u64],
    node_budget: Option<u64>,
) -> Result<(f64, bool)> {
    use crate::rng::stream_rng;
    use rand::Rng;
    let mut rng = stream_rng(seed, tags);
    let sample_seed: u64 = rng.gen();
    let dim = 2usize;
    let half = ell + 1.0;
    let window = Window::centered_box(vec![half; dim]);
    let r = process.sample(&window, sample_seed)?;
    let result = match mode {
        SolverMode::Path => max_mass_path(
            &r,
            &PathQuery {
                mode: PathMode::FromOrigin { ell },
                restriction: Restriction::None,
                norm: NormParam::l2(),
            },
            node_budget,
        )?,
        SolverMode::AnimalInf => max_mass_animal_inf(
            &r,
            &AnimalQuery {
                anchors: Anchors::One {
                    x: vec![0.0; dim],
                },
                ell,
                q: QValue::Inf,
                restriction: Restriction::None,
                norm: NormParam::l2(),
            },
            node_budget,
        )?,
        SolverMode::LatticeAnimal => {
            lattice_max_animal(&r, ell as usize, &[vec![0; dim]], node_budget)?
        }
        SolverMode::LatticePathSa => {
            lattice_max_path(&r, ell as usize, &vec![0; dim], true, node_budget)?
        }
        SolverMode::LatticePathFree => {
            lattice_max_path(&r, ell as usize, &vec![0; dim], false, node_budget)?
        }
    };
    Ok((result.value, !result.proven_optimal))
}
