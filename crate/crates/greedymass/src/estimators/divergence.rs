use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{mean_ci, GridPoint};
use crate::error::{Error, Result};
use crate::pointproc::{MarkDistribution, Window};
use crate::rng::{stage, stream_rng};
use crate::solvers::{lattice_max_path, max_mass_path, NormParam, PathMode, PathQuery, Restriction};

/// Family probed for divergence of the per-length mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DivergenceFamily {
    /// d = 2 columnar lattice field; statistic = lattice path value / n.
    Columnar { marks: MarkDistribution },
    /// Marked Poisson process; statistic = P(ℓ)/ℓ from the origin.
    Poisson {
        lambda: f64,
        marks: MarkDistribution,
    },
}

/// Fixed classification thresholds: the statistic at the largest window is
/// compared against every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceThresholds {
    pub levels: Vec<f64>,
}

impl Default for DivergenceThresholds {
    fn default() -> Self {
        DivergenceThresholds {
            levels: vec![2.0, 4.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceClass {
    /// The statistic exceeds every threshold at the largest window.
    DivergenceConsistent,
    /// The statistic stays below the lowest threshold.
    Plateau,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub grid: Vec<GridPoint>,
    pub growth_ratio: f64,
    pub fitted_exponent: f64,
    pub classification: DivergenceClass,
    pub solver_flags: u64,
}

/// Growth probe: per-length optimum on growing windows, with a trend
/// classification against fixed thresholds. Budget-capped solver values
/// are valid lower bounds, so "divergence-consistent" conclusions stay
/// sound under capping; the flags are reported either way.
pub fn divergence_probe(
    family: &DivergenceFamily,
    window_grid: &[f64],
    replicas: usize,
    seed: u64,
    thresholds: &DivergenceThresholds,
    node_budget: Option<u64>,
) -> Result<DivergenceReport> {
    if window_grid.len() < 2 || window_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("window grid must be increasing with >= 2 entries"));
    }
    if replicas < 2 {
        return Err(Error::invalid("need at least 2 replicas"));
    }
    if thresholds.levels.is_empty() {
        return Err(Error::invalid("thresholds must be nonempty"));
    }
    match family {
        DivergenceFamily::Columnar { marks } => marks.validate()?,
        DivergenceFamily::Poisson { lambda, marks } => {
            if !(*lambda > 0.0) {
                return Err(Error::invalid("lambda must be positive"));
            }
            marks.validate()?;
        }
    }

    let jobs: Vec<(usize, usize)> = (0..window_grid.len())
        .flat_map(|wi| (0..replicas).map(move |ri| (wi, ri)))
        .collect();
    let outcomes: Vec<Result<(f64, bool)>> = jobs
        .par_iter()
        .map(|&(wi, ri)| {
            use rand::Rng;
            let mut rng = stream_rng(seed, &[stage::DIVERGENCE, wi as u64, ri as u64]);
            let sample_seed: u64 = rng.gen();
            let scale = window_grid[wi];
            match family {
                DivergenceFamily::Columnar { marks } => {
                    let n = scale.round() as usize;
                    let half = n as f64 + 1.0;
                    let window = Window::centered_box(vec![half, half]);
                    let r = crate::pointproc::sample_lattice_columnar(
                        marks,
                        &super::process::lattice_box_in(&window)?,
                        sample_seed,
                    )?;
                    let res = lattice_max_path(&r, n, &[0, 0], false, node_budget)?;
                    Ok((res.value / n as f64, !res.proven_optimal))
                }
                DivergenceFamily::Poisson { lambda, marks } => {
                    let window = Window::centered_box(vec![scale + 1.0, scale + 1.0]);
                    let r =
                        crate::pointproc::sample_poisson_marked(*lambda, marks, &window, sample_seed)?;
                    let res = max_mass_path(
                        &r,
                        &PathQuery {
                            mode: PathMode::FromOrigin { ell: scale },
                            restriction: Restriction::None,
                            norm: NormParam::l2(),
                        },
                        node_budget,
                    )?;
                    Ok((res.value / scale, !res.proven_optimal))
                }
            }
        })
        .collect();

    let mut grid = Vec::new();
    let mut flags = 0u64;
    for (wi, &scale) in window_grid.iter().enumerate() {
        let mut values = Vec::with_capacity(replicas);
        for ri in 0..replicas {
            let (v, capped) = match &outcomes[wi * replicas + ri] {
                Ok(pair) => *pair,
                Err(e) => return Err(Error::invalid(format!("replica failed: {e}"))),
            };
            if capped {
                flags += 1;
            }
            values.push(v);
        }
        let (mean, ci) = mean_ci(&values)?;
        grid.push(GridPoint {
            parameter: scale,
            series: "per_length".into(),
            scale,
            mean,
            ci_half_width: ci,
            replicas,
        });
    }

    let first = grid.first().unwrap().mean.max(1e-12);
    let last = grid.last().unwrap().mean;
    let growth_ratio = last / first;
    // least-squares slope of ln(mean) against ln(scale)
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .filter(|g| g.mean > 0.0)
        .map(|g| (g.parameter.ln(), g.mean.ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        0.0
    };

    let levels = &thresholds.levels;
    let classification = if levels.iter().all(|&s| last > s) {
        DivergenceClass::DivergenceConsistent
    } else if last <= levels[0] {
        DivergenceClass::Plateau
    } else {
        DivergenceClass::Indeterminate
    };

    Ok(DivergenceReport {
        grid,
        growth_ratio,
        fitted_exponent,
        classification,
        solver_flags: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_columnar_plateaus() {
        // constant marks: the statistic approaches c·(n+1)/n, never beyond
        let family = DivergenceFamily::Columnar {
            marks: MarkDistribution::Constant { c: 1.0 },
        };
        let rep = divergence_probe(
            &family,
            &[8.0, 16.0, 32.0],
            10,
            3,
            &DivergenceThresholds::default(),
            Some(200_000),
        )
        .unwrap();
        assert_eq!(rep.classification, DivergenceClass::Plateau);
        assert!(rep.grid.last().unwrap().mean <= 1.5);
    }

    #[test]
    fn validation() {
        let family = DivergenceFamily::Columnar {
            marks: MarkDistribution::Constant { c: 1.0 },
        };
        assert!(divergence_probe(
            &family,
            &[8.0],
            10,
            3,
            &DivergenceThresholds::default(),
            None
        )
        .is_err());
    }
}
