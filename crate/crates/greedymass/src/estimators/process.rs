use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointproc::{
    sample_lattice_columnar, sample_lattice_iid, sample_poisson_marked, Atom, DppKernelSpec,
    LatticeBox, MarkDistribution, MarkedRealization, Window,
};

/// Point-process families the estimators can draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// Marked Poisson process with intensity `lambda·Leb ⊗ marks`.
    Poisson {
        lambda: f64,
        marks: MarkDistribution,
    },
    /// Poisson process where every atom is doubled at `+offset·e1`
    /// (clustered negative control for the moment property).
    PoissonCluster {
        lambda: f64,
        marks: MarkDistribution,
        offset: f64,
    },
    /// One atom per lattice site, i.i.d. marks.
    LatticeIid { marks: MarkDistribution },
    /// d = 2 columnar field: mark depends on the first coordinate only.
    LatticeColumnar { marks: MarkDistribution },
    /// A single atom of the given mass at the origin.
    SingleAtom { mass: f64 },
    /// Determinantal process on its own torus grid (the window argument is
    /// ignored; the torus box is used).
    DppGrid { spec: DppKernelSpec },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Poisson { lambda, marks } => {
                if !(*lambda > 0.0) {
                    return Err(Error::invalid("poisson lambda must be positive"));
                }
                marks.validate()
            }
            ProcessSpec::PoissonCluster {
                lambda,
                marks,
                offset,
            } => {
                if !(*lambda > 0.0) || !(*offset > 0.0) {
                    return Err(Error::invalid("cluster process needs lambda > 0, offset > 0"));
                }
                marks.validate()
            }
            ProcessSpec::LatticeIid { marks } | ProcessSpec::LatticeColumnar { marks } => {
                marks.validate()
            }
            ProcessSpec::SingleAtom { mass } => {
                if !(*mass > 0.0) {
                    return Err(Error::invalid("single atom mass must be positive"));
                }
                Ok(())
            }
            ProcessSpec::DppGrid { spec } => spec.clone().build().map(|_| ()),
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(
            self,
            ProcessSpec::LatticeIid { .. } | ProcessSpec::LatticeColumnar { .. }
        )
    }

    /// Sample a realization on (at least) the given window.
    pub fn sample(&self, window: &Window, seed: u64) -> Result<MarkedRealization> {
        match self {
            ProcessSpec::Poisson { lambda, marks } => {
                sample_poisson_marked(*lambda, marks, window, seed)
            }
            ProcessSpec::PoissonCluster {
                lambda,
                marks,
                offset,
            } => {
                let base = sample_poisson_marked(*lambda, marks, window, seed)?;
                let mut atoms = base.atoms.clone();
                for a in &base.atoms {
                    let mut loc = a.loc.clone();
                    loc[0] += offset;
                    if base.window.contains(&loc, 0.0) && !atoms.iter().any(|b| b.loc == loc) {
                        atoms.push(Atom {
                            loc,
                            mass: a.mass,
                        });
                    }
                }
                MarkedRealization::new(atoms, base.window, false)
            }
            ProcessSpec::LatticeIid { marks } => {
                sample_lattice_iid(marks, &lattice_box_in(window)?, seed)
            }
            ProcessSpec::LatticeColumnar { marks } => {
                sample_lattice_columnar(marks, &lattice_box_in(window)?, seed)
            }
            ProcessSpec::SingleAtom { mass } => {
                let origin = vec![0.0; window.dim()];
                let atoms = if window.contains(&origin, 0.0) {
                    vec![Atom {
                        loc: origin,
                        mass: *mass,
                    }]
                } else {
                    vec![]
                };
                MarkedRealization::new(atoms, window.clone(), false)
            }
            ProcessSpec::DppGrid { spec } => spec.clone().build()?.sample(seed),
        }
    }
}

/// Integer box spanned by a window (sites strictly inside).
pub fn lattice_box_in(window: &Window) -> Result<LatticeBox> {
    match window {
        Window::Box {
            center,
            half_widths,
        } => {
            let min: Vec<i64> = center
                .iter()
                .zip(half_widths)
                .map(|(c, h)| (c - h).ceil() as i64)
                .collect();
            let max: Vec<i64> = center
                .iter()
                .zip(half_widths)
                .map(|(c, h)| (c + h).floor() as i64)
                .collect();
            LatticeBox::new(min, max)
        }
        Window::Ball { .. } => Err(Error::Unsupported(
            "lattice sampling needs a box window".into(),
        )),
    }
}
