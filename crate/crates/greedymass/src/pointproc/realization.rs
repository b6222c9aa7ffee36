use serde::{Deserialize, Serialize};

use super::Window;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// One atom of a marked realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub loc: Point,
    pub mass: f64,
}

/// A finite sampled realization of a marked point process.
///
/// Wire format:
/// `{"window": …, "lattice": bool, "atoms": [[x1, …, xd, mass], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealizationWire", into = "RealizationWire")]
pub struct MarkedRealization {
    pub atoms: Vec<Atom>,
    pub window: Window,
    pub lattice: bool,
}

#[derive(Serialize, Deserialize)]
struct RealizationWire {
    window: Window,
    lattice: bool,
    atoms: Vec<Vec<f64>>,
}

impl TryFrom<RealizationWire> for MarkedRealization {
    type Error = Error;
    fn try_from(w: RealizationWire) -> Result<Self> {
        let d = w.window.dim();
        let mut atoms = Vec::with_capacity(w.atoms.len());
        for row in w.atoms {
            if row.len() != d + 1 {
                return Err(Error::invalid(format!(
                    "atom row needs {} coordinates plus a mass",
                    d
                )));
            }
            let mass = row[d];
            atoms.push(Atom {
                loc: row[..d].to_vec(),
                mass,
            });
        }
        MarkedRealization::new(atoms, w.window, w.lattice)
    }
}

impl From<MarkedRealization> for RealizationWire {
    fn from(r: MarkedRealization) -> Self {
        RealizationWire {
            atoms: r
                .atoms
                .iter()
                .map(|a| {
                    let mut row = a.loc.clone();
                    row.push(a.mass);
                    row
                })
                .collect(),
            window: r.window,
            lattice: r.lattice,
        }
    }
}

impl MarkedRealization {
    pub fn new(atoms: Vec<Atom>, window: Window, lattice: bool) -> Result<Self> {
        window.validate()?;
        let d = window.dim();
        for a in &atoms {
            if a.loc.len() != d {
                return Err(Error::invalid("atom dimension does not match window"));
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::invalid("atom masses must be strictly positive"));
            }
            if !window.contains(&a.loc, 1e-9) {
                return Err(Error::invalid(format!(
                    "atom at {:?} lies outside the window",
                    a.loc
                )));
            }
            if lattice && a.loc.iter().any(|c| c.fract() != 0.0) {
                return Err(Error::invalid("lattice realization has off-lattice atom"));
            }
        }
        // simple process: pairwise distinct locations
        let mut sorted: Vec<&Atom> = atoms.iter().collect();
        sorted.sort_by(|a, b| a.loc.partial_cmp(&b.loc).unwrap());
        for w in sorted.windows(2) {
            if w[0].loc == w[1].loc {
                return Err(Error::invalid(format!(
                    "duplicate atom location {:?}",
                    w[0].loc
                )));
            }
        }
        Ok(MarkedRealization {
            atoms,
            window,
            lattice,
        })
    }

    pub fn empty(window: Window) -> Result<Self> {
        MarkedRealization::new(vec![], window, false)
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Total mass of atoms in the region described by a predicate.
    pub fn mass_in<F: Fn(&[f64]) -> bool>(&self, region: F) -> f64 {
        self.atoms
            .iter()
            .filter(|a| region(&a.loc))
            .map(|a| a.mass)
            .sum()
    }

    /// Mass of a vertex SET: duplicate vertices count once; vertices match
    /// atoms by exact coordinates.
    pub fn mass_of_vertices(&self, vertices: &[Point]) -> f64 {
        let mut dedup: Vec<&Point> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !dedup.iter().any(|u| *u == v) {
                dedup.push(v);
            }
        }
        // canonical summation order: atom index order
        self.atoms
            .iter()
            .filter(|a| dedup.iter().any(|v| **v == a.loc))
            .map(|a| a.mass)
            .sum()
    }

    /// Index of the atom sitting exactly at `loc`, if any.
    pub fn atom_at(&self, loc: &[f64]) -> Option<usize> {
        self.atoms.iter().position(|a| a.loc == loc)
    }

    /// Translate every atom (and the window) by `z`. Marks are unchanged;
    /// the lattice flag survives only integer translations.
    pub fn shift(&self, z: &[f64]) -> MarkedRealization {
        let lattice = self.lattice && z.iter().all(|c| c.fract() == 0.0);
        MarkedRealization {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    loc: a.loc.iter().zip(z).map(|(c, zi)| c + zi).collect(),
                    mass: a.mass,
                })
                .collect(),
            window: self.window.translate(z),
            lattice,
        }
    }

    /// Shift by a uniform random vector in `[0,1)^d`.
    pub fn uniform_shift(&self, seed: u64) -> MarkedRealization {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(seed, &[crate::rng::stage::GENERATE, 0xF5]);
        let u: Vec<f64> = (0..self.dim()).map(|_| rng.gen_range(0.0..1.0)).collect();
        self.shift(&u)
    }

    /// Truncation layer: keep atoms with mass ≥ `t`, set their mass to 1.
    pub fn truncate(&self, t: f64) -> Result<MarkedRealization> {
        if !(t > 0.0) {
            return Err(Error::invalid("truncation level must be positive"));
        }
        Ok(MarkedRealization {
            atoms: self
                .atoms
                .iter()
                .filter(|a| a.mass >= t)
                .map(|a| Atom {
                    loc: a.loc.clone(),
                    mass: 1.0,
                })
                .collect(),
            window: self.window.clone(),
            lattice: self.lattice,
        })
    }

    /// Exact discrete layer reconstruction of the mass of a vertex set:
    /// `Σ_i (t_i − t_{i−1}) · #{atoms of S with mass ≥ t_i}` over the
    /// distinct realization mass values `t_1 < t_2 < …`.
    pub fn layered_mass_of_vertices(&self, vertices: &[Point]) -> f64 {
        let mut levels: Vec<f64> = self.atoms.iter().map(|a| a.mass).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        let mut dedup: Vec<&Point> = Vec::new();
        for v in vertices {
            if !dedup.iter().any(|u| *u == v) {
                dedup.push(v);
            }
        }
        let masses: Vec<f64> = self
            .atoms
            .iter()
            .filter(|a| dedup.iter().any(|v| **v == a.loc))
            .map(|a| a.mass)
            .collect();
        let mut total = 0.0;
        let mut prev = 0.0;
        for t in levels {
            let count = masses.iter().filter(|&&m| m >= t).count();
            total += (t - prev) * count as f64;
            prev = t;
        }
        total
    }
}
