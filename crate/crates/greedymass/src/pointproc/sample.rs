use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Atom, MarkDistribution, MarkedRealization, Window};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::{stage, stream_rng};

/// Axis-aligned integer box, inclusive bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBox {
    pub min: Vec<i64>,
    pub max: Vec<i64>,
}

impl LatticeBox {
    pub fn new(min: Vec<i64>, max: Vec<i64>) -> Result<Self> {
        if min.len() != max.len() || min.len() < 2 {
            return Err(Error::invalid("lattice box needs matching dims >= 2"));
        }
        if min.iter().zip(&max).any(|(a, b)| a > b) {
            return Err(Error::invalid("lattice box min must not exceed max"));
        }
        Ok(LatticeBox { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn site_count(&self) -> usize {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (b - a + 1) as usize)
            .product()
    }

    /// Row-major enumeration of the sites.
    pub fn sites(&self) -> Vec<Vec<i64>> {
        iterate_sites(self)
    }

    pub fn window(&self) -> Window {
        let center: Vec<f64> = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (*a + *b) as f64 / 2.0)
            .collect();
        let half: Vec<f64> = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (*b - *a) as f64 / 2.0 + 0.5)
            .collect();
        Window::Box {
            center,
            half_widths: half,
        }
    }
}

/// Sample a marked Poisson point process with intensity `λ·Leb ⊗ ν` on the
/// window: a Poisson(λ·vol) number of atoms, i.i.d. uniform locations,
/// i.i.d. marks. Atoms drawing a zero mark (Bernoulli families) are dropped.
///
/// Draw order per replica stream: count, then per atom the location
/// coordinates followed by the mark.
pub fn sample_poisson_marked(
    lambda: f64,
    nu: &MarkDistribution,
    window: &Window,
    seed: u64,
) -> Result<MarkedRealization> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("poisson intensity must be positive"));
    }
    nu.validate()?;
    window.validate()?;
    let mean = lambda * window.volume();
    if !(mean.is_finite()) || mean > 50_000_000.0 {
        return Err(Error::invalid(format!(
            "poisson mean {mean} too large for direct sampling"
        )));
    }
    let mut rng = stream_rng(seed, &[stage::GENERATE, 1]);
    let count = if mean == 0.0 {
        0
    } else {
        Poisson::new(mean)
            .map_err(|e| Error::invalid(format!("poisson: {e}")))?
            .sample(&mut rng) as usize
    };
    let mut atoms: Vec<Atom> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut loc = window.sample_uniform(&mut rng);
        // collisions have probability zero; resample defensively anyway
        while atoms.iter().any(|a| a.loc == loc) {
            loc = window.sample_uniform(&mut rng);
        }
        let mass = nu.sample(&mut rng);
        if mass > 0.0 {
            atoms.push(Atom { loc, mass });
        }
    }
    MarkedRealization::new(atoms, window.clone(), false)
}

/// One atom per lattice site with i.i.d. marks (zero marks dropped).
/// Sites are marked in row-major order.
pub fn sample_lattice_iid(
    nu: &MarkDistribution,
    bounds: &LatticeBox,
    seed: u64,
) -> Result<MarkedRealization> {
    nu.validate()?;
    let mut rng = stream_rng(seed, &[stage::GENERATE, 2]);
    let mut atoms = Vec::new();
    for site in iterate_sites(bounds) {
        let mass = nu.sample(&mut rng);
        if mass > 0.0 {
            atoms.push(Atom {
                loc: site.iter().map(|&c| c as f64).collect(),
                mass,
            });
        }
    }
    MarkedRealization::new(atoms, bounds.window(), true)
}

/// Columnar field on Z²: `X_{(v1,v2)} = X_{(v1,0)}` with the column values
/// i.i.d. `ν`. Only defined for d = 2.
pub fn sample_lattice_columnar(
    nu: &MarkDistribution,
    bounds: &LatticeBox,
    seed: u64,
) -> Result<MarkedRealization> {
    if bounds.dim() != 2 {
        return Err(Error::Unsupported(
            "columnar fields are only defined for d = 2".into(),
        ));
    }
    nu.validate()?;
    let mut rng = stream_rng(seed, &[stage::GENERATE, 3]);
    let mut column_masses = Vec::new();
    for _ in bounds.min[0]..=bounds.max[0] {
        column_masses.push(nu.sample(&mut rng));
    }
    let mut atoms = Vec::new();
    for (i, v1) in (bounds.min[0]..=bounds.max[0]).enumerate() {
        let mass = column_masses[i];
        if mass > 0.0 {
            for v2 in bounds.min[1]..=bounds.max[1] {
                atoms.push(Atom {
                    loc: vec![v1 as f64, v2 as f64],
                    mass,
                });
            }
        }
    }
    MarkedRealization::new(atoms, bounds.window(), true)
}

/// Attach independent `ν` marks to the given (distinct) points.
pub fn iid_marking(points: &[Point], nu: &MarkDistribution, seed: u64) -> Result<MarkedRealization> {
    nu.validate()?;
    for (i, p) in points.iter().enumerate() {
        for q in points.iter().skip(i + 1) {
            if p == q {
                return Err(Error::invalid(format!("duplicate point {p:?}")));
            }
        }
    }
    let mut rng = stream_rng(seed, &[stage::GENERATE, 4]);
    let d = points.first().map(|p| p.len()).unwrap_or(2);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let window = if points.is_empty() {
        Window::centered_box(vec![1.0; d])
    } else {
        Window::Box {
            center: lo.iter().zip(&hi).map(|(a, b)| (a + b) / 2.0).collect(),
            half_widths: lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| (b - a) / 2.0 + 1.0)
                .collect(),
        }
    };
    let mut atoms = Vec::new();
    for p in points {
        let mass = nu.sample(&mut rng);
        if mass > 0.0 {
            atoms.push(Atom {
                loc: p.clone(),
                mass,
            });
        }
    }
    MarkedRealization::new(atoms, window, false)
}

fn iterate_sites(bounds: &LatticeBox) -> Vec<Vec<i64>> {
    let d = bounds.dim();
    let mut out = Vec::with_capacity(bounds.site_count());
    let mut cur = bounds.min.clone();
    'outer: loop {
        out.push(cur.clone());
        for i in (0..d).rev() {
            if cur[i] < bounds.max[i] {
                cur[i] += 1;
                for j in i + 1..d {
                    cur[j] = bounds.min[j];
                }
                continue 'outer;
            }
        }
        break;
    }
    out
}
