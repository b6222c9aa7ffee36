use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{iid_marking, MarkDistribution, MarkedRealization, Window};
use crate::error::{Error, Result};
use crate::rng::{stage, stream_rng};

/// Discrete determinantal point process on a torus grid.
///
/// The kernel is translation invariant: `K(cell_i, cell_j)` depends only on
/// the displacement `cell_i − cell_j` modulo the grid, given as a value
/// table in row-major displacement order (`cells_per_side^dim` entries).
/// The induced matrix must be symmetric with eigenvalues in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DppKernelSpec {
    pub side_length: f64,
    pub cells_per_side: usize,
    pub dim: usize,
    pub kernel: Vec<f64>,
    pub mark_dist: MarkDistribution,
}

/// Validated sampler with the spectral factorization precomputed.
pub struct DppSampler {
    spec: DppKernelSpec,
    eigvals: Vec<f64>,
    eigvecs: DMatrix<f64>,
    centers: Vec<Vec<f64>>,
}

const SPECTRUM_TOL: f64 = 1e-7;

impl DppKernelSpec {
    pub fn build(self) -> Result<DppSampler> {
        if self.dim < 2 {
            return Err(Error::invalid("dpp grid dimension must be >= 2"));
        }
        if self.cells_per_side == 0 || !(self.side_length > 0.0) {
            return Err(Error::invalid("dpp grid must have positive size"));
        }
        self.mark_dist.validate()?;
        let n_cells = self.cells_per_side.pow(self.dim as u32);
        if self.kernel.len() != n_cells {
            return Err(Error::invalid(format!(
                "kernel table needs {n_cells} entries, got {}",
                self.kernel.len()
            )));
        }
        // symmetry of the table under displacement negation
        for idx in 0..n_cells {
            let disp = self.unflatten(idx);
            let neg: Vec<usize> = disp
                .iter()
                .map(|&c| (self.cells_per_side - c) % self.cells_per_side)
                .collect();
            let neg_idx = self.flatten(&neg);
            if (self.kernel[idx] - self.kernel[neg_idx]).abs() > 1e-9 {
                return Err(Error::invalid(
                    "kernel table is not symmetric under displacement negation",
                ));
            }
        }
        // full matrix and spectrum
        let mut m = DMatrix::zeros(n_cells, n_cells);
        for i in 0..n_cells {
            let ci = self.unflatten(i);
            for j in 0..n_cells {
                let cj = self.unflatten(j);
                let disp: Vec<usize> = ci
                    .iter()
                    .zip(&cj)
                    .map(|(a, b)| (a + self.cells_per_side - b) % self.cells_per_side)
                    .collect();
                m[(i, j)] = self.kernel[self.flatten(&disp)];
            }
        }
        let eig = m.symmetric_eigen();
        let eigvals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        for &l in &eigvals {
            if l < -SPECTRUM_TOL || l > 1.0 + SPECTRUM_TOL {
                return Err(Error::invalid(format!(
                    "kernel spectrum leaves [0,1]: eigenvalue {l}"
                )));
            }
        }
        let cell = self.side_length / self.cells_per_side as f64;
        let centers: Vec<Vec<f64>> = (0..n_cells)
            .map(|i| {
                self.unflatten(i)
                    .iter()
                    .map(|&c| (c as f64 + 0.5) * cell)
                    .collect()
            })
            .collect();
        Ok(DppSampler {
            spec: self,
            eigvals,
            eigvecs: eig.eigenvectors,
            centers,
        })
    }

    fn flatten(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.cells_per_side + c)
    }

    fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.dim];
        for k in (0..self.dim).rev() {
            out[k] = idx % self.cells_per_side;
            idx /= self.cells_per_side;
        }
        out
    }
}

impl DppSampler {
    pub fn rank_if_projection(&self) -> Option<usize> {
        if self
            .eigvals
            .iter()
            .all(|&l| l < SPECTRUM_TOL || l > 1.0 - SPECTRUM_TOL)
        {
            Some(self.eigvals.iter().filter(|&&l| l > 0.5).count())
        } else {
            None
        }
    }

    /// Spectral sampling: select eigenvectors with Bernoulli(λ_k), then draw
    /// the projection DPP they span, then apply the i.i.d. marking.
    pub fn sample(&self, seed: u64) -> Result<MarkedRealization> {
        let mut rng = stream_rng(seed, &[stage::DPP, 1]);
        let n = self.eigvals.len();
        let selected: Vec<usize> = (0..n)
            .filter(|&k| {
                let l = self.eigvals[k].clamp(0.0, 1.0);
                rng.gen_bool(l)
            })
            .collect();
        let mut cells = self.sample_projection(&selected, &mut rng);
        cells.sort_unstable();
        let points: Vec<Vec<f64>> = cells.iter().map(|&c| self.centers[c].clone()).collect();
        let mark_seed = rng.gen::<u64>();
        let marked = iid_marking(&points, &self.spec.mark_dist, mark_seed)?;
        // rebuild with the torus window and marked atoms
        let window = Window::Box {
            center: vec![self.spec.side_length / 2.0; self.spec.dim],
            half_widths: vec![self.spec.side_length / 2.0; self.spec.dim],
        };
        MarkedRealization::new(marked.atoms, window, false)
    }

    fn sample_projection<R: Rng>(&self, selected: &[usize], rng: &mut R) -> Vec<usize> {
        let n = self.eigvals.len();
        let m = selected.len();
        if m == 0 {
            return vec![];
        }
        // V: n×m orthonormal columns
        let mut v = DMatrix::zeros(n, m);
        for (col, &k) in selected.iter().enumerate() {
            v.set_column(col, &self.eigvecs.column(k));
        }
        let mut picked = Vec::with_capacity(m);
        let mut cols = m;
        while cols > 0 {
            // p_i ∝ squared row norms
            let mut weights = vec![0.0f64; n];
            let mut total = 0.0;
            for i in 0..n {
                let w: f64 = (0..cols).map(|c| v[(i, c)] * v[(i, c)]).sum();
                weights[i] = w;
                total += w;
            }
            let mut u = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &w) in weights.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            picked.push(pick);
            // project the span onto {f : f(pick) = 0}
            let pivot = (0..cols)
                .max_by(|&a, &b| {
                    v[(pick, a)]
                        .abs()
                        .partial_cmp(&v[(pick, b)].abs())
                        .unwrap()
                })
                .unwrap();
            let pivot_col: DVector<f64> = v.column(pivot).into();
            let pivot_val = v[(pick, pivot)];
            for c in 0..cols {
                if c == pivot {
                    continue;
                }
                let factor = v[(pick, c)] / pivot_val;
                for i in 0..n {
                    v[(i, c)] -= factor * pivot_col[i];
                }
            }
            // drop the pivot by swapping to the back
            if pivot != cols - 1 {
                v.swap_columns(pivot, cols - 1);
            }
            cols -= 1;
            // re-orthonormalize the remaining columns (Gram–Schmidt)
            for c in 0..cols {
                for prev in 0..c {
                    let dot: f64 = (0..n).map(|i| v[(i, c)] * v[(i, prev)]).sum();
                    for i in 0..n {
                        let adj = dot * v[(i, prev)];
                        v[(i, c)] -= adj;
                    }
                }
                let norm: f64 = (0..n).map(|i| v[(i, c)] * v[(i, c)]).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for i in 0..n {
                        v[(i, c)] /= norm;
                    }
                }
            }
        }
        picked
    }
}

/// Kernel table with the prescribed spectrum on the torus frequencies:
/// `k[Δ] = (1/N) Σ_f λ(f) cos(2π f·Δ / cells)`.
///
/// `spectrum` maps a frequency vector (entries in `[0, cells)`) to an
/// eigenvalue in `[0,1]`; it must be symmetric under frequency negation.
pub fn kernel_from_spectrum(
    cells_per_side: usize,
    dim: usize,
    spectrum: impl Fn(&[usize]) -> f64,
) -> Vec<f64> {
    let n_cells = cells_per_side.pow(dim as u32);
    let mut table = vec![0.0f64; n_cells];
    let unflatten = |mut idx: usize| {
        let mut out = vec![0usize; dim];
        for k in (0..dim).rev() {
            out[k] = idx % cells_per_side;
            idx /= cells_per_side;
        }
        out
    };
    for (d_idx, slot) in table.iter_mut().enumerate() {
        let disp = unflatten(d_idx);
        let mut acc = 0.0;
        for f_idx in 0..n_cells {
            let freq = unflatten(f_idx);
            let lambda = spectrum(&freq);
            let phase: f64 = freq
                .iter()
                .zip(&disp)
                .map(|(&f, &dd)| (f * dd) as f64 / cells_per_side as f64)
                .sum();
            acc += lambda * (2.0 * std::f64::consts::PI * phase).cos();
        }
        *slot = acc / n_cells as f64;
    }
    table
}

/// Projection kernel of (approximately) the requested rank: eigenvalue 1 on
/// the `rank` lowest frequencies (closed under negation), 0 elsewhere.
/// Returns the table and the actual rank.
pub fn projection_kernel(cells_per_side: usize, dim: usize, rank: usize) -> (Vec<f64>, usize) {
    let n_cells = cells_per_side.pow(dim as u32);
    let unflatten = |mut idx: usize| {
        let mut out = vec![0usize; dim];
        for k in (0..dim).rev() {
            out[k] = idx % cells_per_side;
            idx /= cells_per_side;
        }
        out
    };
    let freq_norm = |f: &[usize]| -> usize {
        f.iter()
            .map(|&c| {
                let folded = c.min(cells_per_side - c);
                folded * folded
            })
            .sum()
    };
    let mut order: Vec<usize> = (0..n_cells).collect();
    order.sort_by_key(|&i| (freq_norm(&unflatten(i)), i));
    let mut chosen = vec![false; n_cells];
    let mut count = 0usize;
    for &i in &order {
        if count >= rank {
            break;
        }
        if chosen[i] {
            continue;
        }
        let f = unflatten(i);
        let neg: Vec<usize> = f
            .iter()
            .map(|&c| (cells_per_side - c) % cells_per_side)
            .collect();
        let j = neg
            .iter()
            .fold(0usize, |acc, &c| acc * cells_per_side + c);
        if i == j {
            chosen[i] = true;
            count += 1;
        } else if count + 2 <= rank {
            chosen[i] = true;
            chosen[j] = true;
            count += 2;
        }
    }
    let table = kernel_from_spectrum(cells_per_side, dim, |f| {
        let idx = f.iter().fold(0usize, |acc, &c| acc * cells_per_side + c);
        if chosen[idx] {
            1.0
        } else {
            0.0
        }
    });
    (table, count)
}
