use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{CheckLine, Diagnostic, CI_Z};
use crate::error::{Error, Result};
use crate::geometry::NormSpec;
use crate::pointproc::{sample_poisson_marked, MarkDistribution, Window};
use crate::rng::{stage, stream_rng};

/// Truncation depth of the sup statistic: paths through more atoms are
/// ignored, which can only lower the statistic (the bound is one-sided).
const K_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub diagnostic: Diagnostic,
    /// Per-alpha empirical frequencies, same order as the grid.
    pub frequencies: Vec<f64>,
    pub bounds: Vec<f64>,
}

/// Tail bound for the unit-mark Poisson path process: the frequency of
/// `sup_{1≤ℓ≤ℓ_max} P(ℓ)/ℓ ≥ α` must stay below `2^{d+1}·e·λ·α^{−d}`
/// (moment-property constant C = 1), with CI slack on the frequency.
///
/// The sup is computed exactly over its jump points: with unit marks,
/// `sup_ℓ P(ℓ)/ℓ = max_k k / max(1, L(k))` where `L(k)` is the minimal
/// length of a path from the origin through `k` atoms, restricted to
/// `L(k) ≤ ℓ_max` and `k ≤ K_CAP` (both truncations are conservative).
pub fn tail_bound_check(
    lambda: f64,
    dim: usize,
    alpha_grid: &[f64],
    ell_max: f64,
    replicas: usize,
    seed: u64,
) -> Result<TailBoundReport> {
    if !(lambda > 0.0) || dim < 2 {
        return Err(Error::invalid("need lambda > 0 and dim >= 2"));
    }
    if alpha_grid.is_empty() || alpha_grid.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::invalid("alpha grid must be positive"));
    }
    if !(ell_max >= 1.0) {
        return Err(Error::invalid("ell_max must be >= 1"));
    }
    if replicas < 2 {
        return Err(Error::invalid("need at least 2 replicas"));
    }
    let marks = MarkDistribution::Constant { c: 1.0 };
    let norm = NormSpec::l2(dim);

    let stats: Vec<Result<f64>> = (0..replicas)
        .into_par_iter()
        .map(|ri| {
            use rand::Rng;
            let mut rng = stream_rng(seed, &[stage::TAIL, ri as u64]);
            let sample_seed: u64 = rng.gen();
            let window = Window::centered_box(vec![ell_max + 0.5; dim]);
            let r = sample_poisson_marked(lambda, &marks, &window, sample_seed)?;
            let origin = vec![0.0; dim];
            let pool: Vec<&Vec<f64>> = r
                .atoms
                .iter()
                .map(|a| &a.loc)
                .filter(|l| norm.dist(&origin, l) <= ell_max)
                .collect();
            Ok(sup_path_rate(&pool, &origin, &norm, ell_max))
        })
        .collect();

    let mut sups = Vec::with_capacity(replicas);
    for s in stats {
        sups.push(s?);
    }
    let mut lines = Vec::new();
    let mut freqs = Vec::new();
    let mut bounds = Vec::new();
    for &alpha in alpha_grid {
        let hits = sups.iter().filter(|&&s| s >= alpha).count();
        let freq = hits as f64 / replicas as f64;
        let bound = 2f64.powi(dim as i32 + 1) * std::f64::consts::E * lambda * alpha.powi(-(dim as i32));
        let sigma = (freq * (1.0 - freq) / replicas as f64).sqrt();
        lines.push(CheckLine::le(
            format!("alpha={alpha}"),
            freq,
            bound,
            CI_Z * sigma,
        ));
        freqs.push(freq);
        bounds.push(bound);
    }
    Ok(TailBoundReport {
        diagnostic: Diagnostic::from_lines("tail_bound", lines, 0),
        frequencies: freqs,
        bounds,
    })
}

/// `max_k k / max(1, L(k))` over `k ≤ K_CAP` with `L(k) ≤ ell_max`.
fn sup_path_rate(pool: &[&Vec<f64>], origin: &[f64], norm: &NormSpec, ell_max: f64) -> f64 {
    let mut best_rate = 0.0f64;
    let k_top = pool.len().min(K_CAP);
    for k in 1..=k_top {
        if let Some(len) = min_path_length(pool, origin, norm, k, ell_max) {
            best_rate = best_rate.max(k as f64 / len.max(1.0));
        }
    }
    best_rate
}

/// Minimal length of a path from the origin visiting exactly `k` pool
/// atoms, if one exists within `cap`. Exhaustive DFS with incumbent
/// pruning, nearest-first ordering.
fn min_path_length(
    pool: &[&Vec<f64>],
    origin: &[f64],
    norm: &NormSpec,
    k: usize,
    cap: f64,
) -> Option<f64> {
    let n = pool.len();
    if k > n {
        return None;
    }
    fn rec(
        pool: &[&Vec<f64>],
        norm: &NormSpec,
        cur: &[f64],
        used: f64,
        left: usize,
        visited: &mut [bool],
        best: &mut f64,
    ) {
        if left == 0 {
            if used < *best {
                *best = used;
            }
            return;
        }
        // nearest-first extension
        let mut order: Vec<(f64, usize)> = Vec::new();
        for (i, loc) in pool.iter().enumerate() {
            if !visited[i] {
                order.push((norm.dist(cur, loc), i));
            }
        }
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (leg, i) in order {
            if used + leg >= *best {
                break;
            }
            visited[i] = true;
            rec(pool, norm, pool[i], used + leg, left - 1, visited, best);
            visited[i] = false;
        }
    }
    let mut best = cap + 1e-12;
    let mut visited = vec![false; n];
    rec(pool, norm, origin, 0.0, k, &mut visited, &mut best);
    if best <= cap {
        Some(best)
    } else {
        None
    }
}
