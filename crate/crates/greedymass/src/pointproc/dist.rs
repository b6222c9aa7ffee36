use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric mark distribution.
///
/// Marks are nonnegative; samplers drop atoms whose drawn mark is zero
/// (a zero mark and an absent atom are indistinguishable for every mass
/// functional). `tail(t)` is `ν([t,∞))` for `t > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarkDistribution {
    /// Point mass at `c > 0`.
    Constant { c: f64 },
    /// Mass `scale` with probability `p`, otherwise zero (no atom).
    Bernoulli { p: f64, scale: f64 },
    /// Exponential with the given rate.
    Exponential { rate: f64 },
    /// Pareto with shape `alpha` and scale `x_min`: tail (x_min/t)^alpha
    /// for t ≥ x_min.
    Pareto { alpha: f64, x_min: f64 },
    /// Finite discrete distribution on positive values.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl MarkDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            MarkDistribution::Constant { c } => {
                if !(*c > 0.0) {
                    return Err(Error::invalid("constant mark must be positive"));
                }
            }
            MarkDistribution::Bernoulli { p, scale } => {
                if !(*p >= 0.0 && *p <= 1.0) {
                    return Err(Error::invalid("bernoulli p must be in [0,1]"));
                }
                if !(*scale > 0.0) {
                    return Err(Error::invalid("bernoulli scale must be positive"));
                }
            }
            MarkDistribution::Exponential { rate } => {
                if !(*rate > 0.0) {
                    return Err(Error::invalid("exponential rate must be positive"));
                }
            }
            MarkDistribution::Pareto { alpha, x_min } => {
                if !(*alpha > 0.0) || !(*x_min > 0.0) {
                    return Err(Error::invalid("pareto needs alpha > 0 and x_min > 0"));
                }
            }
            MarkDistribution::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid("discrete values/probs length mismatch"));
                }
                if values.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::invalid("discrete values must be positive"));
                }
                if probs.iter().any(|&p| !(p >= 0.0)) {
                    return Err(Error::invalid("discrete probs must be nonnegative"));
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "discrete probs must sum to 1, got {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draw one mark (may be zero for `Bernoulli`).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            MarkDistribution::Constant { c } => *c,
            MarkDistribution::Bernoulli { p, scale } => {
                if rng.gen_bool(*p) {
                    *scale
                } else {
                    0.0
                }
            }
            MarkDistribution::Exponential { rate } => {
                let u: f64 = rng.gen_range(0.0..1.0);
                -(1.0 - u).ln() / rate
            }
            MarkDistribution::Pareto { alpha, x_min } => {
                let u: f64 = rng.gen_range(0.0..1.0);
                x_min * (1.0 - u).powf(-1.0 / alpha)
            }
            MarkDistribution::Discrete { values, probs } => {
                let u: f64 = rng.gen_range(0.0..1.0);
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }

    /// `ν([t,∞))`, right-continuous and nonincreasing.
    pub fn tail(&self, t: f64) -> f64 {
        match self {
            MarkDistribution::Constant { c } => {
                if t <= *c {
                    1.0
                } else {
                    0.0
                }
            }
            MarkDistribution::Bernoulli { p, scale } => {
                if t <= *scale {
                    *p
                } else {
                    0.0
                }
            }
            MarkDistribution::Exponential { rate } => (-rate * t.max(0.0)).exp(),
            MarkDistribution::Pareto { alpha, x_min } => {
                if t <= *x_min {
                    1.0
                } else {
                    (x_min / t).powf(*alpha)
                }
            }
            MarkDistribution::Discrete { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| **v >= t)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    /// `∫₀^∞ ν([t,∞))^{1/d} dt`, closed form per family.
    ///
    /// Returns `f64::INFINITY` when the integral diverges (Pareto with
    /// `alpha ≤ d`), never an error.
    pub fn greedy_integral(&self, d: usize) -> f64 {
        let dd = d as f64;
        match self {
            MarkDistribution::Constant { c } => *c,
            MarkDistribution::Bernoulli { p, scale } => scale * p.powf(1.0 / dd),
            MarkDistribution::Exponential { rate } => dd / rate,
            MarkDistribution::Pareto { alpha, x_min } => {
                if *alpha <= dd {
                    f64::INFINITY
                } else {
                    // x_min + x_min/(alpha/d − 1)
                    x_min * (1.0 + 1.0 / (alpha / dd - 1.0))
                }
            }
            MarkDistribution::Discrete { values, probs } => {
                // sort values ascending, integrate the step tail
                let mut pairs: Vec<(f64, f64)> =
                    values.iter().cloned().zip(probs.iter().cloned()).collect();
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut remaining: f64 = pairs.iter().map(|(_, p)| p).sum();
                let mut prev = 0.0;
                let mut total = 0.0;
                for (v, p) in pairs {
                    total += (v - prev) * remaining.max(0.0).powf(1.0 / dd);
                    prev = v;
                    remaining -= p;
                }
                total
            }
        }
    }

    /// Mean of the mark (used for calibration in reports; infinite for
    /// Pareto with `alpha ≤ 1`).
    pub fn mean(&self) -> f64 {
        match self {
            MarkDistribution::Constant { c } => *c,
            MarkDistribution::Bernoulli { p, scale } => p * scale,
            MarkDistribution::Exponential { rate } => 1.0 / rate,
            MarkDistribution::Pareto { alpha, x_min } => {
                if *alpha <= 1.0 {
                    f64::INFINITY
                } else {
                    alpha * x_min / (alpha - 1.0)
                }
            }
            MarkDistribution::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }
}
