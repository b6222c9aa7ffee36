use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NormSpec, PExp, Point};

/// Finite simulation domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Window {
    Box {
        center: Vec<f64>,
        half_widths: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        norm: PExp,
    },
}

impl Window {
    pub fn centered_box(half_widths: Vec<f64>) -> Self {
        Window::Box {
            center: vec![0.0; half_widths.len()],
            half_widths,
        }
    }

    pub fn cube(center: Vec<f64>, half_width: f64) -> Self {
        let d = center.len();
        Window::Box {
            center,
            half_widths: vec![half_width; d],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { center, .. } | Window::Ball { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Window::Box {
                center,
                half_widths,
            } => {
                if center.len() != half_widths.len() || center.len() < 2 {
                    return Err(Error::invalid("window box dimensions inconsistent"));
                }
                if half_widths.iter().any(|&h| !(h > 0.0)) {
                    return Err(Error::invalid("window box half-widths must be positive"));
                }
            }
            Window::Ball { center, radius, norm } => {
                if center.len() < 2 {
                    return Err(Error::invalid("window ball needs dimension >= 2"));
                }
                if !(*radius > 0.0) {
                    return Err(Error::invalid("window ball radius must be positive"));
                }
                NormSpec::new(*norm, center.len())?;
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { half_widths, .. } => half_widths.iter().map(|h| 2.0 * h).product(),
            Window::Ball {
                center,
                radius,
                norm,
            } => {
                let d = center.len() as f64;
                match norm {
                    PExp::Inf => (2.0 * radius).powf(d),
                    PExp::Finite(p) => {
                        // (2r)^d Γ(1+1/p)^d / Γ(1+d/p)
                        let lg = d * ln_gamma(1.0 + 1.0 / p) - ln_gamma(1.0 + d / p);
                        (2.0 * radius).powf(d) * lg.exp()
                    }
                }
            }
        }
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        match self {
            Window::Box {
                center,
                half_widths,
            } => z
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((zi, ci), hi)| (zi - ci).abs() <= hi + tol),
            Window::Ball {
                center,
                radius,
                norm,
            } => {
                let n = NormSpec::new(*norm, center.len()).expect("validated");
                n.dist(z, center) <= radius + tol
            }
        }
    }

    /// Does the window contain the closed `norm`-ball of the given center
    /// and radius? Used to refuse solver queries whose reach spills out.
    pub fn contains_ball(&self, center: &[f64], radius: f64, norm: &NormSpec) -> bool {
        match self {
            Window::Box {
                center: wc,
                half_widths,
            } => {
                // per-axis extent of the norm ball is its radius in that
                // coordinate; for any p-norm the ball fits inside the
                // axis-aligned cube of the same radius
                center
                    .iter()
                    .zip(wc)
                    .zip(half_widths)
                    .all(|((ci, wi), hi)| (ci - wi).abs() + radius <= hi + 1e-9)
            }
            Window::Ball {
                center: wc,
                radius: wr,
                norm: wp,
            } => {
                let wn = NormSpec::new(*wp, wc.len()).expect("validated");
                // conservative: convert via the equivalence constants
                let c_w = wn.euclid_equiv_constant();
                let c_q = norm.euclid_equiv_constant();
                wn.dist(center, wc) + radius * c_w * c_q <= wr + 1e-9
            }
        }
    }

    pub fn translate(&self, z: &[f64]) -> Window {
        match self {
            Window::Box {
                center,
                half_widths,
            } => Window::Box {
                center: center.iter().zip(z).map(|(c, zi)| c + zi).collect(),
                half_widths: half_widths.clone(),
            },
            Window::Ball {
                center,
                radius,
                norm,
            } => Window::Ball {
                center: center.iter().zip(z).map(|(c, zi)| c + zi).collect(),
                radius: *radius,
                norm: *norm,
            },
        }
    }

    /// Uniform point in the window. Balls use rejection from the bounding box.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            Window::Box {
                center,
                half_widths,
            } => center
                .iter()
                .zip(half_widths)
                .map(|(c, h)| c + rng.gen_range(-1.0..1.0) * h)
                .collect(),
            Window::Ball {
                center,
                radius,
                norm,
            } => {
                let n = NormSpec::new(*norm, center.len()).expect("validated");
                loop {
                    let cand: Point = center
                        .iter()
                        .map(|c| c + rng.gen_range(-1.0..1.0) * radius)
                        .collect();
                    if n.dist(&cand, center) <= *radius {
                        return cand;
                    }
                }
            }
        }
    }
}

/// ln Γ(x) for x > 0, Lanczos approximation (g = 7, 9 coefficients).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_volume_and_containment() {
        let w = Window::centered_box(vec![1.0, 2.0]);
        assert!((w.volume() - 8.0).abs() < 1e-12);
        assert!(w.contains(&[0.9, -1.9], 0.0));
        assert!(!w.contains(&[1.1, 0.0], 0.0));
        assert!(w.contains_ball(&[0.0, 0.0], 0.5, &NormSpec::l2(2)));
        assert!(!w.contains_ball(&[0.9, 0.0], 0.5, &NormSpec::l2(2)));
    }

    #[test]
    fn ball_volumes_match_closed_forms() {
        // l2 disk: πr²
        let w = Window::Ball {
            center: vec![0.0, 0.0],
            radius: 2.0,
            norm: PExp::Finite(2.0),
        };
        assert!((w.volume() - std::f64::consts::PI * 4.0).abs() < 1e-9);
        // l1 ball in 2d: 2r²
        let w1 = Window::Ball {
            center: vec![0.0, 0.0],
            radius: 3.0,
            norm: PExp::Finite(1.0),
        };
        assert!((w1.volume() - 2.0 * 9.0).abs() < 1e-9);
        // linf cube
        let wi = Window::Ball {
            center: vec![0.0, 0.0],
            radius: 1.5,
            norm: PExp::Inf,
        };
        assert!((wi.volume() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_degenerate_windows() {
        let w = Window::Box {
            center: vec![0.0, 0.0],
            half_widths: vec![1.0, 0.0],
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(2.0)).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-10);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-10);
    }
}
