use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent of a p-norm, `p ∈ [1, ∞]`.
///
/// Wire format: a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExp {
    Finite(f64),
    Inf,
}

impl Serialize for PExp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExp::Finite(p) => s.serialize_f64(*p),
            PExp::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => {
                let p = n.as_f64().ok_or_else(|| DeError::custom("bad p"))?;
                Ok(PExp::Finite(p))
            }
            serde_json::Value::String(s) if s == "inf" => Ok(PExp::Inf),
            other => Err(DeError::custom(format!(
                "norm exponent must be a number or \"inf\", got {other}"
            ))),
        }
    }
}

/// A p-norm on R^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: PExp,
    pub dim: usize,
}

impl NormSpec {
    pub fn new(p: PExp, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!("dimension must be >= 2, got {dim}")));
        }
        if let PExp::Finite(p) = p {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::invalid(format!("p must be in [1, inf], got {p}")));
            }
        }
        Ok(NormSpec { p, dim })
    }

    pub fn l1(dim: usize) -> Self {
        NormSpec::new(PExp::Finite(1.0), dim).unwrap()
    }

    pub fn l2(dim: usize) -> Self {
        NormSpec::new(PExp::Finite(2.0), dim).unwrap()
    }

    pub fn linf(dim: usize) -> Self {
        NormSpec::new(PExp::Inf, dim).unwrap()
    }

    /// `‖x‖_p`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.p {
            PExp::Inf => x.iter().fold(0.0, |m, &v| m.max(v.abs())),
            PExp::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
            PExp::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PExp::Finite(p) => x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// `‖x − y‖_p`.
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.p {
            PExp::Inf => x
                .iter()
                .zip(y)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
            PExp::Finite(p) if p == 1.0 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            PExp::Finite(p) if p == 2.0 => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            PExp::Finite(p) => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }

    /// Equivalence constant against the Euclidean norm:
    /// `(1/C1)·‖x‖₂ ≤ ‖x‖_p ≤ C1·‖x‖₂` with `C1 = d^{|1/2 − 1/p|}`.
    pub fn euclid_equiv_constant(&self) -> f64 {
        let d = self.dim as f64;
        let inv_p = match self.p {
            PExp::Inf => 0.0,
            PExp::Finite(p) => 1.0 / p,
        };
        d.powf((0.5 - inv_p).abs())
    }

    /// Constant of the cone projection bound, `C2 = √2 · C1²`.
    pub fn cone_projection_constant(&self) -> f64 {
        let c1 = self.euclid_equiv_constant();
        std::f64::consts::SQRT_2 * c1 * c1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm2;
    use rand::Rng;

    #[test]
    fn rejects_bad_parameters() {
        assert!(NormSpec::new(PExp::Finite(0.5), 2).is_err());
        assert!(NormSpec::new(PExp::Finite(f64::NAN), 2).is_err());
        assert!(NormSpec::new(PExp::Finite(2.0), 1).is_err());
    }

    #[test]
    fn known_values() {
        let n1 = NormSpec::l1(2);
        let n2 = NormSpec::l2(2);
        let ni = NormSpec::linf(2);
        let x = [3.0, -4.0];
        assert_eq!(n1.eval(&x), 7.0);
        assert_eq!(n2.eval(&x), 5.0);
        assert_eq!(ni.eval(&x), 4.0);
        let n3 = NormSpec::new(PExp::Finite(3.0), 2).unwrap();
        assert!((n3.eval(&[1.0, 1.0]) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    /// Norm axioms on random triples, exact to 1e-12 relative.
    #[test]
    fn norm_axioms_random_triples() {
        let mut rng = crate::rng::stream_rng(7, &[100]);
        let ps = [
            PExp::Finite(1.0),
            PExp::Finite(1.5),
            PExp::Finite(2.0),
            PExp::Finite(3.0),
            PExp::Inf,
        ];
        for _ in 0..100_000 {
            let d = rng.gen_range(2..=4usize);
            let p = ps[rng.gen_range(0..ps.len())];
            let n = NormSpec::new(p, d).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1e3..1e3)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1e3..1e3)).collect();
            let s = rng.gen_range(-10.0..10.0);
            let nx = n.eval(&x);
            let ny = n.eval(&y);
            let nxy = n.eval(&x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>());
            // triangle inequality with relative slack
            assert!(nxy <= (nx + ny) * (1.0 + 1e-12) + 1e-300);
            // homogeneity
            let nsx = n.eval(&x.iter().map(|a| a * s).collect::<Vec<_>>());
            assert!((nsx - s.abs() * nx).abs() <= 1e-12 * (1.0 + nsx.abs()));
            // positive definiteness
            if x.iter().any(|&v| v != 0.0) {
                assert!(nx > 0.0);
            }
        }
    }

    #[test]
    fn euclid_equivalence_holds_on_random_vectors() {
        let mut rng = crate::rng::stream_rng(7, &[101]);
        for _ in 0..10_000 {
            let d = rng.gen_range(2..=5usize);
            let p = if rng.gen_bool(0.2) {
                PExp::Inf
            } else {
                PExp::Finite(rng.gen_range(1.0..8.0))
            };
            let n = NormSpec::new(p, d).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let c1 = n.euclid_equiv_constant();
            let np = n.eval(&x);
            let e = norm2(&x);
            assert!(np <= c1 * e * (1.0 + 1e-12));
            assert!(np * c1 * (1.0 + 1e-12) >= e);
        }
    }

    #[test]
    fn pexp_json_round_trip() {
        let j = serde_json::to_string(&PExp::Inf).unwrap();
        assert_eq!(j, "\"inf\"");
        let back: PExp = serde_json::from_str("2.0").unwrap();
        assert_eq!(back, PExp::Finite(2.0));
        let bad: std::result::Result<PExp, _> = serde_json::from_str("\"foo\"");
        assert!(bad.is_err());
    }
}
