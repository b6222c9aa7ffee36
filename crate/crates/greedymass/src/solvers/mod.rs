//! Exact maximal-mass path and animal optimization on finite realizations:
//! branch-and-bound solvers, restricted (diamond/antidiamond) variants,
//! lattice solvers and exhaustive oracles.

mod animal_solver;
mod lattice;
mod oracle;
mod path_solver;

pub use animal_solver::{bracket_animal, max_mass_animal_inf, BracketResult};
pub use lattice::{lattice_max_animal, lattice_max_path, lattice_reduction_check};
pub use oracle::{brute_force_animal_oracle, brute_force_path_oracle};
pub use path_solver::max_mass_path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    in_antidiamond, in_diamond, Animal, AntidiamondSpec, DiamondSpec, GeomPath, NormSpec, PExp,
    Point,
};
use crate::pointproc::MarkedRealization;

/// Norm parameter as it appears on the wire: `{"p": number | "inf"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParam {
    pub p: PExp,
}

impl NormParam {
    pub fn l1() -> Self {
        NormParam { p: PExp::Finite(1.0) }
    }

    pub fn l2() -> Self {
        NormParam { p: PExp::Finite(2.0) }
    }

    pub fn spec(&self, dim: usize) -> Result<NormSpec> {
        NormSpec::new(self.p, dim)
    }
}

/// Extended nonnegative real, for the vertex penalty `q ∈ [0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QValue {
    Finite(f64),
    Inf,
}

impl Serialize for QValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QValue::Finite(q) => s.serialize_f64(*q),
            QValue::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for QValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => {
                let q = n.as_f64().ok_or_else(|| DeError::custom("bad q"))?;
                if q < 0.0 {
                    return Err(DeError::custom("q must be >= 0"));
                }
                Ok(QValue::Finite(q))
            }
            serde_json::Value::String(s) if s == "inf" => Ok(QValue::Inf),
            other => Err(DeError::custom(format!(
                "q must be a nonnegative number or \"inf\", got {other}"
            ))),
        }
    }
}

/// Restriction of the feasible region between two anchors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Restriction {
    None,
    Diamond { delta: f64 },
    Antidiamond { delta: f64 },
}

/// Path optimization query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathQuery {
    pub mode: PathMode,
    pub restriction: Restriction,
    pub norm: NormParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathMode {
    FromOrigin { ell: f64 },
    TwoPoint { x: Point, y: Point, ell: f64 },
}

/// Animal optimization query. `q = "inf"` is the exact mode (vertices must
/// be atoms); finite `q` is served by [`bracket_animal`] only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnimalQuery {
    pub anchors: Anchors,
    pub ell: f64,
    pub q: QValue,
    pub restriction: Restriction,
    pub norm: NormParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Anchors {
    One { x: Point },
    Two { x: Point, y: Point },
}

/// Optimizer output with certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub value: f64,
    pub certificate: Certificate,
    pub nodes_explored: u64,
    pub proven_optimal: bool,
    /// Set when a two-point path query has an empty feasible set
    /// (`‖x−y‖ > ℓ`); the value 0 convention applies.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub infeasible_query: bool,
}

impl SolveResult {
    pub(crate) fn empty(nodes: u64) -> Self {
        SolveResult {
            value: 0.0,
            certificate: Certificate::Empty,
            nodes_explored: nodes,
            proven_optimal: true,
            infeasible_query: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Empty,
    Path { path: GeomPath },
    Animal { animal: Animal },
}

impl PathQuery {
    pub fn validate(&self, dim: usize) -> Result<NormSpec> {
        let norm = self.norm.spec(dim)?;
        let ell = match &self.mode {
            PathMode::FromOrigin { ell } => *ell,
            PathMode::TwoPoint { x, y, ell } => {
                if x.len() != dim || y.len() != dim {
                    return Err(Error::invalid("anchor dimension mismatch"));
                }
                *ell
            }
        };
        if !(ell > 0.0) {
            return Err(Error::invalid("path query needs ell > 0"));
        }
        if !matches!(self.restriction, Restriction::None) {
            match &self.mode {
                PathMode::TwoPoint { x, y, .. } if x != y => {}
                _ => {
                    return Err(Error::invalid(
                        "restrictions need a two-point query with distinct anchors",
                    ))
                }
            }
            let delta = match self.restriction {
                Restriction::Diamond { delta } | Restriction::Antidiamond { delta } => delta,
                Restriction::None => unreachable!(),
            };
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::invalid("restriction delta must be in (0,1)"));
            }
        }
        Ok(norm)
    }
}

impl AnimalQuery {
    pub fn validate(&self, dim: usize) -> Result<NormSpec> {
        let norm = self.norm.spec(dim)?;
        if !(self.ell > 0.0) {
            return Err(Error::invalid("animal query needs ell > 0"));
        }
        if let QValue::Finite(q) = self.q {
            if q < 0.0 {
                return Err(Error::invalid("q must be >= 0"));
            }
        }
        match &self.anchors {
            Anchors::One { x } => {
                if x.len() != dim {
                    return Err(Error::invalid("anchor dimension mismatch"));
                }
            }
            Anchors::Two { x, y } => {
                if x.len() != dim || y.len() != dim {
                    return Err(Error::invalid("anchor dimension mismatch"));
                }
            }
        }
        if !matches!(self.restriction, Restriction::None) {
            match &self.anchors {
                Anchors::Two { x, y } if x != y => {}
                _ => {
                    return Err(Error::invalid(
                        "restrictions need two distinct anchors",
                    ))
                }
            }
            let delta = match self.restriction {
                Restriction::Diamond { delta } | Restriction::Antidiamond { delta } => delta,
                Restriction::None => unreachable!(),
            };
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::invalid("restriction delta must be in (0,1)"));
            }
        }
        Ok(norm)
    }
}

/// Does atom location `a` pass the query restriction between `x` and `y`?
pub(crate) fn passes_restriction(
    restriction: &Restriction,
    x: &[f64],
    y: &[f64],
    a: &[f64],
) -> bool {
    match restriction {
        Restriction::None => true,
        Restriction::Diamond { delta } => {
            let d = DiamondSpec::new(*delta, x.to_vec(), y.to_vec()).expect("validated");
            in_diamond(&d, a)
        }
        Restriction::Antidiamond { delta } => {
            let d = AntidiamondSpec::new(*delta, x.to_vec(), y.to_vec()).expect("validated");
            in_antidiamond(&d, a)
        }
    }
}

/// Canonical mass summation: ascending atom index. Equal index sets always
/// produce bit-identical totals.
pub(crate) fn sum_masses(r: &MarkedRealization, sorted_indices: &[usize]) -> f64 {
    sorted_indices.iter().map(|&i| r.atoms[i].mass).sum()
}
