use serde::{Deserialize, Serialize};

use super::{add, dist2, dot, norm2, scale, sub, Point, GEOM_TOL};
use crate::error::{Error, Result};

/// Cone with apex `x`, axis direction `u` and opening parameter `δ ∈ (0,1)`:
/// the set of `z` with `⟨z−x, u/‖u‖₂⟩ ≥ (1−δ)·‖z−x‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub delta: f64,
    pub apex: Point,
    pub direction: Point,
}

impl ConeSpec {
    pub fn new(delta: f64, apex: Point, direction: Point) -> Result<Self> {
        check_delta(delta)?;
        if norm2(&direction) == 0.0 {
            return Err(Error::invalid("cone direction must be nonzero"));
        }
        if apex.len() != direction.len() {
            return Err(Error::invalid("cone apex/direction dimensions differ"));
        }
        Ok(ConeSpec {
            delta,
            apex,
            direction,
        })
    }
}

/// Diamond between distinct anchors `x`, `y`: intersection of the two
/// facing cones `C_δ(x, y−x)` and `C_δ(y, x−y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondSpec {
    pub delta: f64,
    pub x: Point,
    pub y: Point,
}

impl DiamondSpec {
    pub fn new(delta: f64, x: Point, y: Point) -> Result<Self> {
        check_delta(delta)?;
        if dist2(&x, &y) == 0.0 {
            return Err(Error::invalid("diamond anchors must be distinct"));
        }
        Ok(DiamondSpec { delta, x, y })
    }
}

/// Antidiamond between distinct anchors: complement of the union of the two
/// outward cones `C_δ(x, x−y)` and `C_δ(y, y−x)`, plus the anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntidiamondSpec {
    pub delta: f64,
    pub x: Point,
    pub y: Point,
}

impl AntidiamondSpec {
    pub fn new(delta: f64, x: Point, y: Point) -> Result<Self> {
        check_delta(delta)?;
        if dist2(&x, &y) == 0.0 {
            return Err(Error::invalid("antidiamond anchors must be distinct"));
        }
        Ok(AntidiamondSpec { delta, x, y })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0,1), got {delta}")));
    }
    Ok(())
}

/// Raw cone membership test. The apex is a member (0 ≥ 0).
pub(crate) fn cone_contains(apex: &[f64], direction: &[f64], delta: f64, z: &[f64]) -> bool {
    let v = sub(z, apex);
    let u = norm2(direction);
    dot(&v, direction) / u >= (1.0 - delta) * norm2(&v) - GEOM_TOL
}

pub fn in_cone(cone: &ConeSpec, z: &[f64]) -> bool {
    cone_contains(&cone.apex, &cone.direction, cone.delta, z)
}

pub fn in_diamond(diamond: &DiamondSpec, z: &[f64]) -> bool {
    let to_y = sub(&diamond.y, &diamond.x);
    let to_x = scale(&to_y, -1.0);
    cone_contains(&diamond.x, &to_y, diamond.delta, z)
        && cone_contains(&diamond.y, &to_x, diamond.delta, z)
}

pub fn in_antidiamond(anti: &AntidiamondSpec, z: &[f64]) -> bool {
    // Anchors always belong. The apex tolerance is widened to tol/(1−δ) so
    // that the diamond stays a subset of the antidiamond under the floating
    // tolerance used by the cone test.
    let apex_tol = GEOM_TOL / (1.0 - anti.delta);
    if dist2(z, &anti.x) <= apex_tol || dist2(z, &anti.y) <= apex_tol {
        return true;
    }
    let away_from_y = sub(&anti.x, &anti.y);
    let away_from_x = sub(&anti.y, &anti.x);
    !cone_contains(&anti.x, &away_from_y, anti.delta, z)
        && !cone_contains(&anti.y, &away_from_x, anti.delta, z)
}

/// Orthogonal (Euclidean) projection of `y` onto the line `x + R·v`.
pub fn orth_project_onto_line(x: &[f64], v: &[f64], y: &[f64]) -> Result<Point> {
    let vv = dot(v, v);
    if vv == 0.0 {
        return Err(Error::invalid("projection direction must be nonzero"));
    }
    let t = dot(&sub(y, x), v) / vv;
    Ok(add(x, &scale(v, t)))
}
