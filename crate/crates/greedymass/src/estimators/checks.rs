use super::report::{CheckLine, Diagnostic, GridPoint};
use crate::error::{Error, Result};

fn sorted_by_beta(points: &[GridPoint]) -> Vec<&GridPoint> {
    let mut v: Vec<&GridPoint> = points.iter().collect();
    v.sort_by(|a, b| a.parameter.partial_cmp(&b.parameter).unwrap());
    v
}

/// Discrete midpoint concavity: for every grid pair whose midpoint is also
/// a grid point, `ĝ(β₁) + ĝ(β₂) ≤ 2·ĝ((β₁+β₂)/2) + slack`, the slack being
/// the summed CI half-widths of the three estimates.
pub fn check_concavity(points: &[GridPoint]) -> Result<Diagnostic> {
    if points.len() < 3 {
        return Err(Error::invalid("concavity check needs at least 3 grid points"));
    }
    let pts = sorted_by_beta(points);
    let mut lines = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let mid = (pts[i].parameter + pts[j].parameter) / 2.0;
            if let Some(k) = pts
                .iter()
                .position(|p| (p.parameter - mid).abs() < 1e-9)
            {
                let lhs = pts[i].mean + pts[j].mean;
                let rhs = 2.0 * pts[k].mean;
                let slack =
                    pts[i].ci_half_width + pts[j].ci_half_width + 2.0 * pts[k].ci_half_width;
                lines.push(CheckLine::le(
                    format!(
                        "concave({:.3},{:.3})",
                        pts[i].parameter, pts[j].parameter
                    ),
                    lhs,
                    rhs,
                    slack,
                ));
            }
        }
    }
    if lines.is_empty() {
        return Err(Error::invalid("no midpoint triples in the grid"));
    }
    Ok(Diagnostic::from_lines("concavity", lines, 0))
}

/// Symmetry under `β ↦ −β` within two CI half-widths.
pub fn check_symmetry(points: &[GridPoint]) -> Result<Diagnostic> {
    let pts = sorted_by_beta(points);
    let mut lines = Vec::new();
    for p in pts.iter().filter(|p| p.parameter > 0.0) {
        if let Some(q) = pts
            .iter()
            .find(|q| (q.parameter + p.parameter).abs() < 1e-9)
        {
            lines.push(CheckLine::le(
                format!("sym({:.3})", p.parameter),
                (p.mean - q.mean).abs(),
                0.0,
                p.ci_half_width + q.ci_half_width,
            ));
        }
    }
    if lines.is_empty() {
        return Err(Error::invalid("no symmetric pairs in the grid"));
    }
    Ok(Diagnostic::from_lines("symmetry", lines, 0))
}

/// `β ↦ ĝ(βe)` nonincreasing on [0,1) within summed CI half-widths.
pub fn check_monotonicity(points: &[GridPoint]) -> Result<Diagnostic> {
    let pts: Vec<&GridPoint> = sorted_by_beta(points)
        .into_iter()
        .filter(|p| p.parameter >= 0.0)
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid("monotonicity check needs >= 2 nonnegative betas"));
    }
    let mut lines = Vec::new();
    for w in pts.windows(2) {
        lines.push(CheckLine::le(
            format!("mono({:.3}->{:.3})", w[0].parameter, w[1].parameter),
            w[1].mean,
            w[0].mean,
            w[0].ci_half_width + w[1].ci_half_width,
        ));
    }
    Ok(Diagnostic::from_lines("monotonicity", lines, 0))
}
