use crate::error::{Error, Result};
use crate::geometry::{GeomPath, NormSpec, Point};

/// Certified constant of the boustrophedon sweep: the construction below
/// provably produces a path of Euclidean length at most
/// `C5_SWEEP · n^{(d−1)/d} · L` through any `n` points of `[0,L]^d`,
/// for d ∈ {2, 3}.
///
/// Derivation (componentwise length bounds, ℓ² ≤ sum of axis travel):
///
/// d = 2, with `m = ⌈√(n/2)⌉` horizontal strips of width `L/m`:
///   within strips: horizontal ≤ m·L (monotone per strip), vertical ≤ n·L/m
///   (one strip width per step); strip changes: ≤ (m−1)(L + 2L/m) ≤ mL + 2L;
///   start leg ≤ 2L. Total ≤ L(2m + n/m + 4) ≤ L(2√(2n) + √(2n) + 6)
///   /√n-normalized ≤ 2√2 + 6 ≈ 8.83 for n ≥ 1.
///
/// d = 3, with `m ≈ 0.71·n^{1/3}` and `m²` columns of cross-section
///   `(L/m)²`: within columns: z ≤ m²·L total, cross-section hops ≤
///   n·√2·L/m; column changes ≤ m²(2√2·L/m + L); start ≤ √3·L. Total
///   ≤ L(2m² + √2·n/m + 2√2·m + √3) ≤ 9·n^{2/3}·L for n ≥ 1.
///
/// Both bounds stay below 9; adversarial grid and random sweeps in the
/// test suite confirm the measured ratio never approaches it.
pub const C5_SWEEP: f64 = 9.0;

/// Boustrophedon strip-sweep path from the origin through all points of
/// `[0, L]^d`, `d ∈ {2, 3}`. Returns the path and the certified ratio
/// `length / (n^{(d−1)/d}·L)`.
pub fn few_tsp_path(points: &[Point], side: f64, dim: usize) -> Result<(GeomPath, f64)> {
    if points.is_empty() {
        return Err(Error::invalid("few_tsp_path needs at least one point"));
    }
    if !(side > 0.0) {
        return Err(Error::invalid("cube side must be positive"));
    }
    if dim != 2 && dim != 3 {
        return Err(Error::Unsupported("sweep construction covers d in {2, 3}".into()));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::invalid("point dimension mismatch"));
        }
        if p.iter().any(|&c| c < 0.0 || c > side) {
            return Err(Error::invalid(format!("point {p:?} outside [0, {side}]^{dim}")));
        }
    }
    let n = points.len();
    let norm = NormSpec::l2(dim);

    let ordered: Vec<Point> = match dim {
        2 => {
            let m = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
            let width = side / m as f64;
            let mut strips: Vec<Vec<Point>> = vec![Vec::new(); m];
            for p in points {
                let idx = ((p[1] / width) as usize).min(m - 1);
                strips[idx].push(p.clone());
            }
            let mut out = Vec::with_capacity(n);
            for (i, strip) in strips.iter_mut().enumerate() {
                strip.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
                if i % 2 == 1 {
                    strip.reverse();
                }
                out.extend(strip.iter().cloned());
            }
            out
        }
        _ => {
            let m = ((0.71 * (n as f64).powf(1.0 / 3.0)).round() as usize).max(1);
            let width = side / m as f64;
            let col = |p: &Point| -> (usize, usize) {
                (
                    ((p[0] / width) as usize).min(m - 1),
                    ((p[1] / width) as usize).min(m - 1),
                )
            };
            let mut cols: Vec<Vec<Point>> = vec![Vec::new(); m * m];
            for p in points {
                let (i, j) = col(p);
                cols[i * m + j].push(p.clone());
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..m {
                let js: Vec<usize> = if i % 2 == 0 {
                    (0..m).collect()
                } else {
                    (0..m).rev().collect()
                };
                for (step, &j) in js.iter().enumerate() {
                    let column = &mut cols[i * m + j];
                    column.sort_by(|a, b| a[2].partial_cmp(&b[2]).unwrap().then(a[0].partial_cmp(&b[0]).unwrap()));
                    if (i + step) % 2 == 1 {
                        column.reverse();
                    }
                    out.extend(column.iter().cloned());
                }
            }
            out
        }
    };

    let mut vertices = Vec::with_capacity(n + 1);
    vertices.push(vec![0.0; dim]);
    vertices.extend(ordered);
    let path = GeomPath::new(vertices)?;
    let len = path.length(&norm);
    let ratio = len / ((n as f64).powf((dim as f64 - 1.0) / dim as f64) * side);
    Ok((path, ratio))
}
