use super::{add, dot, norm2, scale, GeomPath, NormSpec, GEOM_TOL};
use crate::error::{Error, Result};

/// Is `path` an `h`-cylinder path for the axis `R·e`?
///
/// Among the vertices within (norm-)distance `h` of the axis, the two path
/// endpoints must realize the minimal and maximal axial coordinate `⟨·,e⟩`
/// (in either orientation).
pub fn is_cylinder_path(path: &GeomPath, h: f64, e: &[f64], norm: &NormSpec) -> bool {
    let vals: Vec<f64> = path.vertices.iter().map(|v| dot(v, e)).collect();
    let cyl: Vec<bool> = path
        .vertices
        .iter()
        .map(|v| axis_dist(v, e, norm) <= h + GEOM_TOL)
        .collect();
    if !cyl[0] || !cyl[cyl.len() - 1] {
        return false;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &c) in cyl.iter().enumerate() {
        if c {
            lo = lo.min(vals[i]);
            hi = hi.max(vals[i]);
        }
    }
    let first = vals[0];
    let last = vals[vals.len() - 1];
    let is_min = |v: f64| v <= lo + GEOM_TOL;
    let is_max = |v: f64| v >= hi - GEOM_TOL;
    (is_min(first) && is_max(last)) || (is_max(first) && is_min(last))
}

fn axis_dist(v: &[f64], e: &[f64], norm: &NormSpec) -> f64 {
    // e is Euclidean-unit, so the projection on R·e is ⟨v,e⟩·e
    let t = dot(v, e);
    let proj = scale(e, t);
    let diff: Vec<f64> = v.iter().zip(&proj).map(|(a, b)| a - b).collect();
    norm.eval(&diff)
}

/// Decompose a path with endpoints on the axis `R·e` into `δ²ℓ`-cylinder
/// paths.
///
/// The input is first extended by two stubs, `(x−δℓe, x)` in front and
/// `(y, y+δℓe)` behind; the returned segments concatenate vertex-for-vertex
/// back to that extended path. Their number is at most `2·len/(δℓ) + 3`
/// where `len` is the length of `path` under `norm`.
pub fn cylinder_decompose(
    path: &GeomPath,
    delta: f64,
    ell: f64,
    e: &[f64],
    norm: &NormSpec,
) -> Result<Vec<GeomPath>> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::invalid(format!("delta must be in (0, 1/4), got {delta}")));
    }
    if ell <= 0.0 {
        return Err(Error::invalid("ell must be positive"));
    }
    if (norm2(e) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("axis direction must be a Euclidean unit vector"));
    }
    let x = &path.vertices[0];
    let y = path.vertices.last().unwrap();
    for (name, v) in [("first", x), ("last", y)] {
        if axis_dist(v, e, norm) > GEOM_TOL {
            return Err(Error::precondition(format!(
                "{name} path vertex must lie on the axis"
            )));
        }
    }

    let h = delta * delta * ell;
    let stub = delta * ell;
    // extended vertex list: front stub, path, back stub
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(path.vertices.len() + 2);
    w.push(add(x, &scale(e, -stub)));
    w.extend(path.vertices.iter().cloned());
    w.push(add(y, &scale(e, stub)));

    let last = w.len() - 1;
    let vals: Vec<f64> = w.iter().map(|v| dot(v, e)).collect();
    let cyl: Vec<bool> = w
        .iter()
        .map(|v| axis_dist(v, e, norm) <= h + GEOM_TOL)
        .collect();

    // global extремes over cylinder indices (both stubs qualify, so the set
    // is never empty)
    let cyl_idx: Vec<usize> = (0..w.len()).filter(|&i| cyl[i]).collect();
    let (mut jstar, mut istar) = (cyl_idx[0], cyl_idx[0]);
    for &i in &cyl_idx {
        if vals[i] < vals[jstar] || (vals[i] == vals[jstar] && i < jstar) {
            jstar = i;
        }
        if vals[i] > vals[istar] || (vals[i] == vals[istar] && i > istar) {
            istar = i;
        }
    }
    // first global argmin / last global argmax with deterministic ties
    let min_val = vals[jstar];
    let max_val = vals[istar];
    jstar = *cyl_idx.iter().find(|&&i| vals[i] == min_val).unwrap();
    istar = *cyl_idx.iter().rev().find(|&&i| vals[i] == max_val).unwrap();

    // case A: the minimum comes first; case B: mirrored roles
    let case_a = jstar <= istar;
    let (mid_lo, mid_hi) = if case_a {
        (jstar, istar)
    } else {
        let j2 = *cyl_idx.iter().find(|&&i| vals[i] == max_val).unwrap();
        let i2 = *cyl_idx.iter().rev().find(|&&i| vals[i] == min_val).unwrap();
        (j2, i2)
    };

    let next_forward = |cur: usize, want_max: bool| -> usize {
        if cur == last {
            return last;
        }
        let mut best = usize::MAX;
        for i in (cur + 1)..=last {
            if !cyl[i] {
                continue;
            }
            if best == usize::MAX
                || (want_max && vals[i] >= vals[best])
                || (!want_max && vals[i] <= vals[best])
            {
                best = i;
            }
        }
        best
    };
    let next_backward = |cur: usize, want_max: bool| -> usize {
        if cur == 0 {
            return 0;
        }
        let mut best = usize::MAX;
        for i in (0..cur).rev() {
            if !cyl[i] {
                continue;
            }
            if best == usize::MAX
                || (want_max && vals[i] > vals[best])
                || (!want_max && vals[i] < vals[best])
            {
                best = i;
            }
        }
        best
    };

    // forward sweep from the middle's high end toward the back stub
    let mut fw_cuts: Vec<usize> = Vec::new();
    {
        let mut cur = mid_hi;
        // type of cur alternates; terminal piece must start at a MIN-type cut
        let mut cur_is_max = if case_a { true } else { false };
        loop {
            let nxt = next_forward(cur, !cur_is_max);
            let gap = (vals[nxt] - vals[cur]).abs() * axis_unit_len(e, norm);
            if !cur_is_max && gap < stub * axis_unit_len(e, norm) {
                break;
            }
            fw_cuts.push(nxt);
            cur = nxt;
            cur_is_max = !cur_is_max;
            if cur == last {
                break;
            }
        }
    }
    // backward sweep from the middle's low end toward the front stub
    let mut bw_cuts: Vec<usize> = Vec::new();
    {
        let mut cur = mid_lo;
        let mut cur_is_max = if case_a { false } else { true };
        loop {
            let nxt = next_backward(cur, !cur_is_max);
            let gap = (vals[cur] - vals[nxt]).abs() * axis_unit_len(e, norm);
            if cur_is_max && gap < stub * axis_unit_len(e, norm) {
                break;
            }
            bw_cuts.push(nxt);
            cur = nxt;
            cur_is_max = !cur_is_max;
            if cur == 0 {
                break;
            }
        }
    }

    // assemble cut indices in path order and emit the segments
    let mut cuts: Vec<usize> = vec![0];
    for &c in bw_cuts.iter().rev() {
        cuts.push(c);
    }
    cuts.push(mid_lo);
    cuts.push(mid_hi);
    cuts.extend(fw_cuts.iter());
    cuts.push(last);
    cuts.sort_unstable();
    cuts.dedup();

    let mut pieces: Vec<GeomPath> = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            continue;
        }
        pieces.push(GeomPath::new(w[a..=b].to_vec())?);
    }

    // greedy merge of adjacent segments that still form a cylinder path
    let mut merged = true;
    while merged {
        merged = false;
        let mut i = 0;
        while i + 1 < pieces.len() {
            let mut candidate = pieces[i].vertices.clone();
            candidate.extend(pieces[i + 1].vertices.iter().skip(1).cloned());
            let candidate = GeomPath::new(candidate)?;
            if is_cylinder_path(&candidate, h, e, norm) {
                pieces[i] = candidate;
                pieces.remove(i + 1);
                merged = true;
            } else {
                i += 1;
            }
        }
    }

    debug_assert!(pieces
        .iter()
        .all(|p| is_cylinder_path(p, h, e, norm)));
    Ok(pieces)
}

/// Norm-length of the Euclidean-unit axis direction; converts axial gaps
/// measured in `⟨·,e⟩` units into norm lengths of projected differences.
fn axis_unit_len(e: &[f64], norm: &NormSpec) -> f64 {
    norm.eval(e)
}
