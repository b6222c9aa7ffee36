use super::{NormSpec, Point};
use crate::error::{Error, Result};

/// Length of a minimum spanning tree of `points` under `norm`.
///
/// Prim's algorithm on the complete graph; exact optimum, deterministic
/// (starts at index 0, ties resolved by smallest index).
pub fn mst_length(points: &[Point], norm: &NormSpec) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::invalid("mst_length needs at least one point"));
    }
    Ok(mst_with_edges(points, norm).0)
}

/// Prim's MST returning (total length, edge list as index pairs).
pub fn mst_with_edges(points: &[Point], norm: &NormSpec) -> (f64, Vec<(usize, usize)>) {
    let n = points.len();
    if n <= 1 {
        return (0.0, vec![]);
    }
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    in_tree[0] = true;
    for i in 1..n {
        best_dist[i] = norm.dist(&points[0], &points[i]);
    }
    let mut total = 0.0;
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for i in 0..n {
            if !in_tree[i] && best_dist[i] < pick_d {
                pick_d = best_dist[i];
                pick = i;
            }
        }
        in_tree[pick] = true;
        total += pick_d;
        edges.push((best_from[pick].min(pick), best_from[pick].max(pick)));
        for i in 0..n {
            if !in_tree[i] {
                let d = norm.dist(&points[pick], &points[i]);
                if d < best_dist[i] {
                    best_dist[i] = d;
                    best_from[i] = pick;
                }
            }
        }
    }
    (total, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn trivial_cases() {
        let n1 = NormSpec::l1(2);
        assert_eq!(mst_length(&[vec![3.0, 4.0]], &n1).unwrap(), 0.0);
        let collinear = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert_eq!(mst_length(&collinear, &n1).unwrap(), 2.0);
        assert!(mst_length(&[], &n1).is_err());
    }

    /// Exhaustive minimum over all spanning trees via Prüfer sequences.
    fn brute_force_mst(points: &[Point], norm: &NormSpec) -> f64 {
        let n = points.len();
        assert!((2..=7).contains(&n));
        let mut best = f64::INFINITY;
        // all Prüfer sequences of length n-2 over [0, n)
        let seq_count = (n as u64).pow((n - 2) as u32);
        for code in 0..seq_count {
            let mut seq = Vec::with_capacity(n - 2);
            let mut c = code;
            for _ in 0..n - 2 {
                seq.push((c % n as u64) as usize);
                c /= n as u64;
            }
            // decode Prüfer sequence to a tree
            let mut degree = vec![1usize; n];
            for &s in &seq {
                degree[s] += 1;
            }
            let mut total = 0.0;
            let mut deg = degree.clone();
            let mut used = vec![false; n];
            for &s in &seq {
                let leaf = (0..n).find(|&i| deg[i] == 1 && !used[i]).unwrap();
                total += norm.dist(&points[leaf], &points[s]);
                used[leaf] = true;
                deg[s] -= 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&i| !used[i] && deg[i] == 1).collect();
            total += norm.dist(&points[rest[0]], &points[rest[1]]);
            best = best.min(total);
        }
        best
    }

    #[test]
    fn matches_exhaustive_spanning_tree_enumeration() {
        let mut rng = crate::rng::stream_rng(13, &[1]);
        for &pexp in &[1.0, 2.0] {
            let norm = NormSpec::new(super::super::PExp::Finite(pexp), 2).unwrap();
            for _ in 0..20 {
                let n = rng.gen_range(2..=7usize);
                let pts: Vec<Point> = (0..n)
                    .map(|_| (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect())
                    .collect();
                let exact = mst_length(&pts, &norm).unwrap();
                let brute = brute_force_mst(&pts, &norm);
                assert!(
                    (exact - brute).abs() < 1e-9,
                    "prim {exact} vs brute {brute}"
                );
            }
        }
    }
}
