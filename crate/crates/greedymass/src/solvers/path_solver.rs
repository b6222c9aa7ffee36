use super::{
    passes_restriction, sum_masses, Certificate, PathMode, PathQuery, Restriction, SolveResult,
};
use crate::error::{Error, Result};
use crate::geometry::{GeomPath, NormSpec, Point};
use crate::pointproc::MarkedRealization;

/// Exact maximum of the mass over feasible paths.
///
/// Only atoms contribute mass, so the search ranges over ordered subsets of
/// atoms threaded between the anchors; skipping any non-atom vertex of a
/// candidate path can only shorten it without changing its mass.
///
/// Branch and bound over visit sequences; the bound adds the masses of all
/// individually reachable remaining atoms. `node_budget` caps the explored
/// nodes; when exhausted the incumbent is returned with
/// `proven_optimal = false`.
pub fn max_mass_path(
    r: &MarkedRealization,
    q: &PathQuery,
    node_budget: Option<u64>,
) -> Result<SolveResult> {
    let norm = q.validate(r.dim())?;
    let (start, end, ell) = match &q.mode {
        PathMode::FromOrigin { ell } => (vec![0.0; r.dim()], None, *ell),
        PathMode::TwoPoint { x, y, ell } => (x.clone(), Some(y.clone()), *ell),
    };
    check_window(r, &start, end.as_deref(), ell, &norm)?;

    // infeasible two-point query: empty set, value 0, flagged
    if let Some(y) = &end {
        if norm.dist(&start, y) > ell {
            let mut res = SolveResult::empty(0);
            res.infeasible_query = true;
            return Ok(res);
        }
    }

    let (rx, ry) = match &q.mode {
        PathMode::TwoPoint { x, y, .. } => (x.clone(), y.clone()),
        PathMode::FromOrigin { .. } => (start.clone(), start.clone()),
    };

    // anchor-located atoms are always part of the vertex set
    let mut base_indices: Vec<usize> = Vec::new();
    if let Some(i) = r.atom_at(&start) {
        base_indices.push(i);
    }
    if let Some(y) = &end {
        if let Some(i) = r.atom_at(y) {
            if !base_indices.contains(&i) {
                base_indices.push(i);
            }
        }
    }
    base_indices.sort_unstable();

    // candidate pool: reachable, restriction-compatible, not anchor-located
    let mut pool: Vec<usize> = Vec::new();
    for (i, a) in r.atoms.iter().enumerate() {
        if base_indices.contains(&i) {
            continue;
        }
        let reach_ok = match &end {
            None => norm.dist(&start, &a.loc) <= ell,
            Some(y) => norm.dist(&start, &a.loc) + norm.dist(&a.loc, y) <= ell,
        };
        if !reach_ok {
            continue;
        }
        if !matches!(q.restriction, Restriction::None)
            && !passes_restriction(&q.restriction, &rx, &ry, &a.loc)
        {
            continue;
        }
        pool.push(i);
    }
    // explore heavy atoms first
    pool.sort_by(|&a, &b| {
        r.atoms[b]
            .mass
            .partial_cmp(&r.atoms[a].mass)
            .unwrap()
            .then(a.cmp(&b))
    });

    let n = pool.len();
    let masses: Vec<f64> = pool.iter().map(|&i| r.atoms[i].mass).collect();
    let locs: Vec<&Point> = pool.iter().map(|&i| &r.atoms[i].loc).collect();
    let d_start: Vec<f64> = locs.iter().map(|l| norm.dist(&start, l)).collect();
    let d_end: Vec<f64> = match &end {
        Some(y) => locs.iter().map(|l| norm.dist(l, y)).collect(),
        None => vec![0.0; n],
    };
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = norm.dist(locs[i], locs[j]);
        }
    }

    let base_mass = sum_masses(r, &base_indices);

    struct Search<'a> {
        n: usize,
        masses: &'a [f64],
        d_start: &'a [f64],
        d_end: &'a [f64],
        dist: &'a [f64],
        two_point: bool,
        ell: f64,
        base_mass: f64,
        best_value: f64,
        best_order: Vec<usize>,
        nodes: u64,
        budget: u64,
        exhausted: bool,
    }

    impl Search<'_> {
        /// `cur == usize::MAX` means "still at the start anchor".
        fn step_len(&self, cur: usize, next: usize) -> f64 {
            if cur == usize::MAX {
                self.d_start[next]
            } else {
                self.dist[cur * self.n + next]
            }
        }

        fn dfs(&mut self, cur: usize, used: f64, mass: f64, visited: &mut [bool], order: &mut Vec<usize>) {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            let total = self.base_mass + mass;
            if total > self.best_value {
                self.best_value = total;
                self.best_order = order.clone();
            }
            // admissible bound: every remaining individually-reachable mass
            let mut bound = 0.0;
            for a in 0..self.n {
                if !visited[a] && used + self.step_len(cur, a) + self.tail(a) <= self.ell {
                    bound += self.masses[a];
                }
            }
            if total + bound <= self.best_value {
                return;
            }
            for a in 0..self.n {
                if visited[a] {
                    continue;
                }
                let leg = self.step_len(cur, a);
                if used + leg + self.tail(a) > self.ell {
                    continue;
                }
                visited[a] = true;
                order.push(a);
                self.dfs(a, used + leg, mass + self.masses[a], visited, order);
                order.pop();
                visited[a] = false;
                if self.exhausted {
                    return;
                }
            }
        }

        fn tail(&self, a: usize) -> f64 {
            if self.two_point {
                self.d_end[a]
            } else {
                0.0
            }
        }
    }

    let mut search = Search {
        n,
        masses: &masses,
        d_start: &d_start,
        d_end: &d_end,
        dist: &dist,
        two_point: end.is_some(),
        ell,
        base_mass,
        best_value: f64::NEG_INFINITY,
        best_order: vec![],
        nodes: 0,
        budget: node_budget.unwrap_or(u64::MAX),
        exhausted: false,
    };
    let mut visited = vec![false; n];
    let mut order = Vec::new();
    search.dfs(usize::MAX, 0.0, 0.0, &mut visited, &mut order);

    // canonical value: ascending-index summation over the chosen set
    let mut chosen: Vec<usize> = search.best_order.iter().map(|&a| pool[a]).collect();
    let mut all: Vec<usize> = base_indices.clone();
    all.extend(chosen.iter());
    all.sort_unstable();
    let value = sum_masses(r, &all);

    let mut vertices: Vec<Point> = vec![start.clone()];
    chosen = search.best_order.iter().map(|&a| pool[a]).collect();
    for &i in &chosen {
        vertices.push(r.atoms[i].loc.clone());
    }
    if let Some(y) = &end {
        vertices.push(y.clone());
    }
    let certificate = Certificate::Path {
        path: GeomPath::new(vertices)?,
    };
    Ok(SolveResult {
        value,
        certificate,
        nodes_explored: search.nodes,
        proven_optimal: !search.exhausted,
        infeasible_query: false,
    })
}

fn check_window(
    r: &MarkedRealization,
    start: &[f64],
    end: Option<&[f64]>,
    ell: f64,
    norm: &NormSpec,
) -> Result<()> {
    let ok = match end {
        None => r.window.contains_ball(start, ell, norm),
        Some(y) => {
            // every feasible vertex z has d(x,z)+d(z,y) ≤ ℓ, hence lies in
            // the ball of radius ℓ/2 around the midpoint
            let mid: Vec<f64> = start.iter().zip(y).map(|(a, b)| (a + b) / 2.0).collect();
            r.window.contains_ball(&mid, ell / 2.0, norm)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WindowTooSmall(format!(
            "path query reach (ell = {ell}) is not contained in the window"
        )))
    }
}
