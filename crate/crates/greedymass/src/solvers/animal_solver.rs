use serde::{Deserialize, Serialize};

use super::{
    max_mass_path, passes_restriction, sum_masses, Anchors, AnimalQuery, Certificate, PathMode,
    PathQuery, QValue, Restriction, SolveResult,
};
use crate::error::{Error, Result};
use crate::geometry::{Animal, NormSpec};
use crate::pointproc::MarkedRealization;

/// Exact maximum of the mass over q = ∞ animals: subsets `S` of the atom
/// set with `MST(S) + d(x,S) (+ d(y,S)) ≤ ℓ`, the empty set being feasible
/// with value 0.
///
/// Branch and bound over include/exclude decisions in a fixed atom order.
/// Since the MST of a superset can be shorter than that of its subset
/// (extra atoms act as Steiner points), infeasibility of `S` does not
/// close a branch; pruning uses a lower bound valid for every superset:
/// the MST of `S` plus a supernode Ω standing for all undecided atoms and
/// the anchors (contracting them can only shorten any realization).
pub fn max_mass_animal_inf(
    r: &MarkedRealization,
    q: &AnimalQuery,
    node_budget: Option<u64>,
) -> Result<SolveResult> {
    let norm = q.validate(r.dim())?;
    if q.q != QValue::Inf {
        return Err(Error::Unsupported(
            "exact animal solving requires q = inf; use bracket_animal for finite q".into(),
        ));
    }
    let (x, y) = match &q.anchors {
        Anchors::One { x } => (x.clone(), None),
        Anchors::Two { x, y } => (x.clone(), Some(y.clone())),
    };
    check_window(r, &x, y.as_deref(), q.ell, &norm)?;

    // admissible pool
    let dxy = y.as_ref().map(|y| norm.dist(&x, y)).unwrap_or(0.0);
    let mut pool: Vec<usize> = Vec::new();
    for (i, a) in r.atoms.iter().enumerate() {
        let admissible = match &y {
            None => norm.dist(&x, &a.loc) <= q.ell,
            Some(y) => {
                // Steiner bound: any connected realization through a has
                // length at least half the triangle perimeter
                (norm.dist(&x, &a.loc) + norm.dist(&a.loc, y) + dxy) / 2.0 <= q.ell
            }
        };
        if !admissible {
            continue;
        }
        if !matches!(q.restriction, Restriction::None) {
            let ry = y.as_ref().expect("validated");
            if !passes_restriction(&q.restriction, &x, ry, &a.loc) {
                continue;
            }
        }
        pool.push(i);
    }
    // heavy atoms first, then central ones
    pool.sort_by(|&a, &b| {
        let ma = r.atoms[a].mass;
        let mb = r.atoms[b].mass;
        let ca = norm.dist(&x, &r.atoms[a].loc)
            + y.as_ref().map(|y| norm.dist(&r.atoms[a].loc, y)).unwrap_or(0.0);
        let cb = norm.dist(&x, &r.atoms[b].loc)
            + y.as_ref().map(|y| norm.dist(&r.atoms[b].loc, y)).unwrap_or(0.0);
        mb.partial_cmp(&ma)
            .unwrap()
            .then(ca.partial_cmp(&cb).unwrap())
            .then(a.cmp(&b))
    });

    let n = pool.len();
    let masses: Vec<f64> = pool.iter().map(|&i| r.atoms[i].mass).collect();
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = norm.dist(&r.atoms[pool[i]].loc, &r.atoms[pool[j]].loc);
        }
    }
    let dx: Vec<f64> = pool.iter().map(|&i| norm.dist(&x, &r.atoms[i].loc)).collect();
    let dy: Vec<f64> = match &y {
        Some(y) => pool.iter().map(|&i| norm.dist(y, &r.atoms[i].loc)).collect(),
        None => vec![0.0; n],
    };
    let two = y.is_some();
    let mut suffix_mass = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        suffix_mass[i] = suffix_mass[i + 1] + masses[i];
    }

    // halved nearest-neighbor distance: every vertex of a realization pays
    // at least this much (each edge is shared by at most two vertices)
    let mut nn_half = vec![0.0f64; n];
    for i in 0..n {
        let mut d = dx[i];
        if two {
            d = d.min(dy[i]);
        }
        for j in 0..n {
            if j != i {
                d = d.min(dist[i * n + j]);
            }
        }
        nn_half[i] = d / 2.0;
    }
    // per-suffix fractional knapsack tables: suffix atoms sorted by
    // mass/nn_half ratio with prefix sums
    let mut knap: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n + 1);
    for pos in 0..=n {
        let mut items: Vec<(f64, f64)> = (pos..n).map(|i| (nn_half[i], masses[i])).collect();
        items.sort_by(|a, b| {
            let ra = a.1 / (a.0 + 1e-12);
            let rb = b.1 / (b.0 + 1e-12);
            rb.partial_cmp(&ra).unwrap()
        });
        let mut acc = Vec::with_capacity(items.len() + 1);
        let (mut c, mut m) = (0.0, 0.0);
        acc.push((0.0, 0.0));
        for (ci, mi) in items {
            c += ci;
            m += mi;
            acc.push((c, m));
        }
        knap.push(acc);
    }

    let mut search = Search {
        n,
        masses: &masses,
        dist: &dist,
        dx: &dx,
        dy: &dy,
        two,
        ell: q.ell,
        suffix_mass: &suffix_mass,
        nn_half: &nn_half,
        knap: &knap,
        best_value: 0.0,
        best_set: vec![],
        nodes: 0,
        budget: node_budget.unwrap_or(u64::MAX),
        exhausted: false,
    };

    // greedy incumbents: best mass/cost ratio and plain heaviest-first
    for ratio_mode in [true, false] {
        let (v, s) = search.greedy(ratio_mode);
        if v > search.best_value {
            search.best_value = v;
            search.best_set = s;
        }
    }

    let mut in_set = Vec::new();
    search.dfs(0, 0.0, 0.0, &mut in_set);

    let mut chosen: Vec<usize> = search.best_set.iter().map(|&i| pool[i]).collect();
    chosen.sort_unstable();
    let value = sum_masses(r, &chosen);
    let certificate = if chosen.is_empty() {
        Certificate::Empty
    } else {
        let points: Vec<Vec<f64>> = chosen.iter().map(|&i| r.atoms[i].loc.clone()).collect();
        let (_, edges) = crate::geometry::mst_with_edges(&points, &norm);
        Certificate::Animal {
            animal: Animal::new(points, edges)?,
        }
    };
    Ok(SolveResult {
        value,
        certificate,
        nodes_explored: search.nodes,
        proven_optimal: !search.exhausted,
        infeasible_query: false,
    })
}

struct Search<'a> {
    n: usize,
    masses: &'a [f64],
    dist: &'a [f64],
    dx: &'a [f64],
    dy: &'a [f64],
    two: bool,
    ell: f64,
    suffix_mass: &'a [f64],
    nn_half: &'a [f64],
    knap: &'a [Vec<(f64, f64)>],
    best_value: f64,
    best_set: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Search<'_> {
    /// Exact anchored cost of the set `s` (pool indices).
    fn exact_cost(&self, s: &[usize]) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        let mst = self.prim(s, None);
        let ax = s.iter().map(|&i| self.dx[i]).fold(f64::INFINITY, f64::min);
        let ay = if self.two {
            s.iter().map(|&i| self.dy[i]).fold(f64::INFINITY, f64::min)
        } else {
            0.0
        };
        mst + ax + ay
    }

    /// Prim over `s`, optionally with a supernode at the given per-member
    /// distances (`omega[k]` for `s[k]`).
    fn prim(&self, s: &[usize], omega: Option<&[f64]>) -> f64 {
        let k = s.len() + omega.is_some() as usize;
        if k <= 1 {
            return 0.0;
        }
        let idx = |a: usize, b: usize| -> f64 {
            let sl = s.len();
            if a < sl && b < sl {
                self.dist[s[a] * self.n + s[b]]
            } else if a < sl {
                omega.unwrap()[a]
            } else {
                omega.unwrap()[b]
            }
        };
        let mut in_tree = vec![false; k];
        let mut best = vec![f64::INFINITY; k];
        in_tree[0] = true;
        for i in 1..k {
            best[i] = idx(0, i);
        }
        let mut total = 0.0;
        for _ in 1..k {
            let mut pick = usize::MAX;
            let mut pd = f64::INFINITY;
            for i in 0..k {
                if !in_tree[i] && best[i] < pd {
                    pd = best[i];
                    pick = i;
                }
            }
            in_tree[pick] = true;
            total += pd;
            for i in 0..k {
                if !in_tree[i] {
                    let d = idx(pick, i);
                    if d < best[i] {
                        best[i] = d;
                    }
                }
            }
        }
        total
    }

    /// Lower bound on the cost of every `T ⊇ s` with `T ∖ s ⊆ {pos..}`:
    /// contract the undecided suffix and the anchors into one supernode.
    fn superset_cost_lb(&self, s: &[usize], pos: usize) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        let mut omega = Vec::with_capacity(s.len());
        for &i in s {
            let mut d = self.dx[i];
            if self.two {
                d = d.min(self.dy[i]);
            }
            for u in pos..self.n {
                let du = self.dist[i * self.n + u];
                if du < d {
                    d = du;
                }
            }
            omega.push(d);
        }
        self.prim(s, Some(&omega))
    }

    /// Best additional mass from the suffix `pos..` within cost capacity
    /// `budget`, in the fractional relaxation with per-atom costs
    /// `nn_half` (admissible upper bound).
    fn knapsack_bound(&self, pos: usize, budget: f64) -> f64 {
        if budget <= 0.0 {
            return 0.0;
        }
        let acc = &self.knap[pos];
        // binary search the largest prefix within budget
        let mut lo = 0usize;
        let mut hi = acc.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if acc[mid].0 <= budget {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let (c, m) = acc[lo];
        if lo + 1 < acc.len() {
            let (cn, mn) = acc[lo + 1];
            let seg_cost = cn - c;
            let seg_mass = mn - m;
            if seg_cost > 0.0 {
                return m + seg_mass * ((budget - c) / seg_cost).clamp(0.0, 1.0);
            }
            return mn;
        }
        m
    }

    fn dfs(&mut self, pos: usize, set_mass: f64, nn_base: f64, s: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        // nothing left to decide, or no chance to beat the incumbent
        if pos >= self.n || set_mass + self.suffix_mass[pos] <= self.best_value {
            return;
        }
        if nn_base > self.ell {
            return;
        }
        if set_mass + self.knapsack_bound(pos, self.ell - nn_base) <= self.best_value {
            return;
        }
        if self.superset_cost_lb(s, pos) > self.ell {
            return;
        }
        // include pool[pos]
        s.push(pos);
        let new_mass = set_mass + self.masses[pos];
        if new_mass > self.best_value && self.exact_cost(s) <= self.ell {
            self.best_value = new_mass;
            self.best_set = s.clone();
        }
        self.dfs(pos + 1, new_mass, nn_base + self.nn_half[pos], s);
        s.pop();
        if self.exhausted {
            return;
        }
        // exclude pool[pos]
        self.dfs(pos + 1, set_mass, nn_base, s);
    }

    fn greedy(&self, ratio_mode: bool) -> (f64, Vec<usize>) {
        let mut s: Vec<usize> = Vec::new();
        let mut mass = 0.0;
        loop {
            let mut best: Option<(f64, usize, f64)> = None; // (score, atom, cost)
            let cur_cost = self.exact_cost(&s);
            for cand in 0..self.n {
                if s.contains(&cand) {
                    continue;
                }
                s.push(cand);
                let c = self.exact_cost(&s);
                s.pop();
                if c > self.ell {
                    continue;
                }
                let delta = (c - cur_cost).max(0.0);
                let score = if ratio_mode {
                    self.masses[cand] / (delta + 1e-9)
                } else {
                    self.masses[cand]
                };
                if best.map(|(b, _, _)| score > b).unwrap_or(true) {
                    best = Some((score, cand, c));
                }
            }
            match best {
                Some((_, cand, _)) => {
                    s.push(cand);
                    mass += self.masses[cand];
                }
                None => break,
            }
        }
        (mass, s)
    }
}

/// Two-sided bracket for the penalized animal functional at penalty `q`.
///
/// `lower = max(P(ℓ), Â^∞(ℓ))` and `upper = P(2ℓ)` frame `A^(q)(ℓ)` for
/// every `q ∈ [0, ∞]`; at `q = ∞` both sides collapse to the exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketResult {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub lower_proven: bool,
    pub upper_proven: bool,
}

pub fn bracket_animal(
    r: &MarkedRealization,
    q: &AnimalQuery,
    node_budget: Option<u64>,
) -> Result<BracketResult> {
    q.validate(r.dim())?;
    let mut exact_query = q.clone();
    exact_query.q = QValue::Inf;
    let animal = max_mass_animal_inf(r, &exact_query, node_budget)?;
    if q.q == QValue::Inf {
        return Ok(BracketResult {
            lower: animal.value,
            upper: animal.value,
            exact: true,
            lower_proven: animal.proven_optimal,
            upper_proven: animal.proven_optimal,
        });
    }
    let (path_lo, path_hi) = match &q.anchors {
        Anchors::One { x } => {
            // anchored paths are solved from the origin on the shifted
            // realization
            let minus: Vec<f64> = x.iter().map(|c| -c).collect();
            let shifted = r.shift(&minus);
            let lo = max_mass_path(
                &shifted,
                &PathQuery {
                    mode: PathMode::FromOrigin { ell: q.ell },
                    restriction: Restriction::None,
                    norm: q.norm,
                },
                node_budget,
            )?;
            let hi = max_mass_path(
                &shifted,
                &PathQuery {
                    mode: PathMode::FromOrigin { ell: 2.0 * q.ell },
                    restriction: Restriction::None,
                    norm: q.norm,
                },
                node_budget,
            )?;
            (lo, hi)
        }
        Anchors::Two { x, y } => {
            let lo = max_mass_path(
                r,
                &PathQuery {
                    mode: PathMode::TwoPoint {
                        x: x.clone(),
                        y: y.clone(),
                        ell: q.ell,
                    },
                    restriction: q.restriction,
                    norm: q.norm,
                },
                node_budget,
            )?;
            let hi = max_mass_path(
                r,
                &PathQuery {
                    mode: PathMode::TwoPoint {
                        x: x.clone(),
                        y: y.clone(),
                        ell: 2.0 * q.ell,
                    },
                    restriction: q.restriction,
                    norm: q.norm,
                },
                node_budget,
            )?;
            (lo, hi)
        }
    };
    // lower bounds stay valid under budget caps; the upper bound needs the
    // proof flag to be meaningful
    Ok(BracketResult {
        lower: path_lo.value.max(animal.value),
        upper: path_hi.value,
        exact: false,
        lower_proven: true,
        upper_proven: path_hi.proven_optimal,
    })
}

fn check_window(
    r: &MarkedRealization,
    x: &[f64],
    y: Option<&[f64]>,
    ell: f64,
    norm: &NormSpec,
) -> Result<()> {
    let ok = match y {
        None => r.window.contains_ball(x, ell, norm),
        Some(y) => {
            let dxy = norm.dist(x, y);
            let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a + b) / 2.0).collect();
            r.window.contains_ball(&mid, (ell - dxy / 2.0).max(0.0), norm)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WindowTooSmall(format!(
            "animal query reach (ell = {ell}) is not contained in the window"
        )))
    }
}
