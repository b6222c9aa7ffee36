use std::collections::{HashMap, HashSet};

use super::{
    max_mass_animal_inf, sum_masses, Anchors, AnimalQuery, Certificate, NormParam, QValue,
    Restriction, SolveResult,
};
use crate::error::{Error, Result};
use crate::geometry::{Animal, GeomPath};
use crate::pointproc::MarkedRealization;

fn site_of(loc: &[f64]) -> Option<Vec<i64>> {
    let mut out = Vec::with_capacity(loc.len());
    for &c in loc {
        if c.fract() != 0.0 {
            return None;
        }
        out.push(c as i64);
    }
    Some(out)
}

fn l1(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

struct LatticeInstance<'a> {
    r: &'a MarkedRealization,
    /// positive-mass sites -> atom index
    atoms: HashMap<Vec<i64>, usize>,
}

impl<'a> LatticeInstance<'a> {
    fn new(r: &'a MarkedRealization) -> Result<Self> {
        if !r.lattice {
            return Err(Error::precondition("lattice solver needs a lattice realization"));
        }
        let mut atoms = HashMap::new();
        for (i, a) in r.atoms.iter().enumerate() {
            let site = site_of(&a.loc)
                .ok_or_else(|| Error::invalid("lattice realization has off-lattice atom"))?;
            atoms.insert(site, i);
        }
        Ok(LatticeInstance { r, atoms })
    }

    fn mass(&self, site: &[i64]) -> f64 {
        self.atoms
            .get(site)
            .map(|&i| self.r.atoms[i].mass)
            .unwrap_or(0.0)
    }

    fn in_window(&self, site: &[i64]) -> bool {
        let loc: Vec<f64> = site.iter().map(|&c| c as f64).collect();
        self.r.window.contains(&loc, 1e-9)
    }

    fn neighbors(&self, site: &[i64]) -> Vec<Vec<i64>> {
        let d = site.len();
        let mut out = Vec::with_capacity(2 * d);
        for k in 0..d {
            for s in [-1i64, 1] {
                let mut n = site.to_vec();
                n[k] += s;
                if self.in_window(&n) {
                    out.push(n);
                }
            }
        }
        // heavier neighbors first, deterministic ties
        out.sort_by(|a, b| {
            self.mass(b)
                .partial_cmp(&self.mass(a))
                .unwrap()
                .then(a.cmp(b))
        });
        out
    }
}

/// Exact maximal mass of a connected subset of `Z^d` of cardinality at most
/// `n` containing the anchors (one or two).
///
/// Connected supersets of the root are enumerated once each (candidate
/// list with an include-then-forbid discipline); branches are cut with a
/// sorted-mass completion bound over the still-reachable positive sites.
pub fn lattice_max_animal(
    r: &MarkedRealization,
    n: usize,
    anchors: &[Vec<i64>],
    node_budget: Option<u64>,
) -> Result<SolveResult> {
    let inst = LatticeInstance::new(r)?;
    if n == 0 || anchors.is_empty() || anchors.len() > 2 {
        return Err(Error::invalid("lattice animal needs n >= 1 and 1..=2 anchors"));
    }
    let root = anchors[0].clone();
    let second = anchors.get(1).filter(|y| **y != root).cloned();
    // the window bounds the feasible region; it only needs room for n sites
    for a in anchors {
        let af: Vec<f64> = a.iter().map(|&c| c as f64).collect();
        if !r.window.contains(&af, 1e-9) {
            return Err(Error::precondition("anchor lies outside the window"));
        }
    }
    if n > window_site_capacity(&r.window) {
        return Err(Error::SizeCap(format!(
            "n = {n} exceeds the window capacity"
        )));
    }

    // positive sites for the completion bound
    let positive: Vec<(Vec<i64>, f64)> = inst
        .atoms
        .iter()
        .map(|(s, &i)| (s.clone(), inst.r.atoms[i].mass))
        .collect();

    struct Search<'a> {
        inst: &'a LatticeInstance<'a>,
        n: usize,
        second: Option<Vec<i64>>,
        positive: &'a [(Vec<i64>, f64)],
        /// min l1 distance from each positive site to the current set
        pos_dist: Vec<i64>,
        best_value: f64,
        best_set: Vec<Vec<i64>>,
        nodes: u64,
        budget: u64,
        exhausted: bool,
    }

    impl Search<'_> {
        fn completion_bound(&self, set_len: usize) -> f64 {
            let k = self.n - set_len;
            if k == 0 {
                return 0.0;
            }
            let mut cands: Vec<f64> = Vec::new();
            for (i, (_, m)) in self.positive.iter().enumerate() {
                if self.pos_dist[i] != 0 && self.pos_dist[i] <= k as i64 {
                    cands.push(*m);
                }
            }
            cands.sort_by(|a, b| b.partial_cmp(a).unwrap());
            cands.iter().take(k).sum()
        }

        fn try_incumbent(&mut self, set: &[Vec<i64>], has_second: bool) {
            if self.second.is_some() && !has_second {
                return;
            }
            let mut idxs: Vec<usize> = set
                .iter()
                .filter_map(|s| self.inst.atoms.get(s).copied())
                .collect();
            idxs.sort_unstable();
            let value = sum_masses(self.inst.r, &idxs);
            if value > self.best_value {
                self.best_value = value;
                self.best_set = set.to_vec();
            }
        }

        #[allow(clippy::too_many_arguments)]
        fn rec(
            &mut self,
            ext: &mut Vec<Vec<i64>>,
            start: usize,
            set: &mut Vec<Vec<i64>>,
            set_mass: f64,
            has_second: bool,
            dy_min: i64,
            known: &mut HashSet<Vec<i64>>,
        ) {
            if set.len() >= self.n {
                return;
            }
            let mut idx = start;
            while idx < ext.len() {
                self.nodes += 1;
                if self.nodes > self.budget {
                    self.exhausted = true;
                    return;
                }
                let cell = ext[idx].clone();
                let cell_mass = self.inst.mass(&cell);
                let now_second = has_second || Some(&cell) == self.second.as_ref();
                let new_dy = match &self.second {
                    Some(y) => dy_min.min(l1(y, &cell)),
                    None => 0,
                };
                set.push(cell.clone());
                // update distances of positive sites to the set
                let mut touched: Vec<(usize, i64)> = Vec::new();
                for (i, (s, _)) in self.positive.iter().enumerate() {
                    let d = l1(s, &cell);
                    if d < self.pos_dist[i] {
                        touched.push((i, self.pos_dist[i]));
                        self.pos_dist[i] = d;
                    }
                }
                self.try_incumbent(set, now_second);
                // second anchor must still be connectable within the budget
                let second_ok = new_dy as usize <= self.n - set.len().min(self.n);
                let bound_ok =
                    set_mass + cell_mass + self.completion_bound(set.len()) > self.best_value;
                if set.len() < self.n && second_ok && bound_ok {
                    let old_len = ext.len();
                    for nb in self.inst.neighbors(&cell) {
                        if !known.contains(&nb) {
                            known.insert(nb.clone());
                            ext.push(nb);
                        }
                    }
                    self.rec(ext, idx + 1, set, set_mass + cell_mass, now_second, new_dy, known);
                    for cell in ext.drain(old_len..) {
                        known.remove(&cell);
                    }
                }
                set.pop();
                for (i, old) in touched {
                    self.pos_dist[i] = old;
                }
                if self.exhausted {
                    return;
                }
                idx += 1;
            }
        }
    }

    let mut search = Search {
        inst: &inst,
        n,
        second: second.clone(),
        positive: &positive,
        pos_dist: positive.iter().map(|(s, _)| l1(s, &root)).collect(),
        best_value: 0.0,
        best_set: vec![],
        nodes: 0,
        budget: node_budget.unwrap_or(u64::MAX),
        exhausted: false,
    };

    let mut known: HashSet<Vec<i64>> = HashSet::new();
    known.insert(root.clone());
    let mut ext: Vec<Vec<i64>> = Vec::new();
    for nb in inst.neighbors(&root) {
        if known.insert(nb.clone()) {
            ext.push(nb);
        }
    }
    let mut set = vec![root.clone()];
    let dy0 = second.as_ref().map(|y| l1(y, &root)).unwrap_or(0);
    search.try_incumbent(&set, second.is_none() || dy0 == 0);
    let root_mass = inst.mass(&root);
    if second.as_ref().map(|y| l1(y, &root) as usize) <= Some(n - 1) || second.is_none() {
        search.rec(&mut ext, 0, &mut set, root_mass, dy0 == 0, dy0, &mut known);
    }

    let value = search.best_value;
    let certificate = if search.best_set.is_empty() {
        Certificate::Empty
    } else {
        lattice_set_certificate(&search.best_set)
    };
    Ok(SolveResult {
        value,
        certificate,
        nodes_explored: search.nodes,
        proven_optimal: !search.exhausted,
        infeasible_query: false,
    })
}

/// Number of lattice sites inside the window (box windows exactly; ball
/// windows through the bounding box, an upper bound that suffices for the
/// capacity check).
fn window_site_capacity(window: &crate::pointproc::Window) -> usize {
    match window {
        crate::pointproc::Window::Box {
            center,
            half_widths,
        } => center
            .iter()
            .zip(half_widths)
            .map(|(c, h)| {
                let lo = (c - h).ceil() as i64;
                let hi = (c + h).floor() as i64;
                (hi - lo + 1).max(0) as usize
            })
            .product(),
        crate::pointproc::Window::Ball { center, radius, .. } => center
            .iter()
            .map(|c| {
                let lo = (c - radius).ceil() as i64;
                let hi = (c + radius).floor() as i64;
                (hi - lo + 1).max(0) as usize
            })
            .product(),
    }
}

/// Certificate animal for a connected lattice set: vertices are the sites,
/// edges join lattice neighbors.
fn lattice_set_certificate(set: &[Vec<i64>]) -> Certificate {
    let mut sorted = set.to_vec();
    sorted.sort();
    let vertices: Vec<Vec<f64>> = sorted
        .iter()
        .map(|s| s.iter().map(|&c| c as f64).collect())
        .collect();
    let mut edges = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if l1(&sorted[i], &sorted[j]) == 1 {
                edges.push((i, j));
            }
        }
    }
    match Animal::new(vertices, edges) {
        Ok(animal) => Certificate::Animal { animal },
        Err(_) => Certificate::Empty,
    }
}

/// Exact maximal vertex-set mass of a lattice path with `n` steps from the
/// anchor. `self_avoiding` forbids vertex revisits (`P^L ≥ P^L_sa` always,
/// since revisiting adds no mass).
pub fn lattice_max_path(
    r: &MarkedRealization,
    n_steps: usize,
    anchor: &[i64],
    self_avoiding: bool,
    node_budget: Option<u64>,
) -> Result<SolveResult> {
    let inst = LatticeInstance::new(r)?;
    let anchor_f: Vec<f64> = anchor.iter().map(|&c| c as f64).collect();
    if !r.window.contains(&anchor_f, 1e-9) {
        return Err(Error::precondition("anchor lies outside the window"));
    }
    let positive: Vec<(Vec<i64>, f64)> = inst
        .atoms
        .iter()
        .map(|(s, &i)| (s.clone(), inst.r.atoms[i].mass))
        .collect();

    struct Search<'a> {
        inst: &'a LatticeInstance<'a>,
        n: usize,
        self_avoiding: bool,
        positive: &'a [(Vec<i64>, f64)],
        /// prefix sums of the masses sorted descending
        mass_prefix: &'a [f64],
        /// per-node distance scans only pay off on small instances
        distance_aware: bool,
        best_value: f64,
        best_path: Vec<Vec<i64>>,
        nodes: u64,
        budget: u64,
        exhausted: bool,
    }

    impl Search<'_> {
        fn bound(&self, pos: &[i64], steps_left: usize, visited: &HashSet<Vec<i64>>) -> f64 {
            if !self.distance_aware {
                // top masses regardless of position or visit state
                return self.mass_prefix[steps_left.min(self.mass_prefix.len() - 1)];
            }
            let mut cands: Vec<f64> = Vec::new();
            for (s, m) in self.positive.iter() {
                if !visited.contains(s) && l1(s, pos) <= steps_left as i64 {
                    cands.push(*m);
                }
            }
            cands.sort_by(|a, b| b.partial_cmp(a).unwrap());
            cands.iter().take(steps_left).sum()
        }

        fn try_incumbent(&mut self, path: &[Vec<i64>], visited: &HashSet<Vec<i64>>) {
            let mut idxs: Vec<usize> = visited
                .iter()
                .filter_map(|s| self.inst.atoms.get(s).copied())
                .collect();
            idxs.sort_unstable();
            let value = sum_masses(self.inst.r, &idxs);
            if value > self.best_value {
                self.best_value = value;
                self.best_path = path.to_vec();
            }
        }

        fn rec(
            &mut self,
            path: &mut Vec<Vec<i64>>,
            visited: &mut HashSet<Vec<i64>>,
            mass: f64,
            steps_left: usize,
        ) {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            if steps_left == 0 {
                return;
            }
            let cur = path.last().unwrap().clone();
            if mass + self.bound(&cur, steps_left, visited) <= self.best_value {
                return;
            }
            for nb in self.inst.neighbors(&cur) {
                let fresh = !visited.contains(&nb);
                if self.self_avoiding && !fresh {
                    continue;
                }
                let gained = if fresh { self.inst.mass(&nb) } else { 0.0 };
                if fresh {
                    visited.insert(nb.clone());
                }
                path.push(nb.clone());
                if fresh && gained > 0.0 {
                    self.try_incumbent(path, visited);
                }
                self.rec(path, visited, mass + gained, steps_left - 1);
                path.pop();
                if fresh {
                    visited.remove(&nb);
                }
                if self.exhausted {
                    return;
                }
            }
        }
    }

    let mut sorted_masses: Vec<f64> = positive.iter().map(|(_, m)| *m).collect();
    sorted_masses.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut mass_prefix = Vec::with_capacity(sorted_masses.len() + 1);
    mass_prefix.push(0.0);
    for m in &sorted_masses {
        mass_prefix.push(mass_prefix.last().unwrap() + m);
    }

    let mut search = Search {
        inst: &inst,
        n: n_steps,
        self_avoiding,
        positive: &positive,
        mass_prefix: &mass_prefix,
        distance_aware: positive.len() <= 512,
        best_value: 0.0,
        best_path: vec![anchor.to_vec()],
        nodes: 0,
        budget: node_budget.unwrap_or(u64::MAX),
        exhausted: false,
    };
    let _ = search.n;

    // seed with two-leg (row then column) paths; in particular the best
    // straight run into a heavy column is an incumbent before the DFS
    if anchor.len() == 2 {
        for dx in -(n_steps as i64)..=(n_steps as i64) {
            let rest = n_steps as i64 - dx.abs();
            for dir in [-1i64, 1] {
                let mut visited: HashSet<Vec<i64>> = HashSet::new();
                let mut path = vec![anchor.to_vec()];
                visited.insert(anchor.to_vec());
                let sx = if dx >= 0 { 1 } else { -1 };
                let mut ok = true;
                for step in 1..=dx.abs() {
                    let cell = vec![anchor[0] + sx * step, anchor[1]];
                    if !inst.in_window(&cell) {
                        ok = false;
                        break;
                    }
                    visited.insert(cell.clone());
                    path.push(cell);
                }
                if !ok {
                    continue;
                }
                for step in 1..=rest {
                    let last = path.last().unwrap().clone();
                    let cell = vec![last[0], last[1] + dir];
                    if !inst.in_window(&cell) {
                        break;
                    }
                    visited.insert(cell.clone());
                    path.push(cell);
                    let _ = step;
                }
                search.try_incumbent(&path, &visited);
            }
        }
    }
    // the anchor alone (zero steps taken) is always feasible
    {
        let mut visited = HashSet::new();
        visited.insert(anchor.to_vec());
        search.try_incumbent(&[anchor.to_vec()], &visited);
    }

    let mut visited = HashSet::new();
    visited.insert(anchor.to_vec());
    let mut path = vec![anchor.to_vec()];
    let start_mass = inst.mass(anchor);
    search.rec(&mut path, &mut visited, start_mass, n_steps);

    let vertices: Vec<Vec<f64>> = search
        .best_path
        .iter()
        .map(|s| s.iter().map(|&c| c as f64).collect())
        .collect();
    Ok(SolveResult {
        value: search.best_value,
        certificate: Certificate::Path {
            path: GeomPath::new(vertices)?,
        },
        nodes_explored: search.nodes,
        proven_optimal: !search.exhausted,
        infeasible_query: false,
    })
}

/// Cross-solver identity: the lattice animal value at cardinality `n+1`
/// equals the q = ∞ continuum value at budget `n` under the l1 norm, on
/// the same atoms.
pub fn lattice_reduction_check(
    r: &MarkedRealization,
    x: &[i64],
    y: &[i64],
    n: usize,
    node_budget: Option<u64>,
) -> Result<bool> {
    let inst = LatticeInstance::new(r)?;
    let lattice_side = lattice_max_animal(
        r,
        n + 1,
        &if x == y {
            vec![x.to_vec()]
        } else {
            vec![x.to_vec(), y.to_vec()]
        },
        node_budget,
    )?;
    let continuum_side = if n == 0 {
        // budget 0: only an atom exactly at x = y qualifies
        if x == y {
            inst.mass(x)
        } else {
            0.0
        }
    } else {
        let xf: Vec<f64> = x.iter().map(|&c| c as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let q = AnimalQuery {
            anchors: if x == y {
                Anchors::One { x: xf }
            } else {
                Anchors::Two { x: xf, y: yf }
            },
            ell: n as f64,
            q: QValue::Inf,
            restriction: Restriction::None,
            norm: NormParam::l1(),
        };
        max_mass_animal_inf(r, &q, node_budget)?.value
    };
    Ok(lattice_side.value == continuum_side)
}
