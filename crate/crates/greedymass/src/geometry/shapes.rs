use serde::{Deserialize, Serialize};

use super::{approx_eq_point, NormSpec, Point, GEOM_TOL};
use crate::error::{Error, Result};

/// A continuous path: a finite, non-empty sequence of points of R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeomPathRaw")]
pub struct GeomPath {
    pub vertices: Vec<Point>,
}

#[derive(Deserialize)]
struct GeomPathRaw {
    vertices: Vec<Point>,
}

impl TryFrom<GeomPathRaw> for GeomPath {
    type Error = Error;
    fn try_from(raw: GeomPathRaw) -> Result<Self> {
        GeomPath::new(raw.vertices)
    }
}

impl GeomPath {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("a path needs at least one vertex"));
        }
        let d = vertices[0].len();
        if d == 0 || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("path vertices must share a positive dimension"));
        }
        Ok(GeomPath { vertices })
    }

    pub fn single(v: Point) -> Self {
        GeomPath { vertices: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Total length `Σ ‖x_i − x_{i+1}‖`; 0 for a single vertex.
    pub fn length(&self, norm: &NormSpec) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| norm.dist(&w[0], &w[1]))
            .sum()
    }

    /// The animal with this path's vertex set and consecutive edges
    /// (duplicate vertices and edges collapse, set semantics).
    pub fn to_animal(&self) -> Animal {
        let mut vertices: Vec<Point> = Vec::new();
        let mut index = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            match vertices.iter().position(|u| u == v) {
                Some(i) => index.push(i),
                None => {
                    vertices.push(v.clone());
                    index.push(vertices.len() - 1);
                }
            }
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for w in index.windows(2) {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            if a != b && !edges.contains(&(a, b)) {
                edges.push((a, b));
            }
        }
        Animal { vertices, edges }
    }
}

/// A continuous animal: a finite connected graph whose vertices are points
/// of R^d. Edges are unordered index pairs into `vertices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnimalRaw")]
pub struct Animal {
    pub vertices: Vec<Point>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct AnimalRaw {
    vertices: Vec<Point>,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<AnimalRaw> for Animal {
    type Error = Error;
    fn try_from(raw: AnimalRaw) -> Result<Self> {
        Animal::new(raw.vertices, raw.edges)
    }
}

impl Animal {
    pub fn new(vertices: Vec<Point>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("an animal needs at least one vertex"));
        }
        let d = vertices[0].len();
        if d == 0 || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("animal vertices must share a positive dimension"));
        }
        let n = vertices.len();
        let mut norm_edges = Vec::with_capacity(edges.len());
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i},{j}) out of range")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at vertex {i}")));
            }
            let e = (i.min(j), i.max(j));
            if !norm_edges.contains(&e) {
                norm_edges.push(e);
            }
        }
        let animal = Animal {
            vertices,
            edges: norm_edges,
        };
        if !animal.is_connected() {
            return Err(Error::invalid("animal graph must be connected"));
        }
        Ok(animal)
    }

    pub fn single(v: Point) -> Self {
        Animal {
            vertices: vec![v],
            edges: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n <= 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Total edge length `Σ_{{i,j}∈E} ‖x_i − x_j‖`.
    pub fn length(&self, norm: &NormSpec) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j)| norm.dist(&self.vertices[i], &self.vertices[j]))
            .sum()
    }
}

/// Splice two paths at their shared junction (last of `a` = first of `b`),
/// dropping the duplicated vertex. Lengths add exactly.
pub fn concat_paths(a: &GeomPath, b: &GeomPath) -> Result<GeomPath> {
    let last = a.vertices.last().unwrap();
    let first = &b.vertices[0];
    if !approx_eq_point(last, first, GEOM_TOL) {
        return Err(Error::precondition(
            "path concatenation needs matching junction vertices",
        ));
    }
    let mut vertices = a.vertices.clone();
    vertices.extend(b.vertices.iter().skip(1).cloned());
    GeomPath::new(vertices)
}

/// Union of vertex and edge sets; the inputs must share at least one vertex.
pub fn concat_animals(a: &Animal, b: &Animal) -> Result<Animal> {
    let mut vertices = a.vertices.clone();
    let mut map_b = Vec::with_capacity(b.vertices.len());
    let mut shares = false;
    for v in &b.vertices {
        match vertices.iter().position(|u| approx_eq_point(u, v, GEOM_TOL)) {
            Some(i) => {
                shares = true;
                map_b.push(i);
            }
            None => {
                vertices.push(v.clone());
                map_b.push(vertices.len() - 1);
            }
        }
    }
    if !shares {
        return Err(Error::precondition(
            "animal concatenation needs intersecting vertex sets",
        ));
    }
    let mut edges = a.edges.clone();
    for &(i, j) in &b.edges {
        let (mi, mj) = (map_b[i], map_b[j]);
        let e = (mi.min(mj), mi.max(mj));
        if e.0 != e.1 && !edges.contains(&e) {
            edges.push(e);
        }
    }
    Animal::new(vertices, edges)
}

/// Depth-first covering path of a connected animal.
///
/// Starts at vertex 0, explores children in vertex-index order and returns
/// the full tour with backtracking, so the result visits every vertex and
/// its length is at most twice the animal length (tree edges are walked
/// twice, non-tree edges not at all).
pub fn dfs_cover_path(animal: &Animal) -> Result<GeomPath> {
    if !animal.is_connected() {
        return Err(Error::precondition("dfs_cover_path needs a connected animal"));
    }
    let adj = animal.adjacency();
    let n = animal.vertices.len();
    let mut seen = vec![false; n];
    let mut tour: Vec<usize> = Vec::new();

    fn walk(v: usize, adj: &[Vec<usize>], seen: &mut [bool], tour: &mut Vec<usize>) {
        seen[v] = true;
        tour.push(v);
        for &w in &adj[v] {
            if !seen[w] {
                walk(w, adj, seen, tour);
                tour.push(v);
            }
        }
    }
    walk(0, &adj, &mut seen, &mut tour);

    GeomPath::new(tour.into_iter().map(|i| animal.vertices[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mst_length;
    use rand::Rng;

    fn p(coords: &[f64]) -> Point {
        coords.to_vec()
    }

    #[test]
    fn path_length_trivial_cases() {
        let n1 = NormSpec::l1(2);
        let single = GeomPath::new(vec![p(&[0.0, 0.0])]).unwrap();
        assert_eq!(single.length(&n1), 0.0);
        let steps = GeomPath::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[1.0, 1.0])]).unwrap();
        assert_eq!(steps.length(&n1), 2.0);
        assert!(GeomPath::new(vec![]).is_err());
    }

    /// Independent pairwise-distance summation oracle on a random 6-point path.
    #[test]
    fn path_length_matches_naive_oracle() {
        let mut rng = crate::rng::stream_rng(11, &[1]);
        let n2 = NormSpec::l2(3);
        for _ in 0..50 {
            let pts: Vec<Point> = (0..6)
                .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            let path = GeomPath::new(pts.clone()).unwrap();
            let mut oracle = 0.0;
            for i in 0..pts.len() - 1 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += (pts[i][k] - pts[i + 1][k]).powi(2);
                }
                oracle += s.sqrt();
            }
            assert!((path.length(&n2) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn animal_length_trivial_cases() {
        let n1 = NormSpec::l1(2);
        let single = Animal::single(p(&[0.0, 0.0]));
        assert_eq!(single.length(&n1), 0.0);
        let tri = Animal::new(
            vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, 1.0])],
            vec![(0, 1), (1, 2), (0, 2)],
        )
        .unwrap();
        assert_eq!(tri.length(&n1), 4.0);
    }

    #[test]
    fn animal_rejects_disconnected_and_bad_edges() {
        let vs = vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[5.0, 5.0])];
        assert!(Animal::new(vs.clone(), vec![(0, 1)]).is_err());
        assert!(Animal::new(vs.clone(), vec![(0, 1), (1, 7)]).is_err());
        assert!(Animal::new(vs, vec![(0, 0), (0, 1), (1, 2)]).is_err());
    }

    /// A random tree's animal length equals the MST length when its edges
    /// form that MST.
    #[test]
    fn tree_animal_length_matches_mst() {
        let mut rng = crate::rng::stream_rng(11, &[2]);
        let n2 = NormSpec::l2(2);
        for _ in 0..50 {
            let pts: Vec<Point> = (0..8)
                .map(|_| (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let (len, edges) = crate::geometry::mst_with_edges(&pts, &n2);
            let animal = Animal::new(pts.clone(), edges).unwrap();
            assert!((animal.length(&n2) - len).abs() < 1e-12);
            assert!((len - mst_length(&pts, &n2).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn concat_paths_splices_and_adds_length() {
        let n1 = NormSpec::l1(2);
        let a = GeomPath::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]).unwrap();
        let b = GeomPath::new(vec![p(&[1.0, 0.0]), p(&[1.0, 1.0])]).unwrap();
        let c = concat_paths(&a, &b).unwrap();
        assert_eq!(
            c.vertices,
            vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[1.0, 1.0])]
        );
        assert!((c.length(&n1) - a.length(&n1) - b.length(&n1)).abs() < 1e-12);
        let far = GeomPath::new(vec![p(&[9.0, 9.0])]).unwrap();
        assert!(concat_paths(&a, &far).is_err());
    }

    #[test]
    fn concat_animals_union_semantics() {
        let n2 = NormSpec::l2(2);
        let a = Animal::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])], vec![(0, 1)]).unwrap();
        let b = Animal::new(vec![p(&[1.0, 0.0]), p(&[1.0, 1.0])], vec![(0, 1)]).unwrap();
        let c = concat_animals(&a, &b).unwrap();
        assert_eq!(c.vertices.len(), 3);
        assert!((c.length(&n2) - a.length(&n2) - b.length(&n2)).abs() < 1e-12);
        // idempotent union
        let cc = concat_animals(&a, &a).unwrap();
        assert_eq!(cc.vertices, a.vertices);
        assert_eq!(cc.edges, a.edges);
        // disjoint vertex sets refuse
        let far = Animal::single(p(&[9.0, 9.0]));
        assert!(concat_animals(&a, &far).is_err());
    }

    #[test]
    fn dfs_cover_small_cases() {
        let n2 = NormSpec::l2(2);
        let edge = Animal::new(vec![p(&[0.0, 0.0]), p(&[2.0, 0.0])], vec![(0, 1)]).unwrap();
        let tour = dfs_cover_path(&edge).unwrap();
        assert_eq!(tour.vertices.first().unwrap(), &p(&[0.0, 0.0]));
        assert!(tour.length(&n2) <= 2.0 * edge.length(&n2) + 1e-12);

        // star with 3 unit leaves: cover length <= 6
        let star = Animal::new(
            vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, 1.0]), p(&[-1.0, 0.0])],
            vec![(0, 1), (0, 2), (0, 3)],
        )
        .unwrap();
        let tour = dfs_cover_path(&star).unwrap();
        assert!(tour.length(&n2) <= 6.0 + 1e-12);
        for v in &star.vertices {
            assert!(tour.vertices.iter().any(|u| u == v));
        }
    }

    /// Covering property plus the factor-2 bound on random spanning trees.
    #[test]
    fn dfs_cover_bound_on_random_trees() {
        let mut rng = crate::rng::stream_rng(11, &[3]);
        let n2 = NormSpec::l2(2);
        for _ in 0..1000 {
            let pts: Vec<Point> = (0..10)
                .map(|_| (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect())
                .collect();
            // random spanning tree: attach vertex i to a random earlier vertex
            let mut edges = Vec::new();
            for i in 1..pts.len() {
                edges.push((rng.gen_range(0..i), i));
            }
            let animal = Animal::new(pts, edges).unwrap();
            let tour = dfs_cover_path(&animal).unwrap();
            for v in &animal.vertices {
                assert!(tour.vertices.iter().any(|u| u == v));
            }
            assert!(tour.length(&n2) <= 2.0 * animal.length(&n2) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn path_to_animal_identification() {
        let n1 = NormSpec::l1(2);
        let path = GeomPath::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[1.0, 1.0])]).unwrap();
        let an = path.to_animal();
        assert_eq!(an.vertices.len(), 3);
        assert!((an.length(&n1) - path.length(&n1)).abs() < 1e-12);
        // revisiting collapses: (a, b, a) has one edge as an animal
        let back = GeomPath::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, 0.0])]).unwrap();
        assert_eq!(back.to_animal().edges.len(), 1);
    }

    #[test]
    fn serde_wire_format() {
        let an = Animal::new(vec![p(&[0.0, 0.0]), p(&[1.0, 0.5])], vec![(0, 1)]).unwrap();
        let j = serde_json::to_value(&an).unwrap();
        assert_eq!(j["vertices"][1][1], 0.5);
        assert_eq!(j["edges"][0][0], 0);
        // deserializing a disconnected animal fails
        let bad = serde_json::json!({"vertices": [[0.0,0.0],[5.0,5.0]], "edges": []});
        assert!(serde_json::from_value::<Animal>(bad).is_err());
    }
}
