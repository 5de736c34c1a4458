//! Radius graphs over point sets.
//!
//! Two points are adjacent when their Euclidean distance is at most the
//! radius (closed ball). Distances are compared through squared values so the
//! rule never depends on square-root rounding. Neighbor search buckets the
//! points into a grid of cells of side `r` and scans the `3^d` surrounding
//! cells of each point, which is linear in expectation for sparse inputs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_process::PointSet;

/// Squared Euclidean distance.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The adjacency rule shared by every part of the crate.
#[inline]
pub fn within_radius(a: &[f64], b: &[f64], radius: f64) -> bool {
    dist2(a, b) <= radius * radius
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoGraph {
    radius: f64,
    adjacency: Vec<Vec<usize>>,
    component_id: Vec<usize>,
    component_count: usize,
}

impl GeoGraph {
    /// Builds a graph from explicit undirected edges. Used for abstract test
    /// graphs; the radius is informational only.
    pub fn from_edges(n: usize, radius: f64, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    len: n,
                });
            }
            if u == v {
                return Err(Error::invalid("edges", format!("self loop at {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_adjacency(radius, adjacency))
    }

    fn from_adjacency(radius: f64, mut adjacency: Vec<Vec<usize>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let (component_id, component_count) = label_components(&adjacency);
        Self {
            radius,
            adjacency,
            component_id,
            component_count,
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn component_id(&self) -> &[usize] {
        &self.component_id
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    /// Vertex lists of each component, indexed by component label.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.component_count];
        for (v, &c) in self.component_id.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    /// Debug dump `{"n":..,"r":..,"edges":[[u,v],..]}`.
    pub fn dump(&self) -> GraphDump {
        GraphDump {
            n: self.n(),
            r: self.radius,
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub n: usize,
    pub r: f64,
    pub edges: Vec<[usize; 2]>,
}

/// Builds the radius-`r` graph over `ps`.
pub fn build_graph(ps: &PointSet, r: f64) -> Result<GeoGraph> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("{r} is not a finite positive radius")));
    }
    let n = ps.len();
    let dim = ps.dim();
    // Slightly wider than r so that rounding in x / cell never separates two
    // points within distance r by more than one cell.
    let cell = r * (1.0 + 1e-9);

    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|&x| (x / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in ps.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }

    let mut adjacency = vec![Vec::new(); n];
    let mut offset = vec![-1i64; dim];
    let mut probe = vec![0i64; dim];
    for (u, p) in ps.iter().enumerate() {
        let home = key(p);
        offset.iter_mut().for_each(|o| *o = -1);
        loop {
            for ((q, h), o) in probe.iter_mut().zip(&home).zip(&offset) {
                *q = h + o;
            }
            if let Some(bucket) = grid.get(&probe) {
                for &v in bucket {
                    if v > u && within_radius(p, ps.point(v), r) {
                        adjacency[u].push(v);
                        adjacency[v].push(u);
                    }
                }
            }
            if !advance(&mut offset) {
                break;
            }
        }
    }
    Ok(GeoGraph::from_adjacency(r, adjacency))
}

// Odometer over {-1, 0, 1}^d.
fn advance(offset: &mut [i64]) -> bool {
    for o in offset.iter_mut() {
        if *o < 1 {
            *o += 1;
            return true;
        }
        *o = -1;
    }
    false
}

/// Component labels, numbered in order of each component's smallest vertex.
pub fn connected_components(g: &GeoGraph) -> (Vec<usize>, usize) {
    (g.component_id.clone(), g.component_count)
}

fn label_components(adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adjacency.len();
    let mut uf = UnionFind::new(n);
    for (u, list) in adjacency.iter().enumerate() {
        for &v in list {
            uf.union(u, v);
        }
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut count = 0;
    for (v, label) in labels.iter_mut().enumerate() {
        let root = uf.find(v);
        if label_of_root[root] == usize::MAX {
            label_of_root[root] = count;
            count += 1;
        }
        *label = label_of_root[root];
    }
    (labels, count)
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Multiplies every coordinate, and the cube side, by `alpha`.
pub fn scale_points(ps: &PointSet, alpha: f64) -> Result<PointSet> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is not a finite positive factor")));
    }
    let coords = ps.coords().iter().map(|&x| x * alpha).collect();
    Ok(PointSet::from_raw(ps.dim(), ps.side() * alpha, coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], side: f64) -> PointSet {
        PointSet::from_points(1, side, xs.iter().map(|&x| [x])).unwrap()
    }

    #[test]
    fn closed_ball_at_exact_radius() {
        let ps = PointSet::from_points(2, 4.0, [[0.0, 0.0], [3.0, 0.0]]).unwrap();
        let g = build_graph(&ps, 3.0).unwrap();
        assert!(g.has_edge(0, 1));
        let ps = PointSet::from_points(2, 4.0, [[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert!(build_graph(&ps, 5.0).unwrap().has_edge(0, 1));
    }

    #[test]
    fn empty_graph() {
        let g = build_graph(&PointSet::empty(2, 1.0).unwrap(), 0.5).unwrap();
        assert_eq!(g.n(), 0);
        assert_eq!(g.component_count(), 0);
    }

    #[test]
    fn three_point_line() {
        let ps = line(&[0.0, 0.5, 1.2], 2.0);
        let g = build_graph(&ps, 1.0).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn rejects_bad_radius() {
        let ps = line(&[0.0], 1.0);
        for r in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(build_graph(&ps, r).is_err());
        }
    }

    #[test]
    fn component_labels() {
        let g = GeoGraph::from_edges(3, 1.0, &[]).unwrap();
        assert_eq!(g.component_count(), 3);
        assert_eq!(g.component_id(), &[0, 1, 2]);

        let g = GeoGraph::from_edges(4, 1.0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.component_count(), 1);

        let g = GeoGraph::from_edges(5, 1.0, &[(4, 1), (2, 3)]).unwrap();
        assert_eq!(g.component_id(), &[0, 1, 2, 2, 1]);
        assert_eq!(g.components(), vec![vec![0], vec![1, 4], vec![2, 3]]);
    }

    #[test]
    fn scale_identity_and_exchange() {
        let ps = line(&[0.0, 0.5, 1.2], 2.0);
        assert_eq!(scale_points(&ps, 1.0).unwrap(), ps);

        let scaled = scale_points(&ps, 2.0).unwrap();
        assert_eq!(scaled.side(), 4.0);
        let a = build_graph(&scaled, 1.0).unwrap();
        let b = build_graph(&ps, 0.5).unwrap();
        // Distances 1, 1.4, 2.4 against r = 1: only {0, 1} survives.
        assert_eq!(a.edges(), vec![(0, 1)]);
        assert_eq!(a.edges(), b.edges());

        assert!(scale_points(&ps, 0.0).is_err());
        assert!(scale_points(&ps, f64::NAN).is_err());
    }

    #[test]
    fn dump_format() {
        let g = build_graph(&line(&[0.0, 0.5, 1.2], 2.0), 1.0).unwrap();
        let text = serde_json::to_string(&g.dump()).unwrap();
        assert_eq!(text, r#"{"n":3,"r":1.0,"edges":[[0,1],[1,2]]}"#);
    }
}
