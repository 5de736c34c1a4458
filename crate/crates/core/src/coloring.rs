//! Maximum k-colorable vertex subsets of radius graphs.
//!
//! [`max_colorable_exact`] computes the optimum `N_{k,r}(V)` exactly. It first
//! peels every vertex of degree below `k` (such a vertex can always be colored
//! after the rest of the graph, so it never costs anything), then runs a
//! branch-and-bound over each connected piece of what remains. On the line,
//! [`max_colorable_sweep_1d`] reaches the same optimum in `O(n log n)` by a
//! left-to-right greedy that mirrors an Erlang loss system. [`max_colorable_greedy`]
//! and [`max_colorable_anchor`] are heuristics that only give lower bounds.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo_graph::{within_radius, GeoGraph};
use crate::point_process::{PointSet, SeedSpec};
use crate::theory::AnchorLattice;

/// Default bound on the size of a piece handed to the exact solver.
pub const DEFAULT_COMPONENT_CAP: usize = 28;

/// Exact pieces are encoded as 64-bit vertex masks.
pub const MAX_COMPONENT_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sweep1d,
    Greedy,
    Anchor,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sweep1d => "sweep1d",
            Method::Greedy => "greedy",
            Method::Anchor => "anchor",
        }
    }

    fn is_optimal(&self) -> bool {
        matches!(self, Method::Exact | Method::Sweep1d)
    }
}

/// Per-vertex colors; `0` marks an uncolored vertex, `1..=k` are colors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ColoringJson", from = "ColoringJson")]
pub struct Coloring {
    pub k: u32,
    pub assignment: Vec<u32>,
    pub colored_count: usize,
    pub method: Method,
    pub is_optimal: bool,
    /// Set when the solver could not do anything useful with its inputs.
    pub warning: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ColoringJson {
    k: u32,
    method: Method,
    colored_count: usize,
    assignment: Vec<u32>,
}

impl From<Coloring> for ColoringJson {
    fn from(c: Coloring) -> Self {
        ColoringJson {
            k: c.k,
            method: c.method,
            colored_count: c.colored_count,
            assignment: c.assignment,
        }
    }
}

impl From<ColoringJson> for Coloring {
    fn from(j: ColoringJson) -> Self {
        Coloring {
            k: j.k,
            is_optimal: j.method.is_optimal(),
            method: j.method,
            colored_count: j.colored_count,
            assignment: j.assignment,
            warning: None,
        }
    }
}

impl Coloring {
    fn new(k: u32, assignment: Vec<u32>, method: Method) -> Self {
        let colored_count = assignment.iter().filter(|&&c| c != 0).count();
        Self {
            k,
            assignment,
            colored_count,
            method,
            is_optimal: method.is_optimal(),
            warning: None,
        }
    }

    fn uncolored(n: usize, k: u32, method: Method) -> Self {
        Self::new(k, vec![0; n], method)
    }
}

/// Exact `N_{k,r}` for the graph.
///
/// Fails with [`Error::ComponentTooLarge`] when a piece left after peeling
/// low-degree vertices has more than `component_cap` vertices.
pub fn max_colorable_exact(g: &GeoGraph, k: u32, component_cap: usize) -> Result<Coloring> {
    if component_cap > MAX_COMPONENT_CAP {
        return Err(Error::invalid(
            "cap",
            format!("at most {MAX_COMPONENT_CAP}, got {component_cap}"),
        ));
    }
    let n = g.n();
    if k == 0 || n == 0 {
        return Ok(Coloring::uncolored(n, k, Method::Exact));
    }

    let (peeled, in_core) = peel_low_degree(g, k as usize);
    let mut assignment = vec![0u32; n];
    for piece in core_pieces(g, &in_core) {
        if piece.len() > component_cap {
            return Err(Error::ComponentTooLarge {
                size: piece.len(),
                cap: component_cap,
            });
        }
        let colors = solve_piece(g, &piece, k);
        for (&v, &c) in piece.iter().zip(&colors) {
            assignment[v] = c;
        }
    }

    // Each peeled vertex had fewer than k neighbours still present when it
    // was removed, so re-inserting in reverse order always finds a free color.
    let mut taken = vec![false; k as usize + 1];
    for &v in peeled.iter().rev() {
        let c = lowest_free(g.neighbors(v), &assignment, &mut taken);
        debug_assert!(c != 0);
        assignment[v] = c;
    }
    Ok(Coloring::new(k, assignment, Method::Exact))
}

// Lowest color in 1..=k absent from the colored neighbours, or 0.
fn lowest_free(neighbors: &[usize], assignment: &[u32], taken: &mut [bool]) -> u32 {
    for &u in neighbors {
        taken[assignment[u] as usize] = true;
    }
    let c = (1..taken.len()).find(|&c| !taken[c]).unwrap_or(0) as u32;
    for &u in neighbors {
        taken[assignment[u] as usize] = false;
    }
    c
}

/// Removes vertices of degree `< k` repeatedly. Returns the removal order and
/// the membership mask of the remaining k-core.
fn peel_low_degree(g: &GeoGraph, k: usize) -> (Vec<usize>, Vec<bool>) {
    let n = g.n();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut in_core = vec![true; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] < k).rev().collect();
    let mut order = Vec::new();
    while let Some(v) = stack.pop() {
        if !in_core[v] {
            continue;
        }
        in_core[v] = false;
        order.push(v);
        for &u in g.neighbors(v) {
            if in_core[u] {
                degree[u] -= 1;
                if degree[u] + 1 == k {
                    stack.push(u);
                }
            }
        }
    }
    (order, in_core)
}

/// Connected pieces of the subgraph induced by `keep`, each sorted, ordered
/// by smallest vertex.
fn core_pieces(g: &GeoGraph, keep: &[bool]) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut pieces = Vec::new();
    for start in 0..n {
        if !keep[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut piece = vec![start];
        let mut head = 0;
        while head < piece.len() {
            let v = piece[head];
            head += 1;
            for &u in g.neighbors(v) {
                if keep[u] && !seen[u] {
                    seen[u] = true;
                    piece.push(u);
                }
            }
        }
        piece.sort_unstable();
        pieces.push(piece);
    }
    pieces
}

/// Optimal colors (0 = uncolored) for the vertices of one piece.
fn solve_piece(g: &GeoGraph, piece: &[usize], k: u32) -> Vec<u32> {
    let m = piece.len();
    let local_adj: Vec<u64> = piece
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|u| piece.binary_search(u).ok())
                .fold(0u64, |acc, j| acc | 1 << j)
        })
        .collect();

    let cover = clique_cover(&local_adj, m);
    let order: Vec<usize> = cover.iter().flatten().copied().collect();
    let mut position = vec![0usize; m];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    let adj: Vec<u64> = order
        .iter()
        .map(|&v| {
            let mut mask = 0u64;
            let mut bits = local_adj[v];
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                mask |= 1 << position[j];
            }
            mask
        })
        .collect();

    let ku = k as usize;
    let mut clique_of = Vec::with_capacity(m);
    let mut clique_end = Vec::with_capacity(cover.len());
    let mut end = 0;
    for (c, clique) in cover.iter().enumerate() {
        end += clique.len();
        clique_end.push(end);
        clique_of.extend(std::iter::repeat_n(c, clique.len()));
    }
    let mut suffix = vec![0usize; cover.len() + 1];
    for c in (0..cover.len()).rev() {
        suffix[c] = suffix[c + 1] + cover[c].len().min(ku);
    }

    let mut search = Search {
        adj: &adj,
        k: ku,
        clique_of: &clique_of,
        clique_end: &clique_end,
        suffix: &suffix,
        colors: vec![0; m],
        masks: vec![0; ku],
        best: 0,
        best_colors: vec![0; m],
    };
    search.seed_with_greedy();
    if search.best < suffix[0] {
        search.branch(0, 0, 0, 0);
    }

    let mut out = vec![0u32; m];
    for (p, &v) in order.iter().enumerate() {
        out[v] = search.best_colors[p];
    }
    out
}

/// Greedy partition of the vertices into cliques, largest-degree first.
fn clique_cover(adj: &[u64], m: usize) -> Vec<Vec<usize>> {
    let mut remaining: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut cover = Vec::new();
    let pick = |set: u64, within: u64| -> usize {
        let mut best = (0u32, usize::MAX);
        let mut bits = set;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let deg = (adj[v] & within).count_ones();
            if best.1 == usize::MAX || deg > best.0 {
                best = (deg, v);
            }
        }
        best.1
    };
    while remaining != 0 {
        let v = pick(remaining, remaining);
        let mut clique = vec![v];
        let mut candidates = adj[v] & remaining;
        while candidates != 0 {
            let u = pick(candidates, candidates);
            clique.push(u);
            candidates &= adj[u];
        }
        for &u in &clique {
            remaining &= !(1u64 << u);
        }
        cover.push(clique);
    }
    cover
}

struct Search<'a> {
    // Vertices are numbered by branching position; cliques are contiguous.
    adj: &'a [u64],
    k: usize,
    clique_of: &'a [usize],
    clique_end: &'a [usize],
    // suffix[c] bounds what cliques c.. can contribute.
    suffix: &'a [usize],
    colors: Vec<u32>,
    masks: Vec<u64>,
    best: usize,
    best_colors: Vec<u32>,
}

impl Search<'_> {
    fn seed_with_greedy(&mut self) {
        let mut masks = vec![0u64; self.k];
        let mut colors = vec![0u32; self.adj.len()];
        for (v, &nb) in self.adj.iter().enumerate() {
            if let Some(c) = (0..self.k).find(|&c| nb & masks[c] == 0) {
                masks[c] |= 1 << v;
                colors[v] = c as u32 + 1;
            }
        }
        self.best = colors.iter().filter(|&&c| c != 0).count();
        self.best_colors = colors;
    }

    fn branch(&mut self, pos: usize, colored: usize, used: usize, in_clique: usize) {
        let m = self.adj.len();
        if pos == m {
            if colored > self.best {
                self.best = colored;
                self.best_colors.copy_from_slice(&self.colors);
            }
            return;
        }
        let c = self.clique_of[pos];
        let bound = colored
            + (self.clique_end[c] - pos).min(self.k - in_clique)
            + self.suffix[c + 1];
        if bound <= self.best {
            return;
        }
        let next_in = |colored_here: bool| -> usize {
            if pos + 1 == self.clique_end[c] {
                0
            } else {
                in_clique + colored_here as usize
            }
        };

        // Colors already opened, then at most one new color.
        let limit = (used + 1).min(self.k);
        for color in 0..limit {
            if self.adj[pos] & self.masks[color] != 0 {
                continue;
            }
            self.masks[color] |= 1 << pos;
            self.colors[pos] = color as u32 + 1;
            let used_next = used.max(color + 1);
            self.branch(pos + 1, colored + 1, used_next, next_in(true));
            self.masks[color] &= !(1 << pos);
            self.colors[pos] = 0;
            if self.best == self.suffix[0] {
                return;
            }
        }
        self.branch(pos + 1, colored, used, next_in(false));
    }
}

/// Left-to-right sweep on the line: a point is colored iff fewer than `k`
/// colored points lie within distance `r` to its left, and it takes the
/// lowest color not used among them.
pub fn max_colorable_sweep_1d(ps: &PointSet, r: f64, k: u32) -> Result<Coloring> {
    if ps.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: ps.dim(),
        });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("{r} is not a finite positive radius")));
    }
    let n = ps.len();
    if k == 0 {
        return Ok(Coloring::uncolored(n, k, Method::Sweep1d));
    }
    let xs = ps.coords();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));

    let mut assignment = vec![0u32; n];
    // Colored points still within reach, in coordinate order.
    let mut window: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut in_use = vec![false; k as usize + 1];
    for &v in &order {
        while let Some(&front) = window.front() {
            if within_radius(&[xs[front]], &[xs[v]], r) {
                break;
            }
            in_use[assignment[front] as usize] = false;
            window.pop_front();
        }
        if window.len() < k as usize {
            let c = (1..=k as usize).find(|&c| !in_use[c]).expect("window has a free color");
            in_use[c] = true;
            assignment[v] = c as u32;
            window.push_back(v);
        }
    }
    Ok(Coloring::new(k, assignment, Method::Sweep1d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "order", content = "seed")]
pub enum GreedyOrder {
    Index,
    Random(u64),
    DegreeAsc,
}

/// First-fit coloring in the given vertex order; vertices whose neighbours
/// already block all `k` colors stay uncolored.
pub fn max_colorable_greedy(g: &GeoGraph, k: u32, order: GreedyOrder) -> Coloring {
    let n = g.n();
    if k == 0 {
        return Coloring::uncolored(n, k, Method::Greedy);
    }
    let mut visit: Vec<usize> = (0..n).collect();
    match order {
        GreedyOrder::Index => {}
        GreedyOrder::Random(seed) => visit.shuffle(&mut SeedSpec::new(seed, 0).rng()),
        GreedyOrder::DegreeAsc => visit.sort_by_key(|&v| (g.degree(v), v)),
    }
    let mut assignment = vec![0u32; n];
    let mut taken = vec![false; k as usize + 1];
    for v in visit {
        assignment[v] = lowest_free(g.neighbors(v), &assignment, &mut taken);
    }
    Coloring::new(k, assignment, Method::Greedy)
}

/// Anchor-lattice coloring.
///
/// Colors are split into `m(s)` groups of `floor(k / m(s))`; each point goes
/// to its nearest anchor, and every anchor colors the first points routed to
/// it (by index) with distinct colors of its group. Anchors of one group are
/// at least `(1 + 2s) r` apart, so the result is always proper.
pub fn max_colorable_anchor(ps: &PointSet, r: f64, k: u32, s: f64) -> Result<Coloring> {
    let dim = ps.dim();
    if !(1..=2).contains(&dim) {
        return Err(Error::invalid(
            "dim",
            format!("anchor coloring supports d in {{1, 2}}, got {dim}"),
        ));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("{r} is not a finite positive radius")));
    }
    let lattice = AnchorLattice::new(dim, s)?;
    let n = ps.len();
    let per_anchor = k as u64 / lattice.group_count;
    if per_anchor == 0 {
        let mut c = Coloring::uncolored(n, k, Method::Anchor);
        c.warning = Some(format!(
            "k = {k} is below the {} anchor groups needed at s = {s}",
            lattice.group_count
        ));
        return Ok(c);
    }

    let mut served: std::collections::HashMap<Vec<i64>, u64> = std::collections::HashMap::new();
    let mut assignment = vec![0u32; n];
    let mut unit = vec![0.0; dim];
    for (i, p) in ps.iter().enumerate() {
        for (u, &x) in unit.iter_mut().zip(p) {
            *u = x / r;
        }
        let anchor = lattice.nearest(&unit);
        let group = lattice.group_of(&anchor);
        let slot = served.entry(anchor).or_insert(0);
        if *slot < per_anchor {
            assignment[i] = (group * per_anchor + *slot + 1) as u32;
            *slot += 1;
        }
    }
    Ok(Coloring::new(k, assignment, Method::Anchor))
}

/// Checks properness, the colored count and the color range.
pub fn validate_coloring(g: &GeoGraph, c: &Coloring) -> Result<bool> {
    if c.assignment.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: c.assignment.len(),
        });
    }
    if c.assignment.iter().any(|&x| x > c.k) {
        return Ok(false);
    }
    if c.assignment.iter().filter(|&&x| x != 0).count() != c.colored_count {
        return Ok(false);
    }
    let proper = g.edges().into_iter().all(|(u, v)| {
        let (a, b) = (c.assignment[u], c.assignment[v]);
        a == 0 || a != b
    });
    Ok(proper)
}

/// A solver choice with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Solver {
    Exact { cap: usize },
    Sweep1d,
    Greedy { order: GreedyOrder },
    Anchor { s: f64 },
}

impl Solver {
    pub fn method(&self) -> Method {
        match self {
            Solver::Exact { .. } => Method::Exact,
            Solver::Sweep1d => Method::Sweep1d,
            Solver::Greedy { .. } => Method::Greedy,
            Solver::Anchor { .. } => Method::Anchor,
        }
    }

    /// Runs the solver on the radius-`r` graph of `ps`.
    pub fn solve(&self, ps: &PointSet, r: f64, k: u32) -> Result<Coloring> {
        match *self {
            Solver::Exact { cap } => {
                let g = crate::geo_graph::build_graph(ps, r)?;
                max_colorable_exact(&g, k, cap)
            }
            Solver::Sweep1d => max_colorable_sweep_1d(ps, r, k),
            Solver::Greedy { order } => {
                let g = crate::geo_graph::build_graph(ps, r)?;
                Ok(max_colorable_greedy(&g, k, order))
            }
            Solver::Anchor { s } => max_colorable_anchor(ps, r, k, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo_graph::build_graph;

    fn line(xs: &[f64]) -> PointSet {
        let side = xs.iter().copied().fold(1.0, f64::max);
        PointSet::from_points(1, side, xs.iter().map(|&x| [x])).unwrap()
    }

    fn triangle() -> GeoGraph {
        GeoGraph::from_edges(3, 1.0, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn exact_small_cases() {
        let empty = GeoGraph::from_edges(0, 1.0, &[]).unwrap();
        for k in 0..4 {
            assert_eq!(max_colorable_exact(&empty, k, 28).unwrap().colored_count, 0);
        }
        let c = max_colorable_exact(&triangle(), 2, 28).unwrap();
        assert_eq!(c.colored_count, 2);
        assert!(c.is_optimal);
        assert!(validate_coloring(&triangle(), &c).unwrap());

        let ps = line(&[0.0, 0.5, 1.2]);
        let g = build_graph(&ps, 1.0).unwrap();
        assert_eq!(max_colorable_exact(&g, 1, 28).unwrap().colored_count, 2);
        assert_eq!(max_colorable_exact(&g, 0, 28).unwrap().colored_count, 0);
    }

    #[test]
    fn exact_reports_oversized_piece() {
        let n = 30;
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let g = GeoGraph::from_edges(n, 1.0, &edges).unwrap();
        match max_colorable_exact(&g, 2, 28) {
            Err(Error::ComponentTooLarge { size: 30, cap: 28 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(max_colorable_exact(&g, 2, 65).is_err());
        // With k >= 30 every vertex peels away and no piece remains.
        assert_eq!(max_colorable_exact(&g, 30, 28).unwrap().colored_count, 30);
    }

    #[test]
    fn sweep_cases() {
        let c = max_colorable_sweep_1d(&line(&[0.0, 0.5, 1.2]), 1.0, 1).unwrap();
        assert_eq!(c.colored_count, 2);
        assert_eq!(c.assignment, vec![1, 0, 1]);
        assert_eq!(max_colorable_sweep_1d(&line(&[0.3, 0.1]), 1.0, 0).unwrap().colored_count, 0);
        assert_eq!(
            max_colorable_sweep_1d(&line(&[0.0, 0.4, 0.8]), 1.0, 3).unwrap().colored_count,
            3
        );
        let plane = PointSet::from_points(2, 1.0, [[0.5, 0.5]]).unwrap();
        assert!(max_colorable_sweep_1d(&plane, 1.0, 1).is_err());
    }

    #[test]
    fn sweep_reuses_released_colors() {
        // 0 and 0.6 take colors 1, 2; 1.1 is out of reach of 0, so color 1 is free.
        let c = max_colorable_sweep_1d(&line(&[0.0, 0.6, 1.1, 1.3]), 1.0, 2).unwrap();
        assert_eq!(c.assignment, vec![1, 2, 1, 0]);
    }

    #[test]
    fn greedy_cases() {
        let g = GeoGraph::from_edges(4, 1.0, &[]).unwrap();
        assert_eq!(max_colorable_greedy(&g, 1, GreedyOrder::Index).colored_count, 4);
        for order in [GreedyOrder::Index, GreedyOrder::Random(3), GreedyOrder::DegreeAsc] {
            let c = max_colorable_greedy(&triangle(), 2, order);
            assert_eq!(c.colored_count, 2);
            assert!(!c.is_optimal);
            assert!(validate_coloring(&triangle(), &c).unwrap());
        }
    }

    #[test]
    fn anchor_cases() {
        let ps = PointSet::from_points(2, 3.0, [[1.7, 0.2]]).unwrap();
        let c = max_colorable_anchor(&ps, 1.0, 9, 1.0).unwrap();
        assert_eq!(c.colored_count, 1);
        assert!(c.warning.is_none());

        let c = max_colorable_anchor(&ps, 1.0, 8, 1.0).unwrap();
        assert_eq!(c.colored_count, 0);
        assert!(c.warning.is_some());

        let cube = PointSet::from_points(3, 1.0, [[0.1, 0.1, 0.1]]).unwrap();
        assert!(max_colorable_anchor(&cube, 1.0, 9, 1.0).is_err());
    }

    #[test]
    fn validation() {
        let g = triangle();
        let none = Coloring::uncolored(3, 2, Method::Greedy);
        assert!(validate_coloring(&g, &none).unwrap());
        assert_eq!(none.colored_count, 0);

        let clash = Coloring::new(2, vec![1, 1, 0], Method::Greedy);
        assert!(!validate_coloring(&g, &clash).unwrap());

        let out_of_range = Coloring::new(2, vec![3, 0, 0], Method::Greedy);
        assert!(!validate_coloring(&g, &out_of_range).unwrap());

        let mut miscounted = Coloring::new(2, vec![1, 2, 0], Method::Greedy);
        miscounted.colored_count = 3;
        assert!(!validate_coloring(&g, &miscounted).unwrap());

        let short = Coloring::new(2, vec![1], Method::Greedy);
        assert!(matches!(
            validate_coloring(&g, &short),
            Err(Error::LengthMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn json_schema() {
        let c = Coloring::new(2, vec![1, 0, 2], Method::Sweep1d);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(
            text,
            r#"{"k":2,"method":"sweep1d","colored_count":2,"assignment":[1,0,2]}"#
        );
        let back: Coloring = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
