//! Weighted undirected multigraphs with Laplacian assembly and the dense
//! brute-force effective-resistance oracle used as ground truth everywhere else.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::SymmetricMatrix;

/// One edge of a multigraph. Parallel copies are distinct entries in the edge
/// list; conductances are merged only when a Laplacian is assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Edge { u, v, weight }
    }

    /// Endpoints as a canonically ordered pair.
    pub fn key(&self) -> (usize, usize) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

/// A single update against a graph or index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOp {
    Insert { u: usize, v: usize, weight: f64 },
    Delete { u: usize, v: usize },
}

/// Undirected weighted multigraph over dense vertex ids `0..n`.
///
/// Edge weights are conductances and must be positive. Edges keep insertion
/// order; deleting removes the most recently inserted matching copy, so an
/// insert followed by a delete of the same pair is an exact inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    degree: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize) -> Self {
        WeightedGraph {
            vertex_count,
            edges: Vec::new(),
            degree: vec![0.0; vertex_count],
        }
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = WeightedGraph::new(vertex_count);
        for &(u, v, w) in edges {
            g.insert_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Cached weighted degree of `v`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.degree[v]
    }

    /// Recomputes degrees from the edge list and compares against the cache.
    pub fn degree_cache_consistent(&self) -> bool {
        let mut fresh = vec![0.0f64; self.vertex_count];
        for e in &self.edges {
            fresh[e.u] += e.weight;
            fresh[e.v] += e.weight;
        }
        let scale = fresh.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        fresh
            .iter()
            .zip(&self.degree)
            .all(|(a, b)| (a - b).abs() <= 1e-9 * scale)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count {
            Err(Error::UnknownVertex(v))
        } else {
            Ok(())
        }
    }

    pub fn insert_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SameVertex);
        }
        if !(weight > 0.0) {
            return Err(Error::NonPositiveWeight(weight));
        }
        self.edges.push(Edge::new(u, v, weight));
        self.degree[u] += weight;
        self.degree[v] += weight;
        Ok(())
    }

    /// Removes the most recently inserted copy of `(u, v)`.
    pub fn delete_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let key = Edge::new(u, v, 1.0).key();
        let pos = self
            .edges
            .iter()
            .rposition(|e| e.key() == key)
            .ok_or(Error::NoSuchEdge(u, v))?;
        let e = self.edges.remove(pos);
        self.degree[e.u] -= e.weight;
        self.degree[e.v] -= e.weight;
        Ok(())
    }

    pub fn apply_update(&mut self, op: UpdateOp) -> Result<()> {
        match op {
            UpdateOp::Insert { u, v, weight } => self.insert_edge(u, v, weight),
            UpdateOp::Delete { u, v } => self.delete_edge(u, v),
        }
    }

    /// Parallel edges merged into one conductance per vertex pair.
    pub fn merged_edges(&self) -> BTreeMap<(usize, usize), f64> {
        let mut merged = BTreeMap::new();
        for e in &self.edges {
            *merged.entry(e.key()).or_insert(0.0) += e.weight;
        }
        merged
    }

    /// Dense Laplacian `L = D - A` with parallel conductances merged.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut l = SymmetricMatrix::zeros(self.vertex_count);
        for ((u, v), w) in self.merged_edges() {
            l.add_at(u, u, w);
            l.add_at(v, v, w);
            l.add_at(u, v, -w);
        }
        l
    }

    /// Laplacian of the subgraph induced on `vertices` (sorted, deduped by the
    /// caller); entry `(i, j)` refers to `vertices[i]`, `vertices[j]`.
    pub fn laplacian_on(&self, vertices: &[usize]) -> SymmetricMatrix {
        let mut local = vec![usize::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut l = SymmetricMatrix::zeros(vertices.len());
        for ((u, v), w) in self.merged_edges() {
            let (lu, lv) = (local[u], local[v]);
            if lu != usize::MAX && lv != usize::MAX {
                l.add_at(lu, lu, w);
                l.add_at(lv, lv, w);
                l.add_at(lu, lv, -w);
            }
        }
        l
    }

    /// Component label per vertex (labels are the smallest vertex id in the
    /// component), via union-find.
    pub fn components(&self) -> Vec<usize> {
        let mut dsu = DisjointSets::new(self.vertex_count);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        let mut label = vec![usize::MAX; self.vertex_count];
        for v in 0..self.vertex_count {
            let r = dsu.find(v);
            if label[r] == usize::MAX {
                label[r] = v.min(r);
            }
            label[r] = label[r].min(v);
        }
        (0..self.vertex_count).map(|v| label[dsu.find(v)]).collect()
    }

    pub fn same_component(&self, s: usize, t: usize) -> bool {
        let mut dsu = DisjointSets::new(self.vertex_count);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.find(s) == dsu.find(t)
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count <= 1 {
            return true;
        }
        let comps = self.components();
        comps.iter().all(|&c| c == comps[0])
    }

    fn component_of(&self, s: usize) -> Vec<usize> {
        let comps = self.components();
        let label = comps[s];
        (0..self.vertex_count).filter(|&v| comps[v] == label).collect()
    }

    fn check_pair(&self, s: usize, t: usize) -> Result<()> {
        self.check_vertex(s)?;
        self.check_vertex(t)?;
        if s == t {
            return Err(Error::SameVertex);
        }
        if !self.same_component(s, t) {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    /// Exact effective resistance via a dense pseudo-inverse on the component
    /// containing `s` and `t`. This is the project-wide oracle; results degrade
    /// past weight condition numbers around 1e12.
    pub fn effective_resistance_exact(&self, s: usize, t: usize) -> Result<f64> {
        self.check_pair(s, t)?;
        let comp = self.component_of(s);
        let li = self.laplacian_on(&comp).pinv();
        let si = comp.binary_search(&s).unwrap();
        let ti = comp.binary_search(&t).unwrap();
        let demand = DemandVector::pair(comp.len(), si, ti);
        Ok(li.quadratic_form(demand.as_slice()))
    }

    /// Energy of the unit s-t electrical flow, from potentials `L† χ`.
    /// Agrees with [`Self::effective_resistance_exact`] up to rounding.
    pub fn electrical_flow_energy(&self, s: usize, t: usize) -> Result<f64> {
        self.check_pair(s, t)?;
        let comp = self.component_of(s);
        let li = self.laplacian_on(&comp).pinv();
        let si = comp.binary_search(&s).unwrap();
        let ti = comp.binary_search(&t).unwrap();
        let demand = DemandVector::pair(comp.len(), si, ti);
        let potential = li.matvec(demand.as_slice());
        let mut local = vec![usize::MAX; self.vertex_count];
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let mut energy = 0.0;
        for ((u, v), w) in self.merged_edges() {
            let (lu, lv) = (local[u], local[v]);
            if lu != usize::MAX && lv != usize::MAX {
                let drop = potential[lu] - potential[lv];
                // r f^2 with f = w * drop and r = 1/w.
                energy += w * drop * drop;
            }
        }
        Ok(energy)
    }

    /// Text form: header `n m`, then one `u v w` line per edge in insertion order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse = |line: usize, tok: Option<&str>, what: &str| -> Result<&str> {
            tok.ok_or_else(|| Error::Parse {
                line,
                message: format!("missing {what}"),
            })
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty graph file".into(),
        })?;
        let mut toks = header.split_whitespace();
        let n: usize = parse(hline, toks.next(), "vertex count")?
            .parse()
            .map_err(|e| Error::Parse {
                line: hline,
                message: format!("bad vertex count: {e}"),
            })?;
        let m: usize = parse(hline, toks.next(), "edge count")?
            .parse()
            .map_err(|e| Error::Parse {
                line: hline,
                message: format!("bad edge count: {e}"),
            })?;
        let mut g = WeightedGraph::new(n);
        for _ in 0..m {
            let (lno, line) = lines.next().ok_or(Error::Parse {
                line: hline,
                message: format!("expected {m} edge lines"),
            })?;
            let mut toks = line.split_whitespace();
            let u: usize = parse(lno, toks.next(), "u")?.parse().map_err(|e| Error::Parse {
                line: lno,
                message: format!("bad u: {e}"),
            })?;
            let v: usize = parse(lno, toks.next(), "v")?.parse().map_err(|e| Error::Parse {
                line: lno,
                message: format!("bad v: {e}"),
            })?;
            let w: f64 = parse(lno, toks.next(), "w")?.parse().map_err(|e| Error::Parse {
                line: lno,
                message: format!("bad w: {e}"),
            })?;
            g.insert_edge(u, v, w).map_err(|e| Error::Parse {
                line: lno,
                message: e.to_string(),
            })?;
        }
        Ok(g)
    }
}

/// Dense demand vector indexed by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandVector(Vec<f64>);

impl DemandVector {
    /// Indicator of `u`: one entry equal to 1.
    pub fn indicator(n: usize, u: usize) -> Self {
        let mut d = vec![0.0; n];
        d[u] = 1.0;
        DemandVector(d)
    }

    /// Pair demand `1_s - 1_t`; sums to zero.
    pub fn pair(n: usize, s: usize, t: usize) -> Self {
        let mut d = vec![0.0; n];
        d[s] = 1.0;
        d[t] = -1.0;
        DemandVector(d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Plain union-find with path halving.
pub struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Axis-aligned grid with unit weights; vertex `(r, c)` is id `r * width + c`.
pub fn grid_graph(height: usize, width: usize) -> WeightedGraph {
    let mut g = WeightedGraph::new(height * width);
    for r in 0..height {
        for c in 0..width {
            let id = r * width + c;
            if c + 1 < width {
                g.insert_edge(id, id + 1, 1.0).unwrap();
            }
            if r + 1 < height {
                g.insert_edge(id, id + width, 1.0).unwrap();
            }
        }
    }
    g
}

/// Path on `n` vertices with unit weights.
pub fn path_graph(n: usize) -> WeightedGraph {
    let mut g = WeightedGraph::new(n);
    for v in 1..n {
        g.insert_edge(v - 1, v, 1.0).unwrap();
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_single_edge() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let l = g.laplacian();
        assert_eq!(l.get(0, 0), 1.0);
        assert_eq!(l.get(0, 1), -1.0);
        assert_eq!(l.get(1, 1), 1.0);

        let g3 = WeightedGraph::from_edges(2, &[(0, 1, 3.0)]).unwrap();
        let l3 = g3.laplacian();
        assert_eq!(l3.get(0, 0), 3.0);
        assert_eq!(l3.get(0, 1), -3.0);
    }

    #[test]
    fn laplacian_unit_triangle() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let l = g.laplacian();
        for i in 0..3 {
            assert_eq!(l.get(i, i), 2.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(l.get(i, j), -1.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_row_sums_vanish() {
        let g = WeightedGraph::from_edges(
            5,
            &[(0, 1, 0.25), (1, 2, 7.5), (2, 3, 1.0), (3, 4, 2.0), (0, 4, 0.125), (1, 3, 3.0)],
        )
        .unwrap();
        let l = g.laplacian();
        let scale = l.max_abs();
        for i in 0..5 {
            assert!(l.row_sum(i).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn resistance_single_edge_and_path() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert!((g.effective_resistance_exact(0, 1).unwrap() - 1.0).abs() < 1e-12);

        let p = path_graph(3);
        assert!((p.effective_resistance_exact(0, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn resistance_k4_is_half() {
        let mut g = WeightedGraph::new(4);
        for u in 0..4 {
            for v in (u + 1)..4 {
                g.insert_edge(u, v, 1.0).unwrap();
            }
        }
        for u in 0..4 {
            for v in (u + 1)..4 {
                assert!((g.effective_resistance_exact(u, v).unwrap() - 0.5).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn resistance_errors() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.effective_resistance_exact(0, 0), Err(Error::SameVertex));
        assert_eq!(g.effective_resistance_exact(0, 2), Err(Error::Disconnected));
    }

    #[test]
    fn energy_matches_resistance() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert!((g.electrical_flow_energy(0, 1).unwrap() - 1.0).abs() < 1e-12);

        // two parallel unit edges: parallel law gives 1/2
        let p = WeightedGraph::from_edges(2, &[(0, 1, 1.0), (0, 1, 1.0)]).unwrap();
        assert!((p.electrical_flow_energy(0, 1).unwrap() - 0.5).abs() < 1e-12);

        let grid = grid_graph(3, 3);
        let r = grid.effective_resistance_exact(0, 8).unwrap();
        let e = grid.electrical_flow_energy(0, 8).unwrap();
        assert!((r - e).abs() <= 1e-8 * r);
    }

    #[test]
    fn insert_then_delete_restores_graph() {
        let mut g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let before = g.clone();
        g.insert_edge(0, 2, 0.5).unwrap();
        g.delete_edge(0, 2).unwrap();
        assert_eq!(g, before);
        assert!(g.degree_cache_consistent());
    }

    #[test]
    fn series_parallel_after_insert() {
        // path s-x-t of unit edges, then a direct unit edge: R = 2*1/(2+1)
        let mut g = path_graph(3);
        g.insert_edge(0, 2, 1.0).unwrap();
        let r = g.effective_resistance_exact(0, 2).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn delete_missing_edge_errors() {
        let mut g = path_graph(3);
        assert_eq!(g.delete_edge(0, 2), Err(Error::NoSuchEdge(0, 2)));
        assert_eq!(g.insert_edge(0, 2, 0.0), Err(Error::NonPositiveWeight(0.0)));
        assert_eq!(g.insert_edge(0, 2, -1.0), Err(Error::NonPositiveWeight(-1.0)));
        assert_eq!(g.insert_edge(0, 9, 1.0), Err(Error::UnknownVertex(9)));
    }

    #[test]
    fn text_round_trip() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.5), (1, 2, 2.0), (2, 3, 0.25)]).unwrap();
        let text = g.to_text();
        let back = WeightedGraph::from_text(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn demand_vectors() {
        let d = DemandVector::pair(4, 1, 3);
        assert_eq!(d.as_slice().iter().sum::<f64>(), 0.0);
        let i = DemandVector::indicator(4, 2);
        assert_eq!(i.as_slice().iter().filter(|&&x| x != 0.0).count(), 1);
        assert_eq!(i.as_slice()[2], 1.0);
    }
}
