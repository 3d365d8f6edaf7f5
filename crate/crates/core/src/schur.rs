//! Graph-level Schur complements, terminal-free walk weights, and the merge
//! operator used to compose node sparsifiers along a separator tree.
//!
//! All graphs here live on a shared vertex universe so merged results can be
//! identified by vertex id; eliminations compact to the active vertices
//! internally.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numerics::{schur_block, SymmetricMatrix};

/// A graph together with a designated terminal set `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalGraph {
    graph: WeightedGraph,
    terminals: Vec<usize>,
}

impl TerminalGraph {
    /// Terminals are sorted and deduped for canonical comparison.
    pub fn new(graph: WeightedGraph, terminals: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut terminals: Vec<usize> = terminals.into_iter().collect();
        terminals.sort_unstable();
        terminals.dedup();
        if let Some(&bad) = terminals.iter().find(|&&t| t >= graph.vertex_count()) {
            return Err(Error::UnknownVertex(bad));
        }
        Ok(TerminalGraph { graph, terminals })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminals.binary_search(&v).is_ok()
    }

    /// Vertices that carry edges or are terminals, sorted.
    pub fn active_vertices(&self) -> Vec<usize> {
        let mut active = self.terminals.clone();
        for e in self.graph.edges() {
            active.push(e.u);
            active.push(e.v);
        }
        active.sort_unstable();
        active.dedup();
        active
    }
}

fn graph_from_laplacian(
    universe: usize,
    matrix: &SymmetricMatrix,
    labels: &[usize],
) -> WeightedGraph {
    let scale = matrix.max_abs().max(1.0);
    let mut g = WeightedGraph::new(universe);
    for i in 0..matrix.order() {
        for j in 0..i {
            let w = -matrix.get(i, j);
            if w > 1e-12 * scale {
                g.insert_edge(labels[j], labels[i], w).unwrap();
            }
        }
    }
    g
}

/// Exact Schur complement of `tg` onto its terminals, returned as a graph on
/// the same vertex universe with edges only among terminals. A graph that is
/// already all terminals comes back conductance-merged.
pub fn exact_schur(tg: &TerminalGraph) -> Result<WeightedGraph> {
    let universe = tg.graph().vertex_count();
    let active = tg.active_vertices();
    let keep_local: Vec<usize> = active
        .iter()
        .enumerate()
        .filter(|(_, &v)| tg.is_terminal(v))
        .map(|(i, _)| i)
        .collect();
    if keep_local.is_empty() {
        return Ok(WeightedGraph::new(universe));
    }
    let local = tg.graph().laplacian_on(&active);
    let s = schur_block(&local, &keep_local)?;
    let labels: Vec<usize> = keep_local.iter().map(|&i| active[i]).collect();
    Ok(graph_from_laplacian(universe, &s, &labels))
}

/// Weight of one terminal-free walk `u_0, ..., u_l`: the product of its edge
/// conductances over the product of the interior weighted degrees. Parallel
/// edges are conductance-merged, which sums the per-copy walks.
pub fn walk_weight(tg: &TerminalGraph, walk: &[usize]) -> Result<f64> {
    if walk.len() < 2 {
        return Err(Error::NotAWalk("walk needs at least two vertices".into()));
    }
    for &v in walk {
        if v >= tg.graph().vertex_count() {
            return Err(Error::UnknownVertex(v));
        }
    }
    if !tg.is_terminal(walk[0]) || !tg.is_terminal(*walk.last().unwrap()) {
        return Err(Error::NotTerminalFree(
            "endpoints must be terminals".into(),
        ));
    }
    for &v in &walk[1..walk.len() - 1] {
        if tg.is_terminal(v) {
            return Err(Error::NotTerminalFree(format!(
                "interior vertex {v} is a terminal"
            )));
        }
    }
    let merged = tg.graph().merged_edges();
    let mut numerator = 1.0;
    for pair in walk.windows(2) {
        let key = if pair[0] <= pair[1] {
            (pair[0], pair[1])
        } else {
            (pair[1], pair[0])
        };
        match merged.get(&key) {
            Some(&w) => numerator *= w,
            None => {
                return Err(Error::NotAWalk(format!(
                    "({}, {}) is not an edge",
                    pair[0], pair[1]
                )))
            }
        }
    }
    let mut denominator = 1.0;
    for &v in &walk[1..walk.len() - 1] {
        denominator *= tg.graph().weighted_degree(v);
    }
    Ok(numerator / denominator)
}

const WALK_BUDGET: u64 = 10_000_000;

/// Assembles the Schur complement as the multigraph of all terminal-free
/// walks of length at most `max_len`, with walk weights as above. Test oracle
/// only: the walk count is exponential and, with cycles among non-terminals,
/// convergence to [`exact_schur`] needs `max_len` to grow without bound.
pub fn schur_by_walks(tg: &TerminalGraph, max_len: usize) -> Result<WeightedGraph> {
    let universe = tg.graph().vertex_count();
    let merged = tg.graph().merged_edges();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); universe];
    for (&(u, v), &w) in &merged {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }

    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut visited: u64 = 0;

    // walk canonical orientation: recorded only when end > start
    struct Dfs<'a> {
        tg: &'a TerminalGraph,
        adj: &'a [Vec<(usize, f64)>],
        max_len: usize,
        acc: &'a mut BTreeMap<(usize, usize), f64>,
        visited: &'a mut u64,
    }
    impl Dfs<'_> {
        fn step(&mut self, start: usize, current: usize, weight: f64, degrees: f64, len: usize) -> Result<()> {
            if len >= self.max_len {
                return Ok(());
            }
            for &(next, w) in &self.adj[current] {
                *self.visited += 1;
                if *self.visited > WALK_BUDGET {
                    return Err(Error::Budget(*self.visited));
                }
                let walk_w = weight * w;
                if self.tg.is_terminal(next) {
                    if next > start {
                        *self.acc.entry((start, next)).or_insert(0.0) += walk_w / degrees;
                    }
                } else {
                    let deg = self.tg.graph().weighted_degree(next);
                    self.step(start, next, walk_w, degrees * deg, len + 1)?;
                }
            }
            Ok(())
        }
    }

    for &start in tg.terminals() {
        Dfs {
            tg,
            adj: &adj,
            max_len,
            acc: &mut acc,
            visited: &mut visited,
        }
        .step(start, start, 1.0, 1.0, 0)?;
    }

    let mut g = WeightedGraph::new(universe);
    for ((u, v), w) in acc {
        g.insert_edge(u, v, w).unwrap();
    }
    Ok(g)
}

/// The merge `G1 ⊕ G2`: union of edges with terminal set `K1 ∪ K2`, shared
/// vertices identified by id. Every shared vertex must be a terminal on both
/// sides.
pub fn merge(a: &TerminalGraph, b: &TerminalGraph) -> Result<TerminalGraph> {
    assert_eq!(
        a.graph().vertex_count(),
        b.graph().vertex_count(),
        "merge requires a shared vertex universe"
    );
    let va = a.active_vertices();
    for &v in &va {
        let in_b = b.is_terminal(v)
            || b.graph().edges().iter().any(|e| e.u == v || e.v == v);
        if in_b && !(a.is_terminal(v) && b.is_terminal(v)) {
            return Err(Error::SharedNonTerminal(v));
        }
    }
    let mut g = WeightedGraph::new(a.graph().vertex_count());
    for e in a.graph().edges().iter().chain(b.graph().edges()) {
        g.insert_edge(e.u, e.v, e.weight)?;
    }
    let terminals: Vec<usize> = a
        .terminals()
        .iter()
        .chain(b.terminals())
        .copied()
        .collect();
    TerminalGraph::new(g, terminals)
}
