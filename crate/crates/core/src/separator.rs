//! Balanced-separator strategies and the separator-tree builder.
//!
//! A tree node covers a subgraph of the original graph: leaves own edge lists,
//! internal nodes own a separator, a boundary set, and (while dynamic updates
//! are in flight) a set of cross edges whose endpoints straddle both children.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{DisjointSets, Edge, WeightedGraph};

/// Which cut rule a separator search uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeparatorKind {
    /// Median line cut by grid coordinates inferred from `width`.
    Grid { width: usize },
    /// BFS level of minimum size subject to balance, after a double sweep.
    BfsLevel,
    /// Fiedler-vector sweep cut; the separator is the cut-edge endpoint cover.
    SpectralBisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatorConfig {
    pub kind: SeparatorKind,
    /// Balance parameter: parts after removal have at most `alpha * n` vertices.
    pub alpha: f64,
    /// Size budget coefficient: a separator has at most `beta * sqrt(n)` vertices.
    pub beta: f64,
}

impl SeparatorConfig {
    pub fn new(kind: SeparatorKind) -> Self {
        SeparatorConfig {
            kind,
            alpha: 2.0 / 3.0,
            beta: 4.0,
        }
    }

    pub fn bfs() -> Self {
        SeparatorConfig::new(SeparatorKind::BfsLevel)
    }

    pub fn grid(width: usize) -> Self {
        SeparatorConfig::new(SeparatorKind::Grid { width })
    }

    pub fn spectral() -> Self {
        SeparatorConfig::new(SeparatorKind::SpectralBisection)
    }
}

/// Append-only edge arena with stable ids. Deleted slots stay as tombstones so
/// ids never move.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStore {
    slots: Vec<Option<Edge>>,
    live: usize,
}

impl EdgeStore {
    pub fn new() -> Self {
        EdgeStore {
            slots: Vec::new(),
            live: 0,
        }
    }

    pub fn from_graph(g: &WeightedGraph) -> Self {
        let mut s = EdgeStore::new();
        for e in g.edges() {
            s.insert(*e);
        }
        s
    }

    pub fn insert(&mut self, e: Edge) -> usize {
        self.slots.push(Some(e));
        self.live += 1;
        self.slots.len() - 1
    }

    pub fn remove(&mut self, id: usize) -> Option<Edge> {
        let e = self.slots.get_mut(id)?.take();
        if e.is_some() {
            self.live -= 1;
        }
        e
    }

    pub fn get(&self, id: usize) -> Option<&Edge> {
        self.slots.get(id).and_then(|s| s.as_ref())
    }

    pub fn live_count(&self) -> usize {
        self.live
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Live edges in id order.
    pub fn iter_live(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|e| (i, e)))
    }

    pub fn to_graph(&self, vertex_count: usize) -> WeightedGraph {
        let mut g = WeightedGraph::new(vertex_count);
        for (_, e) in self.iter_live() {
            g.insert_edge(e.u, e.v, e.weight).unwrap();
        }
        g
    }
}

impl Default for EdgeStore {
    fn default() -> Self {
        EdgeStore::new()
    }
}

/// One node of a separator tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Option<(usize, usize)>,
    /// Vertices of the subgraph, sorted.
    pub vertices: Vec<usize>,
    /// Separator chosen at this node (empty at leaves), sorted.
    pub separator: Vec<usize>,
    /// Boundary set of the node.
    pub boundary: BTreeSet<usize>,
    /// Boundary vertices force-added at this node (terminal additions and
    /// cross-edge endpoints), on top of the structural recursion.
    pub forced_boundary: BTreeSet<usize>,
    /// Edge ids owned by this leaf.
    pub leaf_edges: Vec<usize>,
    /// Cross-edge ids X(H) parked at this internal node.
    pub cross_edges: Vec<usize>,
    /// Longest distance to a leaf below.
    pub height: usize,
    /// Cached sparsified complement onto the boundary.
    pub asc: Option<WeightedGraph>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    pub vertex_count: usize,
    /// Edge threshold below which recursion stopped.
    pub leaf_edge_cap: usize,
}

impl SeparatorTree {
    pub fn height(&self) -> usize {
        self.nodes[self.root].height
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Node ids in children-before-parents order.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&i| self.nodes[i].height);
        order
    }

    /// Path from the root to `node`, inclusive.
    pub fn path_from_root(&self, node: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = Some(node);
        while let Some(id) = cur {
            path.push(id);
            cur = self.nodes[id].parent;
        }
        path.reverse();
        path
    }

    /// Exact subgraph covered by `node`: its leaves' edges plus every cross
    /// edge parked at or below it.
    pub fn node_edge_ids(&self, node: usize) -> Vec<usize> {
        let mut ids = Vec::new();
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            ids.extend_from_slice(&n.leaf_edges);
            ids.extend_from_slice(&n.cross_edges);
            if let Some((a, b)) = n.children {
                stack.push(a);
                stack.push(b);
            }
        }
        ids.sort_unstable();
        ids
    }
}

fn component_split(vertices: &[usize], edges: &[(usize, usize)], removed: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    let mut index = std::collections::HashMap::new();
    let keep: Vec<usize> = vertices
        .iter()
        .copied()
        .filter(|v| !removed.contains(v))
        .collect();
    for (i, &v) in keep.iter().enumerate() {
        index.insert(v, i);
    }
    let mut dsu = DisjointSets::new(keep.len());
    for &(u, v) in edges {
        if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
            dsu.union(a, b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &v) in keep.iter().enumerate() {
        groups.entry(dsu.find(i)).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Checks balance: with `separator` removed, every component of the subgraph
/// has at most `alpha * n` vertices.
fn separator_is_balanced(
    vertices: &[usize],
    edges: &[(usize, usize)],
    separator: &BTreeSet<usize>,
    alpha: f64,
) -> bool {
    let cap = (alpha * vertices.len() as f64).floor() as usize;
    component_split(vertices, edges, separator)
        .iter()
        .all(|c| c.len() <= cap.max(1))
}

struct Bfs {
    order: Vec<usize>,
    level: Vec<Vec<usize>>,
}

fn bfs_levels(start: usize, adjacency: &std::collections::HashMap<usize, Vec<usize>>) -> Bfs {
    let mut level = vec![vec![start]];
    let mut seen: BTreeSet<usize> = [start].into();
    let mut order = vec![start];
    loop {
        let mut next = Vec::new();
        for &v in level.last().unwrap() {
            for &u in adjacency.get(&v).map(|a| a.as_slice()).unwrap_or(&[]) {
                if seen.insert(u) {
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        order.extend_from_slice(&next);
        level.push(next);
    }
    Bfs { order, level }
}

fn grid_candidates(vertices: &[usize], width: usize) -> Vec<Vec<usize>> {
    let coord = |v: usize| (v / width, v % width);
    let (mut rmin, mut rmax, mut cmin, mut cmax) = (usize::MAX, 0, usize::MAX, 0);
    for &v in vertices {
        let (r, c) = coord(v);
        rmin = rmin.min(r);
        rmax = rmax.max(r);
        cmin = cmin.min(c);
        cmax = cmax.max(c);
    }
    let by_row = rmax - rmin >= cmax - cmin;
    let (lo, hi) = if by_row { (rmin, rmax) } else { (cmin, cmax) };
    if hi <= lo + 1 {
        return Vec::new();
    }
    let mid = (lo + hi) / 2;
    // median line outward
    let mut lines: Vec<usize> = (lo + 1..hi).collect();
    lines.sort_by_key(|&l| (l.max(mid) - l.min(mid), l));
    lines
        .into_iter()
        .map(|l| {
            vertices
                .iter()
                .copied()
                .filter(|&v| {
                    let (r, c) = coord(v);
                    (if by_row { r } else { c }) == l
                })
                .collect()
        })
        .collect()
}

/// Deterministic Fiedler-direction estimate by power iteration on
/// `(shift I - L)` with the all-ones direction projected out.
fn fiedler_direction(vertices: &[usize], edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let n = vertices.len();
    let mut index = std::collections::HashMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        index.insert(v, i);
    }
    let mut degree = vec![0.0f64; n];
    let local: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(u, v, w)| (index[&u], index[&v], w))
        .collect();
    for &(u, v, w) in &local {
        degree[u] += w;
        degree[v] += w;
    }
    let shift = 2.0 * degree.iter().fold(1.0f64, |a, &b| a.max(b));
    let mut x: Vec<f64> = (0..n)
        .map(|i| ((i as u64).wrapping_mul(2654435761) % 10007) as f64 / 10007.0 - 0.5)
        .collect();
    for _ in 0..220 {
        // y = (shift I - L) x
        let mut y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| (shift - degree[i]) * xi)
            .collect();
        for &(u, v, w) in &local {
            y[u] += w * x[v];
            y[v] += w * x[u];
        }
        let mean = y.iter().sum::<f64>() / n as f64;
        for yi in &mut y {
            *yi -= mean;
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            break;
        }
        for yi in &mut y {
            *yi /= norm;
        }
        x = y;
    }
    x
}

fn spectral_candidates(vertices: &[usize], edges: &[(usize, usize, f64)]) -> Vec<Vec<usize>> {
    let n = vertices.len();
    let fiedler = fiedler_direction(vertices, edges);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        fiedler[a]
            .partial_cmp(&fiedler[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(vertices[a].cmp(&vertices[b]))
    });
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut index = std::collections::HashMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        index.insert(v, i);
    }
    let mut candidates = Vec::new();
    let lo = n / 4;
    let hi = (3 * n) / 4;
    for split in lo..=hi.min(n.saturating_sub(1)) {
        // cut between ranks < split and >= split; cover on the smaller side
        let mut cover: BTreeSet<usize> = BTreeSet::new();
        for &(u, v, _) in edges {
            let (ru, rv) = (rank[index[&u]], rank[index[&v]]);
            if (ru < split) != (rv < split) {
                let side_small = split <= n / 2;
                let pick = if (ru < split) == side_small { u } else { v };
                cover.insert(pick);
            }
        }
        if !cover.is_empty() {
            candidates.push(cover.into_iter().collect());
        }
    }
    candidates.sort_by_key(|c: &Vec<usize>| c.len());
    candidates.dedup();
    candidates.truncate(24);
    candidates
}

fn subgraph_parts(
    g_vertices: &[usize],
    g_edges: &[(usize, usize, f64)],
) -> (Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let pairs: Vec<(usize, usize)> = g_edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let comps = component_split(g_vertices, &pairs, &BTreeSet::new());
    (pairs, comps)
}

/// Finds a balanced separator of the given subgraph under `cfg`.
///
/// A disconnected input whose components are already balanced needs no
/// separator (empty result); otherwise the strategy runs on the largest
/// component and every candidate is verified for balance and size before
/// being accepted.
pub fn find_separator_of(
    vertices: &[usize],
    edges: &[(usize, usize, f64)],
    cfg: &SeparatorConfig,
) -> Result<Vec<usize>> {
    let n = vertices.len();
    if n == 0 {
        return Err(Error::NoBalancedSeparator("empty subgraph".into()));
    }
    let budget = (cfg.beta * (n as f64).sqrt()).ceil() as usize;
    let (pairs, comps) = subgraph_parts(vertices, edges);
    let cap = ((cfg.alpha * n as f64).floor() as usize).max(1);
    let largest = comps.iter().max_by_key(|c| c.len()).unwrap();
    if largest.len() <= cap {
        return Ok(Vec::new());
    }

    let comp_set: BTreeSet<usize> = largest.iter().copied().collect();
    let comp_edges: Vec<(usize, usize, f64)> = edges
        .iter()
        .copied()
        .filter(|&(u, _, _)| comp_set.contains(&u))
        .collect();

    let candidates: Vec<Vec<usize>> = match cfg.kind {
        SeparatorKind::Grid { width } => grid_candidates(largest, width),
        SeparatorKind::BfsLevel => {
            let mut adjacency: std::collections::HashMap<usize, Vec<usize>> = Default::default();
            for &(u, v, _) in &comp_edges {
                adjacency.entry(u).or_default().push(v);
                adjacency.entry(v).or_default().push(u);
            }
            let first = bfs_levels(largest[0], &adjacency);
            let far = *first.order.last().unwrap();
            let sweep = bfs_levels(far, &adjacency);
            let mut levels = sweep.level;
            levels.sort_by_key(|l| l.len());
            levels
        }
        SeparatorKind::SpectralBisection => spectral_candidates(largest, &comp_edges),
    };

    for cand in candidates {
        if cand.is_empty() || cand.len() > budget {
            continue;
        }
        let set: BTreeSet<usize> = cand.iter().copied().collect();
        if separator_is_balanced(vertices, &pairs, &set, cfg.alpha) {
            let mut out: Vec<usize> = set.into_iter().collect();
            out.sort_unstable();
            return Ok(out);
        }
    }
    Err(Error::NoBalancedSeparator(format!(
        "no candidate met balance {} and budget {} on {} vertices",
        cfg.alpha, budget, n
    )))
}

/// Public entry over a whole graph.
pub fn find_separator(g: &WeightedGraph, cfg: &SeparatorConfig) -> Result<Vec<usize>> {
    let vertices: Vec<usize> = (0..g.vertex_count()).collect();
    let edges: Vec<(usize, usize, f64)> =
        g.edges().iter().map(|e| (e.u, e.v, e.weight)).collect();
    find_separator_of(&vertices, &edges, cfg)
}

pub fn leaf_edge_cap(vertex_count: usize) -> usize {
    ((vertex_count as f64).sqrt().ceil() as usize).max(32)
}

struct Builder<'a> {
    store: &'a EdgeStore,
    cfg: SeparatorConfig,
    cap: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn new_node(&mut self, parent: Option<usize>, vertices: Vec<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            id,
            parent,
            children: None,
            vertices,
            separator: Vec::new(),
            boundary: BTreeSet::new(),
            forced_boundary: BTreeSet::new(),
            leaf_edges: Vec::new(),
            cross_edges: Vec::new(),
            height: 0,
            asc: None,
        });
        id
    }

    fn build(&mut self, node: usize, edge_ids: Vec<usize>, forced_separator: &[usize]) -> Result<()> {
        if edge_ids.len() <= self.cap && forced_separator.is_empty() {
            self.nodes[node].leaf_edges = edge_ids;
            return Ok(());
        }
        let vertices = self.nodes[node].vertices.clone();
        let edges: Vec<(usize, usize, f64)> = edge_ids
            .iter()
            .map(|&id| {
                let e = self.store.get(id).expect("dangling edge id");
                (e.u, e.v, e.weight)
            })
            .collect();
        let mut separator = if forced_separator.is_empty() {
            find_separator_of(&vertices, &edges, &self.cfg)?
        } else {
            // the root separator must contain the requested vertices
            let mut s: BTreeSet<usize> =
                find_separator_of(&vertices, &edges, &self.cfg)?.into_iter().collect();
            s.extend(forced_separator.iter().copied());
            s.into_iter().collect()
        };
        separator.sort_unstable();
        let sep_set: BTreeSet<usize> = separator.iter().copied().collect();
        let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let mut comps = component_split(&vertices, &pairs, &sep_set);
        // deterministic greedy bin packing: big components first, ties by
        // smallest vertex, each to the lighter side (side 1 on ties)
        comps.sort_by_key(|c| (std::cmp::Reverse(c.len()), c[0]));
        let mut group = (Vec::new(), Vec::new());
        let mut load = (0usize, 0usize);
        for comp in comps {
            if load.0 <= load.1 {
                load.0 += comp.len();
                group.0.extend(comp);
            } else {
                load.1 += comp.len();
                group.1.extend(comp);
            }
        }
        let mut side = vec![0u8; 0];
        let mut side_of = std::collections::HashMap::new();
        for &v in &group.0 {
            side_of.insert(v, 1u8);
        }
        for &v in &group.1 {
            side_of.insert(v, 2u8);
        }
        side.clear();

        let mut verts1: Vec<usize> = group.0.iter().chain(separator.iter()).copied().collect();
        let mut verts2: Vec<usize> = group.1.iter().chain(separator.iter()).copied().collect();
        verts1.sort_unstable();
        verts2.sort_unstable();
        if verts1.len() >= vertices.len() && verts2.len() >= vertices.len() {
            return Err(Error::NoBalancedSeparator(
                "split made no progress".into(),
            ));
        }

        let mut edges1 = Vec::new();
        let mut edges2 = Vec::new();
        for &id in &edge_ids {
            let e = self.store.get(id).unwrap();
            let su = side_of.get(&e.u).copied().unwrap_or(0);
            let sv = side_of.get(&e.v).copied().unwrap_or(0);
            match (su, sv) {
                (1, 1) | (1, 0) | (0, 1) => edges1.push(id),
                (2, 2) | (2, 0) | (0, 2) => edges2.push(id),
                (0, 0) => edges1.push(id), // both endpoints in the separator: child 1
                _ => {
                    return Err(Error::NoBalancedSeparator(
                        "separator failed to split an edge".into(),
                    ))
                }
            }
        }

        let c1 = self.new_node(Some(node), verts1);
        let c2 = self.new_node(Some(node), verts2);
        self.nodes[node].children = Some((c1, c2));
        self.nodes[node].separator = separator;
        self.build(c1, edges1, &[])?;
        self.build(c2, edges2, &[])?;
        Ok(())
    }
}

/// Builds a separator tree over the live edges of `store`. Vertices listed in
/// `root_separator_extra` are forced into the root separator (used to keep
/// index terminals on the root boundary).
pub fn build_tree(
    store: &EdgeStore,
    vertex_count: usize,
    cfg: &SeparatorConfig,
    root_separator_extra: &[usize],
) -> Result<SeparatorTree> {
    let cap = leaf_edge_cap(vertex_count);
    let mut builder = Builder {
        store,
        cfg: *cfg,
        cap,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..vertex_count).collect();
    let root = builder.new_node(None, all);
    let edge_ids: Vec<usize> = store.iter_live().map(|(id, _)| id).collect();
    let forced: Vec<usize> = if edge_ids.len() <= cap && !root_separator_extra.is_empty() {
        // tiny graph: the root is a leaf; terminals live on its boundary
        Vec::new()
    } else {
        root_separator_extra.to_vec()
    };
    builder.build(root, edge_ids, &forced)?;
    let mut tree = SeparatorTree {
        nodes: builder.nodes,
        root,
        vertex_count,
        leaf_edge_cap: cap,
    };
    // heights bottom-up
    let mut order: Vec<usize> = (0..tree.nodes.len()).collect();
    order.reverse(); // children are always created after parents
    for id in order {
        if let Some((a, b)) = tree.nodes[id].children {
            tree.nodes[id].height = 1 + tree.nodes[a].height.max(tree.nodes[b].height);
        }
    }
    // boundaries top-down; the root's boundary is its separator (plus any
    // forced vertices when the root is a leaf)
    let root_sep: BTreeSet<usize> = tree.nodes[root].separator.iter().copied().collect();
    tree.nodes[root].boundary = root_sep;
    if tree.nodes[root].is_leaf() {
        for &v in root_separator_extra {
            tree.nodes[root].boundary.insert(v);
            tree.nodes[root].forced_boundary.insert(v);
        }
    }
    let ids: Vec<usize> = (0..tree.nodes.len()).collect();
    for id in ids {
        if let Some((a, b)) = tree.nodes[id].children {
            let parent_boundary = tree.nodes[id].boundary.clone();
            for child in [a, b] {
                let mut boundary: BTreeSet<usize> =
                    tree.nodes[id].separator.iter().copied().collect();
                for &v in &parent_boundary {
                    if tree.nodes[child].contains_vertex(v) {
                        boundary.insert(v);
                    }
                }
                tree.nodes[child].boundary = boundary;
            }
        }
    }
    Ok(tree)
}

/// Convenience: build a tree directly over a graph.
pub fn build_separator_tree(
    g: &WeightedGraph,
    cfg: &SeparatorConfig,
) -> Result<(SeparatorTree, EdgeStore)> {
    let store = EdgeStore::from_graph(g);
    let tree = build_tree(&store, g.vertex_count(), cfg, &[])?;
    Ok((tree, store))
}

/// One failed structural property.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub property: &'static str,
    pub node: usize,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] node {}: {}", self.property, self.node, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateLimits {
    /// `|boundary| <= boundary_coeff * sqrt(n)`.
    pub boundary_coeff: f64,
    /// Leaf count at most `leaf_count_coeff * sqrt(n)` plus a small constant.
    pub leaf_count_coeff: f64,
    /// Height at most `height_coeff * log2(n)`.
    pub height_coeff: f64,
    /// Extra per-leaf edges tolerated beyond the build cap (mid-epoch inserts).
    pub leaf_edge_slack: usize,
    /// Extra boundary vertices tolerated (mid-epoch additions).
    pub boundary_slack: usize,
}

impl Default for ValidateLimits {
    fn default() -> Self {
        ValidateLimits {
            boundary_coeff: 4.0,
            leaf_count_coeff: 4.0,
            height_coeff: 3.0,
            leaf_edge_slack: 0,
            boundary_slack: 0,
        }
    }
}

/// Checks the structural tree properties and the edge-location invariant;
/// every failure becomes one [`Violation`].
pub fn validate(tree: &SeparatorTree, store: &EdgeStore, limits: &ValidateLimits) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = tree.vertex_count;
    let sqrt_n = (n as f64).sqrt();
    let report = |out: &mut Vec<Violation>, property: &'static str, node: usize, detail: String| {
        out.push(Violation {
            property,
            node,
            detail,
        });
    };

    // P1: the root covers the whole graph
    let root = &tree.nodes[tree.root];
    if root.vertices.len() != n {
        report(
            &mut out,
            "P1",
            tree.root,
            format!("root has {} of {} vertices", root.vertices.len(), n),
        );
    }

    for node in &tree.nodes {
        // sanity: separator and boundary live inside the node
        for &s in &node.separator {
            if !node.contains_vertex(s) {
                report(&mut out, "P2", node.id, format!("separator vertex {s} outside node"));
            }
        }
        if let Some((a, b)) = node.children {
            let ca = &tree.nodes[a];
            let cb = &tree.nodes[b];
            // P2: children cover the node and overlap exactly on the separator
            let mut union: Vec<usize> = ca.vertices.iter().chain(&cb.vertices).copied().collect();
            union.sort_unstable();
            union.dedup();
            if union != node.vertices {
                report(&mut out, "P2", node.id, "children do not cover the node".into());
            }
            let inter: Vec<usize> = ca
                .vertices
                .iter()
                .copied()
                .filter(|&v| cb.contains_vertex(v))
                .collect();
            if inter != node.separator {
                report(
                    &mut out,
                    "P2",
                    node.id,
                    format!(
                        "child overlap has {} vertices, separator {}",
                        inter.len(),
                        node.separator.len()
                    ),
                );
            }
            // P4: children boundaries cover the parent boundary
            for &v in &node.boundary {
                if !ca.boundary.contains(&v) && !cb.boundary.contains(&v) {
                    report(
                        &mut out,
                        "P4",
                        node.id,
                        format!("boundary vertex {v} missing from both children"),
                    );
                }
            }
        }
        // P3: boundary recursion
        let mut expected: BTreeSet<usize> = node.separator.iter().copied().collect();
        expected.extend(node.forced_boundary.iter().copied());
        if let Some(pid) = node.parent {
            for &v in &tree.nodes[pid].boundary {
                if node.contains_vertex(v) {
                    expected.insert(v);
                }
            }
        }
        if expected != node.boundary {
            report(
                &mut out,
                "P3",
                node.id,
                format!(
                    "boundary has {} vertices, recursion gives {}",
                    node.boundary.len(),
                    expected.len()
                ),
            );
        }
        // P5: boundary budget
        let allowed = (limits.boundary_coeff * sqrt_n).ceil() as usize + limits.boundary_slack;
        if node.boundary.len() > allowed {
            report(
                &mut out,
                "P5",
                node.id,
                format!("boundary {} exceeds {}", node.boundary.len(), allowed),
            );
        }
        // P6 (per-leaf size)
        if node.is_leaf() && node.leaf_edges.len() > tree.leaf_edge_cap + limits.leaf_edge_slack {
            report(
                &mut out,
                "P6",
                node.id,
                format!(
                    "leaf holds {} edges, cap {}",
                    node.leaf_edges.len(),
                    tree.leaf_edge_cap + limits.leaf_edge_slack
                ),
            );
        }
        if !node.is_leaf() && !node.leaf_edges.is_empty() {
            report(&mut out, "P6", node.id, "internal node owns leaf edges".into());
        }
    }

    // P6 (leaf count)
    let max_leaves = (limits.leaf_count_coeff * sqrt_n).ceil() as usize + 2;
    if tree.leaf_count() > max_leaves {
        report(
            &mut out,
            "P6",
            tree.root,
            format!("{} leaves exceed {}", tree.leaf_count(), max_leaves),
        );
    }

    // P7: height
    let max_height = (limits.height_coeff * (n.max(2) as f64).log2()).ceil() as usize;
    if tree.height() > max_height.max(1) {
        report(
            &mut out,
            "P7",
            tree.root,
            format!("height {} exceeds {}", tree.height(), max_height),
        );
    }

    // P8 / edge-location invariant: every live edge in exactly one home
    let mut seen: std::collections::HashMap<usize, usize> = Default::default();
    for node in &tree.nodes {
        for &id in node.leaf_edges.iter().chain(&node.cross_edges) {
            *seen.entry(id).or_insert(0) += 1;
            if store.get(id).is_none() {
                report(&mut out, "I1", node.id, format!("edge id {id} is dead"));
            }
        }
    }
    for (id, _) in store.iter_live() {
        match seen.get(&id) {
            Some(1) => {}
            Some(k) => report(
                &mut out,
                "I1",
                tree.root,
                format!("edge id {id} homed {k} times"),
            ),
            None => report(&mut out, "I1", tree.root, format!("edge id {id} unhomed")),
        }
    }
    for node in &tree.nodes {
        for &id in node.leaf_edges.iter().chain(&node.cross_edges) {
            if let Some(e) = store.get(id) {
                if !node.contains_vertex(e.u) || !node.contains_vertex(e.v) {
                    report(
                        &mut out,
                        "I1",
                        node.id,
                        format!("edge {id} has endpoints outside the node"),
                    );
                }
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{grid_graph, path_graph, WeightedGraph};

    #[test]
    fn grid_median_cut() {
        let g = grid_graph(4, 4);
        let cfg = SeparatorConfig::grid(4);
        let s = find_separator(&g, &cfg).unwrap();
        assert_eq!(s.len(), 4);
        let set: BTreeSet<usize> = s.iter().copied().collect();
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        let all: Vec<usize> = (0..16).collect();
        for comp in component_split(&all, &pairs, &set) {
            assert!(comp.len() <= 12);
        }
    }

    #[test]
    fn path_and_star_separators() {
        let p = path_graph(33);
        let s = find_separator(&p, &SeparatorConfig::bfs()).unwrap();
        assert_eq!(s.len(), 1);

        let mut star = WeightedGraph::new(9);
        for leaf in 1..9 {
            star.insert_edge(0, leaf, 1.0).unwrap();
        }
        let s = find_separator(&star, &SeparatorConfig::bfs()).unwrap();
        assert_eq!(s, vec![0]);
    }

    #[test]
    fn spectral_grid_separator_within_budget() {
        let g = grid_graph(8, 8);
        let cfg = SeparatorConfig::spectral();
        let s = find_separator(&g, &cfg).unwrap();
        assert!(!s.is_empty());
        assert!(s.len() <= (cfg.beta * 8.0).ceil() as usize);
    }

    #[test]
    fn single_edge_tree_is_one_leaf() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let (tree, store) = build_separator_tree(&g, &SeparatorConfig::bfs()).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert!(tree.nodes[tree.root].is_leaf());
        assert!(validate(&tree, &store, &ValidateLimits::default()).is_empty());
    }

    #[test]
    fn grid_tree_validates() {
        let g = grid_graph(8, 8);
        for cfg in [SeparatorConfig::bfs(), SeparatorConfig::grid(8)] {
            let (tree, store) = build_separator_tree(&g, &cfg).unwrap();
            let violations = validate(&tree, &store, &ValidateLimits::default());
            assert!(violations.is_empty(), "{violations:?}");
            assert!(tree.height() <= 3 * 6);
            for node in &tree.nodes {
                assert!(node.boundary.len() <= 32);
            }
        }
    }

    #[test]
    fn path_tree_leaf_sizes() {
        let g = path_graph(64);
        let (tree, store) = build_separator_tree(&g, &SeparatorConfig::bfs()).unwrap();
        assert!(validate(&tree, &store, &ValidateLimits::default()).is_empty());
        for node in &tree.nodes {
            if node.is_leaf() {
                assert!(node.leaf_edges.len() <= tree.leaf_edge_cap);
            }
        }
    }

    #[test]
    fn deterministic_build() {
        let g = grid_graph(6, 7);
        let cfg = SeparatorConfig::bfs();
        let (t1, _) = build_separator_tree(&g, &cfg).unwrap();
        let (t2, _) = build_separator_tree(&g, &cfg).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn planted_duplicate_edge_violates_invariant() {
        let g = grid_graph(4, 8);
        let (mut tree, store) = build_separator_tree(&g, &SeparatorConfig::bfs()).unwrap();
        let (leaf_a, edge) = tree
            .nodes
            .iter()
            .find(|n| n.is_leaf() && !n.leaf_edges.is_empty())
            .map(|n| (n.id, n.leaf_edges[0]))
            .unwrap();
        let leaf_b = tree
            .nodes
            .iter()
            .find(|n| n.is_leaf() && n.id != leaf_a)
            .map(|n| n.id)
            .unwrap();
        tree.nodes[leaf_b].leaf_edges.push(edge);
        let violations = validate(&tree, &store, &ValidateLimits::default());
        assert!(violations.iter().any(|v| v.property == "I1"));
    }

    #[test]
    fn planted_boundary_break_violates_recursion() {
        let g = grid_graph(4, 8);
        let (mut tree, store) = build_separator_tree(&g, &SeparatorConfig::bfs()).unwrap();
        let child = tree.nodes[tree.root].children.unwrap().0;
        let v = *tree.nodes[child].boundary.iter().next().unwrap();
        tree.nodes[child].boundary.remove(&v);
        let violations = validate(&tree, &store, &ValidateLimits::default());
        assert!(violations.iter().any(|v| v.property == "P3"));
    }

    #[test]
    fn unbalanced_graph_error() {
        // K_12 has no sqrt-size balanced separator
        let mut g = WeightedGraph::new(12);
        for u in 0..12 {
            for v in (u + 1)..12 {
                g.insert_edge(u, v, 1.0).unwrap();
            }
        }
        let err = find_separator(&g, &SeparatorConfig::bfs());
        assert!(matches!(err, Err(Error::NoBalancedSeparator(_))));
    }
}
