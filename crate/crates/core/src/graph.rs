//! Weighted undirected graphs and rooted shortest-path trees.
//!
//! Edge ids are assigned by input order and every structure in the crate refers
//! to edges by id. A [`RootedPreprocess`] is the Dijkstra tree from a root node:
//! each non-root node owns exactly one tree edge (its parent edge), so the set
//! of nodes below a tree edge is the subtree hanging off it.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::error::{Result, UstError};

pub type NodeId = usize;
pub type EdgeId = usize;

/// Default absolute tolerance (length units) under which two path lengths count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub length: f64,
}

impl Edge {
    #[inline]
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.u == node {
            self.v
        } else {
            self.u
        }
    }
}

/// Connected undirected graph with strictly positive edge lengths.
#[derive(Debug, Clone)]
pub struct PhysicalGraph {
    node_count: usize,
    edges: Vec<Edge>,
    // CSR adjacency: neighbours of `n` are adj[offsets[n]..offsets[n + 1]]
    offsets: Vec<usize>,
    adj: Vec<(NodeId, EdgeId)>,
}

impl PhysicalGraph {
    /// Validates and builds a graph. Edge order is preserved so that edge `i`
    /// of the input is edge id `i`.
    pub fn new(node_count: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        if node_count == 0 {
            return Err(UstError::EmptyGraph);
        }
        let mut seen: HashMap<(NodeId, NodeId), EdgeId> = HashMap::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        let mut degree = vec![0usize; node_count];
        for (id, &(u, v, length)) in edges.iter().enumerate() {
            for node in [u, v] {
                if node >= node_count {
                    return Err(UstError::NodeOutOfRange {
                        edge: id,
                        node,
                        node_count,
                    });
                }
            }
            if !(length > 0.0) || !length.is_finite() {
                return Err(UstError::NonPositiveWeight { edge: id, length });
            }
            if u == v {
                return Err(UstError::SelfLoop { edge: id, node: u });
            }
            let key = (u.min(v), u.max(v));
            if let Some(&first) = seen.get(&key) {
                return Err(UstError::DuplicateEdge { edge: id, first, u, v });
            }
            seen.insert(key, id);
            degree[u] += 1;
            degree[v] += 1;
            out.push(Edge { u, v, length });
        }

        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..node_count].to_vec();
        let mut adj = vec![(0, 0); 2 * out.len()];
        for (id, e) in out.iter().enumerate() {
            adj[fill[e.u]] = (e.v, id);
            fill[e.u] += 1;
            adj[fill[e.v]] = (e.u, id);
            fill[e.v] += 1;
        }

        let graph = PhysicalGraph {
            node_count,
            edges: out,
            offsets,
            adj,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, _) in self.neighbors(n) {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(unreachable) => Err(UstError::DisconnectedGraph { unreachable }),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// `(neighbour, edge id)` pairs incident to `node`.
    #[inline]
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[self.offsets[node]..self.offsets[node + 1]]
    }

    /// Sum of all edge lengths, i.e. the total length measure of the graph.
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Plain single-source Dijkstra distances.
    pub fn distances_from(&self, source: NodeId) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut done = vec![false; self.node_count];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            node: source,
        });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            for &(m, e) in self.neighbors(node) {
                let nd = d + self.edges[e].length;
                if !done[m] && nd < dist[m] {
                    dist[m] = nd;
                    heap.push(HeapEntry { dist: nd, node: m });
                }
            }
        }
        dist
    }

    /// Distances from `source` to each of `targets`, stopping once all are settled.
    pub fn distances_to(&self, source: NodeId, targets: &[NodeId]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut done = vec![false; self.node_count];
        let mut wanted = vec![false; self.node_count];
        let mut pending = 0usize;
        for &t in targets {
            if !wanted[t] {
                wanted[t] = true;
                pending += 1;
            }
        }
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            node: source,
        });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if pending == 0 {
                break;
            }
            if done[node] {
                continue;
            }
            done[node] = true;
            if wanted[node] {
                pending -= 1;
            }
            for &(m, e) in self.neighbors(node) {
                let nd = d + self.edges[e].length;
                if !done[m] && nd < dist[m] {
                    dist[m] = nd;
                    heap.push(HeapEntry { dist: nd, node: m });
                }
            }
        }
        targets.iter().map(|&t| dist[t]).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // min-heap on distance, ties broken by node id for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOptions {
    pub tie_tol: f64,
    /// Keep going when shortest paths tie; the smallest edge id wins.
    pub allow_ties: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            tie_tol: DEFAULT_TIE_TOL,
            allow_ties: false,
        }
    }
}

/// Shortest-path tree from a root together with the uniqueness report.
#[derive(Debug, Clone)]
pub struct RootedPreprocess {
    root: NodeId,
    dist: Vec<f64>,
    parent_edge: Vec<Option<EdgeId>>,
    parent: Vec<Option<NodeId>>,
    /// Index into `tree_edges` of each node's parent edge.
    position: Vec<usize>,
    tree_edges: Vec<EdgeId>,
    /// Child endpoint of each tree edge, aligned with `tree_edges`.
    tree_nodes: Vec<NodeId>,
    tree_lengths: Vec<f64>,
    dropped_edges: Vec<EdgeId>,
    tied: Vec<NodeId>,
}

impl RootedPreprocess {
    #[inline]
    pub fn root(&self) -> NodeId {
        self.root
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.dist.len()
    }

    /// Shortest-path distance from the root to `v`.
    #[inline]
    pub fn distance_to_root(&self, v: NodeId) -> f64 {
        self.dist[v]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    #[inline]
    pub fn parent_edge(&self, v: NodeId) -> Option<EdgeId> {
        self.parent_edge[v]
    }

    #[inline]
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    /// Position of `v`'s parent edge in [`Self::tree_edges`]; `None` for the root.
    #[inline]
    pub fn position(&self, v: NodeId) -> Option<usize> {
        self.parent[v].map(|_| self.position[v])
    }

    /// Tree edges in leaf-to-root order: every edge comes after all edges deeper in its subtree.
    pub fn tree_edges(&self) -> &[EdgeId] {
        &self.tree_edges
    }

    /// Edges not on any root path; they never contribute to the distance.
    pub fn dropped_edges(&self) -> &[EdgeId] {
        &self.dropped_edges
    }

    pub fn uniqueness_ok(&self) -> bool {
        self.tied.is_empty()
    }

    /// Nodes reachable from the root by two shortest paths within the tie tolerance.
    pub fn tied_nodes(&self) -> &[NodeId] {
        &self.tied
    }

    /// Child endpoint of each tree edge, aligned with [`Self::tree_edges`].
    pub fn tree_nodes(&self) -> &[NodeId] {
        &self.tree_nodes
    }

    /// Lengths of the tree edges, aligned with [`Self::tree_edges`].
    pub fn tree_lengths(&self) -> &[f64] {
        &self.tree_lengths
    }
}

/// Dijkstra from `root` recording unique parents.
///
/// A node is tied when a second predecessor reaches it within `tie_tol` of its
/// best distance. Unless `allow_ties` is set, any tie is an error.
pub fn shortest_path_tree(g: &PhysicalGraph, root: NodeId, opts: TreeOptions) -> Result<RootedPreprocess> {
    let pre = build_tree(g, root, opts.tie_tol)?;
    if !opts.allow_ties && !pre.tied.is_empty() {
        return Err(UstError::NonUniqueShortestPath { root, tied: pre.tied });
    }
    Ok(pre)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessReport {
    pub root: NodeId,
    pub ok: bool,
    pub tied: Vec<NodeId>,
}

/// Uniqueness check for a candidate root that never fails on ties.
pub fn validate_root(g: &PhysicalGraph, root: NodeId, tie_tol: f64) -> Result<UniquenessReport> {
    let pre = build_tree(g, root, tie_tol)?;
    Ok(UniquenessReport {
        root,
        ok: pre.tied.is_empty(),
        tied: pre.tied,
    })
}

fn build_tree(g: &PhysicalGraph, root: NodeId, tie_tol: f64) -> Result<RootedPreprocess> {
    let n = g.node_count();
    if root >= n {
        return Err(UstError::RootOutOfRange { root, node_count: n });
    }
    if !(tie_tol >= 0.0) {
        return Err(UstError::InvalidParams(format!(
            "tie tolerance must be nonnegative, got {tie_tol}"
        )));
    }
    let edges = g.edges();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut tied = vec![false; n];
    let mut done = vec![false; n];
    let mut settle_order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: root });

    while let Some(HeapEntry { node, .. }) = heap.pop() {
        if done[node] {
            continue;
        }
        // a tie-break may have moved dist[node] up by at most tie_tol
        let d = dist[node];
        done[node] = true;
        settle_order.push(node);
        for &(m, e) in g.neighbors(node) {
            if done[m] {
                continue;
            }
            let nd = d + edges[e].length;
            if nd < dist[m] - tie_tol {
                dist[m] = nd;
                parent_edge[m] = Some(e);
                tied[m] = false;
                heap.push(HeapEntry { dist: nd, node: m });
            } else if nd <= dist[m] + tie_tol {
                tied[m] = true;
                let current = parent_edge[m].expect("finite distance implies a parent");
                if e < current {
                    parent_edge[m] = Some(e);
                    dist[m] = nd;
                    heap.push(HeapEntry { dist: nd, node: m });
                }
            }
        }
    }

    let mut parent = vec![None; n];
    for v in 0..n {
        if let Some(e) = parent_edge[v] {
            parent[v] = Some(edges[e].other(v));
        }
    }
    // reverse settle order puts children before their parents
    let mut tree_edges = Vec::with_capacity(n.saturating_sub(1));
    let mut tree_nodes = Vec::with_capacity(n.saturating_sub(1));
    let mut position = vec![usize::MAX; n];
    for &v in settle_order.iter().rev() {
        if let Some(e) = parent_edge[v] {
            position[v] = tree_edges.len();
            tree_edges.push(e);
            tree_nodes.push(v);
        }
    }
    let mut in_tree = vec![false; g.edge_count()];
    for &e in &tree_edges {
        in_tree[e] = true;
    }
    let dropped_edges = (0..g.edge_count()).filter(|&e| !in_tree[e]).collect();
    let tree_lengths = tree_edges.iter().map(|&e| edges[e].length).collect();
    let tied = (0..n).filter(|&v| tied[v]).collect();

    Ok(RootedPreprocess {
        root,
        dist,
        parent_edge,
        parent,
        position,
        tree_edges,
        tree_nodes,
        tree_lengths,
        dropped_edges,
        tied,
    })
}
