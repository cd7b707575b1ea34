//! The network model and the constant-time reduction primitives.
//!
//! Networks are rooted directed acyclic multigraphs. The root has indegree 0
//! and outdegree 1, leaves have indegree 1 and outdegree 0 and carry the taxon
//! labels, tree nodes have indegree 1 and outdegree at least 2, reticulations
//! have indegree at least 2 and outdegree 1. Parallel edges are stored as a
//! single adjacency entry with a multiplicity.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::sequence::{natural_cmp, Pair, Taxon};

/// Stable handle for a node. Ids survive all mutations except removal of the
/// node itself, which makes them usable as dictionary keys across reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Structural role of a node, derived from its degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Root,
    TreeNode,
    Reticulation,
    Leaf,
}

/// Structural classification of a validated network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassReport {
    /// Semi-binary with all reticulations of indegree 2.
    pub is_binary: bool,
    /// All tree nodes have outdegree exactly 2.
    pub is_semi_binary: bool,
    /// No edge between two reticulations.
    pub is_stack_free: bool,
    /// Stack-free and every tree node has a tree node or leaf child.
    pub is_tree_child: bool,
    pub n_leaves: usize,
    /// Sum over reticulations of (indegree - 1).
    pub reticulation_number: usize,
}

impl std::fmt::Display for ClassReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "binary={} semi-binary={} stack-free={} tree-child={} leaves={} r={}",
            self.is_binary,
            self.is_semi_binary,
            self.is_stack_free,
            self.is_tree_child,
            self.n_leaves,
            self.reticulation_number
        )
    }
}

/// Whether a reducible pair is a cherry or a reticulated cherry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    Cherry,
    RetCherry,
}

/// A reducible pair together with its kind in the network it was found in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedPair {
    pub pair: Pair,
    pub kind: PairKind,
}

/// What [`Network::reduce_pair`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOutcome {
    /// The pair was not reducible; the network is untouched.
    Unchanged,
    /// A cherry was reduced.
    Cherry,
    /// A reticulated cherry was reduced.
    RetCherry,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("network has no nodes")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(String),
    #[error("duplicate leaf label {0}")]
    DuplicateLabel(Taxon),
    #[error("network has a directed cycle through node {0}")]
    Cycle(String),
    #[error("multiple source nodes: {}", .0.join(", "))]
    MultipleSources(Vec<String>),
    #[error("designated root {root} is not the source node {found}")]
    RootMismatch { root: String, found: String },
    #[error("root {node} must have outdegree 1, has {outdeg}")]
    RootDegrees { node: String, outdeg: u32 },
    #[error("node {node} has indegree {indeg} and outdegree {outdeg}, which fits no node kind")]
    BadDegrees { node: String, indeg: u32, outdeg: u32 },
    #[error("node {0} has outdegree 0 but no leaf label")]
    UnlabeledSink(String),
    #[error("node {0} carries a leaf label but has outgoing edges")]
    LabeledInternal(String),
    #[error("taxon {0} is not a leaf of the network")]
    NotALeaf(Taxon),
}

#[derive(Debug, Clone, Default)]
struct Node {
    parents: Vec<(NodeId, u32)>,
    children: Vec<(NodeId, u32)>,
    label: Option<Taxon>,
    /// Original input name of an internal node, kept only for diagnostics.
    /// It carries no semantic weight and is not compared or written out.
    name: Option<String>,
}

/// A rooted phylogenetic network with multiplicities on edges.
#[derive(Debug, Clone, Default)]
pub struct Network {
    nodes: Vec<Option<Node>>,
    root: Option<NodeId>,
    by_label: HashMap<Taxon, NodeId>,
}

fn adj_get(list: &[(NodeId, u32)], v: NodeId) -> Option<usize> {
    list.iter().position(|&(w, _)| w == v)
}

impl Network {
    /// An empty network. Use the node and edge methods to populate it, then
    /// [`Network::validate`] to check the result.
    pub fn new() -> Self {
        Network::default()
    }

    /// The smallest valid network: a root above a single labeled leaf.
    pub fn single_leaf(taxon: impl Into<Taxon>) -> Self {
        let mut net = Network::new();
        let root = net.add_node(None).expect("fresh node");
        let leaf = net.add_node(Some(taxon.into())).expect("fresh label");
        net.add_edge(root, leaf, 1);
        net.set_root(root);
        net
    }

    /// Builds a network from named edges and validates it.
    ///
    /// Names that never appear as a parent become leaf labels; all other
    /// names are internal and are not retained. Repeated edges accumulate
    /// multiplicity. The unique source becomes the root.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S, u32)]) -> Result<Network, NetworkError> {
        let mut is_parent: HashMap<&str, bool> = HashMap::new();
        for (u, v, _) in edges {
            *is_parent.entry(u.as_ref()).or_insert(false) = true;
            is_parent.entry(v.as_ref()).or_insert(false);
        }
        let mut net = Network::new();
        let mut ids: HashMap<&str, NodeId> = HashMap::new();
        for (u, v, m) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            if u == v {
                return Err(NetworkError::SelfLoop(u.to_owned()));
            }
            for name in [u, v] {
                if !ids.contains_key(name) {
                    let internal = is_parent[name];
                    let label = if internal { None } else { Some(name.to_owned()) };
                    let id = net.add_node(label)?;
                    if internal {
                        net.node_mut(id).name = Some(name.to_owned());
                    }
                    ids.insert(name, id);
                }
            }
            net.add_edge(ids[u], ids[v], *m);
        }
        let sources: Vec<NodeId> = net.node_ids().filter(|&v| net.indegree(v) == 0).collect();
        match sources.as_slice() {
            [] => {
                return Err(match net.node_ids().next() {
                    Some(v) => NetworkError::Cycle(net.node_name(v)),
                    None => NetworkError::Empty,
                })
            }
            [r] => net.set_root(*r),
            many => {
                return Err(NetworkError::MultipleSources(
                    many.iter().map(|&v| net.node_name(v)).collect(),
                ))
            }
        }
        net.validate()?;
        Ok(net)
    }

    /// Adds an isolated node, labeled when `label` is given.
    pub fn add_node(&mut self, label: Option<Taxon>) -> Result<NodeId, NetworkError> {
        if let Some(l) = &label {
            if self.by_label.contains_key(l) {
                return Err(NetworkError::DuplicateLabel(l.clone()));
            }
        }
        let id = NodeId(self.nodes.len() as u32);
        if let Some(l) = &label {
            self.by_label.insert(l.clone(), id);
        }
        self.nodes.push(Some(Node {
            label,
            ..Node::default()
        }));
        Ok(id)
    }

    /// Adds `mult` instances of the edge `u -> v`, merging with an existing
    /// adjacency entry.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, mult: u32) {
        assert!(u != v, "self-loop on {u}");
        assert!(mult >= 1, "edge multiplicity must be positive");
        assert!(self.has_node(u) && self.has_node(v), "edge endpoints must exist");
        let children = &mut self.node_mut(u).children;
        match adj_get(children, v) {
            Some(i) => children[i].1 += mult,
            None => children.push((v, mult)),
        }
        let parents = &mut self.node_mut(v).parents;
        match adj_get(parents, u) {
            Some(i) => parents[i].1 += mult,
            None => parents.push((u, mult)),
        }
    }

    /// Removes one instance of the edge `u -> v`. Returns false if the edge
    /// is absent.
    pub fn remove_edge_instance(&mut self, u: NodeId, v: NodeId) -> bool {
        let children = &mut self.node_mut(u).children;
        let Some(i) = adj_get(children, v) else {
            return false;
        };
        if children[i].1 > 1 {
            children[i].1 -= 1;
        } else {
            children.swap_remove(i);
        }
        let parents = &mut self.node_mut(v).parents;
        let j = adj_get(parents, u).expect("adjacency lists out of sync");
        if parents[j].1 > 1 {
            parents[j].1 -= 1;
        } else {
            parents.swap_remove(j);
        }
        true
    }

    /// Removes a node together with all its incident edges.
    pub fn remove_node(&mut self, v: NodeId) {
        debug_assert!(self.root != Some(v), "removing the root");
        let node = self.nodes[v.index()].take().expect("node already removed");
        for (p, _) in &node.parents {
            let children = &mut self.node_mut(*p).children;
            if let Some(i) = adj_get(children, v) {
                children.swap_remove(i);
            }
        }
        for (c, _) in &node.children {
            let parents = &mut self.node_mut(*c).parents;
            if let Some(i) = adj_get(parents, v) {
                parents.swap_remove(i);
            }
        }
        if let Some(l) = &node.label {
            self.by_label.remove(l);
        }
    }

    pub fn set_root(&mut self, v: NodeId) {
        assert!(self.has_node(v), "root must exist");
        self.root = Some(v);
    }

    /// The root node. Panics on a network without one; every validated
    /// network has a root.
    pub fn root(&self) -> NodeId {
        self.root.expect("network has no root")
    }

    pub fn has_node(&self, v: NodeId) -> bool {
        self.nodes.get(v.index()).is_some_and(|n| n.is_some())
    }

    fn node(&self, v: NodeId) -> &Node {
        self.nodes[v.index()].as_ref().expect("node was removed")
    }

    fn node_mut(&mut self, v: NodeId) -> &mut Node {
        self.nodes[v.index()].as_mut().expect("node was removed")
    }

    /// Live node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|_| NodeId(i as u32)))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_some()).count()
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_instance_count(&self) -> usize {
        self.node_ids()
            .map(|v| self.node(v).children.iter().map(|&(_, m)| m as usize).sum::<usize>())
            .sum()
    }

    /// Parent adjacency of `v` as (node, multiplicity) entries.
    pub fn parents(&self, v: NodeId) -> &[(NodeId, u32)] {
        &self.node(v).parents
    }

    /// Child adjacency of `v` as (node, multiplicity) entries.
    pub fn children(&self, v: NodeId) -> &[(NodeId, u32)] {
        &self.node(v).children
    }

    /// Indegree counted with multiplicity.
    pub fn indegree(&self, v: NodeId) -> u32 {
        self.node(v).parents.iter().map(|&(_, m)| m).sum()
    }

    /// Outdegree counted with multiplicity.
    pub fn outdegree(&self, v: NodeId) -> u32 {
        self.node(v).children.iter().map(|&(_, m)| m).sum()
    }

    pub fn edge_mult(&self, u: NodeId, v: NodeId) -> u32 {
        adj_get(&self.node(u).children, v).map_or(0, |i| self.node(u).children[i].1)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edge_mult(u, v) > 0
    }

    /// All edges as (parent, child, multiplicity), sorted by node id for
    /// deterministic output.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, u32)> {
        let mut out = Vec::new();
        for u in self.node_ids() {
            for &(v, m) in &self.node(u).children {
                out.push((u, v, m));
            }
        }
        out.sort_unstable();
        out
    }

    /// Role of `v` by degrees: the root is `Root`, sinks are `Leaf`, nodes of
    /// indegree at most 1 are `TreeNode`, the rest are `Reticulation`.
    pub fn kind(&self, v: NodeId) -> NodeKind {
        if self.root == Some(v) {
            NodeKind::Root
        } else if self.node(v).children.is_empty() {
            NodeKind::Leaf
        } else if self.indegree(v) <= 1 {
            NodeKind::TreeNode
        } else {
            NodeKind::Reticulation
        }
    }

    pub fn label(&self, v: NodeId) -> Option<&str> {
        self.node(v).label.as_deref()
    }

    /// The leaf node carrying `taxon`, if present.
    pub fn leaf(&self, taxon: &str) -> Option<NodeId> {
        self.by_label.get(taxon).copied()
    }

    pub fn leaf_count(&self) -> usize {
        self.by_label.len()
    }

    /// All taxa in natural order.
    pub fn taxa(&self) -> Vec<Taxon> {
        let mut out: Vec<Taxon> = self.by_label.keys().cloned().collect();
        out.sort_unstable_by(|a, b| natural_cmp(a, b));
        out
    }

    /// The unique parent of the leaf labeled `taxon`, if that leaf exists and
    /// has exactly one distinct parent.
    pub fn parent_of_leaf(&self, taxon: &str) -> Option<NodeId> {
        let v = self.leaf(taxon)?;
        match self.node(v).parents.as_slice() {
            [(p, _)] => Some(*p),
            _ => None,
        }
    }

    /// A readable name for diagnostics: the taxon for leaves, the original
    /// input name when one is known, the id otherwise.
    pub fn node_name(&self, v: NodeId) -> String {
        let node = self.node(v);
        node.label
            .clone()
            .or_else(|| node.name.clone())
            .unwrap_or_else(|| v.to_string())
    }

    /// Sum over reticulations of (indegree - 1). Zero exactly on trees.
    pub fn reticulation_number(&self) -> usize {
        self.node_ids()
            .filter(|&v| self.kind(v) == NodeKind::Reticulation)
            .map(|v| self.indegree(v) as usize - 1)
            .sum()
    }

    /// Suppresses `v` if it has exactly one incoming and one outgoing edge
    /// instance, splicing its parent to its child. The root and labeled nodes
    /// are never suppressed. Returns whether anything happened.
    pub fn suppress(&mut self, v: NodeId) -> bool {
        if self.root == Some(v) || self.node(v).label.is_some() {
            return false;
        }
        if self.indegree(v) != 1 || self.outdegree(v) != 1 {
            return false;
        }
        let a = self.node(v).parents[0].0;
        let b = self.node(v).children[0].0;
        self.remove_node(v);
        self.add_edge(a, b, 1);
        true
    }

    /// Splits one instance of `u -> v` into `u -> w -> v` with a fresh node
    /// `w`, which is returned.
    pub fn insert_on_edge(&mut self, u: NodeId, v: NodeId) -> NodeId {
        assert!(self.has_edge(u, v), "no edge {u} -> {v} to subdivide");
        let w = self.add_node(None).expect("fresh node");
        self.remove_edge_instance(u, v);
        self.add_edge(u, w, 1);
        self.add_edge(w, v, 1);
        w
    }

    /// Contracts the edge between `keep` and `merge` by folding `merge` into
    /// `keep`: all other edges of `merge` are re-attached to `keep` with
    /// multiplicities summed, and `merge` disappears. Edges between the two
    /// nodes are dropped.
    pub fn contract_into(&mut self, keep: NodeId, merge: NodeId) {
        assert!(keep != merge, "contracting a node into itself");
        let node = self.nodes[merge.index()].take().expect("node was removed");
        debug_assert!(node.label.is_none(), "contracting a labeled node");
        for &(p, m) in &node.parents {
            let children = &mut self.node_mut(p).children;
            if let Some(i) = adj_get(children, merge) {
                children.swap_remove(i);
            }
            if p != keep {
                self.add_edge(p, keep, m);
            }
        }
        for &(c, m) in &node.children {
            let parents = &mut self.node_mut(c).parents;
            if let Some(i) = adj_get(parents, merge) {
                parents.swap_remove(i);
            }
            if c != keep {
                self.add_edge(keep, c, m);
            }
        }
    }

    /// Exchanges the positions of two leaves in the network, leaving the
    /// topology untouched.
    pub fn swap_leaves(&mut self, a: &str, b: &str) -> Result<(), NetworkError> {
        let va = self.leaf(a).ok_or_else(|| NetworkError::NotALeaf(a.to_owned()))?;
        let vb = self.leaf(b).ok_or_else(|| NetworkError::NotALeaf(b.to_owned()))?;
        self.node_mut(va).label = Some(b.to_owned());
        self.node_mut(vb).label = Some(a.to_owned());
        self.by_label.insert(a.to_owned(), vb);
        self.by_label.insert(b.to_owned(), va);
        Ok(())
    }

    /// Checks all structural invariants. Errors name the offending node using
    /// its taxon when it has one.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let Some(root) = self.root else {
            return Err(NetworkError::Empty);
        };
        debug_assert!(self.mirrors_coherent(), "adjacency mirrors out of sync");

        let sources: Vec<NodeId> = self.node_ids().filter(|&v| self.indegree(v) == 0).collect();
        match sources.as_slice() {
            [] => {
                let v = self.node_ids().next().ok_or(NetworkError::Empty)?;
                return Err(NetworkError::Cycle(self.node_name(v)));
            }
            [s] if *s == root => {}
            [s] => {
                return Err(NetworkError::RootMismatch {
                    root: self.node_name(root),
                    found: self.node_name(*s),
                })
            }
            many => {
                return Err(NetworkError::MultipleSources(
                    many.iter().map(|&v| self.node_name(v)).collect(),
                ))
            }
        }

        if let Some(v) = self.find_cycle_node() {
            return Err(NetworkError::Cycle(self.node_name(v)));
        }

        for v in self.node_ids() {
            let indeg = self.indegree(v);
            let outdeg = self.outdegree(v);
            let labeled = self.node(v).label.is_some();
            if v == root {
                if outdeg != 1 {
                    return Err(NetworkError::RootDegrees {
                        node: self.node_name(v),
                        outdeg,
                    });
                }
                if labeled {
                    return Err(NetworkError::LabeledInternal(self.node_name(v)));
                }
            } else if outdeg == 0 {
                if !labeled {
                    return Err(NetworkError::UnlabeledSink(self.node_name(v)));
                }
                if indeg != 1 {
                    return Err(NetworkError::BadDegrees {
                        node: self.node_name(v),
                        indeg,
                        outdeg,
                    });
                }
            } else {
                if labeled {
                    return Err(NetworkError::LabeledInternal(self.node_name(v)));
                }
                let tree_like = indeg == 1 && outdeg >= 2;
                let ret_like = indeg >= 2 && outdeg == 1;
                if !tree_like && !ret_like {
                    return Err(NetworkError::BadDegrees {
                        node: self.node_name(v),
                        indeg,
                        outdeg,
                    });
                }
            }
        }
        Ok(())
    }

    fn mirrors_coherent(&self) -> bool {
        for u in self.node_ids() {
            for &(v, m) in &self.node(u).children {
                if !self.has_node(v) {
                    return false;
                }
                let back = adj_get(&self.node(v).parents, u)
                    .map(|i| self.node(v).parents[i].1);
                if back != Some(m) {
                    return false;
                }
            }
            for &(p, _) in &self.node(u).parents {
                if !self.has_node(p) || adj_get(&self.node(p).children, u).is_none() {
                    return false;
                }
            }
        }
        self.by_label
            .iter()
            .all(|(l, &v)| self.has_node(v) && self.node(v).label.as_deref() == Some(l.as_str()))
    }

    /// Returns a node on a directed cycle, or `None` if the graph is acyclic.
    fn find_cycle_node(&self) -> Option<NodeId> {
        let mut indeg: HashMap<NodeId, u32> =
            self.node_ids().map(|v| (v, self.indegree(v))).collect();
        let mut queue: Vec<NodeId> = indeg
            .iter()
            .filter(|&(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect();
        let mut visited = 0usize;
        while let Some(v) = queue.pop() {
            visited += 1;
            for &(c, m) in &self.node(v).children {
                let d = indeg.get_mut(&c).expect("live child");
                *d -= m;
                if *d == 0 {
                    queue.push(c);
                }
            }
        }
        if visited == self.node_count() {
            None
        } else {
            indeg
                .iter()
                .filter(|&(_, &d)| d > 0)
                .map(|(&v, _)| v)
                .min()
        }
    }

    /// Validates the network and reports its structural class.
    pub fn classify(&self) -> Result<ClassReport, NetworkError> {
        self.validate()?;
        let mut is_semi_binary = true;
        let mut binary_rets = true;
        let mut is_stack_free = true;
        let mut is_tree_child = true;
        for v in self.node_ids() {
            match self.kind(v) {
                NodeKind::TreeNode => {
                    if self.outdegree(v) != 2 {
                        is_semi_binary = false;
                    }
                    let has_safe_child = self
                        .children(v)
                        .iter()
                        .any(|&(c, _)| matches!(self.kind(c), NodeKind::TreeNode | NodeKind::Leaf));
                    if !has_safe_child {
                        is_tree_child = false;
                    }
                }
                NodeKind::Reticulation => {
                    if self.indegree(v) != 2 {
                        binary_rets = false;
                    }
                    if self
                        .children(v)
                        .iter()
                        .any(|&(c, _)| self.kind(c) == NodeKind::Reticulation)
                    {
                        is_stack_free = false;
                    }
                }
                NodeKind::Root | NodeKind::Leaf => {}
            }
        }
        if !is_stack_free {
            is_tree_child = false;
        }
        Ok(ClassReport {
            is_binary: is_semi_binary && binary_rets,
            is_semi_binary,
            is_stack_free,
            is_tree_child,
            n_leaves: self.leaf_count(),
            reticulation_number: self.reticulation_number(),
        })
    }

    /// All reducible pairs with `x` as the second coordinate.
    ///
    /// These are the cherries `(c, x)` for sibling leaves `c` of `x`, and the
    /// reticulated cherries `(z, x)` where a sibling reticulation of `x` has
    /// the leaf `z` below it. Errors if `x` is not a leaf. The result is
    /// sorted by first coordinate.
    pub fn find_rp_2nd(&self, x: &str) -> Result<Vec<TaggedPair>, NetworkError> {
        let xl = self.leaf(x).ok_or_else(|| NetworkError::NotALeaf(x.to_owned()))?;
        let mut out = Vec::new();
        let [(p, _)] = self.node(xl).parents.as_slice() else {
            return Ok(out);
        };
        if self.kind(*p) == NodeKind::Reticulation {
            return Ok(out);
        }
        for &(c, _) in self.children(*p) {
            if c == xl {
                continue;
            }
            match self.kind(c) {
                NodeKind::Leaf => out.push(TaggedPair {
                    pair: Pair::new(self.label(c).expect("leaf is labeled"), x)
                        .expect("distinct leaves"),
                    kind: PairKind::Cherry,
                }),
                NodeKind::Reticulation => {
                    let &[(z, _)] = self.children(c) else { continue };
                    if self.kind(z) == NodeKind::Leaf {
                        out.push(TaggedPair {
                            pair: Pair::new(self.label(z).expect("leaf is labeled"), x)
                                .expect("distinct leaves"),
                            kind: PairKind::RetCherry,
                        });
                    }
                }
                _ => {}
            }
        }
        out.sort_unstable_by(|a, b| natural_cmp(a.pair.first(), b.pair.first()));
        out.dedup();
        Ok(out)
    }

    /// All reticulated cherries with `x` as the first coordinate.
    ///
    /// These are the pairs `(x, y)` where the parent of `x` is a reticulation
    /// and `y` is a leaf child of one of its parents. Errors if `x` is not a
    /// leaf. The result is sorted by second coordinate.
    pub fn find_rc_1st(&self, x: &str) -> Result<Vec<TaggedPair>, NetworkError> {
        let xl = self.leaf(x).ok_or_else(|| NetworkError::NotALeaf(x.to_owned()))?;
        let mut out = Vec::new();
        let [(p, _)] = self.node(xl).parents.as_slice() else {
            return Ok(out);
        };
        if self.kind(*p) != NodeKind::Reticulation {
            return Ok(out);
        }
        for &(g, _) in self.parents(*p) {
            for &(c, _) in self.children(g) {
                if self.kind(c) == NodeKind::Leaf {
                    out.push(TaggedPair {
                        pair: Pair::new(x, self.label(c).expect("leaf is labeled"))
                            .expect("distinct leaves"),
                        kind: PairKind::RetCherry,
                    });
                }
            }
        }
        out.sort_unstable_by(|a, b| natural_cmp(a.pair.second(), b.pair.second()));
        out.dedup();
        Ok(out)
    }

    /// Every reducible pair of the network, tagged with its kind, in natural
    /// order of the second coordinate.
    pub fn all_reducible_pairs(&self) -> Vec<TaggedPair> {
        let mut out = Vec::new();
        for x in self.taxa() {
            out.extend(self.find_rp_2nd(&x).expect("taxon is a leaf"));
        }
        out
    }

    /// Whether the pair is reducible right now, and as what.
    pub fn pair_kind(&self, pair: &Pair) -> Option<PairKind> {
        let xl = self.leaf(pair.first())?;
        let yl = self.leaf(pair.second())?;
        let [(px, _)] = self.node(xl).parents.as_slice() else {
            return None;
        };
        let [(py, _)] = self.node(yl).parents.as_slice() else {
            return None;
        };
        if px == py && self.kind(*px) != NodeKind::Reticulation {
            return Some(PairKind::Cherry);
        }
        if self.kind(*px) == NodeKind::Reticulation
            && self.kind(*py) == NodeKind::TreeNode
            && self.has_edge(*py, *px)
        {
            return Some(PairKind::RetCherry);
        }
        None
    }

    /// Reduces the pair if it is currently a cherry or reticulated cherry,
    /// otherwise leaves the network untouched.
    ///
    /// Reducing a cherry `(x, y)` removes the leaf `x` and suppresses its
    /// former parent if it became a degree-(1,1) node. Reducing a reticulated
    /// cherry removes one instance of the middle edge and suppresses either
    /// endpoint that dropped to degree (1,1). The root is never suppressed.
    pub fn reduce_pair(&mut self, pair: &Pair) -> ReduceOutcome {
        match self.pair_kind(pair) {
            None => ReduceOutcome::Unchanged,
            Some(PairKind::Cherry) => {
                let xl = self.leaf(pair.first()).expect("checked above");
                let p = self.node(xl).parents[0].0;
                self.remove_node(xl);
                self.suppress(p);
                ReduceOutcome::Cherry
            }
            Some(PairKind::RetCherry) => {
                let xl = self.leaf(pair.first()).expect("checked above");
                let yl = self.leaf(pair.second()).expect("checked above");
                let px = self.node(xl).parents[0].0;
                let py = self.node(yl).parents[0].0;
                self.remove_edge_instance(py, px);
                self.suppress(px);
                self.suppress(py);
                ReduceOutcome::RetCherry
            }
        }
    }

    /// Number of internal id slots, including freed ones. This is the
    /// length a permutation passed to [`Network::permuted_copy`] must have.
    pub fn slot_count(&self) -> usize {
        self.nodes.len()
    }

    /// A copy of the network with node ids permuted by `perm`, where
    /// `perm[i]` is the new slot of old slot `i`. Used to exercise id
    /// independence in isomorphism tests.
    pub fn permuted_copy(&self, perm: &[usize]) -> Network {
        assert_eq!(perm.len(), self.nodes.len(), "permutation length mismatch");
        let mut nodes: Vec<Option<Node>> = vec![None; self.nodes.len()];
        let map = |v: NodeId| NodeId(perm[v.index()] as u32);
        for (i, slot) in self.nodes.iter().enumerate() {
            let Some(node) = slot else { continue };
            nodes[perm[i]] = Some(Node {
                parents: node.parents.iter().map(|&(p, m)| (map(p), m)).collect(),
                children: node.children.iter().map(|&(c, m)| (map(c), m)).collect(),
                label: node.label.clone(),
                name: node.name.clone(),
            });
        }
        Network {
            nodes,
            root: self.root.map(map),
            by_label: self.by_label.iter().map(|(l, &v)| (l.clone(), map(v))).collect(),
        }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, v, m) in self.edges() {
            write!(f, "{} -> {}", self.node_name(u), self.node_name(v))?;
            if m > 1 {
                write!(f, " x{m}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
