//! Brute-force ground truth at desk scale.
//!
//! Everything here decides by definition rather than by the scanning
//! algorithms: subnetworks by enumerating reticulation-edge deletions,
//! containment by additionally searching edge contractions, isomorphism by
//! backtracking, and minimal CPS sets by exhaustive reduction. The functions
//! refuse oversized inputs instead of answering slowly or wrongly.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::network::{Network, NetworkError, NodeId, NodeKind};
use crate::sequence::{is_fully_reduced, Pair, Sequence, Taxon};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Net(#[from] NetworkError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CleanupError {
    #[error("kept taxon {0} is not in the network")]
    MissingTaxon(Taxon),
    #[error("kept taxon {0} was cut off from the root")]
    Unreachable(Taxon),
    #[error("cleanup result is not a valid network: {0}")]
    Invalid(#[from] NetworkError),
}

/// One directed path of original edges per embedded edge instance.
type Prov = HashMap<(NodeId, NodeId), Vec<Vec<(NodeId, NodeId)>>>;

/// An explicit embedding of `small` into `big`: an injective node map plus
/// one edge-disjoint directed path in `big` per edge instance of `small`.
#[derive(Debug, Clone)]
pub struct EmbeddingWitness {
    pub node_map: Vec<(NodeId, NodeId)>,
    pub edge_paths: Vec<((NodeId, NodeId), Vec<(NodeId, NodeId)>)>,
}

/// Restricts a network to the kept taxa and normalizes it: leaves outside
/// `keep` are deleted, then unlabeled sinks and rootless debris are removed
/// and degree-(1,1) nodes are suppressed until stable. The root is never
/// suppressed. A kept leaf that ends up cut off from the root, or a result
/// violating the network invariants, is reported as an error.
pub fn cleanup(net: &Network, keep: &[Taxon]) -> Result<Network, CleanupError> {
    let mut out = net.clone();
    cleanup_in_place(&mut out, keep, None)?;
    Ok(out)
}

fn cleanup_in_place(
    out: &mut Network,
    keep: &[Taxon],
    mut prov: Option<&mut Prov>,
) -> Result<(), CleanupError> {
    let keep_set: HashSet<&str> = keep.iter().map(String::as_str).collect();
    for t in keep {
        if out.leaf(t).is_none() {
            return Err(CleanupError::MissingTaxon(t.clone()));
        }
    }
    let drop_node = |out: &mut Network, prov: &mut Option<&mut Prov>, v: NodeId| {
        if let Some(p) = prov.as_deref_mut() {
            p.retain(|&(x, y), _| x != v && y != v);
        }
        out.remove_node(v);
    };
    for t in out.taxa() {
        if !keep_set.contains(t.as_str()) {
            let v = out.leaf(&t).expect("taxon listed");
            drop_node(out, &mut prov, v);
        }
    }
    loop {
        let mut changed = false;
        for v in out.node_ids().collect::<Vec<_>>() {
            if !out.has_node(v) || v == out.root() {
                continue;
            }
            if out.outdegree(v) == 0 && out.label(v).is_none() {
                drop_node(out, &mut prov, v);
                changed = true;
            } else if out.indegree(v) == 0 {
                if let Some(l) = out.label(v) {
                    return Err(CleanupError::Unreachable(l.to_owned()));
                }
                drop_node(out, &mut prov, v);
                changed = true;
            } else if out.indegree(v) == 1 && out.outdegree(v) == 1 && out.label(v).is_none() {
                let a = out.parents(v)[0].0;
                let b = out.children(v)[0].0;
                if let Some(p) = prov.as_deref_mut() {
                    let head = p.get_mut(&(a, v)).and_then(Vec::pop).unwrap_or_default();
                    let tail = p.get_mut(&(v, b)).and_then(Vec::pop).unwrap_or_default();
                    p.remove(&(a, v));
                    p.remove(&(v, b));
                    let mut path = head;
                    path.extend(tail);
                    p.entry((a, b)).or_default().push(path);
                }
                out.remove_node(v);
                out.add_edge(a, b, 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    out.validate()?;
    Ok(())
}

fn degrees(net: &Network, v: NodeId) -> (u32, u32) {
    (net.indegree(v), net.outdegree(v))
}

/// Label-respecting isomorphism from `a` onto `b`, as a node map, when one
/// exists. The root maps to the root, leaves map by taxon, and edge
/// multiplicities must match.
pub fn labeled_iso_map(a: &Network, b: &Network) -> Option<HashMap<NodeId, NodeId>> {
    if a.node_count() != b.node_count()
        || a.edge_instance_count() != b.edge_instance_count()
        || a.taxa() != b.taxa()
    {
        return None;
    }
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    let mut used: HashSet<NodeId> = HashSet::new();
    if degrees(a, a.root()) != degrees(b, b.root()) {
        return None;
    }
    map.insert(a.root(), b.root());
    used.insert(b.root());
    for t in a.taxa() {
        let (la, lb) = (a.leaf(&t)?, b.leaf(&t)?);
        map.insert(la, lb);
        used.insert(lb);
    }

    // breadth-first from the root, so every node considered has a mapped
    // neighbor by the time it is placed
    let mut order = Vec::new();
    let mut seen: HashSet<NodeId> = HashSet::new();
    let mut queue = std::collections::VecDeque::from([a.root()]);
    seen.insert(a.root());
    while let Some(v) = queue.pop_front() {
        if !map.contains_key(&v) {
            order.push(v);
        }
        for &(c, _) in a.children(v) {
            if seen.insert(c) {
                queue.push_back(c);
            }
        }
    }

    let b_nodes: Vec<NodeId> = b.node_ids().collect();
    fn consistent(a: &Network, b: &Network, map: &HashMap<NodeId, NodeId>, v: NodeId, w: NodeId) -> bool {
        if degrees(a, v) != degrees(b, w) {
            return false;
        }
        for &(p, m) in a.parents(v) {
            if let Some(&pw) = map.get(&p) {
                if b.edge_mult(pw, w) != m {
                    return false;
                }
            }
        }
        for &(c, m) in a.children(v) {
            if let Some(&cw) = map.get(&c) {
                if b.edge_mult(w, cw) != m {
                    return false;
                }
            }
        }
        true
    }
    fn backtrack(
        a: &Network,
        b: &Network,
        order: &[NodeId],
        i: usize,
        map: &mut HashMap<NodeId, NodeId>,
        used: &mut HashSet<NodeId>,
        b_nodes: &[NodeId],
    ) -> bool {
        let Some(&v) = order.get(i) else {
            // full edge verification; with equal instance counts and an
            // injective total node map this certifies a bijection on edges
            return a.node_ids().all(|u| {
                a.children(u)
                    .iter()
                    .all(|&(c, m)| b.edge_mult(map[&u], map[&c]) == m)
            });
        };
        for &w in b_nodes {
            if used.contains(&w) || b.label(w).is_some() {
                continue;
            }
            if !consistent(a, b, map, v, w) {
                continue;
            }
            map.insert(v, w);
            used.insert(w);
            if backtrack(a, b, order, i + 1, map, used, b_nodes) {
                return true;
            }
            map.remove(&v);
            used.remove(&w);
        }
        false
    }
    if backtrack(a, b, &order, 0, &mut map, &mut used, &b_nodes) {
        Some(map)
    } else {
        None
    }
}

/// Whether the two networks are isomorphic respecting leaf labels, the root
/// and edge multiplicities.
pub fn labeled_iso(a: &Network, b: &Network) -> bool {
    labeled_iso_map(a, b).is_some()
}

/// All distinct edges into reticulations, the deletable edge set.
fn reticulation_edges(net: &Network) -> Vec<(NodeId, NodeId, u32)> {
    net.edges()
        .into_iter()
        .filter(|&(_, v, _)| net.kind(v) == NodeKind::Reticulation)
        .collect()
}

const MAX_DELETION_COMBOS: u64 = 1 << 16;

/// Iterates over all ways to delete `0..=mult` instances per reticulation
/// edge, calling `visit` with the deletion counts until it returns true.
fn for_each_deletion<F: FnMut(&[u32]) -> Result<bool, OracleError>>(
    ret_edges: &[(NodeId, NodeId, u32)],
    mut visit: F,
) -> Result<bool, OracleError> {
    let mut combos: u64 = 1;
    for &(_, _, m) in ret_edges {
        combos = combos.saturating_mul(m as u64 + 1);
        if combos > MAX_DELETION_COMBOS {
            return Err(OracleError::TooLarge(format!(
                "over {MAX_DELETION_COMBOS} reticulation-edge deletion sets"
            )));
        }
    }
    let mut counts = vec![0u32; ret_edges.len()];
    loop {
        if visit(&counts)? {
            return Ok(true);
        }
        let mut i = 0;
        loop {
            if i == ret_edges.len() {
                return Ok(false);
            }
            if counts[i] < ret_edges[i].2 {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Decides by definition whether `small` is a subnetwork of `big`: some set
/// of reticulation-edge deletions followed by cleanup onto the taxa of
/// `small` yields a network isomorphic to it. On success the embedding is
/// returned as a witness.
pub fn subnetwork_bruteforce(
    big: &Network,
    small: &Network,
) -> Result<Option<EmbeddingWitness>, OracleError> {
    big.validate()?;
    small.validate()?;
    let big_taxa: HashSet<Taxon> = big.taxa().into_iter().collect();
    if !small.taxa().iter().all(|t| big_taxa.contains(t)) {
        return Ok(None);
    }
    let keep = small.taxa();
    let ret_edges = reticulation_edges(big);
    let mut witness = None;
    for_each_deletion(&ret_edges, |counts| {
        let mut cand = big.clone();
        let mut prov: Prov = HashMap::new();
        for (u, v, m) in big.edges() {
            prov.insert((u, v), (0..m).map(|_| vec![(u, v)]).collect());
        }
        for (i, &d) in counts.iter().enumerate() {
            let (u, v, _) = ret_edges[i];
            for _ in 0..d {
                cand.remove_edge_instance(u, v);
                prov.get_mut(&(u, v)).expect("edge tracked").pop();
            }
            if prov.get(&(u, v)).is_some_and(Vec::is_empty) {
                prov.remove(&(u, v));
            }
        }
        if cleanup_in_place(&mut cand, &keep, Some(&mut prov)).is_err() {
            return Ok(false);
        }
        let Some(map) = labeled_iso_map(small, &cand) else {
            return Ok(false);
        };
        let mut edge_paths = Vec::new();
        for (u, v, m) in small.edges() {
            let paths = &prov[&(map[&u], map[&v])];
            debug_assert_eq!(paths.len(), m as usize, "provenance count drifted");
            for path in paths.iter().take(m as usize) {
                edge_paths.push(((u, v), path.clone()));
            }
        }
        witness = Some(EmbeddingWitness {
            node_map: small.node_ids().map(|v| (v, map[&v])).collect(),
            edge_paths,
        });
        Ok(true)
    })?;
    Ok(witness)
}

/// Independently validates an embedding witness: node-map injectivity,
/// label preservation, path endpoints and linkage, and edge-disjointness
/// counted with multiplicity.
pub fn verify_witness(big: &Network, small: &Network, w: &EmbeddingWitness) -> bool {
    let map: HashMap<NodeId, NodeId> = w.node_map.iter().copied().collect();
    if map.len() != small.node_count() || !small.node_ids().all(|v| map.contains_key(&v)) {
        return false;
    }
    let images: HashSet<NodeId> = map.values().copied().collect();
    if images.len() != map.len() || !images.iter().all(|&v| big.has_node(v)) {
        return false;
    }
    if !small
        .node_ids()
        .all(|v| small.label(v).map(str::to_owned) == big.label(map[&v]).map(str::to_owned))
    {
        return false;
    }
    if map[&small.root()] != big.root() {
        return false;
    }
    let mut needed: HashMap<(NodeId, NodeId), u32> = HashMap::new();
    for (u, v, m) in small.edges() {
        needed.insert((u, v), m);
    }
    let mut usage: HashMap<(NodeId, NodeId), u32> = HashMap::new();
    for ((u, v), path) in &w.edge_paths {
        let Some(m) = needed.get_mut(&(*u, *v)) else {
            return false;
        };
        if *m == 0 {
            return false;
        }
        *m -= 1;
        if path.is_empty()
            || path.first().expect("nonempty").0 != map[u]
            || path.last().expect("nonempty").1 != map[v]
        {
            return false;
        }
        for pair in path.windows(2) {
            if pair[0].1 != pair[1].0 {
                return false;
            }
        }
        for &(x, y) in path {
            *usage.entry((x, y)).or_insert(0) += 1;
        }
    }
    if needed.values().any(|&m| m > 0) {
        return false;
    }
    usage.iter().all(|(&(x, y), &m)| big.edge_mult(x, y) >= m)
}

const MAX_CONTRACTION_LEVEL: usize = 20_000;

/// Whether repeatedly contracting tree-tree or reticulation-reticulation
/// edges of `start` can produce a network isomorphic to `small`.
fn contracts_to(start: &Network, small: &Network) -> Result<bool, OracleError> {
    let target = small.node_count();
    let mut level = vec![start.clone()];
    while !level.is_empty() {
        for net in &level {
            if net.node_count() == target && labeled_iso(net, small) {
                return Ok(true);
            }
        }
        let mut next: Vec<Network> = Vec::new();
        for net in &level {
            if net.node_count() <= target {
                continue;
            }
            for (u, v, _) in net.edges() {
                let same_kind = matches!(
                    (net.kind(u), net.kind(v)),
                    (NodeKind::TreeNode, NodeKind::TreeNode)
                        | (NodeKind::Reticulation, NodeKind::Reticulation)
                );
                if !same_kind {
                    continue;
                }
                let mut c = net.clone();
                c.contract_into(u, v);
                if next.iter().any(|o| labeled_iso(o, &c)) {
                    continue;
                }
                next.push(c);
                if next.len() > MAX_CONTRACTION_LEVEL {
                    return Err(OracleError::TooLarge(
                        "contraction search level overflow".to_owned(),
                    ));
                }
            }
        }
        level = next;
    }
    Ok(false)
}

/// Whether `fine` is a refinement of `coarse`: contracting tree-tree or
/// reticulation-reticulation edges of `fine` (no deletions) can produce a
/// network isomorphic to `coarse`.
pub fn refines_to(fine: &Network, coarse: &Network) -> Result<bool, OracleError> {
    fine.validate()?;
    coarse.validate()?;
    contracts_to(fine, coarse)
}

/// Decides by definition whether `small` is contained in `big`: whether some
/// subnetwork of `big` admits a set of tree-tree and
/// reticulation-reticulation edge contractions producing `small`.
pub fn containment_bruteforce(big: &Network, small: &Network) -> Result<bool, OracleError> {
    big.validate()?;
    small.validate()?;
    let big_taxa: HashSet<Taxon> = big.taxa().into_iter().collect();
    if !small.taxa().iter().all(|t| big_taxa.contains(t)) {
        return Ok(false);
    }
    let keep = small.taxa();
    let ret_edges = reticulation_edges(big);
    for_each_deletion(&ret_edges, |counts| {
        let mut cand = big.clone();
        for (i, &d) in counts.iter().enumerate() {
            let (u, v, _) = ret_edges[i];
            for _ in 0..d {
                cand.remove_edge_instance(u, v);
            }
        }
        if cleanup_in_place(&mut cand, &keep, None).is_err() {
            return Ok(false);
        }
        contracts_to(&cand, small)
    })
}

/// Exhaustively enumerates every minimal CPS of the network: every sequence
/// that fully reduces it with all steps active. States reached by different
/// reduction orders share work through memoization on the exact remaining
/// edge set. Refuses networks with n + r above `cap`.
pub fn enumerate_all_minimal_cps(net: &Network, cap: usize) -> Result<Vec<Sequence>, OracleError> {
    let report = net.classify()?;
    let size = report.n_leaves + report.reticulation_number;
    if size > cap {
        return Err(OracleError::TooLarge(format!(
            "n + r = {size} exceeds the enumeration cap {cap}"
        )));
    }
    type Key = (Vec<(NodeId, NodeId, u32)>, Vec<(NodeId, Taxon)>);
    fn key_of(net: &Network) -> Key {
        let mut labels: Vec<(NodeId, Taxon)> = net
            .node_ids()
            .filter_map(|v| net.label(v).map(|l| (v, l.to_owned())))
            .collect();
        labels.sort_unstable();
        (net.edges(), labels)
    }
    fn rec(net: &Network, memo: &mut HashMap<Key, Vec<Vec<Pair>>>) -> Vec<Vec<Pair>> {
        if is_fully_reduced(net) {
            return vec![Vec::new()];
        }
        let key = key_of(net);
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let mut suffixes = Vec::new();
        for t in net.all_reducible_pairs() {
            let mut next = net.clone();
            next.reduce_pair(&t.pair);
            for suf in rec(&next, memo) {
                let mut seq = Vec::with_capacity(suf.len() + 1);
                seq.push(t.pair.clone());
                seq.extend(suf);
                suffixes.push(seq);
            }
        }
        memo.insert(key, suffixes.clone());
        suffixes
    }
    let mut memo = HashMap::new();
    let mut out: Vec<Sequence> = rec(net, &mut memo)
        .into_iter()
        .map(Sequence::from_pairs)
        .collect();
    out.sort_unstable_by(|a, b| a.pairs().cmp(b.pairs()));
    Ok(out)
}
