//! The decision kernel: TCS extraction, tree-child network containment,
//! smallest cherry-picking sequences, and isomorphism checks built on them.
//!
//! All algorithms here are reduction-driven. They keep a worklist of
//! reducible pairs, pop one per step under some policy, reduce it, and
//! repair the worklist locally around the leaves the step touched. The
//! containment check runs in time linear in the network size; the smallest
//! CPS routines pay an extra factor for ordered popping.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::construction::CpnClass;
use crate::network::{ClassReport, Network, NetworkError, PairKind, ReduceOutcome};
use crate::sequence::{
    cps_reduces_network, is_fully_reduced, natural_cmp, Pair, Sequence, Taxon,
};

#[derive(Debug, Error)]
pub enum AlgoError {
    #[error("network is not semi-binary tree-child ({report})")]
    NotTreeChild { report: ClassReport },
    #[error("network does not fit variant {variant} ({report})")]
    VariantMismatch {
        variant: SmallestCpsVariant,
        report: ClassReport,
    },
    #[error("leaf sets differ: [{}] only in the first network, [{}] only in the second",
        .left_only.join(", "), .right_only.join(", "))]
    LeafSetMismatch {
        left_only: Vec<Taxon>,
        right_only: Vec<Taxon>,
    },
    #[error("taxon order does not cover the network taxa: [{}] missing", .missing.join(", "))]
    OrderMissesTaxa { missing: Vec<Taxon> },
    #[error("taxon {0} appears twice in the order")]
    DuplicateOrderTaxon(Taxon),
    #[error("no reducible pair remains but {leaves} leaves are left; not a cherry-picking network")]
    Stuck { leaves: usize },
    #[error("class {0} is not reconstructible, so it has no canonical form")]
    NotReconstructible(CpnClass),
    #[error(transparent)]
    Net(#[from] NetworkError),
}

/// A total order on taxa, inducing the lexicographic order on pairs:
/// `(a,b) < (c,d)` iff `a < c`, or `a = c` and `b < d`.
///
/// The default order is the natural one: bytewise, except that maximal
/// digit runs compare by numeric value, so `"2" < "10"`. An explicit
/// order built with [`TaxonOrder::from_list`] overrides it.
#[derive(Debug, Clone)]
pub struct TaxonOrder {
    rank: HashMap<Taxon, u32>,
    taxa: Vec<Taxon>,
}

impl TaxonOrder {
    /// The natural order over the given taxa. Duplicates are merged.
    pub fn natural(taxa: &[Taxon]) -> TaxonOrder {
        let mut sorted: Vec<Taxon> = taxa.to_vec();
        sorted.sort_unstable_by(|a, b| natural_cmp(a, b));
        sorted.dedup();
        Self::index(sorted)
    }

    /// The natural order over the taxa of `net`.
    pub fn for_network(net: &Network) -> TaxonOrder {
        Self::index(net.taxa())
    }

    /// An explicit order: the first listed taxon is the smallest.
    pub fn from_list(taxa: Vec<Taxon>) -> Result<TaxonOrder, AlgoError> {
        let mut seen = HashSet::new();
        for t in &taxa {
            if !seen.insert(t.clone()) {
                return Err(AlgoError::DuplicateOrderTaxon(t.clone()));
            }
        }
        Ok(Self::index(taxa))
    }

    fn index(taxa: Vec<Taxon>) -> TaxonOrder {
        let rank = taxa
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        TaxonOrder { rank, taxa }
    }

    /// The position of `taxon` in the order, if covered.
    pub fn rank(&self, taxon: &str) -> Option<u32> {
        self.rank.get(taxon).copied()
    }

    /// The taxa in ascending order.
    pub fn taxa(&self) -> &[Taxon] {
        &self.taxa
    }

    /// The taxa of `net` that this order does not cover.
    pub fn missing_from(&self, net: &Network) -> Vec<Taxon> {
        net.taxa()
            .into_iter()
            .filter(|t| !self.rank.contains_key(t))
            .collect()
    }

    /// Lexicographic comparison of pairs whose taxa are all covered.
    ///
    /// Panics on an uncovered taxon; callers check coverage up front.
    pub fn cmp_pairs(&self, a: &Pair, b: &Pair) -> std::cmp::Ordering {
        let r = |t: &str| self.rank.get(t).copied().expect("taxon covered by order");
        r(a.first())
            .cmp(&r(b.first()))
            .then_with(|| r(a.second()).cmp(&r(b.second())))
    }
}

/// How a worklist pop chooses among the current reducible pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopPolicy {
    /// First in, first out over insertion order. The default.
    Fifo,
    /// Uniform seeded choice among current members. A test knob for
    /// exercising order-invariance; outputs are deterministic per seed.
    Shuffled(u64),
}

/// The worklist of reducible pairs used by the reduction algorithms.
///
/// Membership is exact at all times with respect to what was inserted and
/// removed. Whether an entry is still reducible in the evolving network is
/// the caller's concern: the tree-child extraction never inserts an entry
/// that can go stale, while the general engines re-validate each popped
/// pair against the current network before using it.
#[derive(Debug, Clone, Default)]
pub struct ReduciblePairSet {
    queue: VecDeque<Pair>,
    present: HashSet<Pair>,
}

impl ReduciblePairSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    pub fn contains(&self, pair: &Pair) -> bool {
        self.present.contains(pair)
    }

    /// Inserts the pair; returns false if it was already present.
    pub fn insert(&mut self, pair: Pair) -> bool {
        if !self.present.insert(pair.clone()) {
            return false;
        }
        self.queue.push_back(pair);
        true
    }

    pub fn insert_all(&mut self, pairs: impl IntoIterator<Item = Pair>) {
        for p in pairs {
            self.insert(p);
        }
    }

    /// Removes the pair; returns whether it was present.
    ///
    /// The FIFO queue is cleaned lazily: a removed pair still occupies a
    /// queue slot until a pop skips over it.
    pub fn remove(&mut self, pair: &Pair) -> bool {
        self.present.remove(pair)
    }

    /// Pops the oldest member. Deterministic for a fixed insertion history.
    pub fn pop_any(&mut self) -> Option<Pair> {
        while let Some(p) = self.queue.pop_front() {
            if self.present.remove(&p) {
                return Some(p);
            }
        }
        None
    }

    /// Pops the lexicographically smallest member under `order`.
    ///
    /// A linear scan per pop; the set never holds more than a few entries
    /// per leaf, so this costs O(n) per step.
    pub fn pop_min(&mut self, order: &TaxonOrder) -> Option<Pair> {
        let min = self
            .present
            .iter()
            .min_by(|a, b| order.cmp_pairs(a, b))?
            .clone();
        self.present.remove(&min);
        Some(min)
    }

    /// Pops a uniformly chosen member. Deterministic for a fixed rng state
    /// because candidates are sorted before drawing.
    pub fn pop_shuffled(&mut self, rng: &mut ChaCha8Rng) -> Option<Pair> {
        if self.present.is_empty() {
            return None;
        }
        let mut candidates: Vec<Pair> = self.present.iter().cloned().collect();
        candidates.sort_unstable();
        let chosen = candidates.swap_remove(rng.random_range(0..candidates.len()));
        self.present.remove(&chosen);
        Some(chosen)
    }

    /// Current members in unspecified order, for trace assertions.
    pub fn iter(&self) -> impl Iterator<Item = &Pair> {
        self.present.iter()
    }
}

fn require_tree_child(net: &Network) -> Result<ClassReport, AlgoError> {
    let report = net.classify()?;
    if !(report.is_semi_binary && report.is_tree_child) {
        return Err(AlgoError::NotTreeChild { report });
    }
    Ok(report)
}

fn require_equal_leaf_sets(a: &Network, b: &Network) -> Result<(), AlgoError> {
    let ta: HashSet<Taxon> = a.taxa().into_iter().collect();
    let tb: HashSet<Taxon> = b.taxa().into_iter().collect();
    if ta == tb {
        return Ok(());
    }
    let mut left_only: Vec<Taxon> = ta.difference(&tb).cloned().collect();
    let mut right_only: Vec<Taxon> = tb.difference(&ta).cloned().collect();
    left_only.sort_unstable_by(|a, b| natural_cmp(a, b));
    right_only.sort_unstable_by(|a, b| natural_cmp(a, b));
    Err(AlgoError::LeafSetMismatch {
        left_only,
        right_only,
    })
}

/// Finds a minimal tree-child sequence that fully reduces `net`.
///
/// The network must be semi-binary tree-child; anything else is rejected
/// with its classification report. The output has exactly `n + r - 1`
/// pairs, every one of them active, and no first coordinate reappearing
/// as a later second coordinate. Worklist pops are FIFO.
pub fn find_tcs(net: &Network) -> Result<Sequence, AlgoError> {
    find_tcs_with(net, PopPolicy::Fifo)
}

/// [`find_tcs`] with an explicit pop policy. Any pop order yields a valid
/// minimal TCS; the policy only selects which one.
pub fn find_tcs_with(net: &Network, policy: PopPolicy) -> Result<Sequence, AlgoError> {
    let report = require_tree_child(net)?;
    let mut net = net.clone();
    let mut rng = match policy {
        PopPolicy::Fifo => None,
        PopPolicy::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut worklist = ReduciblePairSet::new();
    for x in net.taxa() {
        worklist.insert_all(net.find_rp_2nd(&x)?.into_iter().map(|t| t.pair));
    }
    let mut seq = Sequence::new();
    let mut firsts: HashSet<Taxon> = HashSet::new();
    loop {
        let popped = match &mut rng {
            None => worklist.pop_any(),
            Some(r) => worklist.pop_shuffled(r),
        };
        let Some(pair) = popped else { break };
        debug_assert!(
            net.pair_kind(&pair).is_some(),
            "stale pair {pair} in the tree-child worklist"
        );
        debug_assert!(
            !firsts.contains(pair.second()),
            "forbidden pair {pair} popped"
        );
        let outcome = net.reduce_pair(&pair);
        if outcome == ReduceOutcome::Unchanged {
            continue;
        }
        if outcome == ReduceOutcome::Cherry {
            worklist.remove(&pair.swapped());
        }
        let y = pair.second().to_owned();
        firsts.insert(pair.first().to_owned());
        seq.push(pair);
        worklist.insert_all(net.find_rp_2nd(&y)?.into_iter().map(|t| t.pair));
        worklist.insert_all(net.find_rc_1st(&y)?.into_iter().map(|t| t.pair));
    }
    if !is_fully_reduced(&net) {
        return Err(AlgoError::Stuck {
            leaves: net.leaf_count(),
        });
    }
    debug_assert_eq!(seq.len(), report.n_leaves + report.reticulation_number - 1);
    Ok(seq)
}

/// Decides whether the tree-child network `n_big` contains `n_small`.
///
/// Both networks must be semi-binary tree-child on the same leaf set.
/// The decision is: any one minimal TCS for `n_big` reduces `n_small`
/// if and only if `n_small` is a subnetwork of `n_big`, which for this
/// class coincides with containment. Runs in O(n + r) time.
pub fn tcn_contains(n_big: &Network, n_small: &Network) -> Result<bool, AlgoError> {
    require_tree_child(n_big)?;
    require_tree_child(n_small)?;
    require_equal_leaf_sets(n_big, n_small)?;
    let s = find_tcs(n_big)?;
    Ok(cps_reduces_network(n_small, &s))
}

/// Which structural class a smallest-CPS computation is promised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallestCpsVariant {
    /// Semi-binary with no reticulation-to-reticulation edges.
    SemibinaryStackfree,
    /// Semi-binary with all reticulations of indegree 2; stacks allowed.
    Binary,
    /// No structural promise beyond validity; any cherry-picking network,
    /// multifurcations and stacks included.
    NonbinaryReconstructible,
}

impl fmt::Display for SmallestCpsVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmallestCpsVariant::SemibinaryStackfree => "semibinary_stackfree",
            SmallestCpsVariant::Binary => "binary",
            SmallestCpsVariant::NonbinaryReconstructible => "nonbinary_reconstructible",
        })
    }
}

impl FromStr for SmallestCpsVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "semibinary_stackfree" | "semibinary-stackfree" => {
                Ok(SmallestCpsVariant::SemibinaryStackfree)
            }
            "binary" => Ok(SmallestCpsVariant::Binary),
            "nonbinary_reconstructible" | "nonbinary-reconstructible" | "nonbinary" => {
                Ok(SmallestCpsVariant::NonbinaryReconstructible)
            }
            other => Err(format!(
                "unknown variant {other}; expected semibinary_stackfree, binary \
                 or nonbinary_reconstructible"
            )),
        }
    }
}

/// The shared reduction engine behind [`smallest_cps`] and [`greedy_cps`].
///
/// Seeds the worklist with every reducible pair, then repeatedly pops one,
/// re-validates it against the current network (a popped entry may have
/// gone stale since insertion), reduces it, and inserts every pair that can
/// have newly arisen. A reduction only creates reducible pairs involving
/// the surviving coordinates of the reduced pair, so inserting the pairs
/// around `y` (and around `x` after a reticulated cherry, where `x`
/// survives) restores completeness of the worklist.
fn reduce_to_completion(
    net: &Network,
    mut pop: impl FnMut(&mut ReduciblePairSet) -> Option<Pair>,
) -> Result<Sequence, AlgoError> {
    let mut net = net.clone();
    let mut worklist = ReduciblePairSet::new();
    for t in net.all_reducible_pairs() {
        if t.kind == PairKind::Cherry {
            worklist.insert(t.pair.swapped());
        }
        worklist.insert(t.pair);
    }
    let mut seq = Sequence::new();
    while !is_fully_reduced(&net) {
        let Some(pair) = pop(&mut worklist) else {
            return Err(AlgoError::Stuck {
                leaves: net.leaf_count(),
            });
        };
        if net.pair_kind(&pair).is_none() {
            continue;
        }
        let outcome = net.reduce_pair(&pair);
        if outcome == ReduceOutcome::Cherry {
            worklist.remove(&pair.swapped());
        }
        let mut touched = vec![pair.second().to_owned()];
        if outcome == ReduceOutcome::RetCherry {
            touched.push(pair.first().to_owned());
        }
        seq.push(pair);
        for l in touched {
            for t in net.find_rp_2nd(&l)? {
                if t.kind == PairKind::Cherry {
                    worklist.insert(t.pair.swapped());
                }
                worklist.insert(t.pair);
            }
            worklist.insert_all(net.find_rc_1st(&l)?.into_iter().map(|t| t.pair));
        }
    }
    Ok(seq)
}

/// Computes the lexicographically smallest minimal CPS of `net` under
/// `order`.
///
/// The variant names the structural class the caller promises; the check
/// is enforced up front and a mismatch is an error. Within a
/// reconstructible class this sequence is a canonical form: two networks
/// of the class are isomorphic exactly when their smallest CPSs agree.
pub fn smallest_cps(
    net: &Network,
    order: &TaxonOrder,
    variant: SmallestCpsVariant,
) -> Result<Sequence, AlgoError> {
    let report = net.classify()?;
    let fits = match variant {
        SmallestCpsVariant::SemibinaryStackfree => report.is_semi_binary && report.is_stack_free,
        SmallestCpsVariant::Binary => report.is_binary,
        SmallestCpsVariant::NonbinaryReconstructible => true,
    };
    if !fits {
        return Err(AlgoError::VariantMismatch { variant, report });
    }
    let missing = order.missing_from(net);
    if !missing.is_empty() {
        return Err(AlgoError::OrderMissesTaxa { missing });
    }
    reduce_to_completion(net, |w| w.pop_min(order))
}

/// Fully reduces `net` by repeatedly picking some reducible pair under the
/// given policy, returning the reduction trace.
///
/// Works on any valid network that is a cherry-picking network; a network
/// that gets stuck with no reducible pair is reported as such. Every trace
/// is a minimal CPS with exactly `n + r - 1` pairs, whatever the policy.
pub fn greedy_cps(net: &Network, policy: PopPolicy) -> Result<Sequence, AlgoError> {
    net.validate()?;
    match policy {
        PopPolicy::Fifo => reduce_to_completion(net, |w| w.pop_any()),
        PopPolicy::Shuffled(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            reduce_to_completion(net, move |w| w.pop_shuffled(&mut rng))
        }
    }
}

/// How [`isomorphic`] decides.
#[derive(Debug, Clone)]
pub enum IsoMode {
    /// For semi-binary tree-child networks on the same leaf set: `a` and
    /// `b` are isomorphic iff a minimal TCS of `a` reduces `b` and both
    /// have the same reticulation number. Runs in O(n + r).
    TreechildFast,
    /// For two networks of one reconstructible class: compare their
    /// smallest CPSs under the given order.
    ReconstructibleClass { class: CpnClass, order: TaxonOrder },
}

fn variant_for_class(class: CpnClass) -> SmallestCpsVariant {
    match class.to_string().as_str() {
        "1a2a" => SmallestCpsVariant::Binary,
        "1a2b" => SmallestCpsVariant::SemibinaryStackfree,
        _ => SmallestCpsVariant::NonbinaryReconstructible,
    }
}

/// Decides whether `a` and `b` are isomorphic as leaf-labeled networks.
pub fn isomorphic(a: &Network, b: &Network, mode: &IsoMode) -> Result<bool, AlgoError> {
    match mode {
        IsoMode::TreechildFast => {
            let ra = require_tree_child(a)?;
            let rb = require_tree_child(b)?;
            require_equal_leaf_sets(a, b)?;
            if ra.reticulation_number != rb.reticulation_number {
                return Ok(false);
            }
            let s = find_tcs(a)?;
            Ok(cps_reduces_network(b, &s))
        }
        IsoMode::ReconstructibleClass { class, order } => {
            if !class.is_reconstructible() {
                return Err(AlgoError::NotReconstructible(*class));
            }
            let variant = variant_for_class(*class);
            let sa = smallest_cps(a, order, variant)?;
            let sb = smallest_cps(b, order, variant)?;
            Ok(sa == sb)
        }
    }
}
