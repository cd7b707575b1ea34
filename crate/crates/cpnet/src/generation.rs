//! Random tree-child instance generation.
//!
//! Networks are generated as tree-child sequences built backwards, then
//! realized through the (1a,2b) construction (or (1a,2a) for binary
//! output). Yes-instances pair a network with one built from a randomly
//! selected sub-TCS; no-instances pair two independent draws.
//!
//! All randomness comes from a ChaCha8 stream seeded with a caller-visible
//! 64-bit value, and every draw is specified exactly (which range, in which
//! order of the moves, indexing which sorted set), so a fixed seed yields a
//! bit-identical result on any platform. The golden file under `testdata/`
//! pins the protocol.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::construction::{build_from_cps, ConstructError, CpnClass};
use crate::network::Network;
use crate::sequence::{natural_cmp, tcs_violation, Pair, Sequence};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("need at least 2 taxa, got {0}")]
    TooFewTaxa(usize),
    #[error("binary tree-child networks require r <= n-1; got n={n}, r={r}")]
    BinaryReticulationBound { n: usize, r: usize },
    #[error("input sequence is not a tree-child sequence (violation at position {0})")]
    NotATcs(usize),
    #[error("cannot select {extra} extra pairs: only {available} unchosen indices exist")]
    TooManyExtras { extra: usize, available: usize },
    #[error("r_prime {r_prime} exceeds the reticulation number {r} of the big network")]
    RPrimeExceedsR { r_prime: usize, r: usize },
    #[error("gave up after {0} attempts; the draw never satisfied the side condition")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

/// A set over the taxa 1..=n supporting order-statistic draws.
///
/// Backed by a bitset, so "the i-th smallest member" is well defined and
/// cheap. This is what makes the draw protocol reproducible by hand.
#[derive(Debug, Clone)]
struct TaxonSet {
    words: Vec<u64>,
    len: usize,
}

impl TaxonSet {
    fn new(max_taxon: usize) -> Self {
        TaxonSet {
            words: vec![0; max_taxon / 64 + 1],
            len: 0,
        }
    }

    fn len(&self) -> usize {
        self.len
    }

    fn contains(&self, v: u32) -> bool {
        self.words[v as usize / 64] & (1 << (v as usize % 64)) != 0
    }

    fn insert(&mut self, v: u32) {
        if !self.contains(v) {
            self.words[v as usize / 64] |= 1 << (v as usize % 64);
            self.len += 1;
        }
    }

    fn remove(&mut self, v: u32) {
        if self.contains(v) {
            self.words[v as usize / 64] &= !(1 << (v as usize % 64));
            self.len -= 1;
        }
    }

    /// The i-th smallest member, 0-based.
    fn nth(&self, mut i: usize) -> u32 {
        for (w, &word) in self.words.iter().enumerate() {
            let c = word.count_ones() as usize;
            if i < c {
                let mut word = word;
                for _ in 0..i {
                    word &= word - 1;
                }
                return (w * 64 + word.trailing_zeros() as usize) as u32;
            }
            i -= c;
        }
        panic!("order statistic {i} out of range");
    }

    /// How many members are strictly smaller than `v`.
    fn rank(&self, v: u32) -> usize {
        let (w, b) = (v as usize / 64, v as usize % 64);
        let below: usize = self.words[..w].iter().map(|x| x.count_ones() as usize).sum();
        below + (self.words[w] & ((1u64 << b) - 1)).count_ones() as usize
    }

    /// The i-th smallest member of the set minus `excluded`, 0-based.
    fn nth_excluding(&self, i: usize, excluded: u32) -> u32 {
        if self.contains(excluded) && i >= self.rank(excluded) {
            self.nth(i + 1)
        } else {
            self.nth(i)
        }
    }
}

/// Generates a random tree-child sequence on the taxa `{1..n}` with
/// reticulation number `r`, of length `n + r - 1`, ending in the pair
/// `(2,1)`. Building it under (1a,2b) gives a semi-binary tree-child
/// network; with `binary` set, the draw is constrained so that building
/// under (1a,2a) gives a binary tree-child network, which requires
/// `r <= n - 1`.
///
/// The sequence is built backwards. The state is the current taxon set Y
/// (initially {1,2}), the non-forbidden set NF of taxa usable as first
/// coordinates (initially {2}), and the remaining leaf and reticulation
/// budgets L = n-2 and R = r. Each step prepends one pair:
///
/// 1. If NF is nonempty and both budgets are positive, draw a uniform
///    integer in `0..L+R`; the step is a leaf step iff the draw is `< L`.
///    With only one move available no draw is spent.
/// 2. A reticulation step draws a uniform index into NF and takes its
///    index-th smallest member as the first coordinate; a leaf step takes
///    the smallest taxon not yet in Y, adds it to Y and NF.
/// 3. The second coordinate is drawn as a uniform index into Y with the
///    first coordinate skipped, again by ascending order, and is then
///    removed from NF.
///
/// In binary mode a reticulation step also removes its first coordinate
/// from NF, which can paint the draw into a corner (no usable first
/// coordinate left, budgets positive); the whole generation then restarts
/// on the same stream. Without the binary flag NF can never empty.
pub fn random_tcs(
    n: usize,
    r: usize,
    rng: &mut ChaCha8Rng,
    binary: bool,
) -> Result<Sequence, GenError> {
    if n < 2 {
        return Err(GenError::TooFewTaxa(n));
    }
    if binary && r > n - 1 {
        return Err(GenError::BinaryReticulationBound { n, r });
    }
    const MAX_ATTEMPTS: usize = 1000;
    for _ in 0..MAX_ATTEMPTS {
        match random_tcs_attempt(n, r, rng, binary) {
            Some(pairs) => {
                let seq = Sequence::from_pairs(pairs);
                debug_assert!(tcs_violation(&seq).is_none());
                return Ok(seq);
            }
            None => {
                assert!(binary, "non-binary generation ran out of usable taxa");
            }
        }
    }
    Err(GenError::RetriesExhausted(MAX_ATTEMPTS))
}

fn random_tcs_attempt(
    n: usize,
    r: usize,
    rng: &mut ChaCha8Rng,
    binary: bool,
) -> Option<Vec<Pair>> {
    let mut y = TaxonSet::new(n);
    y.insert(1);
    y.insert(2);
    let mut nf = TaxonSet::new(n);
    nf.insert(2);
    let mut l = n - 2;
    let mut rr = r;
    let mut next_leaf: u32 = 3;
    // The sequence grows by prepending, so collect reversed and flip once.
    let mut rev: Vec<Pair> = Vec::with_capacity(n + r - 1);
    rev.push(Pair::new("2", "1").expect("distinct"));
    while l > 0 || rr > 0 {
        let ret_step = if nf.len() > 0 && l > 0 && rr > 0 {
            rng.random_range(0..l + rr) >= l
        } else if nf.len() > 0 && rr > 0 {
            true
        } else if l > 0 {
            false
        } else {
            return None;
        };
        let first = if ret_step {
            let f = nf.nth(rng.random_range(0..nf.len()));
            rr -= 1;
            if binary {
                nf.remove(f);
            }
            f
        } else {
            let f = next_leaf;
            next_leaf += 1;
            l -= 1;
            y.insert(f);
            nf.insert(f);
            f
        };
        let second = y.nth_excluding(rng.random_range(0..y.len() - 1), first);
        nf.remove(second);
        rev.push(Pair::new(first.to_string(), second.to_string()).expect("distinct"));
    }
    rev.reverse();
    Some(rev)
}

/// Selects a sub-TCS of `s`: one uniformly chosen pair per taxon that
/// appears as a first coordinate (the base tree), plus `r_prime` extra
/// pairs drawn without replacement from the unchosen indices.
///
/// The draw order is: taxa in ascending natural order, one uniform index
/// into that taxon's ascending list of positions; then `r_prime` rounds
/// each drawing a uniform index into the ascending list of remaining
/// positions. The result keeps the original pair order and is itself a
/// TCS; the network built from it (same class) is a subnetwork of the one
/// built from `s`.
///
/// For a TCS, every taxon except the final survivor appears as a first
/// coordinate, so the base tree has one pair per non-surviving taxon and
/// exactly `r` indices stay selectable, where `r = |s| - n + 1`.
///
/// The result always spans the full taxon set of `s`: from any kept pair,
/// moving to the kept pair of its second coordinate goes strictly later
/// in the sequence (an earlier first reappearing as a later second would
/// break the tree-child condition), so each such chain ends at the final
/// survivor and covers it.
pub fn random_sub_tcs(
    s: &Sequence,
    r_prime: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Sequence, GenError> {
    if let Some(pos) = tcs_violation(s) {
        return Err(GenError::NotATcs(pos));
    }
    let mut taxa = s.taxa();
    taxa.sort_unstable_by(|a, b| natural_cmp(a, b));
    let mut chosen: Vec<bool> = vec![false; s.len()];
    let mut n_chosen = 0usize;
    for x in &taxa {
        let positions: Vec<usize> = s
            .iter()
            .enumerate()
            .filter(|(_, p)| p.first() == x)
            .map(|(i, _)| i)
            .collect();
        if positions.is_empty() {
            continue;
        }
        chosen[positions[rng.random_range(0..positions.len())]] = true;
        n_chosen += 1;
    }
    let available = s.len() - n_chosen;
    if r_prime > available {
        return Err(GenError::TooManyExtras {
            extra: r_prime,
            available,
        });
    }
    for _ in 0..r_prime {
        let remaining: Vec<usize> = (0..s.len()).filter(|&i| !chosen[i]).collect();
        chosen[remaining[rng.random_range(0..remaining.len())]] = true;
    }
    let picked = s
        .iter()
        .enumerate()
        .filter(|(i, _)| chosen[*i])
        .map(|(_, p)| p.clone())
        .collect();
    let sub = Sequence::from_pairs(picked);
    debug_assert!(tcs_violation(&sub).is_none());
    Ok(sub)
}

/// Whether the small network of an instance is a subnetwork by
/// construction or drawn independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    Yes,
    No,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::Yes => "yes",
            InstanceKind::No => "no",
        })
    }
}

impl FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "yes" => Ok(InstanceKind::Yes),
            "no" => Ok(InstanceKind::No),
            other => Err(format!("unknown instance kind {other}; expected yes or no")),
        }
    }
}

/// A generated containment test instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub big: Network,
    pub small: Network,
    /// The TCS the big network was built from.
    pub big_tcs: Sequence,
    /// The sequence the small network was built from: a sub-TCS of
    /// `big_tcs` for yes-instances, an independent TCS for no-instances.
    pub small_tcs: Sequence,
    pub kind: InstanceKind,
    pub n: usize,
    pub r: usize,
    pub r_prime: usize,
    /// The derived per-instance seed the generation stream started from.
    pub seed: u64,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the per-instance seed from the base seed and the instance
/// coordinates by folding each coordinate through one splitmix64 step.
/// Stable across platforms and releases; changing it invalidates every
/// recorded instance.
pub fn derive_seed(
    base_seed: u64,
    n: usize,
    r: usize,
    r_prime: usize,
    kind: InstanceKind,
    replicate: u64,
) -> u64 {
    let kind_code = match kind {
        InstanceKind::Yes => 1u64,
        InstanceKind::No => 2u64,
    };
    let mut s = base_seed;
    for v in [n as u64, r as u64, r_prime as u64, kind_code, replicate] {
        s = splitmix64(s ^ v);
    }
    s
}

/// Generates one containment instance: a semi-binary tree-child network
/// with `n` leaves and reticulation number `r`, and a second network with
/// reticulation number `r_prime` on the same taxa.
///
/// For a yes-instance the second network is built from a sub-TCS, so it is
/// a subnetwork of the first on the same leaf set ([`random_sub_tcs`]
/// never drops a taxon). For a no-instance the second network is an
/// independent draw.
///
/// Both networks are built under (1a,2b). The instance is a pure function
/// of its parameters: the seed is [`derive_seed`] of them all.
pub fn make_instance(
    n: usize,
    r: usize,
    r_prime: usize,
    kind: InstanceKind,
    base_seed: u64,
    replicate: u64,
) -> Result<Instance, GenError> {
    if r_prime > r {
        return Err(GenError::RPrimeExceedsR { r_prime, r });
    }
    let seed = derive_seed(base_seed, n, r, r_prime, kind, replicate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class: CpnClass = "1a2b".parse().expect("known class");
    let big_tcs = random_tcs(n, r, &mut rng, false)?;
    let big = build_from_cps(&big_tcs, class, None)?;
    let small_tcs = match kind {
        InstanceKind::No => random_tcs(n, r_prime, &mut rng, false)?,
        InstanceKind::Yes => {
            let sub = random_sub_tcs(&big_tcs, r_prime, &mut rng)?;
            debug_assert_eq!(sub.taxa().len(), big_tcs.taxa().len());
            sub
        }
    };
    let small = build_from_cps(&small_tcs, class, None)?;
    Ok(Instance {
        big,
        small,
        big_tcs,
        small_tcs,
        kind,
        n,
        r,
        r_prime,
        seed,
    })
}
