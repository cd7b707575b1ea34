//! Ordered pairs of taxa, cherry-picking sequences and their validity checks.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::network::Network;

/// A leaf label. Taxa are compared as plain strings except where an explicit
/// taxon order is in play.
pub type Taxon = String;

/// Error building a [`Pair`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairError {
    #[error("pair coordinates must be distinct, got ({0}, {0})")]
    EqualCoordinates(Taxon),
    #[error("pair coordinates must be nonempty taxon names")]
    EmptyCoordinate,
}

/// An ordered pair of distinct taxa `(first, second)`.
///
/// Reducing a pair removes `first` and keeps `second`, so sequences built
/// from these pairs always reduce toward their final second coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    first: Taxon,
    second: Taxon,
}

impl Pair {
    /// Builds a pair, rejecting equal coordinates.
    pub fn new(first: impl Into<Taxon>, second: impl Into<Taxon>) -> Result<Self, PairError> {
        let first = first.into();
        let second = second.into();
        if first.is_empty() || second.is_empty() {
            return Err(PairError::EmptyCoordinate);
        }
        if first == second {
            return Err(PairError::EqualCoordinates(first));
        }
        Ok(Pair { first, second })
    }

    pub fn first(&self) -> &str {
        &self.first
    }

    pub fn second(&self) -> &str {
        &self.second
    }

    /// The same pair with coordinates swapped.
    pub fn swapped(&self) -> Pair {
        Pair {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// A sequence of ordered pairs. Positions are 1-based in all diagnostics,
/// matching the usual way such sequences are written out.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<Pair>);

impl Sequence {
    pub fn new() -> Self {
        Sequence(Vec::new())
    }

    pub fn from_pairs(pairs: Vec<Pair>) -> Self {
        Sequence(pairs)
    }

    /// Convenience constructor from string pairs; panics on an invalid pair,
    /// so it is meant for literals in tests and examples.
    pub fn from_strs(pairs: &[(&str, &str)]) -> Self {
        Sequence(
            pairs
                .iter()
                .map(|(a, b)| Pair::new(*a, *b).expect("invalid literal pair"))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The pair at 1-based position `i`.
    pub fn get(&self, i: usize) -> Option<&Pair> {
        if i == 0 {
            return None;
        }
        self.0.get(i - 1)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pair> {
        self.0.iter()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.0
    }

    pub fn push(&mut self, pair: Pair) {
        self.0.push(pair);
    }

    /// The prefix consisting of the first `i` pairs.
    pub fn prefix(&self, i: usize) -> Sequence {
        Sequence(self.0[..i.min(self.0.len())].to_vec())
    }

    /// The suffix starting at 1-based position `i`.
    pub fn suffix_from(&self, i: usize) -> Sequence {
        let start = i.saturating_sub(1).min(self.0.len());
        Sequence(self.0[start..].to_vec())
    }

    /// Concatenation `self` followed by `other`.
    pub fn concat(&self, other: &Sequence) -> Sequence {
        let mut pairs = self.0.clone();
        pairs.extend(other.0.iter().cloned());
        Sequence(pairs)
    }

    /// All taxa mentioned anywhere in the sequence, deduplicated, in order of
    /// first appearance.
    pub fn taxa(&self) -> Vec<Taxon> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for p in &self.0 {
            for t in [p.first(), p.second()] {
                if seen.insert(t.to_owned()) {
                    out.push(t.to_owned());
                }
            }
        }
        out
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl IntoIterator for Sequence {
    type Item = Pair;
    type IntoIter = std::vec::IntoIter<Pair>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Sequence {
    type Item = &'a Pair;
    type IntoIter = std::slice::Iter<'a, Pair>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Compares taxon names with digit runs ordered numerically, so `"2"` sorts
/// before `"10"` and `"x2"` before `"x10"`. Non-digit positions compare by
/// byte. Numerically equal runs with different leading zeros tie-break on
/// run length, keeping the order total.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn trim_zeros(d: &[u8]) -> &[u8] {
        let k = d.iter().take_while(|&&c| c == b'0').count();
        if k == d.len() {
            &d[d.len() - 1..]
        } else {
            &d[k..]
        }
    }
    let ab = a.as_bytes();
    let bb = b.as_bytes();
    let (mut i, mut j) = (0usize, 0usize);
    while i < ab.len() && j < bb.len() {
        if ab[i].is_ascii_digit() && bb[j].is_ascii_digit() {
            let si = i;
            while i < ab.len() && ab[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < bb.len() && bb[j].is_ascii_digit() {
                j += 1;
            }
            let da = trim_zeros(&ab[si..i]);
            let db = trim_zeros(&bb[sj..j]);
            let ord = da
                .len()
                .cmp(&db.len())
                .then_with(|| da.cmp(db))
                .then_with(|| (i - si).cmp(&(j - sj)));
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = ab[i].cmp(&bb[j]);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (ab.len() - i).cmp(&(bb.len() - j))
}

/// Returns the 1-based index of the first pair violating the CPS condition,
/// or `None` if the sequence is a valid cherry-picking sequence.
///
/// The condition: every second coordinate must reappear as a first coordinate
/// strictly later in the sequence, or be the second coordinate of the final
/// pair. The empty sequence is valid.
pub fn cps_violation(seq: &Sequence) -> Option<usize> {
    let pairs = seq.pairs();
    let last_second = pairs.last().map(|p| p.second());
    for (i, p) in pairs.iter().enumerate() {
        let ok = Some(p.second()) == last_second
            || pairs[i + 1..].iter().any(|q| q.first() == p.second());
        if !ok {
            return Some(i + 1);
        }
    }
    None
}

/// Whether `seq` is a valid cherry-picking sequence.
pub fn check_cps(seq: &Sequence) -> bool {
    cps_violation(seq).is_none()
}

/// Returns the 1-based index of the first pair violating the tree-child
/// condition on top of the CPS condition, or `None` if `seq` is a TCS.
///
/// A TCS is a CPS in which no first coordinate appears as a second coordinate
/// later in the sequence.
pub fn tcs_violation(seq: &Sequence) -> Option<usize> {
    if let Some(i) = cps_violation(seq) {
        return Some(i);
    }
    let pairs = seq.pairs();
    for (i, p) in pairs.iter().enumerate() {
        if pairs[i + 1..].iter().any(|q| q.second() == p.first()) {
            return Some(i + 1);
        }
    }
    None
}

/// Whether `seq` is a valid tree-child sequence.
pub fn check_tcs(seq: &Sequence) -> bool {
    tcs_violation(seq).is_none()
}

/// Applies every pair of `seq` to a copy of `net` in order and returns the
/// resulting network. Pairs that are not reducible in the current network are
/// skipped silently.
pub fn apply(net: &Network, seq: &Sequence) -> Network {
    apply_traced(net, seq).0
}

/// Like [`apply`], additionally reporting for each position whether the pair
/// actually changed the network.
pub fn apply_traced(net: &Network, seq: &Sequence) -> (Network, Vec<bool>) {
    let mut cur = net.clone();
    let mut trace = Vec::with_capacity(seq.len());
    for p in seq.iter() {
        let outcome = cur.reduce_pair(p);
        trace.push(outcome != crate::network::ReduceOutcome::Unchanged);
    }
    (cur, trace)
}

/// Whether `net` consists of just the root and a single leaf.
pub fn is_fully_reduced(net: &Network) -> bool {
    net.node_count() == 2 && net.leaf_count() == 1
}

/// Whether applying `seq` to `net` leaves a single leaf.
pub fn cps_reduces_network(net: &Network, seq: &Sequence) -> bool {
    is_fully_reduced(&apply(net, seq))
}

/// Whether `seq` fully reduces `net` with every step active, i.e. no pair is
/// a silent no-op along the way.
pub fn is_minimal_for(net: &Network, seq: &Sequence) -> bool {
    let (reduced, trace) = apply_traced(net, seq);
    is_fully_reduced(&reduced) && trace.iter().all(|&hit| hit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_rejects_equal_coordinates() {
        assert_eq!(
            Pair::new("a", "a"),
            Err(PairError::EqualCoordinates("a".into()))
        );
        assert!(Pair::new("a", "b").is_ok());
    }

    #[test]
    fn cps_examples() {
        // (1,2),(3,2),(3,4),(4,5),(2,5): every second reappears as a later
        // first or equals 5.
        let good = Sequence::from_strs(&[("1", "2"), ("3", "2"), ("3", "4"), ("4", "5"), ("2", "5")]);
        assert!(check_cps(&good));
        assert!(check_tcs(&good));

        // second coordinate 9 never reappears
        let bad = Sequence::from_strs(&[("2", "9"), ("3", "2"), ("2", "5")]);
        assert_eq!(cps_violation(&bad), Some(1));
        assert!(!check_cps(&bad));
    }

    #[test]
    fn tcs_rejects_first_then_second() {
        // 3 is a first coordinate at position 1 and a second at position 3
        let s = Sequence::from_strs(&[("3", "2"), ("1", "2"), ("2", "3"), ("1", "3")]);
        assert!(check_cps(&s));
        assert_eq!(tcs_violation(&s), Some(1));
        assert!(!check_tcs(&s));
    }

    #[test]
    fn empty_sequence_is_valid() {
        let s = Sequence::new();
        assert!(check_cps(&s));
        assert!(check_tcs(&s));
    }

    #[test]
    fn natural_order_on_taxon_names() {
        assert_eq!(natural_cmp("2", "10"), Ordering::Less);
        assert_eq!(natural_cmp("10", "2"), Ordering::Greater);
        assert_eq!(natural_cmp("x2y", "x10y"), Ordering::Less);
        assert_eq!(natural_cmp("a", "b"), Ordering::Less);
        assert_eq!(natural_cmp("1", "1a"), Ordering::Less);
        assert_eq!(natural_cmp("7", "07"), Ordering::Less);
        assert_eq!(natural_cmp("07", "07"), Ordering::Equal);
    }

    #[test]
    fn prefix_suffix_concat() {
        let s = Sequence::from_strs(&[("1", "2"), ("3", "2"), ("2", "4")]);
        assert_eq!(s.prefix(2).len(), 2);
        assert_eq!(s.suffix_from(2).len(), 2);
        assert_eq!(s.prefix(1).concat(&s.suffix_from(2)), s);
        assert_eq!(s.get(1).unwrap().first(), "1");
        assert_eq!(s.get(3).unwrap().second(), "4");
        assert!(s.get(0).is_none());
        assert!(s.get(4).is_none());
    }
}
