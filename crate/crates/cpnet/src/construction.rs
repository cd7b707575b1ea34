//! Adding pairs to networks and building networks from sequences.
//!
//! A reducible pair can be added back to a network in six ways: two for
//! cherries (rules 1a, 1b) and four for reticulated cherries (rules 2a to
//! 2d). Fixing one rule of each kind gives the eight network classes. Four
//! of the classes are reconstructible: within them, a network is determined
//! up to isomorphism by any one of its minimal CPSs.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::network::{Network, NodeKind};
use crate::sequence::{cps_violation, Pair, Sequence, Taxon};

/// How to add a cherry (x, y): a new parent q is inserted above y and the
/// new leaf x hangs from q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CherryRule {
    /// Rule 1a: keep q.
    Plain,
    /// Rule 1b: contract q into the old parent of y when that parent is a
    /// tree node.
    ContractTree,
}

/// How to add a reticulated cherry (x, y): new nodes p and q are inserted
/// above x and y and the edge q -> p is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetCherryRule {
    /// Rule 2a: keep both p and q.
    Plain,
    /// Rule 2b: contract p into the old parent of x when that parent is a
    /// reticulation.
    ContractRet,
    /// Rule 2c: contract q into the old parent of y when that parent is a
    /// tree node.
    ContractTree,
    /// Rule 2d: both contractions, each under its own condition.
    ContractBoth,
}

/// One of the eight construction classes, written 1a2a through 1b2d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CpnClass {
    pub cherry_rule: CherryRule,
    pub ret_cherry_rule: RetCherryRule,
}

impl CpnClass {
    pub const ALL: [CpnClass; 8] = {
        let mut all = [CpnClass {
            cherry_rule: CherryRule::Plain,
            ret_cherry_rule: RetCherryRule::Plain,
        }; 8];
        let cherry = [CherryRule::Plain, CherryRule::ContractTree];
        let ret = [
            RetCherryRule::Plain,
            RetCherryRule::ContractRet,
            RetCherryRule::ContractTree,
            RetCherryRule::ContractBoth,
        ];
        let mut i = 0;
        while i < 8 {
            all[i] = CpnClass {
                cherry_rule: cherry[i / 4],
                ret_cherry_rule: ret[i % 4],
            };
            i += 1;
        }
        all
    };

    pub fn new(cherry_rule: CherryRule, ret_cherry_rule: RetCherryRule) -> Self {
        CpnClass { cherry_rule, ret_cherry_rule }
    }

    /// Whether any minimal CPS of a network in this class rebuilds that
    /// network. True exactly for 1a2a, 1a2b, 1b2c and 1b2d.
    pub fn is_reconstructible(self) -> bool {
        matches!(
            (self.cherry_rule, self.ret_cherry_rule),
            (CherryRule::Plain, RetCherryRule::Plain)
                | (CherryRule::Plain, RetCherryRule::ContractRet)
                | (CherryRule::ContractTree, RetCherryRule::ContractTree)
                | (CherryRule::ContractTree, RetCherryRule::ContractBoth)
        )
    }
}

impl fmt::Display for CpnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.cherry_rule {
            CherryRule::Plain => "1a",
            CherryRule::ContractTree => "1b",
        };
        let b = match self.ret_cherry_rule {
            RetCherryRule::Plain => "2a",
            RetCherryRule::ContractRet => "2b",
            RetCherryRule::ContractTree => "2c",
            RetCherryRule::ContractBoth => "2d",
        };
        write!(f, "{a}{b}")
    }
}

impl FromStr for CpnClass {
    type Err = ConstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CpnClass::ALL
            .into_iter()
            .find(|c| c.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| ConstructError::UnknownClass(s.to_owned()))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructError {
    #[error("cannot add ({first}, {second}): {second} is not a leaf of the network")]
    SecondNotALeaf { first: Taxon, second: Taxon },
    #[error("not a cherry-picking sequence: pair {index} breaks the reappearance rule")]
    NotACps { index: usize },
    #[error("an empty sequence needs an explicit seed taxon")]
    MissingSeed,
    #[error("unknown class name {0:?}; expected one of 1a2a, 1a2b, 1a2c, 1a2d, 1b2a, 1b2b, 1b2c, 1b2d")]
    UnknownClass(String),
}

/// Adds the pair to the network under the given class rules.
///
/// When the first coordinate is absent the pair goes in as a cherry, else as
/// a reticulated cherry. New nodes get fresh ids; a conditional contraction
/// folds the new node into the pre-existing endpoint, so the ids of nodes
/// already in the network are stable. The second coordinate must be a leaf,
/// which every CPS guarantees at each step of a backwards build.
pub fn add_pair(mut net: Network, pair: &Pair, class: CpnClass) -> Result<Network, ConstructError> {
    let Some(y) = net.leaf(pair.second()) else {
        return Err(ConstructError::SecondNotALeaf {
            first: pair.first().to_owned(),
            second: pair.second().to_owned(),
        });
    };
    match net.leaf(pair.first()) {
        None => {
            let p_y = net.parents(y)[0].0;
            let p_y_is_tree = net.kind(p_y) == NodeKind::TreeNode;
            let q = net.insert_on_edge(p_y, y);
            let x = net.add_node(Some(pair.first().to_owned())).expect("label absent");
            net.add_edge(q, x, 1);
            if class.cherry_rule == CherryRule::ContractTree && p_y_is_tree {
                net.contract_into(p_y, q);
            }
        }
        Some(x) => {
            let p_x = net.parents(x)[0].0;
            let p_y = net.parents(y)[0].0;
            let p_x_is_ret = net.kind(p_x) == NodeKind::Reticulation;
            let p_y_is_tree = net.kind(p_y) == NodeKind::TreeNode;
            let p = net.insert_on_edge(p_x, x);
            let q = net.insert_on_edge(p_y, y);
            net.add_edge(q, p, 1);
            let (contract_p, contract_q) = match class.ret_cherry_rule {
                RetCherryRule::Plain => (false, false),
                RetCherryRule::ContractRet => (true, false),
                RetCherryRule::ContractTree => (false, true),
                RetCherryRule::ContractBoth => (true, true),
            };
            if contract_p && p_x_is_ret {
                net.contract_into(p_x, p);
            }
            if contract_q && p_y_is_tree {
                net.contract_into(p_y, q);
            }
        }
    }
    debug_assert!(net.validate().is_ok());
    Ok(net)
}

/// Builds the class network of a CPS by adding its pairs back to front,
/// starting from a single leaf on the last pair's second coordinate. An
/// empty sequence needs `seed_taxon` to name that leaf. The result has the
/// taxa of the sequence as its leaf set and reticulation number
/// |seq| - n + 1.
pub fn build_from_cps(
    seq: &Sequence,
    class: CpnClass,
    seed_taxon: Option<&str>,
) -> Result<Network, ConstructError> {
    if let Some(index) = cps_violation(seq) {
        return Err(ConstructError::NotACps { index });
    }
    let Some(last) = seq.pairs().last() else {
        let seed = seed_taxon.ok_or(ConstructError::MissingSeed)?;
        return Ok(Network::single_leaf(seed));
    };
    let mut net = Network::single_leaf(last.second());
    for pair in seq.pairs().iter().rev() {
        net = add_pair(net, pair, class)?;
    }
    Ok(net)
}
