//! Cherry-picking sequences on rooted phylogenetic networks.
//!
//! A phylogenetic network here is a rooted directed acyclic multigraph with
//! an outdegree-1 root, bijectively labeled leaves, tree nodes (indegree 1,
//! outdegree at least 2) and reticulations (indegree at least 2, outdegree 1).
//! A cherry-picking sequence (CPS) is an ordered list of leaf pairs that
//! reduces such a network to a single leaf; a tree-child sequence (TCS) is a
//! CPS in which no first coordinate reappears later as a second coordinate.
//!
//! The crate provides:
//!
//! * the network model and the constant-time reduction primitives
//!   ([`network`]),
//! * CPS/TCS validity checks and sequence application ([`sequence`]),
//! * the six add-pair constructions and the eight (A,B) network classes
//!   ([`construction`]),
//! * the scanning algorithms: `find_tcs`, tree-child network containment,
//!   smallest-CPS canonicalization and isomorphism ([`algorithms`]),
//! * random tree-child instance generation ([`generation`]),
//! * brute-force ground truth at desk scale ([`oracle`]),
//! * edge-list, extended Newick and CPS file formats ([`io`]).

pub mod algorithms;
pub mod construction;
pub mod generation;
pub mod io;
pub mod network;
pub mod oracle;
pub mod sequence;

pub use algorithms::{
    find_tcs, find_tcs_with, greedy_cps, isomorphic, smallest_cps, tcn_contains, AlgoError,
    IsoMode, PopPolicy, ReduciblePairSet, SmallestCpsVariant, TaxonOrder,
};
pub use construction::{add_pair, build_from_cps, CherryRule, ConstructError, CpnClass, RetCherryRule};
pub use generation::{
    derive_seed, make_instance, random_sub_tcs, random_tcs, GenError, Instance, InstanceKind,
};

pub use io::{parse_cps, parse_enewick, parse_network, write_cps, write_network, IoError, NetFormat, ParseReport};
pub use network::{
    ClassReport, Network, NetworkError, NodeId, NodeKind, PairKind, ReduceOutcome, TaggedPair,
};
pub use oracle::{
    cleanup, containment_bruteforce, enumerate_all_minimal_cps, labeled_iso, labeled_iso_map,
    refines_to, subnetwork_bruteforce, verify_witness, CleanupError, EmbeddingWitness, OracleError,
};
pub use sequence::{
    apply, apply_traced, check_cps, check_tcs, cps_reduces_network, cps_violation, is_fully_reduced,
    is_minimal_for, natural_cmp, tcs_violation, Pair, PairError, Sequence, Taxon,
};
