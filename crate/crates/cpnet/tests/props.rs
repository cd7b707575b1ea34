//! Randomized property tests tying the modules together: generated
//! tree-child sequences feed the eight constructions, whose outputs feed the
//! reduction primitives, the scanning algorithms and the file formats.

use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cpnet::{
    apply, build_from_cps, check_cps, check_tcs, cps_reduces_network, greedy_cps, is_minimal_for,
    labeled_iso, parse_cps, parse_enewick, parse_network, random_tcs, write_cps, write_network,
    CpnClass, NetFormat, Network, Pair, PopPolicy, ReduceOutcome, Sequence,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tcs_for(n: usize, r: usize, seed: u64) -> Sequence {
    random_tcs(n, r, &mut rng(seed), false).expect("generator accepts this shape")
}

/// Shapes kept small enough that the heavier properties stay fast.
fn arb_shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=8, 0usize..=5, any::<u64>())
}

fn arb_class() -> impl Strategy<Value = CpnClass> {
    prop::sample::select(CpnClass::ALL.to_vec())
}

/// A stable fingerprint of the exact graph: every node with its label and
/// every edge instance. Two identical fingerprints mean the structure was
/// untouched, not merely isomorphic.
fn fingerprint(net: &Network) -> (Vec<(usize, Option<String>)>, Vec<(usize, usize, u32)>) {
    let mut nodes: Vec<(usize, Option<String>)> = net
        .node_ids()
        .into_iter()
        .map(|v| (v.index(), net.label(v).map(str::to_owned)))
        .collect();
    nodes.sort();
    let mut edges: Vec<(usize, usize, u32)> = net
        .edges()
        .into_iter()
        .map(|(u, v, m)| (u.index(), v.index(), m))
        .collect();
    edges.sort();
    (nodes, edges)
}

fn reducible_pairs(net: &Network) -> Vec<Pair> {
    let mut out: Vec<Pair> = Vec::new();
    for tagged in net.all_reducible_pairs() {
        if !out.contains(&tagged.pair) {
            out.push(tagged.pair);
        }
    }
    out
}

proptest! {
    #[test]
    fn generated_sequences_are_tree_child_sequences(
        (n, r, seed) in arb_shape(),
    ) {
        let s = tcs_for(n, r, seed);
        prop_assert!(check_tcs(&s));
        prop_assert!(check_cps(&s));
        prop_assert_eq!(s.len(), n + r - 1);
        let last = s.get(s.len()).expect("nonempty");
        prop_assert_eq!((last.first(), last.second()), ("2", "1"));
    }

    #[test]
    fn binary_generation_builds_binary_tree_child_networks(
        n in 2usize..=8,
        seed in any::<u64>(),
    ) {
        let r = (seed as usize) % n;
        let s = random_tcs(n, r, &mut rng(seed), true).expect("r < n");
        prop_assert!(check_tcs(&s));
        let net = build_from_cps(&s, "1a2a".parse().unwrap(), None).unwrap();
        let report = net.classify().unwrap();
        prop_assert!(report.is_binary);
        prop_assert!(report.is_tree_child);
        prop_assert_eq!(report.reticulation_number, r);
    }

    #[test]
    fn every_class_builds_a_network_obeying_the_length_law(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let report = net.classify().unwrap();
        prop_assert_eq!(report.n_leaves, n);
        prop_assert_eq!(report.reticulation_number, s.len() + 1 - n);
        prop_assert!(cps_reduces_network(&net, &s));
    }

    #[test]
    fn tree_child_add_rules_build_tree_child_networks(
        (n, r, seed) in arb_shape(),
        class in prop::sample::select(vec![
            CpnClass::ALL[1], // (1a, 2b)
            CpnClass::ALL[3], // (1a, 2d)
            CpnClass::ALL[5], // (1b, 2b)
            CpnClass::ALL[7], // (1b, 2d)
        ]),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let report = net.classify().unwrap();
        prop_assert!(report.is_stack_free);
        prop_assert!(report.is_tree_child);
    }

    #[test]
    fn reducing_a_pair_strictly_shrinks_the_network(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
        pick in any::<usize>(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let pairs = reducible_pairs(&net);
        prop_assert!(!pairs.is_empty());
        let pair = &pairs[pick % pairs.len()];

        let mut reduced = net.clone();
        let outcome = reduced.reduce_pair(pair);
        prop_assert!(outcome != ReduceOutcome::Unchanged);
        // A cherry removes a leaf; a reticulated cherry may only remove one
        // instance of a parallel edge. The combined size always shrinks.
        prop_assert!(
            reduced.node_count() + reduced.edge_instance_count()
                < net.node_count() + net.edge_instance_count()
        );
        prop_assert!(reduced.node_count() <= net.node_count());
        reduced.validate().unwrap();
    }

    #[test]
    fn reducing_a_non_reducible_pair_leaves_the_network_untouched(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let reducible: HashSet<Pair> = net
            .all_reducible_pairs()
            .into_iter()
            .map(|t| t.pair)
            .collect();
        let taxa = net.taxa();
        let before = fingerprint(&net);
        for a in &taxa {
            for b in &taxa {
                if a == b {
                    continue;
                }
                let pair = Pair::new(a.clone(), b.clone()).unwrap();
                if reducible.contains(&pair) {
                    continue;
                }
                let mut copy = net.clone();
                prop_assert_eq!(copy.reduce_pair(&pair), ReduceOutcome::Unchanged);
                prop_assert_eq!(fingerprint(&copy), before.clone());
            }
        }
        // A pair naming an absent taxon is never reducible, so this arm is
        // exercised even on networks where every leaf pair reduces.
        let absent = Pair::new("absent", taxa[0].clone()).unwrap();
        let mut copy = net.clone();
        prop_assert_eq!(copy.reduce_pair(&absent), ReduceOutcome::Unchanged);
        prop_assert_eq!(fingerprint(&copy), before);
    }

    #[test]
    fn new_reducible_pairs_only_involve_the_reduced_coordinates(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
        pick in any::<usize>(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let before: HashSet<Pair> = net
            .all_reducible_pairs()
            .into_iter()
            .map(|t| t.pair)
            .collect();
        let pairs = reducible_pairs(&net);
        let pair = &pairs[pick % pairs.len()];

        let mut reduced = net.clone();
        reduced.reduce_pair(pair);
        let after: HashSet<Pair> = reduced
            .all_reducible_pairs()
            .into_iter()
            .map(|t| t.pair)
            .collect();
        for fresh in after.difference(&before) {
            let touches = [fresh.first(), fresh.second()]
                .iter()
                .any(|c| *c == pair.first() || *c == pair.second());
            prop_assert!(
                touches,
                "pair {:?} appeared without involving {:?}",
                fresh,
                pair
            );
        }
    }

    #[test]
    fn semi_binary_reduction_loses_at_most_the_pair_and_its_mirror(
        (n, r, seed) in arb_shape(),
        class in prop::sample::select(vec![CpnClass::ALL[0], CpnClass::ALL[1]]),
        pick in any::<usize>(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        prop_assert!(net.classify().unwrap().is_semi_binary);
        let before: HashSet<Pair> = net
            .all_reducible_pairs()
            .into_iter()
            .map(|t| t.pair)
            .collect();
        let pairs = reducible_pairs(&net);
        let pair = &pairs[pick % pairs.len()];

        let mut reduced = net.clone();
        reduced.reduce_pair(pair);
        let after: HashSet<Pair> = reduced
            .all_reducible_pairs()
            .into_iter()
            .map(|t| t.pair)
            .collect();
        for lost in before.difference(&after) {
            prop_assert!(
                *lost == *pair || *lost == pair.swapped(),
                "lost pair {:?} is neither {:?} nor its mirror",
                lost,
                pair
            );
        }
    }

    #[test]
    fn reduction_preserves_the_tree_child_property(
        (n, r, seed) in arb_shape(),
        pick in any::<usize>(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, "1a2b".parse().unwrap(), None).unwrap();
        prop_assert!(net.classify().unwrap().is_tree_child);
        let pairs = reducible_pairs(&net);
        let pair = &pairs[pick % pairs.len()];

        let mut reduced = net.clone();
        reduced.reduce_pair(pair);
        let report = reduced.classify().unwrap();
        prop_assert!(report.is_semi_binary);
        prop_assert!(report.is_tree_child);
    }

    #[test]
    fn applying_a_concatenation_equals_applying_the_parts_in_turn(
        (n, r, seed) in arb_shape(),
        (n2, r2, seed2) in arb_shape(),
        class in arb_class(),
        cut in any::<usize>(),
    ) {
        // The sequence is deliberately drawn from a different shape than the
        // network so that some steps land as irreducible and are skipped.
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&tcs_for(n2, r2, seed2), class, None).unwrap();
        let k = cut % (s.len() + 1);
        let head = s.prefix(k);
        let tail = s.suffix_from(k + 1);
        let joined = apply(&net, &s);
        let staged = apply(&apply(&net, &head), &tail);
        prop_assert_eq!(fingerprint(&joined), fingerprint(&staged));
    }

    #[test]
    fn any_full_reduction_has_the_lawful_length(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
        policy_seed in any::<u64>(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let trace = greedy_cps(&net, PopPolicy::Shuffled(policy_seed)).unwrap();
        let report = net.classify().unwrap();
        prop_assert_eq!(trace.len(), report.n_leaves + report.reticulation_number - 1);
        prop_assert!(check_cps(&trace));
        prop_assert!(cps_reduces_network(&net, &trace));
        prop_assert!(is_minimal_for(&net, &trace));
    }

    #[test]
    fn every_first_reducible_pair_extends_to_a_full_reduction(
        n in 2usize..=6,
        r in 0usize..=4,
        seed in any::<u64>(),
        class in arb_class(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let total = net.classify().unwrap().reticulation_number + n - 1;
        for pair in reducible_pairs(&net) {
            let mut rest = net.clone();
            prop_assert!(rest.reduce_pair(&pair) != ReduceOutcome::Unchanged);
            if rest.leaf_count() == 1 && rest.node_count() <= 2 {
                prop_assert_eq!(total, 1);
                continue;
            }
            let tail = greedy_cps(&rest, PopPolicy::Shuffled(seed)).unwrap();
            prop_assert_eq!(tail.len(), total - 1);
        }
    }

    #[test]
    fn a_transposed_tcs_that_stays_tree_child_stays_a_cps(
        (n, r, seed) in arb_shape(),
        i in any::<usize>(),
        j in any::<usize>(),
    ) {
        let s = tcs_for(n, r, seed);
        let mut pairs = s.pairs().to_vec();
        let len = pairs.len();
        pairs.swap(i % len, j % len);
        let t = Sequence::from_pairs(pairs);
        if check_tcs(&t) {
            prop_assert!(check_cps(&t));
        }
        if !check_cps(&t) {
            prop_assert!(!check_tcs(&t));
        }
    }

    #[test]
    fn edge_lists_round_trip(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let text = write_network(&net, NetFormat::EdgeList);
        let (back, _report) = parse_network(&text).unwrap();
        prop_assert!(labeled_iso(&net, &back));
    }

    #[test]
    fn enewick_round_trips(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        let text = write_network(&net, NetFormat::Enewick);
        let back = parse_enewick(&text).unwrap();
        prop_assert!(labeled_iso(&net, &back));
    }

    #[test]
    fn cps_files_round_trip(
        (n, r, seed) in arb_shape(),
    ) {
        let s = tcs_for(n, r, seed);
        let text = write_cps(&s);
        let back = parse_cps(&text).unwrap();
        prop_assert_eq!(s, back);
    }

    #[test]
    fn parsers_return_errors_instead_of_panicking(
        bytes in prop::collection::vec(any::<u8>(), 0..200),
    ) {
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let _ = parse_network(&text);
        let _ = parse_enewick(&text);
        let _ = parse_cps(&text);
    }

    #[test]
    fn parsers_survive_corrupted_valid_files(
        (n, r, seed) in arb_shape(),
        class in arb_class(),
        cut in any::<usize>(),
        flip in any::<u8>(),
    ) {
        let s = tcs_for(n, r, seed);
        let net = build_from_cps(&s, class, None).unwrap();
        for text in [
            write_network(&net, NetFormat::EdgeList),
            write_network(&net, NetFormat::Enewick),
            write_cps(&s),
        ] {
            let mut bytes = text.into_bytes();
            if !bytes.is_empty() {
                let at = cut % bytes.len();
                bytes[at] = flip;
                bytes.truncate(at + 1 + cut % (bytes.len() - at));
            }
            let corrupted = String::from_utf8_lossy(&bytes).into_owned();
            let _ = parse_network(&corrupted);
            let _ = parse_enewick(&corrupted);
            let _ = parse_cps(&corrupted);
        }
    }
}
