//! Cross-checks of the scanning algorithms against the brute-force oracles
//! on generated instances small enough for exhaustive ground truth.

use std::cmp::Ordering;

use cpnet::{
    build_from_cps, containment_bruteforce, cps_reduces_network, enumerate_all_minimal_cps,
    find_tcs_with, labeled_iso, make_instance, random_sub_tcs, random_tcs, refines_to,
    smallest_cps, subnetwork_bruteforce, tcn_contains, verify_witness, CpnClass, InstanceKind,
    PopPolicy, Sequence, SmallestCpsVariant, TaxonOrder,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BASE_SEED: u64 = 0x5eed_0c0f_fee0_d00d;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The linear-time containment kernel, the subnetwork oracle and the
/// containment-by-definition oracle give one answer on generated pairs, and
/// every positive subnetwork answer carries a witness that checks out.
#[test]
fn kernel_and_oracles_agree_on_generated_instances() {
    let mut checked = 0usize;
    let mut positives = 0usize;
    for n in [3usize, 5, 6] {
        for r in [1usize, 2, 3] {
            for r_prime in 0..=r.min(2) {
                for kind in [InstanceKind::Yes, InstanceKind::No] {
                    for replicate in 0..2u64 {
                        let inst =
                            make_instance(n, r, r_prime, kind, BASE_SEED, replicate).unwrap();
                        let fast = tcn_contains(&inst.big, &inst.small).unwrap();
                        let witness = subnetwork_bruteforce(&inst.big, &inst.small).unwrap();
                        let slow = containment_bruteforce(&inst.big, &inst.small).unwrap();
                        assert_eq!(
                            fast,
                            witness.is_some(),
                            "kernel vs subnetwork oracle on n={n} r={r} r'={r_prime} {kind} #{replicate}"
                        );
                        assert_eq!(
                            fast, slow,
                            "kernel vs containment oracle on n={n} r={r} r'={r_prime} {kind} #{replicate}"
                        );
                        if let Some(w) = &witness {
                            assert!(verify_witness(&inst.big, &inst.small, w));
                            positives += 1;
                        }
                        if kind == InstanceKind::Yes {
                            assert!(fast, "yes-instance must be contained");
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked >= 90, "grid too small: {checked}");
    assert!(positives * 3 >= checked, "suspiciously few positives");
}

/// When the oracle confirms containment, every tree-child sequence of the
/// host reduces the contained network, whatever order the scan visits pairs.
#[test]
fn containment_implies_every_scan_order_reduces() {
    for replicate in 0..6u64 {
        let inst = make_instance(6, 3, 2, InstanceKind::Yes, BASE_SEED, replicate).unwrap();
        assert!(subnetwork_bruteforce(&inst.big, &inst.small)
            .unwrap()
            .is_some());
        for pop_seed in 0..8u64 {
            let s = find_tcs_with(&inst.big, PopPolicy::Shuffled(pop_seed)).unwrap();
            assert!(
                cps_reduces_network(&inst.small, &s),
                "scan order {pop_seed} missed containment on replicate {replicate}"
            );
        }
    }
}

/// Networks built from randomly thinned tree-child sequences are genuine
/// subnetworks of the host, and thinning never loses a taxon: chasing a
/// kept pair's second coordinate to that taxon's own kept pair moves
/// strictly later in the sequence (an earlier first reappearing as a later
/// second would violate the tree-child condition), so every chase ends at
/// the final survivor and all taxa stay covered.
#[test]
fn sub_tcs_builds_are_subnetworks_of_the_host() {
    let class: CpnClass = "1a2b".parse().unwrap();
    for seed in 0..40u64 {
        let n = 3 + (seed as usize) % 4;
        let r = (seed as usize / 4) % 4;
        let s = random_tcs(n, r, &mut rng(seed), false).unwrap();
        let big = build_from_cps(&s, class, None).unwrap();
        let r_prime = (seed as usize) % (r + 1);
        let sub = random_sub_tcs(&s, r_prime, &mut rng(seed ^ 0xabcd)).unwrap();
        let small = build_from_cps(&sub, class, None).unwrap();
        assert_eq!(small.taxa(), big.taxa(), "seed {seed}: thinning lost a taxon");
        let witness = subnetwork_bruteforce(&big, &small).unwrap();
        assert!(witness.is_some(), "seed {seed}: thinned build not embedded");
        assert!(verify_witness(&big, &small, &witness.unwrap()));
    }
}

/// For the four reconstructible classes, every minimal CPS of a built
/// network rebuilds that network up to labeled isomorphism.
#[test]
fn reconstructible_classes_round_trip_through_every_minimal_cps() {
    for class in CpnClass::ALL {
        if !class.is_reconstructible() {
            continue;
        }
        for seed in 0..8u64 {
            let n = 3 + (seed as usize) % 3;
            let r = (seed as usize) % 3;
            let s = random_tcs(n, r, &mut rng(seed), false).unwrap();
            let net = build_from_cps(&s, class, None).unwrap();
            let all = enumerate_all_minimal_cps(&net, 16).unwrap();
            assert!(!all.is_empty());
            for cps in &all {
                let rebuilt = build_from_cps(cps, class, None).unwrap();
                assert!(
                    labeled_iso(&net, &rebuilt),
                    "class {class} seed {seed}: {cps:?} rebuilt a different network"
                );
            }
        }
    }
}

/// The binary construction refines every other class: contracting internal
/// same-kind edges of the (1a, 2a) build reaches each class's build.
#[test]
fn binary_build_refines_every_class_build() {
    let binary = CpnClass::ALL[0];
    for seed in 0..6u64 {
        let n = 3 + (seed as usize) % 3;
        let r = (seed as usize) % 3;
        let s = random_tcs(n, r, &mut rng(seed ^ 0x51), false).unwrap();
        let fine = build_from_cps(&s, binary, None).unwrap();
        for class in CpnClass::ALL {
            let coarse = build_from_cps(&s, class, None).unwrap();
            assert!(
                refines_to(&fine, &coarse).unwrap(),
                "seed {seed}: (1a,2a) build does not refine class {class}"
            );
        }
    }
}

/// The scanning smallest-CPS computation matches the lexicographic minimum
/// over the exhaustively enumerated minimal CPSs.
#[test]
fn smallest_cps_matches_the_enumerated_minimum_on_random_networks() {
    let class: CpnClass = "1a2b".parse().unwrap();
    for seed in 0..12u64 {
        let n = 3 + (seed as usize) % 3;
        let r = (seed as usize) % 3;
        let s = random_tcs(n, r, &mut rng(seed ^ 0x77), false).unwrap();
        let net = build_from_cps(&s, class, None).unwrap();
        let order = TaxonOrder::for_network(&net);
        let smallest =
            smallest_cps(&net, &order, SmallestCpsVariant::SemibinaryStackfree).unwrap();
        let all = enumerate_all_minimal_cps(&net, 16).unwrap();
        let min = all
            .iter()
            .min_by(|a, b| lex_cmp(&order, a, b))
            .expect("at least one minimal CPS");
        assert_eq!(&smallest, min, "seed {seed}");
    }
}

fn lex_cmp(order: &TaxonOrder, a: &Sequence, b: &Sequence) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match order.cmp_pairs(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}
