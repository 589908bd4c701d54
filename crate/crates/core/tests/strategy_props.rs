//! Relations between the two exploration strategies.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use depthscan::corpus;
use depthscan::explorer::{explore, explore_with, ContractBundle, Limits, SequenceLog, Strategy};
use depthscan::report::Both;
use depthscan::solver::Solver;

fn limits() -> Limits {
    Limits::with_width(8)
}

/// (sequence, path condition) pairs and the per-depth sequence log.
fn explored(
    b: &ContractBundle,
    depth: u32,
    s: Strategy,
) -> (BTreeSet<(Vec<String>, String)>, SequenceLog) {
    let mut states = common::EndStates::default();
    let mut log = SequenceLog::default();
    let mut solver = Solver::new(limits().solver);
    explore_with(
        b,
        depth,
        s,
        &limits(),
        &mut solver,
        &mut Both(&mut states, &mut log),
    )
    .unwrap();
    let pairs = states
        .0
        .iter()
        .map(|e| {
            let pc: Vec<String> = e
                .world
                .constraints
                .iter()
                .map(|c| c.expr().to_string())
                .collect();
            (e.world.sequence(), pc.join(" && "))
        })
        .collect();
    (pairs, log)
}

#[test]
fn raw_pruned_explores_a_subset_of_brute_force() {
    for e in corpus::bundled() {
        let b = ContractBundle::analyze(&e.source).unwrap();
        let (brute, brute_log) = explored(&b, 3, Strategy::BruteForce);
        let (raw, raw_log) = explored(&b, 3, Strategy::RawPruned);
        assert!(raw.is_subset(&brute), "{}", e.name);
        for (d, level) in raw_log.by_depth.iter().enumerate() {
            let all: BTreeSet<_> = brute_log.by_depth[d].iter().collect();
            assert!(
                level.iter().all(|s| all.contains(s)),
                "{} depth {}",
                e.name,
                d + 1
            );
        }
    }
}

#[test]
fn brute_force_is_bounded_by_all_sequences() {
    for e in corpus::bundled() {
        let b = ContractBundle::analyze(&e.source).unwrap();
        let k = b.public_functions().len() as u64;
        let stats = explore(&b, 3, Strategy::BruteForce, &limits())
            .unwrap()
            .stats;
        for (i, n) in stats.sequences_started.iter().enumerate() {
            assert!(
                *n <= k.pow(i as u32 + 1),
                "{}: {n} at depth {}",
                e.name,
                i + 1
            );
        }
    }
}

#[test]
fn raw_pruned_continues_only_along_dependencies() {
    for e in corpus::bundled() {
        let b = ContractBundle::analyze(&e.source).unwrap();
        let deps = common::oracles::dependents(&b.unit);
        let (_, log) = explored(&b, 3, Strategy::RawPruned);
        for level in log.by_depth.iter().skip(1) {
            for s in level {
                for pair in s.windows(2) {
                    assert!(deps[&pair[0]].contains(&pair[1]), "{}: {s:?}", e.name);
                }
            }
        }
    }
}

#[test]
fn exploration_is_deterministic() {
    let e = corpus::bundled()
        .into_iter()
        .find(|e| e.name == "token")
        .unwrap();
    let b = ContractBundle::analyze(&e.source).unwrap();
    for s in Strategy::ALL {
        let x = explore(&b, 3, s, &limits()).unwrap();
        let y = explore(&b, 3, s, &limits()).unwrap();
        assert_eq!(x.findings, y.findings);
        assert_eq!(x.stats.without_timing(), y.stats.without_timing());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Freshly generated corpora keep both strategies in agreement.
    #[test]
    fn generated_corpora_agree(seed in any::<u64>()) {
        for e in corpus::generate(seed).into_iter().filter(|e| e.family == corpus::Family::Sparse) {
            let b = ContractBundle::analyze(&e.source).unwrap();
            for d in 1..=3 {
                let brute = explore(&b, d, Strategy::BruteForce, &limits()).unwrap();
                let raw = explore(&b, d, Strategy::RawPruned, &limits()).unwrap();
                prop_assert_eq!(brute.finding_keys(), raw.finding_keys(), "{} depth {}", e.name, d);
                prop_assert!(raw.stats.total_sequences() <= brute.stats.total_sequences());
            }
        }
    }
}
