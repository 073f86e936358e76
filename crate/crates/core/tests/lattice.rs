mod common;

use std::collections::{BTreeMap, BTreeSet};

use clef_core::clef::Stage1;
use clef_core::{
    clef_stage1, generate_candidates, prune_maximal, run_clef, Criterion, CriterionVerdict, FeatureSet, Guard,
    LevelFamily, Sequential, TailParams, TestConfig,
};
use common::*;
use proptest::prelude::*;

fn verdict(alpha: &FeatureSet, keep: bool) -> CriterionVerdict {
    CriterionVerdict {
        alpha: *alpha,
        statistic: None,
        sigma_hat: None,
        threshold: None,
        keep,
        guard: Guard::None,
        variance_clamped: false,
    }
}

// Keeps α iff it is contained in one of `planted`, or its bit-pattern hash
// falls in the lucky set.
fn planted_run(d: usize, planted: &[FeatureSet], salt: u64) -> Stage1 {
    clef_stage1(d, &Sequential, |alpha| {
        let inside = planted.iter().any(|p| alpha.is_subset(p));
        let h = alpha.iter().fold(salt, |acc, j| acc.wrapping_mul(6364136223846793005).wrapping_add(j as u64 + 1));
        Ok(verdict(alpha, inside || h % 7 == 0))
    })
    .unwrap()
}

fn brute_maximal(union: &[FeatureSet]) -> Vec<FeatureSet> {
    let mut out: Vec<FeatureSet> =
        union.iter().filter(|a| !union.iter().any(|b| a.is_proper_subset(b))).copied().collect();
    out.sort();
    out.dedup();
    out
}

fn feature_set(d: usize) -> impl Strategy<Value = FeatureSet> {
    proptest::collection::btree_set(0..d, 1..=d.min(6)).prop_map(|s| FeatureSet::from_indices(s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn stage_one_is_downward_closed(
        d in 3usize..=10,
        planted in proptest::collection::vec(feature_set(10), 0..4),
        salt in any::<u64>(),
    ) {
        let planted: Vec<FeatureSet> = planted.into_iter().filter(|p| p.last() < d).collect();
        let run = planted_run(d, &planted, salt);
        for (level, family) in &run.levels {
            prop_assert!(family.sets.iter().all(|a| a.len() == *level));
            if *level < 3 {
                continue;
            }
            let below: BTreeSet<FeatureSet> = run.levels[&(level - 1)].sets.iter().copied().collect();
            for alpha in &family.sets {
                for j in alpha.iter() {
                    prop_assert!(below.contains(&alpha.without(j).unwrap()));
                }
            }
        }
        // every planted group of size ≥ 2 survives
        for p in planted.iter().filter(|p| p.len() >= 2) {
            prop_assert!(run.levels[&p.len()].sets.contains(p));
        }
    }

    #[test]
    fn evaluations_equal_candidate_counts(
        d in 3usize..=10,
        planted in proptest::collection::vec(feature_set(10), 0..4),
        salt in any::<u64>(),
    ) {
        let planted: Vec<FeatureSet> = planted.into_iter().filter(|p| p.last() < d).collect();
        let run = planted_run(d, &planted, salt);
        let expected: usize = run.levels.values().map(|f| generate_candidates(f).len()).sum();
        prop_assert_eq!(run.verdicts.len(), expected);
    }

    #[test]
    fn pruning_matches_pairwise_oracle(
        d in 3usize..=12,
        sets in proptest::collection::vec(feature_set(12), 0..30),
    ) {
        let sets: Vec<FeatureSet> = sets.into_iter().filter(|s| s.len() >= 2 && s.last() < d).collect();
        let mut levels: BTreeMap<usize, LevelFamily> = BTreeMap::new();
        levels.insert(1, LevelFamily { level: 1, sets: (0..d).map(FeatureSet::singleton).collect() });
        for s in &sets {
            let f = levels.entry(s.len()).or_insert(LevelFamily { level: s.len(), sets: vec![] });
            if !f.sets.contains(s) {
                f.sets.push(*s);
            }
        }
        let got = prune_maximal(&levels);
        prop_assert_eq!(&got, &brute_maximal(&sets));
        for a in &got {
            prop_assert!(!got.iter().any(|b| a.is_proper_subset(b)));
        }
        for s in &sets {
            prop_assert!(got.iter().any(|m| s.is_subset(m)));
        }
    }

    #[test]
    fn candidates_are_exactly_the_closed_sets(
        d in 3usize..=8,
        level in 1usize..=3,
        pick in proptest::collection::vec(any::<bool>(), 56),
    ) {
        let all = all_subsets(d);
        let prev: Vec<FeatureSet> = all
            .iter()
            .filter(|s| s.len() == level)
            .zip(pick.iter().cycle())
            .filter(|(_, &keep)| keep || level == 1)
            .map(|(s, _)| *s)
            .collect();
        let known: BTreeSet<FeatureSet> = prev.iter().copied().collect();
        let mut expected: Vec<FeatureSet> = all
            .iter()
            .filter(|s| s.len() == level + 1)
            .filter(|s| s.iter().all(|j| known.contains(&s.without(j).unwrap())))
            .copied()
            .collect();
        expected.sort();
        prop_assert_eq!(generate_candidates(&LevelFamily { level, sets: prev }), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn full_runs_are_deterministic((rd, k) in (30usize..=50, 3usize..=4).prop_flat_map(|(n, d)| (ranked(n, d), 16..n))) {
        let p = TailParams::new(k, rd.n()).unwrap();
        let cfg = TestConfig::default();
        for criterion in Criterion::ALL {
            let a = run_clef(&rd, p, &cfg, criterion, &Sequential).unwrap();
            let b = run_clef(&rd, p, &cfg, criterion, &Sequential).unwrap();
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
            for m in &a.maximal {
                prop_assert!(a.levels[&m.len()].contains(m));
            }
        }
    }
}
