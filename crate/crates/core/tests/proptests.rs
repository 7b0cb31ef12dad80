mod common;

use std::collections::BTreeSet;

use decoy_core::data::{enforce_eligibility, is_eligible};
use decoy_core::estimator::{
    build_multi_sa_matrix_with_model, iterative_bayes_with, BayesOptions, DecoyModel, StateVector,
};
use decoy_core::guarantees::privacy_tail;
use decoy_core::mechanism::{anonymize_a_prime_with, decoy_partitions, RandomizerConfig};
use decoy_core::partition::partition;
use decoy_core::Execution;
use proptest::prelude::*;
use proptest::sample::subsequence;

const VALUES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Eligible inputs: every group contributes l distinct values, so no value
/// exceeds N/l. Rows are then permuted.
fn eligible_rows() -> impl Strategy<Value = (usize, Vec<(u64, u32)>)> {
    (1usize..=5, 1usize..=8)
        .prop_flat_map(|(l, g)| {
            let groups = prop::collection::vec(subsequence((0u32..8).collect::<Vec<_>>(), l), g);
            (Just(l), groups)
        })
        .prop_flat_map(|(l, groups)| {
            let values: Vec<u32> = groups.into_iter().flatten().collect();
            let n = values.len();
            (Just(l), Just(values).prop_shuffle(), Just((0..n as u64).collect::<Vec<_>>()).prop_shuffle())
        })
        .prop_map(|(l, values, ids)| (l, ids.into_iter().zip(values).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partition_groups_are_decoy_sets((l, rows) in eligible_rows()) {
        let p = partition(&rows, l).unwrap();
        prop_assert_eq!(p.len(), rows.len() / l);
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for g in p.groups() {
            prop_assert_eq!(g.len(), l);
            let distinct: BTreeSet<u32> = g.iter().map(|&(_, v)| v).collect();
            prop_assert_eq!(distinct.len(), l);
            ids.extend(g.iter().map(|&(id, _)| id));
            values.extend(g.iter().map(|&(_, v)| v));
        }
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..rows.len() as u64).collect::<Vec<_>>());
        // each tuple keeps its own value
        for g in p.groups() {
            for &(id, v) in g {
                prop_assert!(rows.contains(&(id, v)));
            }
        }
    }

    #[test]
    fn partition_ignores_row_order((l, rows) in eligible_rows(), rotate in 0usize..64) {
        let mut moved = rows.clone();
        let k = rotate % moved.len();
        moved.rotate_left(k);
        moved.reverse();
        prop_assert_eq!(partition(&rows, l).unwrap(), partition(&moved, l).unwrap());
    }

    #[test]
    fn eligibility_enforcement(sa in prop::collection::vec(0usize..4, 1..40), l in 1usize..=4) {
        let values: Vec<&str> = sa.iter().map(|&i| VALUES[i]).collect();
        let d = common::keyed_dataset(&values, &VALUES[..4]);
        let (out, report) = enforce_eligibility(&d, l);
        prop_assert!(report.required_deletions < l);
        prop_assert_eq!(report.deleted_ids.len(), report.required_deletions);
        if report.eligible {
            prop_assert!(is_eligible(&out, l));
            prop_assert_eq!(out.len() + report.required_deletions, d.len());
            prop_assert!(decoy_partitions(&out, l).is_ok());
        } else {
            prop_assert_eq!(&out, &d);
        }
    }

    #[test]
    fn transition_matrices_are_stochastic(
        counts in prop::collection::vec(0u32..50, 8),
        l in 1usize..=10,
        w in 1usize..=2,
        exact in any::<bool>(),
    ) {
        let x: Vec<f64> = counts[..1 << (w + 1)].iter().map(|&c| c as f64).collect();
        let n = x.iter().sum::<f64>() as usize;
        prop_assume!(n > 0);
        let model = if exact { DecoyModel::Exact } else { DecoyModel::Simple };
        let m = build_multi_sa_matrix_with_model(&StateVector::new(x).unwrap(), l, n, w, model).unwrap();
        for i in 0..m.size() {
            let row = m.row(i);
            prop_assert!(row.iter().all(|&e| (0.0..=1.0).contains(&e)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bayes_conserves_mass(
        counts in prop::collection::vec(0u32..200, 8),
        l in 2usize..=8,
        w in 1usize..=2,
    ) {
        let y: Vec<f64> = counts[..1 << (w + 1)].iter().map(|&c| c as f64).collect();
        let n = y.iter().sum::<f64>() as usize;
        prop_assume!(n > 0);
        let out = iterative_bayes_with(&StateVector::new(y).unwrap(), l, n, w, &BayesOptions::default()).unwrap();
        prop_assert!(out.x.counts().iter().all(|&v| v >= 0.0 && v.is_finite()));
        prop_assert!((out.x.total() - n as f64).abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn tail_non_increasing_in_epsilon(f in 1u64..60, l in 1usize..=10, e1 in 0.01f64..1.0, e2 in 0.01f64..1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = privacy_tail(f, l, lo).unwrap().tail;
        let b = privacy_tail(f, l, hi).unwrap().tail;
        prop_assert!(b <= a + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parallel_matches_sequential(n in 50usize..2000, data_seed in any::<u64>(), seed in any::<u64>(), l in 2usize..=8) {
        let (d, report) = enforce_eligibility(&common::census(n, data_seed), l);
        prop_assume!(report.eligible);
        let cfg = RandomizerConfig::a_prime(l, seed);
        prop_assert_eq!(
            anonymize_a_prime_with(&d, &cfg, Execution::Sequential).unwrap(),
            anonymize_a_prime_with(&d, &cfg, Execution::Parallel).unwrap()
        );
    }
}
