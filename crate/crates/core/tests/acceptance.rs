//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) and exits non-zero when any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use decoy_core::bench::{run_benchmark, BenchConfig, BenchMechanism, bucket_label, global_param, l_param, laplace_param, SMALL_BUCKET};
use decoy_core::data::{enforce_eligibility, Release};
use decoy_core::estimator::{
    build_multi_sa_matrix_with_model, build_single_sa_matrix_with_model, estimate_query, iterative_bayes_observed,
    observe, BayesOptions, CountQuery, DecoyModel, StateVector,
};
use decoy_core::guarantees::{error_bound, privacy_tail, utility_threshold};
use decoy_core::mechanism::{
    anonymize_a_prime, decoy_partitions, output_probability, output_probability_global_a, DecoyRandomizer,
    RandomizerConfig,
};
use decoy_core::partition::partition;
use decoy_core::{Execution, Ratio};
use num_rational::BigRational;

use common::*;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

const FIXTURES: &[(usize, &[&str])] = &[
    (2, &["a", "b"]),
    (2, &["a", "a", "b", "b"]),
    (2, &["a", "a", "b", "c"]),
    (2, &["a", "b", "c", "d"]),
    (2, &["a", "a", "a", "b", "b", "c"]),
    (2, &["a", "a", "b", "b", "c", "c", "d", "d"]),
    (2, &["a", "a", "a", "a", "b", "c", "d", "e"]),
    (4, &["a", "b", "c", "d"]),
    (4, &["a", "a", "b", "b", "c", "c", "d", "d"]),
    (4, &["a", "a", "b", "b", "c", "d", "e", "f"]),
];
const DOMAIN: &[&str] = &["a", "b", "c", "d", "e", "f"];

/// Every assignment drawing each tuple's output from its own decoy group.
fn assignments(decoys: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for options in decoys {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

fn zero_differential() -> Verdict {
    let start = Instant::now();
    let mut checked = 0usize;
    for &(l, values) in FIXTURES {
        let d1 = keyed_dataset(values, DOMAIN);
        let parts = decoy_partitions(&d1, l).unwrap();
        let part = &parts[0];
        let cfg = RandomizerConfig::a_prime(l, 0);
        let group_of = part.group_index();
        let truth = d1.column(1).to_vec();
        let ids = d1.ids();
        let decoys: Vec<Vec<u32>> = (0..d1.len())
            .map(|row| part.decoys(group_of[&ids[row]]).copied().collect())
            .collect();

        // neighbors: swap a tuple's value with another member of its group
        let mut neighbors = Vec::new();
        for t in 0..d1.len() {
            let g = group_of[&ids[t]];
            let mut mine = Vec::new();
            for u in 0..d1.len() {
                if u != t && group_of[&ids[u]] == g {
                    let mut sa = truth.clone();
                    sa.swap(t, u);
                    mine.push(with_sa(&d1, 1, sa));
                }
            }
            if mine.len() != l - 1 {
                return verdict(false, format!("tuple {t} has {} neighbors, expected {}", mine.len(), l - 1));
            }
            neighbors.extend(mine);
        }

        let candidates = assignments(&decoys);
        let mismatches: Vec<bool> = Execution::Parallel.map(&candidates, |codes| {
            let d_hat = candidate(&d1, 1, codes, l, Release::APrime);
            let base = output_probability(&d1, &cfg, &d_hat, &parts).unwrap();
            neighbors
                .iter()
                .any(|d2| output_probability(d2, &cfg, &d_hat, &parts).unwrap() != base)
        });
        if let Some(i) = mismatches.iter().position(|&m| m) {
            return verdict(false, format!("fixture {values:?} l'={l}: assignment {:?} differs", candidates[i]));
        }
        checked += candidates.len() * neighbors.len();
    }
    let elapsed = start.elapsed();
    verdict(
        elapsed < Duration::from_secs(10),
        format!(
            "{} fixtures, {checked} (output, neighbor) pairs equal exactly, {:.2} s (limit 10 s)",
            FIXTURES.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn negative_results() -> Verdict {
    let p = Ratio::new(3u64, 4);
    // mechanism A over {a, b}: q = 1/4, one tuple differs
    let d1 = keyed_dataset(&["a", "b"], &["a", "b"]);
    let d2 = with_sa(&d1, 1, vec![1, 1]);
    let d_hat = candidate(&d1, 1, &[0, 1], 1, Release::GlobalA { p });
    let a = output_probability_global_a(&d1, p, &d_hat).unwrap() / output_probability_global_a(&d2, p, &d_hat).unwrap();

    // A' with l' = 2 in test mode: both tuples of one group swapped
    let cfg = RandomizerConfig::a_prime_unsafe(2, p, 0);
    let e1 = keyed_dataset(&["a", "b"], &["a", "b"]);
    let e2 = with_sa(&e1, 1, vec![1, 0]);
    let parts = decoy_partitions(&e1, 2).unwrap();
    let e_hat = candidate(&e1, 1, &[0, 1], 2, Release::APrime);
    let b = output_probability(&e1, &cfg, &e_hat, &parts).unwrap() / output_probability(&e2, &cfg, &e_hat, &parts).unwrap();

    let pass = a == rational(3, 1) && b == rational(9, 1);
    verdict(pass, format!("mechanism A ratio {a} (p/q = 3), A' ratio {b} (p²/q² = 9)"))
}

fn utility_example() -> Verdict {
    let t = utility_threshold(10, 0.2, 0.02).unwrap();
    let second = utility_threshold(10, 0.02, 0.02).unwrap();
    let pass = t.rounded == 11 && (t.real - 11.18).abs() <= 0.01 && (second.real - 111.8).abs() < 0.05;
    verdict(
        pass,
        format!(
            "T_f real {:.4}, reported {}; ε=0.02 gives {:.1}",
            t.real, t.rounded, second.real
        ),
    )
}

fn tail_example() -> Verdict {
    let t = privacy_tail(5, 10, 0.3).unwrap();
    let exact = to_f64(&binomial_mass(50, 1, 10, t.lo, t.hi));
    let pass = (t.in_range - 0.5178).abs() <= 0.005
        && (t.in_range - exact).abs() <= 1e-10
        && (t.tail - (1.0 - t.in_range)).abs() < 1e-15;
    verdict(
        pass,
        format!(
            "in-range mass {:.6} over [{}, {}] (target 0.5178 ± 0.005), exact oracle {:.6}, |diff| {:.1e}, T_P {:.6}",
            t.in_range,
            t.lo,
            t.hi,
            exact,
            (t.in_range - exact).abs(),
            t.tail
        ),
    )
}

fn unbiasedness() -> Verdict {
    let start = Instant::now();
    let d = frequency_dataset(1000, 100, 10);
    let randomizer = DecoyRandomizer::new(&d, 5, Ratio::new(1, 5)).unwrap();
    let runs = 10_000;
    let counts = Execution::Parallel.map_range(runs, |seed| randomizer.published_count(0, 0, seed as u64));
    let mean = counts.iter().sum::<usize>() as f64 / runs as f64;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let elapsed = start.elapsed();
    let pass = (99.7..=100.3).contains(&mean) && elapsed < Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "mean f'_s {mean:.3} over {runs} runs (window [99.7, 100.3]), sample variance {var:.1} (theory 80), {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn chebyshev() -> Verdict {
    let runs = 10_000;
    let mut violations = Vec::new();
    let mut cells = Vec::new();
    for f in [20usize, 50, 200] {
        let d = frequency_dataset(1000, f, 10);
        let randomizer = DecoyRandomizer::new(&d, 5, Ratio::new(1, 5)).unwrap();
        let counts = Execution::Parallel.map_range(runs, |seed| randomizer.published_count(0, 0, seed as u64));
        for eps in [0.1, 0.2, 0.3] {
            let hits = counts
                .iter()
                .filter(|&&c| (c as f64 - f as f64).abs() >= eps * f as f64)
                .count();
            let freq = hits as f64 / runs as f64;
            let bound = error_bound(5, eps, f as u64);
            cells.push(format!("f={f} ε={eps}: {freq:.4} vs {bound:.4}"));
            if freq > bound {
                violations.push(format!("f={f},ε={eps}"));
            }
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "{} of 9 cells exceed the bound 1/(l'ε²f²) [{}]; empirical vs bound: {}",
            violations.len(),
            violations.join(" "),
            cells.join("; ")
        ),
    )
}

fn iterative_bayes_checks() -> Verdict {
    // w = 1 tensor consistency on assorted states
    let mut worst = 0.0f64;
    for x in [[40.0, 10.0, 40.0, 10.0], [3.0, 0.0, 7.0, 5.0], [912.0, 33.0, 5.0, 50.0], [1.0, 1.0, 1.0, 1.0]] {
        let n = x.iter().sum::<f64>() as usize;
        let sv = StateVector::new(x.to_vec()).unwrap();
        for model in [DecoyModel::Simple, DecoyModel::Exact] {
            for l in 1..=10 {
                let a = build_single_sa_matrix_with_model(&sv, l, n, model).unwrap();
                let b = build_multi_sa_matrix_with_model(&sv, l, n, 1, model).unwrap();
                for (p, q) in a.entries().iter().zip(b.entries()) {
                    worst = worst.max((p - q).abs());
                }
            }
        }
    }

    let d = state_dataset([4000, 1000, 4000, 1000], 5, 3);
    let q = CountQuery::new([("a", "p")], [("s", "s0")]);
    let resolved = q.resolve(d.schema()).unwrap();
    let mut mass_drift = 0.0f64;
    let mut errors = Vec::new();
    for seed in 0..30 {
        let published = anonymize_a_prime(&d, &RandomizerConfig::a_prime(5, seed)).unwrap();
        let y = observe(&published, &resolved);
        iterative_bayes_observed(&y, 5, d.len(), 1, &BayesOptions::default(), |_, x| {
            let s: f64 = x.iter().sum();
            mass_drift = mass_drift.max((s - 10_000.0).abs() / 10_000.0);
        })
        .unwrap();
        let est = estimate_query(&published, &q, 0.01, 10_000).unwrap();
        errors.push((est - 1000.0).abs() / 1000.0);
    }
    let mean_err = errors.iter().sum::<f64>() / errors.len() as f64;
    let pass = worst <= 1e-15 && mass_drift <= 1e-9 && mean_err <= 0.15;
    verdict(
        pass,
        format!(
            "w=1 max entry difference {worst:.1e}; max relative mass drift {mass_drift:.1e}; (P,s) mean relative error {mean_err:.4} over 30 seeds (limit 0.15)"
        ),
    )
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let var: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    cov / var
}

fn trends() -> Verdict {
    let d = census(100_000, 7);
    let config = BenchConfig {
        mechanisms: vec![BenchMechanism::APrime, BenchMechanism::GlobalA, BenchMechanism::Laplace],
        epsilons: vec![0.01],
        laplace_m: vec![100],
        seeds: vec![1, 2],
        ..BenchConfig::default()
    };
    let report = run_benchmark(&d, &config).unwrap();
    let a_prime = |l: usize, bucket: &str| report.avg_error(BenchMechanism::APrime, &l_param(l), bucket);
    let mut notes = Vec::new();

    let two = bucket_label(0.02);
    let a_fail: Vec<usize> = (5..=10)
        .filter(|&l| !matches!((a_prime(l, SMALL_BUCKET), a_prime(l, &two)), (Some(s), Some(b)) if s > b))
        .collect();
    notes.push(format!("(a) small > ≥2% for l'=5..10: {}", if a_fail.is_empty() { "yes".into() } else { format!("no at {a_fail:?}") }));

    let ls: Vec<f64> = (2..=10).map(|l| l as f64).collect();
    let small: Vec<f64> = (2..=10).map(|l| a_prime(l, SMALL_BUCKET).unwrap_or(f64::NAN)).collect();
    let rho = spearman(&ls, &small);
    notes.push(format!("(b) Spearman(l', small-count error) {rho:.3}"));

    let laplace = laplace_param(0.01, 100);
    let mut c_ok = true;
    let mut d_ok = true;
    let mut compared = 0;
    for &t in &config.buckets {
        let label = bucket_label(t);
        if t >= 0.01 {
            if let Some(lap) = report.avg_error(BenchMechanism::Laplace, &laplace, &label) {
                for l in 2..=10 {
                    if let Some(a) = a_prime(l, &label) {
                        c_ok &= lap > a;
                    }
                }
            }
        }
        if let (Some(g), Some(a)) = (report.avg_error(BenchMechanism::GlobalA, &global_param(5), &label), a_prime(5, &label)) {
            compared += 1;
            d_ok &= g > a;
            notes.push(format!("{label}: A {g:.4} vs A' {a:.4}"));
        }
    }
    notes.insert(2, format!("(c) Laplace above A' in every bucket ≥1%: {c_ok}"));
    notes.insert(3, format!("(d) mechanism A above A' (l'=5) in {compared} non-empty buckets ≥0.5%: {d_ok}"));
    let pass = a_fail.is_empty() && rho > 0.0 && c_ok && d_ok && compared >= 3;
    verdict(pass, notes.join("; "))
}

fn performance() -> Verdict {
    let d = census(500_000, 11);
    let mut worst = 0.0f64;
    let mut times = Vec::new();
    for l in 2..=10 {
        let (d_l, report) = enforce_eligibility(&d, l);
        if !report.eligible {
            return verdict(false, format!("500k dataset not eligible for l'={l}"));
        }
        let start = Instant::now();
        anonymize_a_prime(&d_l, &RandomizerConfig::a_prime(l, l as u64)).unwrap();
        let s = start.elapsed().as_secs_f64();
        worst = worst.max(s);
        times.push(format!("{l}:{s:.2}"));
    }

    let time_partition = |n: usize| {
        let data = census(n, 5);
        let rows: Vec<(u64, u32)> = data.ids().iter().copied().zip(data.column(7).iter().copied()).collect();
        (0..3)
            .map(|_| {
                let start = Instant::now();
                partition(&rows, 5).unwrap();
                start.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = time_partition(250_000);
    let large = time_partition(500_000);
    let ratio = large / small;
    let pass = worst < 10.0 && ratio <= 2.5;
    verdict(
        pass,
        format!(
            "slowest 500k anonymization {worst:.2} s (limit 10 s) [l':s {}]; partition 250k→500k time ratio {ratio:.2} (limit 2.5)",
            times.join(" ")
        ),
    )
}

fn likelihood(f: u64, observed: u64, l: u64) -> BigRational {
    let n = f * l;
    if observed > n {
        return rational(0, 1);
    }
    BigRational::from_integer(binomial(n, observed))
        * pow(&rational(1, l as i64), observed)
        * pow(&rational(l as i64 - 1, l as i64), n - observed)
}

fn mle() -> Verdict {
    let (n, l) = (50u64, 5u64);
    let cap = n / l;
    let mut observed = std::collections::BTreeSet::new();
    for f in 1..=cap as usize {
        let d = frequency_dataset(n as usize, f, 10);
        let randomizer = DecoyRandomizer::new(&d, l as usize, Ratio::new(1, l)).unwrap();
        for seed in 0..200 {
            observed.insert(randomizer.published_count(0, 0, seed) as u64);
        }
    }
    let mut bad = Vec::new();
    for &o in &observed {
        let best = (0..=cap)
            .max_by(|&a, &b| likelihood(a, o, l).cmp(&likelihood(b, o, l)).then(b.cmp(&a)))
            .unwrap();
        if best != o.min(cap) {
            bad.push((o, best));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} observed f'_s values in [{}, {}]; argmax over f ∈ 0..={cap} equals f'_s (capped at N/l' = {cap}) for all; mismatches {bad:?}",
            observed.len(),
            observed.first().unwrap(),
            observed.last().unwrap()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("zero-differential enumeration", zero_differential),
        ("negative results p/q and p²/q²", negative_results),
        ("utility threshold at l'=10, ε=0.2", utility_example),
        ("privacy tail at f=5, l'=10, ε=0.3", tail_example),
        ("unbiasedness of f'_s", unbiasedness),
        ("Chebyshev bound never violated", chebyshev),
        ("iterative Bayes reconstruction", iterative_bayes_checks),
        ("qualitative benchmark trends", trends),
        ("anonymization performance", performance),
        ("MLE likelihood scan", mle),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {} ({:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
