use std::time::Instant;

use num_rational::Ratio;

use super::{
    actual_counts, bucket_label, generate_pool, global_param, l_param, laplace_param, BenchConfig, BenchMechanism,
    BenchReport, BenchRow, SKIPPED_BUCKET, SMALL_BUCKET,
};
use crate::data::{enforce_eligibility, Dataset};
use crate::error::{Error, Result};
use crate::estimator::{estimate_anatomy_batch, estimate_batch, ResolvedQuery};
use crate::mechanism::{anonymize_anatomy, anonymize_global_a_with, DecoyRandomizer, Laplace};
use crate::seed;

/// Per-seed results of one configuration.
struct Trial {
    anonymize_ms: f64,
    estimate_ms: f64,
    estimates: Vec<f64>,
    iterations: Option<Vec<usize>>,
}

/// An eligible dataset for one l' with the actual counts of the pool on it.
type Prepared = (Dataset, Vec<usize>);

type BucketTest<'a> = Box<dyn Fn(usize) -> bool + 'a>;

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs every configured mechanism over one shared query pool.
pub fn run_benchmark(dataset: &Dataset, config: &BenchConfig) -> Result<BenchReport> {
    if config.seeds.is_empty() {
        return Err(Error::InvalidParameter("the benchmark needs at least one seed".into()));
    }
    let pool = generate_pool(dataset, config.pool_size, config.pool_seed)?;
    let queries: Vec<ResolvedQuery> = pool
        .queries
        .iter()
        .map(|q| q.resolve(dataset.schema()))
        .collect::<Result<_>>()?;
    let base_actual = actual_counts(dataset, &queries, config.exec);

    let mut report = BenchReport {
        zero_actual: base_actual.iter().filter(|&&c| c == 0).count(),
        ..BenchReport::default()
    };

    let mut per_l: Vec<(usize, Option<Prepared>)> = Vec::new();
    let needs_l = config
        .mechanisms
        .iter()
        .any(|m| matches!(m, BenchMechanism::APrime | BenchMechanism::Anatomy));
    if needs_l {
        for &l in &config.l_primes {
            let (d_l, elig) = enforce_eligibility(dataset, l);
            if elig.eligible {
                let actual = actual_counts(&d_l, &queries, config.exec);
                per_l.push((l, Some((d_l, actual))));
            } else {
                per_l.push((l, None));
            }
        }
    }

    for &mechanism in &config.mechanisms {
        match mechanism {
            BenchMechanism::APrime | BenchMechanism::Anatomy => {
                for (l, prepared) in &per_l {
                    let param = l_param(*l);
                    let Some((d_l, actual)) = prepared else {
                        skip(&mut report, mechanism, &param, format!("dataset is not eligible for l'={l}"));
                        continue;
                    };
                    let trials = config
                        .seeds
                        .iter()
                        .map(|&s| match mechanism {
                            BenchMechanism::APrime => a_prime_trial(d_l, *l, s, &queries, config),
                            _ => anatomy_trial(d_l, *l, s, &queries, config),
                        })
                        .collect::<Result<Vec<_>>>();
                    match trials {
                        Ok(trials) => aggregate(&mut report, mechanism, &param, actual, d_l.len(), &trials, config),
                        Err(e) if e.is_infeasible() => skip(&mut report, mechanism, &param, e.to_string()),
                        Err(e) => return Err(e),
                    }
                }
            }
            BenchMechanism::GlobalA => {
                for &l in &config.l_primes {
                    let param = global_param(l);
                    let trials = config
                        .seeds
                        .iter()
                        .map(|&s| global_trial(dataset, l, s, &queries, config))
                        .collect::<Result<Vec<_>>>();
                    match trials {
                        Ok(trials) => aggregate(&mut report, mechanism, &param, &base_actual, dataset.len(), &trials, config),
                        Err(e @ (Error::InvalidParameter(_) | Error::DomainTooSmall { .. })) => {
                            skip(&mut report, mechanism, &param, e.to_string())
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            BenchMechanism::Laplace => {
                for &eps in &config.epsilons {
                    for &m in &config.laplace_m {
                        let param = laplace_param(eps, m);
                        let trials = config
                            .seeds
                            .iter()
                            .map(|&s| laplace_trial(&base_actual, eps, m, s))
                            .collect::<Result<Vec<_>>>()?;
                        aggregate(&mut report, mechanism, &param, &base_actual, dataset.len(), &trials, config);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn a_prime_trial(d: &Dataset, l: usize, seed: u64, queries: &[ResolvedQuery], config: &BenchConfig) -> Result<Trial> {
    let start = Instant::now();
    let randomizer = DecoyRandomizer::new(d, l, Ratio::new(1, l as u64))?;
    let published = randomizer.publish(seed, config.exec);
    let anonymize_ms = elapsed_ms(start);

    let start = Instant::now();
    let results = estimate_batch(&published, queries, &config.bayes, config.exec)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Trial {
        anonymize_ms,
        estimate_ms: elapsed_ms(start),
        estimates: results.iter().map(|r| r.estimate).collect(),
        iterations: Some(results.iter().map(|r| r.iterations).collect()),
    })
}

fn anatomy_trial(d: &Dataset, l: usize, seed: u64, queries: &[ResolvedQuery], config: &BenchConfig) -> Result<Trial> {
    let start = Instant::now();
    let publication = anonymize_anatomy(d, l, seed)?;
    let anonymize_ms = elapsed_ms(start);

    let start = Instant::now();
    let estimates = estimate_anatomy_batch(&publication, queries, config.exec)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Trial {
        anonymize_ms,
        estimate_ms: elapsed_ms(start),
        estimates,
        iterations: None,
    })
}

fn global_trial(d: &Dataset, l: usize, seed: u64, queries: &[ResolvedQuery], config: &BenchConfig) -> Result<Trial> {
    let start = Instant::now();
    let published = anonymize_global_a_with(d, Ratio::new(1, l as u64), seed, config.exec)?;
    let anonymize_ms = elapsed_ms(start);

    let start = Instant::now();
    let results = estimate_batch(&published, queries, &config.bayes, config.exec)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Trial {
        anonymize_ms,
        estimate_ms: elapsed_ms(start),
        estimates: results.iter().map(|r| r.estimate).collect(),
        iterations: None,
    })
}

fn laplace_trial(actual: &[usize], epsilon: f64, m: usize, seed: u64) -> Result<Trial> {
    let noise = Laplace::for_counting_queries(m, epsilon)?;
    let family = seed::derive(seed, seed::LAPLACE, 0);
    let start = Instant::now();
    let estimates = actual
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 + noise.sample(&mut seed::item_rng(family, i as u64)))
        .collect();
    Ok(Trial {
        anonymize_ms: 0.0,
        estimate_ms: elapsed_ms(start),
        estimates,
        iterations: None,
    })
}

fn skip(report: &mut BenchReport, mechanism: BenchMechanism, param: &str, reason: String) {
    report.warnings.push(format!("{mechanism} {param}: {reason}"));
    report.rows.push(BenchRow {
        mechanism: mechanism.name().to_string(),
        param: param.to_string(),
        selectivity_bucket: SKIPPED_BUCKET.to_string(),
        avg_rel_error: None,
        n_queries: 0,
        anonymize_ms: None,
        estimate_ms_avg: None,
        iters_median: None,
        iters_mean: None,
    });
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

fn aggregate(
    report: &mut BenchReport,
    mechanism: BenchMechanism,
    param: &str,
    actual: &[usize],
    n: usize,
    trials: &[Trial],
    config: &BenchConfig,
) {
    let anonymize_ms = median(&mut trials.iter().map(|t| t.anonymize_ms).collect::<Vec<_>>());
    let total_estimates = (trials.len() * actual.len()).max(1) as f64;
    let estimate_ms_avg = Some(trials.iter().map(|t| t.estimate_ms).sum::<f64>() / total_estimates);

    let mut buckets: Vec<(String, BucketTest)> = vec![(
        SMALL_BUCKET.to_string(),
        Box::new(|c: usize| c >= 1 && c <= config.small_count),
    )];
    for &t in &config.buckets {
        buckets.push((
            bucket_label(t),
            Box::new(move |c: usize| c >= 1 && c as f64 / n as f64 >= t),
        ));
    }

    for (label, member) in buckets {
        let selected: Vec<usize> = (0..actual.len()).filter(|&i| member(actual[i])).collect();
        let mut errors = 0.0;
        let mut iters = Vec::new();
        for trial in trials {
            for &i in &selected {
                errors += (trial.estimates[i] - actual[i] as f64).abs() / actual[i] as f64;
                if let Some(it) = &trial.iterations {
                    iters.push(it[i] as f64);
                }
            }
        }
        let samples = selected.len() * trials.len();
        let iters_mean = (!iters.is_empty()).then(|| iters.iter().sum::<f64>() / iters.len() as f64);
        report.rows.push(BenchRow {
            mechanism: mechanism.name().to_string(),
            param: param.to_string(),
            selectivity_bucket: label,
            avg_rel_error: (samples > 0).then(|| errors / samples as f64),
            n_queries: selected.len(),
            anonymize_ms,
            estimate_ms_avg,
            iters_median: median(&mut iters),
            iters_mean,
        });
    }
}
