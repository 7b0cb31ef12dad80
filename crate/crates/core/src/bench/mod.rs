//! Benchmark harness: query pools, ground truth, relative-error aggregation
//! by selectivity bucket, and report emission.

mod pool;
mod run;
mod truth;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::BayesOptions;
use crate::exec::Execution;

pub use pool::{generate_pool, QueryPool, MAX_ARITY};
pub use run::run_benchmark;
pub use truth::{actual_count, actual_counts, selectivity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMechanism {
    APrime,
    Anatomy,
    GlobalA,
    Laplace,
}

impl BenchMechanism {
    pub fn name(self) -> &'static str {
        match self {
            BenchMechanism::APrime => "a_prime",
            BenchMechanism::Anatomy => "anatomy",
            BenchMechanism::GlobalA => "global_a",
            BenchMechanism::Laplace => "laplace",
        }
    }
}

impl fmt::Display for BenchMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            BenchMechanism::APrime,
            BenchMechanism::Anatomy,
            BenchMechanism::GlobalA,
            BenchMechanism::Laplace,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown mechanism `{s}` (expected a_prime, anatomy, global_a or laplace)"
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub mechanisms: Vec<BenchMechanism>,
    /// l' for A' and l for Anatomy; mechanism A runs with p = 1/l'.
    pub l_primes: Vec<usize>,
    /// Laplace privacy budgets.
    pub epsilons: Vec<f64>,
    /// Laplace query budgets m (noise scale m/ε).
    pub laplace_m: Vec<usize>,
    /// Selectivity thresholds; a query counts toward every threshold it meets.
    pub buckets: Vec<f64>,
    /// Queries with 1 ≤ actual ≤ this form the small-count bucket.
    pub small_count: usize,
    /// One anonymization per seed and configuration.
    pub seeds: Vec<u64>,
    pub pool_size: usize,
    pub pool_seed: u64,
    pub bayes: BayesOptions,
    pub exec: Execution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            mechanisms: vec![
                BenchMechanism::APrime,
                BenchMechanism::Anatomy,
                BenchMechanism::GlobalA,
                BenchMechanism::Laplace,
            ],
            l_primes: (2..=10).collect(),
            epsilons: vec![0.01, 0.05],
            laplace_m: vec![100],
            buckets: vec![0.005, 0.01, 0.02, 0.03, 0.04, 0.05],
            small_count: 10,
            seeds: vec![1],
            pool_size: 5000,
            pool_seed: 0,
            bayes: BayesOptions::default(),
            exec: Execution::default(),
        }
    }
}

pub const SMALL_BUCKET: &str = "small";
pub const SKIPPED_BUCKET: &str = "skipped";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub mechanism: String,
    pub param: String,
    /// A selectivity threshold such as `0.01`, `small`, or `skipped`.
    pub selectivity_bucket: String,
    pub avg_rel_error: Option<f64>,
    pub n_queries: usize,
    pub anonymize_ms: Option<f64>,
    pub estimate_ms_avg: Option<f64>,
    pub iters_median: Option<f64>,
    pub iters_mean: Option<f64>,
}

impl BenchRow {
    /// The row with wall-clock columns cleared.
    pub fn without_timing(&self) -> BenchRow {
        BenchRow {
            anonymize_ms: None,
            estimate_ms_avg: None,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Pool queries with an actual count of zero; they have no relative
    /// error and are left out of every bucket.
    pub zero_actual: usize,
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn row(&self, mechanism: BenchMechanism, param: &str, bucket: &str) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.mechanism == mechanism.name() && r.param == param && r.selectivity_bucket == bucket)
    }

    pub fn avg_error(&self, mechanism: BenchMechanism, param: &str, bucket: &str) -> Option<f64> {
        self.row(mechanism, param, bucket).and_then(|r| r.avg_rel_error)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<bench report>", e))?;
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Label of a selectivity threshold in reports.
pub fn bucket_label(threshold: f64) -> String {
    format!("{threshold}")
}

/// Parameter label of A' and Anatomy rows.
pub fn l_param(l: usize) -> String {
    format!("l={l}")
}

/// Parameter label of mechanism A rows (p = 1/l').
pub fn global_param(l: usize) -> String {
    format!("p=1/{l}")
}

/// Parameter label of Laplace rows.
pub fn laplace_param(epsilon: f64, m: usize) -> String {
    format!("eps={epsilon} m={m}")
}
