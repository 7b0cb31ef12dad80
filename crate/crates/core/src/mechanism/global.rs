use std::sync::Arc;

use num_rational::Ratio;

use super::a_prime::shuffle_rows;
use super::{draw, validate_probability};
use crate::data::{Dataset, PublishedTable, Release};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed;

/// Mechanism A: every tuple keeps its sensitive value with probability `p`
/// and otherwise takes one of the other m-1 domain values uniformly.
pub fn anonymize_global_a(dataset: &Dataset, p: Ratio<u64>, seed: u64) -> Result<PublishedTable> {
    anonymize_global_a_with(dataset, p, seed, Execution::default())
}

pub fn anonymize_global_a_with(
    dataset: &Dataset,
    p: Ratio<u64>,
    seed: u64,
    exec: Execution,
) -> Result<PublishedTable> {
    validate_probability(p)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let schema = dataset.schema();
    let mut columns = dataset.columns().to_vec();
    for &attr in schema.sensitive() {
        let m = schema.domain_size(attr);
        if m < 2 {
            return Err(Error::DomainTooSmall {
                attribute: schema.attribute(attr).name.clone(),
                domain_size: m,
                l_prime: 2,
            });
        }
        let family = seed::derive(seed, seed::GLOBAL_DRAW, attr as u64);
        let truth = dataset.column(attr);
        let ids = dataset.ids();
        columns[attr] = exec.map_range(dataset.len(), |row| {
            let t = truth[row];
            let mut rng = seed::item_rng(family, ids[row]);
            match draw(&mut rng, p, m - 1) {
                None => t,
                // j-th value of the domain with `t` removed
                Some(j) => {
                    let j = j as u32;
                    if j < t {
                        j
                    } else {
                        j + 1
                    }
                }
            }
        });
    }
    shuffle_rows(&mut columns, seed);
    PublishedTable::from_parts(
        Arc::clone(schema),
        columns,
        1,
        Release::GlobalA { p },
        seed::fingerprint(seed),
    )
}
