use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::CountQuery;
use crate::seed;

/// Largest number of non-sensitive conjuncts in a generated predicate.
pub const MAX_ARITY: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPool {
    pub queries: Vec<CountQuery>,
    pub seed: u64,
    pub pool_size: usize,
}

impl QueryPool {
    pub fn to_jsonl(&self) -> String {
        self.queries.iter().map(|q| q.to_json_line() + "\n").collect()
    }
}

/// Random predicates over the non-sensitive attributes, each crossed with
/// every value of every sensitive attribute until `pool_size` queries exist.
///
/// A predicate uses 1..=min(3, #NSA) distinct attributes chosen uniformly;
/// its values are read off one uniformly drawn row, so they follow the
/// empirical distribution of the data and the predicate is never empty.
pub fn generate_pool(dataset: &Dataset, pool_size: usize, seed: u64) -> Result<QueryPool> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let schema = dataset.schema();
    let sa_values: Vec<(String, String)> = schema
        .sensitive()
        .iter()
        .flat_map(|&a| {
            let attr = schema.attribute(a);
            attr.domain.iter().map(|v| (attr.name.clone(), v.clone()))
        })
        .collect();
    if pool_size < sa_values.len() {
        return Err(Error::InvalidParameter(format!(
            "pool size {pool_size} is smaller than the {} sensitive values it must cover",
            sa_values.len()
        )));
    }
    let nsa = schema.non_sensitive();
    let max_arity = nsa.len().min(MAX_ARITY);
    let mut rng = seed::rng(seed, seed::POOL, 0);
    let mut seen = HashSet::new();
    let mut queries = Vec::with_capacity(pool_size);
    while queries.len() < pool_size {
        let mut predicate = Vec::new();
        for _attempt in 0..100 {
            predicate.clear();
            if max_arity > 0 {
                let arity = rng.random_range(1..=max_arity);
                let row = rng.random_range(0..dataset.len());
                let mut attrs: Vec<usize> = sample(&mut rng, nsa.len(), arity)
                    .into_iter()
                    .map(|i| nsa[i])
                    .collect();
                attrs.sort_unstable();
                predicate.extend(attrs.into_iter().map(|a| {
                    (schema.attribute(a).name.clone(), dataset.value(row, a).to_string())
                }));
            }
            if seen.insert(predicate.clone()) {
                break;
            }
        }
        for (name, value) in &sa_values {
            if queries.len() == pool_size {
                break;
            }
            queries.push(CountQuery::new(
                predicate.iter().cloned(),
                [(name.clone(), value.clone())],
            ));
        }
    }
    Ok(QueryPool {
        queries,
        seed,
        pool_size,
    })
}
