use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;

use super::dataset::{assign_ids, Dataset};
use super::schema::{Distribution, Schema, SchemaConfig};
use crate::error::{Error, Result};
use crate::seed;

/// Draws `n` tuples with independent attributes from the per-attribute
/// distributions in `config`. Deterministic for a fixed seed.
pub fn generate_synthetic(n: usize, config: &SchemaConfig, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let schema = Arc::new(config.to_schema()?);
    let columns = config
        .attributes
        .iter()
        .enumerate()
        .map(|(attr, spec)| sample_column(&schema, attr, spec.dist, n, seed))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(schema, assign_ids(seed, n), columns)
}

fn sample_column(
    schema: &Schema,
    attr: usize,
    dist: Distribution,
    n: usize,
    seed: u64,
) -> Result<Vec<u32>> {
    let size = schema.domain_size(attr);
    let mut rng = seed::rng(seed, seed::GENERATE, attr as u64);
    match dist {
        Distribution::Uniform => Ok((0..n).map(|_| rng.random_range(0..size as u32)).collect()),
        Distribution::Zipf(s) => {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "zipf exponent for `{}` must be finite and non-negative",
                    schema.attribute(attr).name
                )));
            }
            let index = WeightedIndex::new(dist.weights(size))
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok((0..n).map(|_| index.sample(&mut rng) as u32).collect())
        }
    }
}
