//! Ground truth from the original dataset. Only selectivity and actual
//! counts are computed here; estimators never see a `Dataset`.

use crate::data::Dataset;
use crate::error::Result;
use crate::estimator::{group_by_predicate, observe_columns, predicate_histogram, CountQuery, ResolvedQuery};
use crate::exec::Execution;

/// The number of tuples of `dataset` satisfying `q`.
pub fn actual_count(dataset: &Dataset, q: &CountQuery) -> Result<usize> {
    let q = q.resolve(dataset.schema())?;
    Ok(observe_columns(dataset.columns(), &q).target() as usize)
}

/// Fraction of the tuples of `dataset` satisfying `q`.
pub fn selectivity(dataset: &Dataset, q: &CountQuery) -> Result<f64> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    Ok(actual_count(dataset, q)? as f64 / dataset.len() as f64)
}

/// Actual counts for many queries, one scan per distinct predicate.
pub fn actual_counts(dataset: &Dataset, queries: &[ResolvedQuery], exec: Execution) -> Vec<usize> {
    let groups = group_by_predicate(queries);
    let answered = exec.map(&groups, |(nsa, attr, members)| {
        let domain = dataset.schema().domain_size(*attr);
        let (_, hist) = predicate_histogram(dataset.columns(), nsa, *attr, domain);
        members
            .iter()
            .map(|&i| match queries[i].sa.as_slice() {
                &[(_, code)] => (i, hist[code as usize]),
                _ => (i, observe_columns(dataset.columns(), &queries[i]).target() as usize),
            })
            .collect::<Vec<_>>()
    });
    let mut out = vec![0; queries.len()];
    for (i, c) in answered.into_iter().flatten() {
        out[i] = c;
    }
    out
}
