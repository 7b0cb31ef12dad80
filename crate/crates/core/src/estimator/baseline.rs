use num_rational::Ratio;

use super::query::{count_code, group_by_predicate, invert_global, CountQuery, ResolvedQuery};
use crate::data::PublishedTable;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mechanism::AnatomyPublication;

/// Inverts mechanism A for the count of `value` over the whole table.
pub fn estimate_global_a(d_prime: &PublishedTable, attribute: &str, value: &str, p: Ratio<u64>) -> Result<f64> {
    let schema = d_prime.schema();
    let attr = schema.require_index(attribute)?;
    if !schema.is_sensitive(attr) {
        return Err(Error::InvalidParameter(format!(
            "attribute `{attribute}` is not sensitive"
        )));
    }
    let code = schema.require_code(attr, value)?;
    invert_global(
        count_code(d_prime.column(attr), code) as f64,
        d_prime.len() as f64,
        p,
        schema.domain_size(attr),
    )
}

fn check_anatomy_query(publication: &AnatomyPublication, q: &ResolvedQuery) -> Result<u32> {
    match q.sa.as_slice() {
        &[(attr, code)] if attr == publication.sa_attr() => Ok(code),
        _ => Err(Error::Unsupported(
            "Anatomy estimates cover one value of the published sensitive attribute".into(),
        )),
    }
}

/// Per-group number of NSA rows matching `nsa`.
fn group_matches(publication: &AnatomyPublication, nsa: &[(usize, u32)]) -> Vec<usize> {
    let schema = publication.schema();
    let slots: Vec<(usize, u32)> = nsa
        .iter()
        .map(|&(a, c)| {
            let pos = schema
                .non_sensitive()
                .iter()
                .position(|&x| x == a)
                .expect("resolved predicates use non-sensitive attributes");
            (pos, c)
        })
        .collect();
    let mut counts = vec![0usize; publication.n_groups()];
    for (g, codes) in &publication.nsa_table {
        if slots.iter().all(|&(pos, c)| codes[pos] == c) {
            counts[*g] += 1;
        }
    }
    counts
}

fn combine(publication: &AnatomyPublication, matched: &[usize], code: u32) -> f64 {
    let l = publication.l() as f64;
    publication
        .sa_table
        .iter()
        .filter(|r| r.1 == code)
        .map(|&(g, _, count)| matched[g] as f64 * count as f64 / l)
        .sum()
}

/// Σ over groups of (rows matching the predicate) × (count of s) / l.
pub fn estimate_anatomy(publication: &AnatomyPublication, q: &CountQuery) -> Result<f64> {
    let q = q.resolve(publication.schema())?;
    let code = check_anatomy_query(publication, &q)?;
    Ok(combine(publication, &group_matches(publication, &q.nsa), code))
}

/// Batch form of [`estimate_anatomy`] over resolved queries.
pub fn estimate_anatomy_batch(
    publication: &AnatomyPublication,
    queries: &[ResolvedQuery],
    exec: Execution,
) -> Vec<Result<f64>> {
    let groups = group_by_predicate(queries);
    let answered = exec.map(&groups, |(nsa, _, members)| {
        let matched = group_matches(publication, nsa);
        members
            .iter()
            .map(|&i| {
                let r = check_anatomy_query(publication, &queries[i]).map(|code| combine(publication, &matched, code));
                (i, r)
            })
            .collect::<Vec<_>>()
    });
    let mut out: Vec<Option<Result<f64>>> = (0..queries.len()).map(|_| None).collect();
    for (i, r) in answered.into_iter().flatten() {
        out[i] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every query is grouped")).collect()
}
