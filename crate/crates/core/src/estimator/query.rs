use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::bayes::{iterative_bayes_with, BayesOptions};
use super::matrix::StateVector;
use crate::data::{PublishedTable, Release, Schema};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// A conjunctive count query `A1=v1 ∧ … ∧ Ad=vd ∧ S1=s1 ∧ … ∧ Sw=sw`.
///
/// JSON form (one per line in query files):
/// `{"nsa":{"age":"a03"},"sa":{"occupation":"o07"}}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CountQuery {
    #[serde(default)]
    pub nsa: BTreeMap<String, String>,
    pub sa: BTreeMap<String, String>,
}

impl CountQuery {
    pub fn new<I, J, K, V>(nsa: I, sa: J) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        J: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let collect = |it: Vec<(K, V)>| it.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
        CountQuery {
            nsa: collect(nsa.into_iter().collect()),
            sa: collect(sa.into_iter().collect()),
        }
    }

    /// Parses JSON lines, skipping blank lines.
    pub fn parse_jsonl(text: &str) -> Result<Vec<CountQuery>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<CountQuery>> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_jsonl(&text)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("string maps always serialize")
    }

    pub fn resolve(&self, schema: &Schema) -> Result<ResolvedQuery> {
        if self.sa.is_empty() {
            return Err(Error::InvalidParameter(
                "a count query needs at least one sensitive value".into(),
            ));
        }
        let lookup = |name: &str, value: &str, sensitive: bool| -> Result<(usize, u32)> {
            let attr = schema.require_index(name)?;
            if schema.is_sensitive(attr) != sensitive {
                return Err(Error::InvalidParameter(format!(
                    "attribute `{name}` is {} but is used as a {} condition",
                    if sensitive { "non-sensitive" } else { "sensitive" },
                    if sensitive { "sensitive" } else { "non-sensitive" },
                )));
            }
            Ok((attr, schema.require_code(attr, value)?))
        };
        let mut nsa = self
            .nsa
            .iter()
            .map(|(k, v)| lookup(k, v, false))
            .collect::<Result<Vec<_>>>()?;
        let mut sa = self
            .sa
            .iter()
            .map(|(k, v)| lookup(k, v, true))
            .collect::<Result<Vec<_>>>()?;
        nsa.sort_unstable();
        sa.sort_unstable();
        Ok(ResolvedQuery { nsa, sa })
    }
}

/// A [`CountQuery`] in domain codes, conditions sorted by attribute index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResolvedQuery {
    pub nsa: Vec<(usize, u32)>,
    pub sa: Vec<(usize, u32)>,
}

impl ResolvedQuery {
    pub fn w(&self) -> usize {
        self.sa.len()
    }

    pub fn to_query(&self, schema: &Schema) -> CountQuery {
        let named = |conds: &[(usize, u32)]| {
            conds
                .iter()
                .map(|&(a, c)| (schema.attribute(a).name.clone(), schema.value(a, c).to_string()))
                .collect()
        };
        CountQuery {
            nsa: named(&self.nsa),
            sa: named(&self.sa),
        }
    }
}

fn matches(columns: &[Vec<u32>], conds: &[(usize, u32)], row: usize) -> bool {
    conds.iter().all(|&(a, c)| columns[a][row] == c)
}

/// Rows matching `nsa`, and the histogram of `sa_attr` codes among them.
pub(crate) fn predicate_histogram(
    columns: &[Vec<u32>],
    nsa: &[(usize, u32)],
    sa_attr: usize,
    domain: usize,
) -> (usize, Vec<usize>) {
    let mut hist = vec![0usize; domain];
    let mut matched = 0;
    let n = columns.first().map_or(0, Vec::len);
    for row in 0..n {
        if matches(columns, nsa, row) {
            matched += 1;
            hist[columns[sa_attr][row] as usize] += 1;
        }
    }
    (matched, hist)
}

/// Counts of each conjunctive state over the rows of `columns`.
pub(crate) fn observe_columns(columns: &[Vec<u32>], q: &ResolvedQuery) -> StateVector {
    let w = q.w();
    let mut y = vec![0.0; 1 << (w + 1)];
    let n = columns.first().map_or(0, Vec::len);
    for row in 0..n {
        let mut state = matches(columns, &q.nsa, row) as usize;
        for &(a, c) in &q.sa {
            state = state << 1 | (columns[a][row] == c) as usize;
        }
        y[state] += 1.0;
    }
    StateVector::new(y).expect("length is a power of two")
}

/// The observed state vector y of `q` in the published table.
pub fn observe(d_prime: &PublishedTable, q: &ResolvedQuery) -> StateVector {
    observe_columns(d_prime.columns(), q)
}

/// f'_s: the number of published rows holding `value` for `attribute`.
pub fn estimate_sa_count(d_prime: &PublishedTable, attribute: &str, value: &str) -> Result<usize> {
    let schema = d_prime.schema();
    let attr = schema.require_index(attribute)?;
    if !schema.is_sensitive(attr) {
        return Err(Error::InvalidParameter(format!(
            "attribute `{attribute}` is not sensitive"
        )));
    }
    let code = schema.require_code(attr, value)?;
    Ok(d_prime.column(attr).iter().filter(|&&c| c == code).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEstimate {
    pub estimate: f64,
    /// Reconstruction iterations (0 when answered without iterating).
    pub iterations: usize,
    pub converged: bool,
    pub skipped: usize,
}

impl QueryEstimate {
    fn direct(estimate: f64) -> Self {
        QueryEstimate {
            estimate,
            iterations: 0,
            converged: true,
            skipped: 0,
        }
    }
}

/// Estimated count of `q` in the original data from an A' release.
pub fn estimate_query(d_prime: &PublishedTable, q: &CountQuery, tol: f64, max_iter: usize) -> Result<f64> {
    let opts = BayesOptions {
        tol,
        max_iter,
        ..BayesOptions::default()
    };
    let q = q.resolve(d_prime.schema())?;
    Ok(estimate_resolved(d_prime, &q, &opts)?.estimate)
}

/// Estimates one query. A' releases are reconstructed iteratively; mechanism
/// A releases (single sensitive condition) are inverted directly.
pub fn estimate_resolved(d_prime: &PublishedTable, q: &ResolvedQuery, opts: &BayesOptions) -> Result<QueryEstimate> {
    if q.w() == 1 {
        let (attr, code) = q.sa[0];
        let domain = d_prime.schema().domain_size(attr);
        let (matched, hist) = predicate_histogram(d_prime.columns(), &q.nsa, attr, domain);
        let counts = SingleCounts {
            n: d_prime.len(),
            matched,
            matched_s: hist[code as usize],
            f: count_code(d_prime.column(attr), code),
            whole_table: q.nsa.is_empty(),
            domain,
        };
        return single_condition(d_prime, &counts, opts);
    }
    if let Release::GlobalA { .. } = d_prime.release() {
        return Err(Error::Unsupported(
            "mechanism A estimates cover a single sensitive condition".into(),
        ));
    }
    let y = observe(d_prime, q);
    if d_prime.l_prime() == 1 {
        return Ok(QueryEstimate::direct(y.target()));
    }
    let out = iterative_bayes_with(&y, d_prime.l_prime(), d_prime.len(), q.w(), opts)?;
    Ok(QueryEstimate {
        estimate: out.x.target(),
        iterations: out.iterations,
        converged: out.converged,
        skipped: out.skipped,
    })
}

/// Estimates many queries, scanning the table once per distinct predicate
/// for single-condition queries. Results are in input order.
pub fn estimate_batch(
    d_prime: &PublishedTable,
    queries: &[ResolvedQuery],
    opts: &BayesOptions,
    exec: Execution,
) -> Vec<Result<QueryEstimate>> {
    let totals: Vec<Vec<usize>> = (0..d_prime.schema().len())
        .map(|a| {
            if d_prime.schema().is_sensitive(a) {
                d_prime.value_counts(a)
            } else {
                Vec::new()
            }
        })
        .collect();
    let groups = group_by_predicate(queries);
    let answered = exec.map(&groups, |(nsa, attr, members)| {
        let domain = d_prime.schema().domain_size(*attr);
        let (matched, hist) = predicate_histogram(d_prime.columns(), nsa, *attr, domain);
        members
            .iter()
            .map(|&i| {
                let result = match queries[i].sa.as_slice() {
                    &[(_, code)] => {
                        let counts = SingleCounts {
                            n: d_prime.len(),
                            matched,
                            matched_s: hist[code as usize],
                            f: totals[*attr][code as usize],
                            whole_table: nsa.is_empty(),
                            domain,
                        };
                        single_condition(d_prime, &counts, opts)
                    }
                    _ => estimate_resolved(d_prime, &queries[i], opts),
                };
                (i, result)
            })
            .collect::<Vec<_>>()
    });
    let mut out: Vec<Option<Result<QueryEstimate>>> = (0..queries.len()).map(|_| None).collect();
    for (i, r) in answered.into_iter().flatten() {
        out[i] = Some(r);
    }
    out.into_iter()
        .map(|r| r.expect("every query belongs to one group"))
        .collect()
}

/// (predicate, first sensitive attribute, member query positions)
pub(crate) type PredicateGroup = (Vec<(usize, u32)>, usize, Vec<usize>);

/// Queries grouped by (predicate, first sensitive attribute), in first
/// appearance order.
pub(crate) fn group_by_predicate(queries: &[ResolvedQuery]) -> Vec<PredicateGroup> {
    let mut index = HashMap::new();
    let mut groups: Vec<PredicateGroup> = Vec::new();
    for (i, q) in queries.iter().enumerate() {
        let attr = q.sa.first().map_or(0, |s| s.0);
        let slot = *index.entry((q.nsa.as_slice(), attr)).or_insert_with(|| {
            groups.push((q.nsa.clone(), attr, Vec::new()));
            groups.len() - 1
        });
        groups[slot].2.push(i);
    }
    groups
}

pub(crate) fn count_code(column: &[u32], code: u32) -> usize {
    column.iter().filter(|&&c| c == code).count()
}

/// Published counts for a single-condition query P ∧ s.
struct SingleCounts {
    n: usize,
    /// |P|
    matched: usize,
    /// |P ∧ s|
    matched_s: usize,
    /// f'_s
    f: usize,
    whole_table: bool,
    /// m, the domain size of the queried attribute
    domain: usize,
}

fn single_condition(d_prime: &PublishedTable, c: &SingleCounts, opts: &BayesOptions) -> Result<QueryEstimate> {
    match d_prime.release() {
        Release::GlobalA { p } => {
            invert_global(c.matched_s as f64, c.matched as f64, *p, c.domain).map(QueryEstimate::direct)
        }
        Release::APrime => {
            if c.whole_table {
                return Ok(QueryEstimate::direct(c.f as f64));
            }
            if d_prime.l_prime() == 1 {
                return Ok(QueryEstimate::direct(c.matched_s as f64));
            }
            let y = StateVector::new(vec![
                (c.n - c.matched - (c.f - c.matched_s)) as f64,
                (c.f - c.matched_s) as f64,
                (c.matched - c.matched_s) as f64,
                c.matched_s as f64,
            ])?;
            let out = iterative_bayes_with(&y, d_prime.l_prime(), c.n, 1, opts)?;
            Ok(QueryEstimate {
                estimate: out.x.target(),
                iterations: out.iterations,
                converged: out.converged,
                skipped: out.skipped,
            })
        }
    }
}

/// (observed - rows·q̃) / (p - q̃), clamped to [0, rows].
pub(crate) fn invert_global(observed: f64, rows: f64, p: Ratio<u64>, m: usize) -> Result<f64> {
    if m < 2 || p == Ratio::new(1, m as u64) {
        return Err(Error::InvalidParameter(format!(
            "p={p} equals 1/m for m={m}; mechanism A is not invertible"
        )));
    }
    let pf = *p.numer() as f64 / *p.denom() as f64;
    let q = (1.0 - pf) / (m as f64 - 1.0);
    Ok(((observed - rows * q) / (pf - q)).clamp(0.0, rows))
}
