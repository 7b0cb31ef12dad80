use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use super::{validate_probability, MechanismKind, RandomizerConfig};
use crate::data::{Dataset, PublishedTable};
use crate::error::{Error, Result};
use crate::partition::DecoyPartition;

fn big(r: Ratio<u64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// For each row of `dataset`, the row of `d_hat` with the same
/// non-sensitive values.
fn match_rows(dataset: &Dataset, d_hat: &PublishedTable) -> Result<Vec<usize>> {
    if dataset.schema() != d_hat.schema() {
        return Err(Error::InvalidParameter(
            "published table and dataset have different schemas".into(),
        ));
    }
    if dataset.len() != d_hat.len() {
        return Err(Error::InvalidParameter(format!(
            "published table has {} rows, dataset has {}",
            d_hat.len(),
            dataset.len()
        )));
    }
    let nsa = dataset.schema().non_sensitive();
    let published: Vec<&[u32]> = nsa.iter().map(|&c| d_hat.column(c)).collect();
    let original: Vec<&[u32]> = nsa.iter().map(|&c| dataset.column(c)).collect();
    let by_published = sorted_by_key(&published, d_hat.len());
    let by_original = sorted_by_key(&original, dataset.len());
    if let Some(row) = repeated_key(&published, &by_published) {
        return Err(Error::AmbiguousMatch(format!(
            "published row {row} repeats non-sensitive values"
        )));
    }
    if let Some(row) = repeated_key(&original, &by_original) {
        return Err(Error::AmbiguousMatch(format!(
            "dataset row {row} repeats non-sensitive values"
        )));
    }
    let mut target = vec![0; dataset.len()];
    for (&row, &out) in by_original.iter().zip(&by_published) {
        if original.iter().zip(&published).any(|(o, p)| o[row] != p[out]) {
            return Err(Error::AmbiguousMatch(format!(
                "dataset row {row} has no published counterpart"
            )));
        }
        target[row] = out;
    }
    Ok(target)
}

fn sorted_by_key(columns: &[&[u32]], len: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..len).collect();
    rows.sort_by(|&a, &b| columns.iter().map(|c| c[a]).cmp(columns.iter().map(|c| c[b])));
    rows
}

fn repeated_key(columns: &[&[u32]], order: &[usize]) -> Option<usize> {
    order
        .windows(2)
        .find(|pair| columns.iter().all(|c| c[pair[0]] == c[pair[1]]))
        .map(|pair| pair[1])
}

/// `p^kept * q^moved` with a single normalization.
fn product(p: &BigRational, q: &BigRational, kept: usize, moved: usize) -> BigRational {
    let numer = num_traits::pow(p.numer().clone(), kept) * num_traits::pow(q.numer().clone(), moved);
    let denom = num_traits::pow(p.denom().clone(), kept) * num_traits::pow(q.denom().clone(), moved);
    BigRational::new(numer, denom)
}

/// Exact probability that A' assigns `d_hat`'s sensitive values to the
/// tuples of `dataset`, given decoy partitions (one per sensitive attribute).
/// Rows are matched by their non-sensitive values; row order is ignored.
pub fn output_probability(
    dataset: &Dataset,
    cfg: &RandomizerConfig,
    d_hat: &PublishedTable,
    partitions: &[DecoyPartition<u32>],
) -> Result<BigRational> {
    if cfg.mechanism != MechanismKind::APrime {
        return Err(Error::InvalidParameter(
            "output_probability expects an A' configuration".into(),
        ));
    }
    let p = cfg.retention()?;
    let sensitive = dataset.schema().sensitive();
    if partitions.len() != sensitive.len() {
        return Err(Error::InvalidParameter(format!(
            "{} partitions for {} sensitive attributes",
            partitions.len(),
            sensitive.len()
        )));
    }
    let l = cfg.l_prime;
    let q = if l > 1 {
        big((Ratio::from_integer(1) - p) / Ratio::from_integer(l as u64 - 1))
    } else {
        BigRational::zero()
    };
    let p = big(p);
    let target = match_rows(dataset, d_hat)?;
    let ids = dataset.ids();

    let (mut kept, mut moved) = (0, 0);
    for (&attr, part) in sensitive.iter().zip(partitions) {
        let truth = dataset.column(attr);
        let out = d_hat.column(attr);
        let mut index: Vec<(u64, usize)> = part
            .groups()
            .iter()
            .enumerate()
            .flat_map(|(g, members)| members.iter().map(move |(id, _)| (*id, g)))
            .collect();
        index.sort_unstable();
        for row in 0..dataset.len() {
            let id = ids[row];
            let group = index
                .binary_search_by_key(&id, |&(i, _)| i)
                .map(|pos| index[pos].1)
                .map_err(|_| Error::UnknownId(id))?;
            let published = out[target[row]];
            if published == truth[row] {
                kept += 1;
            } else if part.decoys(group).any(|&v| v == published) {
                moved += 1;
            } else {
                return Ok(BigRational::zero());
            }
        }
    }
    Ok(product(&p, &q, kept, moved))
}

/// Exact probability that mechanism A with retention `p` assigns `d_hat`'s
/// sensitive values to the tuples of `dataset`.
pub fn output_probability_global_a(
    dataset: &Dataset,
    p: Ratio<u64>,
    d_hat: &PublishedTable,
) -> Result<BigRational> {
    validate_probability(p)?;
    let target = match_rows(dataset, d_hat)?;
    let schema = dataset.schema();
    let mut out = BigRational::one();
    for &attr in schema.sensitive() {
        let m = schema.domain_size(attr) as u64;
        let q = if m > 1 {
            big((Ratio::from_integer(1) - p) / Ratio::from_integer(m - 1))
        } else {
            BigRational::zero()
        };
        let truth = dataset.column(attr);
        let published = d_hat.column(attr);
        let kept = (0..dataset.len())
            .filter(|&row| published[target[row]] == truth[row])
            .count();
        out *= product(&big(p), &q, kept, dataset.len() - kept);
    }
    Ok(out)
}
