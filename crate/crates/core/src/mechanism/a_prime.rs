use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::SliceRandom;

use super::{draw, RandomizerConfig};
use crate::data::{is_eligible, Dataset, PublishedTable, Release, Schema};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::partition::{partition, DecoyPartition};
use crate::seed;

/// Decoy partitions of `dataset`, one per sensitive attribute (schema
/// order), with values as domain codes. Bucket ties are broken by the
/// lexicographic order of the value strings.
pub fn decoy_partitions(dataset: &Dataset, l_prime: usize) -> Result<Vec<DecoyPartition<u32>>> {
    let schema = dataset.schema();
    schema
        .sensitive()
        .iter()
        .map(|&attr| {
            let rank = schema.lex_ranks(attr);
            let mut unrank = vec![0u32; rank.len()];
            for (code, &r) in rank.iter().enumerate() {
                unrank[r as usize] = code as u32;
            }
            let rows: Vec<(u64, u32)> = dataset
                .ids()
                .iter()
                .zip(dataset.column(attr))
                .map(|(&id, &code)| (id, rank[code as usize]))
                .collect();
            Ok(partition(&rows, l_prime)?.map_values(|r| unrank[r as usize]))
        })
        .collect()
}

pub(crate) fn check_domains(schema: &Schema, l_prime: usize) -> Result<()> {
    for &attr in schema.sensitive() {
        let size = schema.domain_size(attr);
        if l_prime > size {
            return Err(Error::DomainTooSmall {
                attribute: schema.attribute(attr).name.clone(),
                domain_size: size,
                l_prime,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_eligible(dataset: &Dataset, l_prime: usize) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !is_eligible(dataset, l_prime) {
        return Err(Error::Ineligible {
            l_prime,
            reason: format!(
                "N={} must be a multiple of l' and no sensitive value may exceed N/l'",
                dataset.len()
            ),
        });
    }
    Ok(())
}

/// Mechanism A' with its deterministic partitioning done once, so that many
/// releases (different seeds) can be drawn from the same dataset.
#[derive(Clone, Debug)]
pub struct DecoyRandomizer<'a> {
    dataset: &'a Dataset,
    l_prime: usize,
    p: Ratio<u64>,
    partitions: Vec<DecoyPartition<u32>>,
    row_of: Vec<Option<u32>>,
}

impl<'a> DecoyRandomizer<'a> {
    pub fn new(dataset: &'a Dataset, l_prime: usize, p: Ratio<u64>) -> Result<Self> {
        check_domains(dataset.schema(), l_prime)?;
        check_eligible(dataset, l_prime)?;
        let partitions = decoy_partitions(dataset, l_prime)?;
        Ok(DecoyRandomizer {
            dataset,
            l_prime,
            p,
            partitions,
            row_of: dataset.row_index_by_id(),
        })
    }

    pub fn from_config(dataset: &'a Dataset, cfg: &RandomizerConfig) -> Result<Self> {
        Self::new(dataset, cfg.l_prime, cfg.retention()?)
    }

    pub fn partitions(&self) -> &[DecoyPartition<u32>] {
        &self.partitions
    }

    /// Randomized sensitive column for attribute slot `k`, aligned with the
    /// dataset's rows (not yet shuffled).
    fn randomize_column(&self, k: usize, attr: usize, seed: u64, exec: Execution) -> Vec<u32> {
        let family = seed::derive(seed, seed::SA_DRAW, attr as u64);
        let groups = self.partitions[k].groups();
        let drawn: Vec<Vec<(u32, u32)>> = exec.map(groups, |group| {
            group
                .iter()
                .map(|&(id, truth)| {
                    let mut rng = seed::item_rng(family, id);
                    let value = match draw(&mut rng, self.p, group.len() - 1) {
                        None => truth,
                        Some(j) => {
                            group
                                .iter()
                                .map(|&(_, v)| v)
                                .filter(|&v| v != truth)
                                .nth(j)
                                .expect("alternative index in range")
                        }
                    };
                    let row = self.row_of[id as usize].expect("partition ids come from the dataset");
                    (row, value)
                })
                .collect()
        });
        let mut column = vec![0u32; self.dataset.len()];
        for (row, value) in drawn.into_iter().flatten() {
            column[row as usize] = value;
        }
        column
    }

    /// Draws one release.
    pub fn publish(&self, seed: u64, exec: Execution) -> PublishedTable {
        let schema = self.dataset.schema();
        let mut columns: Vec<Vec<u32>> = self.dataset.columns().to_vec();
        for (k, &attr) in schema.sensitive().iter().enumerate() {
            columns[attr] = self.randomize_column(k, attr, seed, exec);
        }
        shuffle_rows(&mut columns, seed);
        PublishedTable::from_parts(
            Arc::clone(schema),
            columns,
            self.l_prime,
            Release::APrime,
            seed::fingerprint(seed),
        )
        .expect("columns mirror the dataset layout")
    }

    /// Count of `code` in the randomized column of sensitive slot `k`,
    /// without materializing a table. Used by Monte Carlo checks.
    pub fn published_count(&self, k: usize, code: u32, seed: u64) -> usize {
        let attr = self.dataset.schema().sensitive()[k];
        self.randomize_column(k, attr, seed, Execution::Sequential)
            .iter()
            .filter(|&&c| c == code)
            .count()
    }
}

/// Fisher-Yates shuffle of whole rows, from a stream dedicated to `seed`.
pub(crate) fn shuffle_rows(columns: &mut [Vec<u32>], seed: u64) {
    let n = columns.first().map_or(0, Vec::len);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut seed::rng(seed, seed::SHUFFLE, 0));
    for col in columns.iter_mut() {
        *col = order.iter().map(|&r| col[r as usize]).collect();
    }
}

/// Publishes `dataset` under A'.
pub fn anonymize_a_prime(dataset: &Dataset, cfg: &RandomizerConfig) -> Result<PublishedTable> {
    anonymize_a_prime_with(dataset, cfg, Execution::default())
}

pub fn anonymize_a_prime_with(
    dataset: &Dataset,
    cfg: &RandomizerConfig,
    exec: Execution,
) -> Result<PublishedTable> {
    Ok(DecoyRandomizer::from_config(dataset, cfg)?.publish(cfg.seed, exec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Attribute, Schema};

    fn dataset(nsa: &[&str], sa: &[&str], sa_domain: &[&str]) -> Dataset {
        let schema = Arc::new(
            Schema::new(
                vec![
                    Attribute {
                        name: "name".into(),
                        domain: nsa.iter().map(|s| s.to_string()).collect(),
                    },
                    Attribute {
                        name: "disease".into(),
                        domain: sa_domain.iter().map(|s| s.to_string()).collect(),
                    },
                ],
                &["disease"],
            )
            .unwrap(),
        );
        let rows: Vec<[&str; 2]> = nsa.iter().zip(sa).map(|(a, b)| [*a, *b]).collect();
        Dataset::from_rows(schema, &rows, 11).unwrap()
    }

    fn sorted_nsa(cols: &[Vec<u32>]) -> Vec<u32> {
        let mut v = cols[0].clone();
        v.sort_unstable();
        v
    }

    #[test]
    fn published_values_stay_in_decoy_groups() {
        let d = dataset(
            &["n0", "n1", "n2", "n3", "n4", "n5"],
            &["a", "a", "b", "b", "c", "c"],
            &["a", "b", "c", "d"],
        );
        let r = DecoyRandomizer::new(&d, 2, Ratio::new(1, 2)).unwrap();
        let groups = r.partitions()[0].group_index();
        for seed in 0..50 {
            let t = r.publish(seed, Execution::Sequential);
            assert_eq!(t.len(), 6);
            assert_eq!(sorted_nsa(t.columns()), sorted_nsa(d.columns()));
            for row in 0..t.len() {
                // NSA values are unique, so locate the source tuple
                let src = (0..d.len()).find(|&s| d.code(s, 0) == t.column(0)[row]).unwrap();
                let g = groups[&d.ids()[src]];
                let decoys: Vec<u32> = r.partitions()[0].decoys(g).copied().collect();
                assert!(decoys.contains(&t.column(1)[row]));
            }
        }
    }

    #[test]
    fn l_prime_one_is_a_shuffle() {
        let d = dataset(&["n0", "n1", "n2"], &["a", "b", "a"], &["a", "b"]);
        let t = anonymize_a_prime(&d, &RandomizerConfig::a_prime(1, 3)).unwrap();
        let mut pub_rows: Vec<(u32, u32)> =
            (0..3).map(|r| (t.column(0)[r], t.column(1)[r])).collect();
        let mut src_rows: Vec<(u32, u32)> = (0..3).map(|r| (d.code(r, 0), d.code(r, 1))).collect();
        pub_rows.sort_unstable();
        src_rows.sort_unstable();
        assert_eq!(pub_rows, src_rows);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let d = dataset(
            &["n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7"],
            &["a", "b", "c", "d", "a", "b", "c", "d"],
            &["a", "b", "c", "d"],
        );
        let cfg = RandomizerConfig::a_prime(4, 99);
        let seq = anonymize_a_prime_with(&d, &cfg, Execution::Sequential).unwrap();
        let par = anonymize_a_prime_with(&d, &cfg, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, anonymize_a_prime(&d, &cfg).unwrap());
    }

    #[test]
    fn errors() {
        let d = dataset(&["n0", "n1", "n2", "n3"], &["a", "a", "a", "b"], &["a", "b"]);
        assert!(matches!(
            anonymize_a_prime(&d, &RandomizerConfig::a_prime(2, 0)),
            Err(Error::Ineligible { .. })
        ));
        assert!(matches!(
            anonymize_a_prime(&d, &RandomizerConfig::a_prime(3, 0)),
            Err(Error::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn output_carries_l_prime_and_no_seed() {
        let d = dataset(&["n0", "n1"], &["a", "b"], &["a", "b"]);
        let t = anonymize_a_prime(&d, &RandomizerConfig::a_prime(2, 12345)).unwrap();
        let meta = t.meta().to_json_string();
        assert!(meta.contains("\"l_prime\": 2"));
        assert!(!meta.contains("12345"));
        assert!(!meta.contains("group") && !meta.contains("partition"));
    }
}
