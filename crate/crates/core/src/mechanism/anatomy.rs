use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;

use super::a_prime::{check_domains, check_eligible, decoy_partitions};
use crate::data::{Dataset, Schema};
use crate::error::{Error, Result};
use crate::seed;

/// Anatomy-style release: exact sensitive counts per group, joined to the
/// non-sensitive rows only through the group id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnatomyPublication {
    schema: Arc<Schema>,
    l: usize,
    sa_attr: usize,
    /// (group id, non-sensitive codes in schema order)
    pub nsa_table: Vec<(usize, Vec<u32>)>,
    /// (group id, sensitive code, count)
    pub sa_table: Vec<(usize, u32, usize)>,
}

impl AnatomyPublication {
    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn sa_attr(&self) -> usize {
        self.sa_attr
    }

    pub fn n_groups(&self) -> usize {
        self.sa_table.iter().map(|r| r.0 + 1).max().unwrap_or(0)
    }

    /// Writes the NSA table (`group_id` then the NSA columns).
    pub fn write_nsa_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let nsa = self.schema.non_sensitive();
        let mut header = vec!["group_id".to_string()];
        header.extend(nsa.iter().map(|&a| self.schema.attribute(a).name.clone()));
        w.write_record(&header)?;
        for (g, codes) in &self.nsa_table {
            let mut rec = vec![g.to_string()];
            rec.extend(
                nsa.iter()
                    .zip(codes)
                    .map(|(&a, &c)| self.schema.value(a, c).to_string()),
            );
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<anatomy nsa>", e))?;
        Ok(())
    }

    /// Writes the SA table (`group_id,sa_value,count`).
    pub fn write_sa_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["group_id", "sa_value", "count"])?;
        for &(g, code, count) in &self.sa_table {
            w.write_record([
                g.to_string(),
                self.schema.value(self.sa_attr, code).to_string(),
                count.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<anatomy sa>", e))?;
        Ok(())
    }
}

/// Anatomy over the same deterministic partition A' uses. Supports a single
/// sensitive attribute.
pub fn anonymize_anatomy(dataset: &Dataset, l: usize, seed: u64) -> Result<AnatomyPublication> {
    let schema = dataset.schema();
    if schema.sensitive().len() != 1 {
        return Err(Error::Unsupported(
            "Anatomy publishes a single sensitive attribute".into(),
        ));
    }
    let sa_attr = schema.sensitive()[0];
    check_domains(schema, l)?;
    check_eligible(dataset, l)?;
    let partition = decoy_partitions(dataset, l)?.remove(0);
    let row_of = dataset.row_index_by_id();

    let mut nsa_table = Vec::with_capacity(dataset.len());
    let mut sa_table = Vec::with_capacity(dataset.len());
    for (g, group) in partition.groups().iter().enumerate() {
        let mut values: Vec<u32> = group.iter().map(|&(_, v)| v).collect();
        values.sort_by(|&a, &b| schema.value(sa_attr, a).cmp(schema.value(sa_attr, b)));
        // values within a group are distinct, so each count is 1
        sa_table.extend(values.into_iter().map(|v| (g, v, 1)));
        for &(id, _) in group {
            let row = row_of[id as usize].expect("partition ids come from the dataset") as usize;
            nsa_table.push((g, dataset.nsa_key(row)));
        }
    }
    nsa_table.shuffle(&mut seed::rng(seed, seed::ANATOMY, 0));
    Ok(AnatomyPublication {
        schema: Arc::clone(schema),
        l,
        sa_attr,
        nsa_table,
        sa_table,
    })
}
