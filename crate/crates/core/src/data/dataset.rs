use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;

use super::schema::Schema;
use crate::error::{Error, Result};
use crate::seed;

/// The original microdata table, stored column-wise as domain codes.
///
/// Row `i` carries tuple id `ids[i]`; ids are unique and, when produced by
/// this crate, a seeded permutation of `0..N` independent of tuple contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    schema: Arc<Schema>,
    ids: Vec<u64>,
    columns: Vec<Vec<u32>>,
}

/// Tuple ids for `n` rows: a permutation of `0..n` that depends only on
/// `(seed, n)`.
pub fn assign_ids(seed: u64, n: usize) -> Vec<u64> {
    let mut ids: Vec<u64> = (0..n as u64).collect();
    ids.shuffle(&mut seed::rng(seed, seed::IDS, n as u64));
    ids
}

impl Dataset {
    pub fn new(schema: Arc<Schema>, ids: Vec<u64>, columns: Vec<Vec<u32>>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} columns, got {}",
                schema.len(),
                columns.len()
            )));
        }
        for (attr, col) in columns.iter().enumerate() {
            if col.len() != ids.len() {
                return Err(Error::InvalidParameter(format!(
                    "column `{}` has {} values for {} ids",
                    schema.attribute(attr).name,
                    col.len(),
                    ids.len()
                )));
            }
            let size = schema.domain_size(attr) as u32;
            if let Some(row) = col.iter().position(|&c| c >= size) {
                return Err(Error::DomainViolation {
                    row: row + 1,
                    column: schema.attribute(attr).name.clone(),
                    value: format!("#{}", col[row]),
                });
            }
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::InvalidParameter(format!("duplicate tuple id {dup}")));
        }
        Ok(Dataset {
            schema,
            ids,
            columns,
        })
    }

    /// Builds a dataset from string rows (values in schema order), assigning
    /// seeded ids.
    pub fn from_rows<R, S>(schema: Arc<Schema>, rows: &[R], id_seed: u64) -> Result<Self>
    where
        R: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut columns = vec![Vec::with_capacity(rows.len()); schema.len()];
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != schema.len() {
                return Err(Error::InvalidParameter(format!(
                    "row {} has {} values, schema has {} attributes",
                    r + 1,
                    row.len(),
                    schema.len()
                )));
            }
            for (attr, value) in row.iter().enumerate() {
                let value = value.as_ref();
                let code = schema
                    .code(attr, value)
                    .ok_or_else(|| Error::DomainViolation {
                        row: r + 1,
                        column: schema.attribute(attr).name.clone(),
                        value: value.to_string(),
                    })?;
                columns[attr].push(code);
            }
        }
        let ids = assign_ids(id_seed, rows.len());
        Dataset::new(schema, ids, columns)
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn column(&self, attr: usize) -> &[u32] {
        &self.columns[attr]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn code(&self, row: usize, attr: usize) -> u32 {
        self.columns[attr][row]
    }

    pub fn value(&self, row: usize, attr: usize) -> &str {
        self.schema.value(attr, self.columns[attr][row])
    }

    /// Values of row `row` in schema order.
    pub fn row_values(&self, row: usize) -> Vec<&str> {
        (0..self.schema.len()).map(|a| self.value(row, a)).collect()
    }

    /// Codes of the non-sensitive attributes of row `row`.
    pub fn nsa_key(&self, row: usize) -> Vec<u32> {
        self.schema
            .non_sensitive()
            .iter()
            .map(|&a| self.columns[a][row])
            .collect()
    }

    /// Frequency of every domain value of attribute `attr`, indexed by code.
    pub fn value_counts(&self, attr: usize) -> Vec<usize> {
        let mut counts = vec![0usize; self.schema.domain_size(attr)];
        for &c in &self.columns[attr] {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Row index for every id, indexed by id (`None` for ids not present).
    pub fn row_index_by_id(&self) -> Vec<Option<u32>> {
        let max = self.ids.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut index = vec![None; max];
        for (row, &id) in self.ids.iter().enumerate() {
            index[id as usize] = Some(row as u32);
        }
        index
    }

    /// Copy restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: Arc::clone(&self.schema),
            ids: rows.iter().map(|&r| self.ids[r]).collect(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
        }
    }

    /// Copy with the given columns replaced; used to build neighbouring
    /// databases in tests and oracles.
    pub fn with_columns(&self, columns: Vec<Vec<u32>>) -> Result<Dataset> {
        Dataset::new(Arc::clone(&self.schema), self.ids.clone(), columns)
    }
}
