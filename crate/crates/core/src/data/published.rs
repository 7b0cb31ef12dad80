use std::path::Path;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::schema::{Attribute, Schema};
use crate::error::{Error, Result};

/// Which randomizer produced a published table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Release {
    /// Decoy-group randomization; the table's `l_prime` is the group size.
    APrime,
    /// Whole-domain randomized response with retention probability `p`.
    GlobalA { p: Ratio<u64> },
}

/// The sanitized table D' together with the public parameter l'.
///
/// Rows carry no ids and the type holds no partition information.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublishedTable {
    schema: Arc<Schema>,
    columns: Vec<Vec<u32>>,
    l_prime: usize,
    release: Release,
    seed_fingerprint: String,
}

impl PublishedTable {
    /// A table assembled by hand, e.g. a candidate output for the
    /// probability oracle.
    pub fn new(
        schema: Arc<Schema>,
        columns: Vec<Vec<u32>>,
        l_prime: usize,
        release: Release,
    ) -> Result<Self> {
        Self::from_parts(schema, columns, l_prime, release, String::new())
    }

    pub(crate) fn from_parts(
        schema: Arc<Schema>,
        columns: Vec<Vec<u32>>,
        l_prime: usize,
        release: Release,
        seed_fingerprint: String,
    ) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::InvalidParameter(format!(
                "published table has {} columns, schema has {}",
                columns.len(),
                schema.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidParameter("ragged published columns".into()));
        }
        if l_prime == 0 {
            return Err(Error::InvalidParameter("l' must be at least 1".into()));
        }
        Ok(PublishedTable {
            schema,
            columns,
            l_prime,
            release,
            seed_fingerprint,
        })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn l_prime(&self) -> usize {
        self.l_prime
    }

    pub fn release(&self) -> &Release {
        &self.release
    }

    pub fn column(&self, attr: usize) -> &[u32] {
        &self.columns[attr]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn value(&self, row: usize, attr: usize) -> &str {
        self.schema.value(attr, self.columns[attr][row])
    }

    pub fn nsa_key(&self, row: usize) -> Vec<u32> {
        self.schema
            .non_sensitive()
            .iter()
            .map(|&a| self.columns[a][row])
            .collect()
    }

    pub fn value_counts(&self, attr: usize) -> Vec<usize> {
        let mut counts = vec![0usize; self.schema.domain_size(attr)];
        for &c in &self.columns[attr] {
            counts[c as usize] += 1;
        }
        counts
    }

    pub fn meta(&self) -> PublicationMeta {
        PublicationMeta {
            l_prime: self.l_prime,
            sensitive: self.schema.sensitive_names(),
            seed_fingerprint: self.seed_fingerprint.clone(),
            mechanism: self.release.clone(),
            attributes: self.schema.attributes().to_vec(),
        }
    }
}

/// Sidecar JSON written next to a published CSV. Carries the public
/// parameter l', the attribute domains, and a seed fingerprint; never any
/// partition data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationMeta {
    pub l_prime: usize,
    pub sensitive: Vec<String>,
    pub seed_fingerprint: String,
    pub mechanism: Release,
    pub attributes: Vec<Attribute>,
}

impl PublicationMeta {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
