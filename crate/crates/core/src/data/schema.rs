use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical attribute and its ordered domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub domain: Vec<String>,
}

/// Attribute layout of a table: which columns exist, their domains, and the
/// split between non-sensitive (published verbatim) and sensitive columns.
///
/// Values are stored as `u32` codes indexing into the attribute's domain.
#[derive(Clone, Debug)]
pub struct Schema {
    attributes: Vec<Attribute>,
    sensitive: Vec<usize>,
    non_sensitive: Vec<usize>,
    codes: Vec<HashMap<String, u32>>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.attributes == other.attributes && self.sensitive == other.sensitive
    }
}

impl Eq for Schema {}

impl Schema {
    pub fn new<S: AsRef<str>>(attributes: Vec<Attribute>, sensitive: &[S]) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut codes = Vec::with_capacity(attributes.len());
        for attr in &attributes {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{}` declared twice",
                    attr.name
                )));
            }
            if attr.domain.is_empty() {
                return Err(Error::EmptyDomain(attr.name.clone()));
            }
            if u32::try_from(attr.domain.len()).is_err() {
                return Err(Error::InvalidSchema(format!(
                    "domain of `{}` is too large",
                    attr.name
                )));
            }
            let mut map = HashMap::with_capacity(attr.domain.len());
            for (code, value) in attr.domain.iter().enumerate() {
                if map.insert(value.clone(), code as u32).is_some() {
                    return Err(Error::InvalidSchema(format!(
                        "value `{value}` repeated in the domain of `{}`",
                        attr.name
                    )));
                }
            }
            codes.push(map);
        }
        if sensitive.is_empty() {
            return Err(Error::InvalidSchema(
                "at least one sensitive attribute is required".into(),
            ));
        }
        let mut sa = Vec::with_capacity(sensitive.len());
        for name in sensitive {
            let name = name.as_ref();
            let idx = attributes
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
            if sa.contains(&idx) {
                return Err(Error::InvalidSchema(format!(
                    "sensitive attribute `{name}` listed twice"
                )));
            }
            sa.push(idx);
        }
        sa.sort_unstable();
        let non_sensitive = (0..attributes.len()).filter(|i| !sa.contains(i)).collect();
        Ok(Schema {
            attributes,
            sensitive: sa,
            non_sensitive,
            codes,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &Attribute {
        &self.attributes[index]
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Indices of the sensitive attributes, in schema order.
    pub fn sensitive(&self) -> &[usize] {
        &self.sensitive
    }

    /// Indices of the non-sensitive attributes, in schema order.
    pub fn non_sensitive(&self) -> &[usize] {
        &self.non_sensitive
    }

    pub fn is_sensitive(&self, index: usize) -> bool {
        self.sensitive.contains(&index)
    }

    pub fn sensitive_names(&self) -> Vec<String> {
        self.sensitive
            .iter()
            .map(|&i| self.attributes[i].name.clone())
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn require_index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn domain_size(&self, index: usize) -> usize {
        self.attributes[index].domain.len()
    }

    pub fn code(&self, index: usize, value: &str) -> Option<u32> {
        self.codes[index].get(value).copied()
    }

    pub fn require_code(&self, index: usize, value: &str) -> Result<u32> {
        self.code(index, value).ok_or_else(|| Error::UnknownValue {
            attribute: self.attributes[index].name.clone(),
            value: value.to_string(),
        })
    }

    pub fn value(&self, index: usize, code: u32) -> &str {
        &self.attributes[index].domain[code as usize]
    }

    /// `rank[code]` is the position of the value in lexicographic order.
    pub(crate) fn lex_ranks(&self, index: usize) -> Vec<u32> {
        let domain = &self.attributes[index].domain;
        let mut order: Vec<u32> = (0..domain.len() as u32).collect();
        order.sort_by(|&a, &b| domain[a as usize].cmp(&domain[b as usize]));
        let mut rank = vec![0u32; domain.len()];
        for (r, &code) in order.iter().enumerate() {
            rank[code as usize] = r as u32;
        }
        rank
    }
}

/// Categorical distribution used by the synthetic generator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Uniform,
    /// Weight of the k-th domain value (1-based) is proportional to k^-s.
    Zipf(f64),
}

impl Distribution {
    pub fn weights(&self, size: usize) -> Vec<f64> {
        match *self {
            Distribution::Uniform => vec![1.0; size],
            Distribution::Zipf(s) => (1..=size).map(|k| (k as f64).powf(-s)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    #[serde(default)]
    pub domain: Option<Vec<String>>,
    #[serde(default)]
    pub dist: Distribution,
}

/// JSON schema document accepted by ingestion and the synthetic generator.
///
/// ```json
/// {"attributes":[{"name":"sex","domain":["F","M"],"dist":"uniform"},
///                {"name":"disease","domain":null,"dist":{"zipf":0.5}}],
///  "sensitive":["disease"]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub attributes: Vec<AttributeSpec>,
    pub sensitive: Vec<String>,
}

impl SchemaConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema config serializes")
    }

    /// Builds the schema; every attribute must carry a declared domain.
    pub fn to_schema(&self) -> Result<Schema> {
        let attributes = self
            .attributes
            .iter()
            .map(|spec| match &spec.domain {
                Some(domain) => Ok(Attribute {
                    name: spec.name.clone(),
                    domain: domain.clone(),
                }),
                None => Err(Error::EmptyDomain(spec.name.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        Schema::new(attributes, &self.sensitive)
    }

    /// Config with fully declared domains (uniform distributions).
    pub fn from_schema(schema: &Schema) -> Self {
        SchemaConfig {
            attributes: schema
                .attributes()
                .iter()
                .map(|a| AttributeSpec {
                    name: a.name.clone(),
                    domain: Some(a.domain.clone()),
                    dist: Distribution::Uniform,
                })
                .collect(),
            sensitive: schema.sensitive_names(),
        }
    }

    /// A census-shaped schema: seven demographic non-sensitive attributes and
    /// an `occupation` sensitive attribute with 50 values under a mild Zipf
    /// skew (top value about 7.8% of tuples, eligible up to l' = 12).
    pub fn census_like() -> Self {
        fn spec(name: &str, prefix: &str, size: usize, dist: Distribution) -> AttributeSpec {
            AttributeSpec {
                name: name.to_string(),
                domain: Some((0..size).map(|i| format!("{prefix}{i:02}")).collect()),
                dist,
            }
        }
        SchemaConfig {
            attributes: vec![
                spec("age", "a", 10, Distribution::Zipf(0.3)),
                spec("sex", "s", 2, Distribution::Uniform),
                spec("race", "r", 5, Distribution::Zipf(1.5)),
                spec("marital", "m", 6, Distribution::Zipf(0.8)),
                spec("education", "e", 16, Distribution::Zipf(0.6)),
                spec("birthplace", "b", 10, Distribution::Zipf(2.0)),
                spec("workclass", "w", 8, Distribution::Zipf(1.0)),
                spec("occupation", "o", 50, Distribution::Zipf(0.5)),
            ],
            sensitive: vec!["occupation".to_string()],
        }
    }
}
