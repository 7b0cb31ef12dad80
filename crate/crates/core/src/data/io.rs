//! CSV ingestion and emission.
//!
//! Files are UTF-8, comma separated, with a header row of attribute names.
//! Values are category tokens compared by exact string equality.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::dataset::{assign_ids, Dataset};
use super::published::{PublicationMeta, PublishedTable};
use super::schema::{Attribute, Schema, SchemaConfig};
use crate::error::{Error, Result};

/// Reads a dataset from CSV. Ids are assigned by [`assign_ids`] from
/// `id_seed`; domains left open in `config` are inferred from the data and
/// sorted lexicographically.
pub fn ingest_csv(path: impl AsRef<Path>, config: &SchemaConfig, id_seed: u64) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, config, id_seed)
}

pub fn read_dataset<R: Read>(reader: R, config: &SchemaConfig, id_seed: u64) -> Result<Dataset> {
    let names: Vec<&str> = config.attributes.iter().map(|a| a.name.as_str()).collect();
    let (cells, n_rows) = read_cells(reader, &names)?;

    let mut attributes = Vec::with_capacity(names.len());
    for (spec, column) in config.attributes.iter().zip(&cells) {
        let domain = match &spec.domain {
            Some(d) => d.clone(),
            None => column
                .iter()
                .map(String::as_str)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(str::to_string)
                .collect(),
        };
        attributes.push(Attribute {
            name: spec.name.clone(),
            domain,
        });
    }
    let schema = Arc::new(Schema::new(attributes, &config.sensitive)?);
    let columns = encode(&schema, &cells)?;
    Dataset::new(schema, assign_ids(id_seed, n_rows), columns)
}

/// Writes all attributes in schema order.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let schema = dataset.schema();
    let order: Vec<usize> = (0..schema.len()).collect();
    write_columns(writer, schema, &order, dataset.columns())
}

pub fn write_dataset_file(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, file)
}

/// Writes the published rows: non-sensitive columns first, then sensitive
/// columns, each group in schema order. No ids, no partition data.
pub fn write_published<W: Write>(table: &PublishedTable, writer: W) -> Result<()> {
    let schema = table.schema();
    let order: Vec<usize> = schema
        .non_sensitive()
        .iter()
        .chain(schema.sensitive())
        .copied()
        .collect();
    write_columns(writer, schema, &order, table.columns())
}

/// Reads a published CSV back using the attribute domains in its sidecar.
pub fn read_published<R: Read>(reader: R, meta: &PublicationMeta) -> Result<PublishedTable> {
    let schema = Arc::new(Schema::new(meta.attributes.clone(), &meta.sensitive)?);
    let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    let (cells, _) = read_cells(reader, &names)?;
    let columns = encode(&schema, &cells)?;
    PublishedTable::from_parts(
        schema,
        columns,
        meta.l_prime,
        meta.mechanism.clone(),
        meta.seed_fingerprint.clone(),
    )
}

pub fn read_published_files(
    csv_path: impl AsRef<Path>,
    meta_path: impl AsRef<Path>,
) -> Result<PublishedTable> {
    let meta = PublicationMeta::read_file(meta_path)?;
    let csv_path = csv_path.as_ref();
    let file = File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    read_published(file, &meta)
}

/// Reads the header and data cells, reordering columns to `names`.
fn read_cells<R: Read>(reader: R, names: &[&str]) -> Result<(Vec<Vec<String>>, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let header = rdr.headers()?.clone();

    let mut position: HashMap<&str, usize> = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        if position.insert(h, i).is_some() {
            return Err(Error::DuplicateHeader(h.to_string()));
        }
        if !names.contains(&h) {
            return Err(Error::UnknownAttribute(h.to_string()));
        }
    }
    let mut source = Vec::with_capacity(names.len());
    for name in names {
        match position.get(name) {
            Some(&i) => source.push(i),
            None => return Err(Error::MissingColumn(name.to_string())),
        }
    }

    let mut cells = vec![Vec::new(); names.len()];
    let mut n_rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        for (attr, &src) in source.iter().enumerate() {
            let cell = &record[src];
            if cell.is_empty() {
                return Err(Error::EmptyCell {
                    row: r + 1,
                    column: names[attr].to_string(),
                });
            }
            cells[attr].push(cell.to_string());
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok((cells, n_rows))
}

fn encode(schema: &Schema, cells: &[Vec<String>]) -> Result<Vec<Vec<u32>>> {
    cells
        .iter()
        .enumerate()
        .map(|(attr, column)| {
            column
                .iter()
                .enumerate()
                .map(|(r, v)| {
                    schema.code(attr, v).ok_or_else(|| Error::DomainViolation {
                        row: r + 1,
                        column: schema.attribute(attr).name.clone(),
                        value: v.clone(),
                    })
                })
                .collect()
        })
        .collect()
}

fn write_columns<W: Write>(
    writer: W,
    schema: &Schema,
    order: &[usize],
    columns: &[Vec<u32>],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(order.iter().map(|&a| schema.attribute(a).name.as_str()))?;
    let n = columns.first().map_or(0, Vec::len);
    let mut record = Vec::with_capacity(order.len());
    for row in 0..n {
        record.clear();
        record.extend(order.iter().map(|&a| schema.value(a, columns[a][row])));
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
