//! Tables, schemas, ingestion, eligibility and synthetic data.

mod dataset;
mod eligibility;
mod io;
mod published;
mod schema;
mod synthetic;

pub use dataset::{assign_ids, Dataset};
pub use eligibility::{enforce_eligibility, is_eligible, EligibilityReport};
pub use io::{
    ingest_csv, read_dataset, read_published, read_published_files, write_dataset,
    write_dataset_file, write_published,
};
pub use published::{PublicationMeta, PublishedTable, Release};
pub use schema::{Attribute, AttributeSpec, Distribution, Schema, SchemaConfig};
pub use synthetic::generate_synthetic;
