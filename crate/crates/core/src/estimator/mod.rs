//! Count reconstruction from published tables.

mod baseline;
mod bayes;
mod matrix;
mod query;

pub use baseline::{estimate_anatomy, estimate_anatomy_batch, estimate_global_a};
pub use bayes::{iterative_bayes, iterative_bayes_observed, iterative_bayes_with, BayesOptions, BayesOutcome};
pub use matrix::{
    build_multi_sa_matrix, build_multi_sa_matrix_with_model, build_single_sa_matrix,
    build_single_sa_matrix_with_model, state_index, DecoyModel, StateVector, TransitionMatrix,
};
pub use query::{
    estimate_batch, estimate_query, estimate_resolved, estimate_sa_count, observe, CountQuery, QueryEstimate,
    ResolvedQuery,
};

pub(crate) use query::{group_by_predicate, observe_columns, predicate_histogram};
