//! Consistency checking between UML class diagrams and sequence diagrams.
//!
//! The crate is organised along the processing pipeline:
//!
//! - [`model`]: typed snapshot of a class + sequence model and its structural queries
//! - [`ingest`]: the canonical JSON interchange format and a best-effort XMI reader
//! - [`diff`]: change events between snapshots, and their application
//! - [`rules`]: the consistency-rule catalog, each evaluation recording its read-set
//! - [`engine`]: incremental re-evaluation driven by change events, plus the batch oracle
//! - [`store`]: revisioned diagnostic cache with aggregation and delta history
//! - [`sim`]: seeded workload generation and the equivalence/benchmark harness

pub mod model;
pub mod ingest;
pub mod diff;
pub mod rules;
pub mod engine;
pub mod store;
pub mod sim;
