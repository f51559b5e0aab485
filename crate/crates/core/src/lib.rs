//! Detection of third-party advertising and tracking services from a merged
//! cross-site request dependency graph.
//!
//! The pipeline runs HAR captures through [`ingest`] into per-site dependency
//! trees, fuses them into a [`graph::WideGraph`], extracts [`structural`] and
//! [`content`] features for each sub-domain document, labels documents with
//! [`filter`] rules, and trains a [`forest`] classifier. [`pipeline`] wires it
//! together and [`synth`] produces synthetic corpora with known ground truth.

pub mod content;
mod error;
pub mod exec;
pub mod filter;
pub mod forest;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod structural;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Execution;
