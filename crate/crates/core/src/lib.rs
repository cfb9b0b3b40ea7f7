//! Adapting existing grammatical-relation annotators to a new annotation
//! scheme.
//!
//! The crate reads and writes a tab-separated corpus format carrying tokens,
//! chunks, attachment hints and any number of GR annotation layers. On top
//! of that it provides label translation learned from co-occurrence,
//! transformation-based rule learning, union ensembles, scoring with
//! significance tests, a synthetic data generator and an experiment
//! pipeline tying these together.

pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod exec;
pub mod mapping;
pub mod pipeline;
pub mod synth;
pub mod tbl;

pub use error::{Error, Result};
pub use exec::Execution;
