//! Career-independence anomaly auditing for bibliometric corpora.
//!
//! The pipeline streams OpenAlex-shaped JSON Lines, reconstructs each
//! researcher's debut year and first last-author year, and reports how often
//! the two coincide. That coincidence is implausible for a real career and
//! mostly marks author profiles that were split by disambiguation errors.
//!
//! - [`corpus_model`]: work records, line parser, eligibility rules
//! - [`ingest`]: two-pass shard-parallel aggregation into career rows
//! - [`career_metrics`]: windowed anomaly rates, strata, histograms
//! - [`gender`]: dictionary-backed name classification
//! - [`synth`]: synthetic corpora with split-error injection
//! - [`oracle`]: naive in-memory reference for testing the streaming path

pub mod career_metrics;
pub mod continent;
pub mod corpus_model;
pub mod error;
pub mod gender;
pub mod ingest;
pub mod oracle;
pub mod synth;
pub mod table;

pub use error::{Error, ParseError, Result};
