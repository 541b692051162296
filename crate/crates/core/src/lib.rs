//! Stage-wise analysis of racism-related tweets.
//!
//! The crate covers the whole offline pipeline: corpus ingestion and stage
//! partitioning, snowball hashtag discovery, the two text-cleaning paths,
//! n-gram features, a one-vs-rest hinge-loss classifier with cross-validation,
//! collapsed Gibbs LDA with coherence-based model selection and topic merging,
//! and rendering of the summary tables.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod features;
mod par;
pub mod preprocess;
pub mod report;
pub mod snowball;
pub mod synth;
pub mod topics;

pub use corpus::{Category, Corpus, Stage, Tweet};
pub use error::{Error, Result};
