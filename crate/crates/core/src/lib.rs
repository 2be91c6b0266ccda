//! Probing toolkit for pretrained models of Java code.
//!
//! The crate turns a corpus of Java functions into eight probing datasets
//! (syntax, correctness, identifiers, data flow, scoping and naming), reads
//! layer-wise embedding bundles produced by an external extractor, and fits
//! linear probes plus constant "Simple Bound" baselines on top of them.
//!
//! Pipeline, in module order:
//!
//! * [`corpus`] loads and normalizes snippets.
//! * [`syntax`] parses them into concrete syntax trees.
//! * [`semantics`] extracts data-flow edges and block scopes.
//! * [`taskgen`] emits the probing datasets and transformed variants.
//! * [`embed`] reads embedding bundles and assembles feature vectors.
//! * [`probe`] trains ridge / logistic probes and baselines.
//! * [`pipeline`] and [`report`] implement the CLI commands.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod pipeline;
pub mod probe;
pub mod report;
pub mod semantics;
pub mod syntax;
pub mod synth;
pub mod taskgen;

mod jsonl;

pub use corpus::{Corpus, Snippet};
pub use embed::EmbeddingBundle;
pub use error::{Error, Result};
pub use probe::{ProbeConfig, ProbeResult};
pub use syntax::{SyntaxTree, TokenInfo};
pub use taskgen::{ProbingExample, Task};
