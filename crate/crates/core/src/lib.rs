//! Iterative mining of sentence-aligned parallel corpora from multilingual
//! article collections.
//!
//! The stages are: ingestion and normalization ([`corpus`]), subword
//! vocabularies ([`subword`]), translation into a pivot language behind a
//! pluggable backend ([`translate`]), tf-idf document retrieval
//! ([`retrieval`]), sentence alignment ([`align`]), pair filtering
//! ([`filter`]), BLEU ([`bleu`]), and the iteration driver ([`pipeline`]).

pub mod align;
pub mod bleu;
pub mod corpus;
pub mod error;
pub mod filter;
pub mod io;
pub mod lang;
pub mod pipeline;
pub mod retrieval;
pub mod subword;
pub mod synth;
pub mod translate;

pub use error::{Error, Result};
pub use lang::LangCode;

pub use align::{AlignMethod, Bead, BeadKind, SentencePair};
pub use corpus::{Document, DocumentStore};
pub use filter::FilterConfig;
pub use pipeline::{IterationConfig, IterationReport, MultiParallelTable};
pub use retrieval::{DocPair, GroundTruth};
pub use subword::{SubwordVocab, UnionVocab};
pub use translate::{Translator, TranslatorSpec};
