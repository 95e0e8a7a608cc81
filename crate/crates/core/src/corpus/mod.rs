//! Document ingestion, normalization, segmentation, and date-indexed lookup.

mod normalize;
mod segment;
mod store;

pub use normalize::normalize_text;
pub use segment::segment_sentences;
pub use store::{ingest_jsonl, parse_jsonl, Document, DocumentStore};
