//! Cross-language document alignment: translate into the pivot language,
//! rank date-window candidates by tf-idf cosine, keep one-to-one matches
//! above a threshold.

mod tfidf;
mod truth;

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::corpus::{Document, DocumentStore};
use crate::error::{Error, Result};
use crate::io::{read_to_string, tsv_field, tsv_rows, write_atomic};
use crate::lang::LangCode;
use crate::subword::SubwordVocab;
use crate::translate::Translator;

pub use tfidf::{rank_candidates, SparseVector, TfIdfIndex};
pub use truth::{pseudo_retrieval_accuracy, GroundTruth};

pub const DEFAULT_WINDOW_DAYS: u32 = 2;
pub const DEFAULT_THRESHOLD: f64 = 0.51;

/// How pivot-space text is cut into index terms.
#[derive(Clone, Debug, Default)]
pub enum RetrievalTokenizer {
    /// Lowercased whitespace words with surrounding punctuation stripped.
    #[default]
    Words,
    Subword(Arc<SubwordVocab>),
}

impl RetrievalTokenizer {
    pub fn tokens(&self, text: &str) -> Vec<String> {
        match self {
            RetrievalTokenizer::Words => text
                .split_whitespace()
                .map(|w| {
                    w.trim_matches(|c: char| !c.is_alphanumeric())
                        .to_lowercase()
                })
                .filter(|w| !w.is_empty())
                .collect(),
            RetrievalTokenizer::Subword(v) => v.segment(text),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RetrievalParams {
    pub pivot: LangCode,
    pub window_days: u32,
    pub threshold: f64,
    pub tokenizer: RetrievalTokenizer,
    pub provenance: String,
}

impl RetrievalParams {
    pub fn new(pivot: LangCode) -> Self {
        RetrievalParams {
            pivot,
            window_days: DEFAULT_WINDOW_DAYS,
            threshold: DEFAULT_THRESHOLD,
            tokenizer: RetrievalTokenizer::Words,
            provenance: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DocPair {
    pub src_id: String,
    pub tgt_id: String,
    pub score: f64,
    pub provenance: String,
}

/// Sentences of `docs` rendered in the pivot language, one string per
/// document.
pub(crate) fn pivot_texts(
    docs: &[&Document],
    lang: LangCode,
    pivot: LangCode,
    translator: &dyn Translator,
) -> Result<Vec<Vec<String>>> {
    if lang == pivot {
        return Ok(docs.iter().map(|d| d.sentences.clone()).collect());
    }
    let mut seen = HashSet::new();
    let distinct: Vec<String> = docs
        .iter()
        .flat_map(|d| d.sentences.iter())
        .filter(|s| seen.insert(s.as_str()))
        .cloned()
        .collect();
    let translated = if distinct.is_empty() {
        Vec::new()
    } else {
        translator.translate(lang, pivot, &distinct)?
    };
    if translated.len() != distinct.len() {
        return Err(Error::LineCountMismatch {
            expected: distinct.len(),
            got: translated.len(),
        });
    }
    let table: std::collections::HashMap<&str, &str> = distinct
        .iter()
        .map(String::as_str)
        .zip(translated.iter().map(String::as_str))
        .collect();
    Ok(docs
        .iter()
        .map(|d| {
            d.sentences
                .iter()
                .map(|s| table[s.as_str()].to_string())
                .collect()
        })
        .collect())
}

/// Best candidate for every source document, before thresholding and the
/// one-to-one constraint. Sources without any candidate are omitted.
///
/// Candidates are the target documents dated within the window of the source;
/// undated sources are compared against every target document.
pub fn tentative_pairs(
    src_store: &DocumentStore,
    src_lang: LangCode,
    tgt_store: &DocumentStore,
    tgt_lang: LangCode,
    translator: &dyn Translator,
    params: &RetrievalParams,
) -> Result<Vec<DocPair>> {
    if src_lang == tgt_lang {
        return Err(Error::Config(format!(
            "cannot align {src_lang} documents with themselves"
        )));
    }
    let src_docs: Vec<&Document> = src_store.documents(src_lang).collect();
    let tgt_docs: Vec<&Document> = tgt_store.documents(tgt_lang).collect();
    if src_docs.is_empty() || tgt_docs.is_empty() {
        return Ok(Vec::new());
    }
    let src_text = pivot_texts(&src_docs, src_lang, params.pivot, translator)?;
    let tgt_text = pivot_texts(&tgt_docs, tgt_lang, params.pivot, translator)?;

    let tokenize = |docs: &[&Document], text: Vec<Vec<String>>| -> Vec<(String, Vec<String>)> {
        docs.par_iter()
            .zip(text.into_par_iter())
            .map(|(d, sents)| {
                let toks = sents
                    .iter()
                    .flat_map(|s| params.tokenizer.tokens(s))
                    .collect();
                (d.id.clone(), toks)
            })
            .collect()
    };
    let mut entries = tokenize(&src_docs, src_text);
    entries.extend(tokenize(&tgt_docs, tgt_text));
    let index = TfIdfIndex::build(params.pivot, &entries)?;
    let all_targets: Vec<&str> = tgt_docs.iter().map(|d| d.id.as_str()).collect();

    let found: Vec<Option<DocPair>> = src_docs
        .par_iter()
        .map(|src| {
            let candidates: Vec<&str> = match src.date {
                Some(date) => tgt_store
                    .query_date_window(tgt_lang, date, params.window_days)
                    .into_iter()
                    .map(|d| d.id.as_str())
                    .collect(),
                None => all_targets.clone(),
            };
            if candidates.is_empty() {
                return Ok(None);
            }
            let query = index.vector(&src.id).expect("source documents are indexed");
            let ranked = rank_candidates(&index, query, &candidates)?;
            Ok(ranked.into_iter().next().map(|(tgt_id, score)| DocPair {
                src_id: src.id.clone(),
                tgt_id,
                score,
                provenance: params.provenance.clone(),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Keeps tentative pairs scoring at least `threshold`, assigning each target
/// at most once by descending score. Output is sorted by source id.
pub fn select_pairs(tentative: &[DocPair], threshold: f64) -> Vec<DocPair> {
    let mut order: Vec<&DocPair> = tentative.iter().filter(|p| p.score >= threshold).collect();
    order.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.src_id.cmp(&b.src_id))
            .then_with(|| a.tgt_id.cmp(&b.tgt_id))
    });
    let mut used_src = BTreeSet::new();
    let mut used_tgt = BTreeSet::new();
    let mut kept: Vec<DocPair> = order
        .into_iter()
        .filter(|p| used_src.insert(p.src_id.as_str()) && used_tgt.insert(p.tgt_id.as_str()))
        .cloned()
        .collect();
    kept.sort_by(|a, b| a.src_id.cmp(&b.src_id));
    kept
}

/// Number of pairs kept at each threshold.
pub fn threshold_sweep(tentative: &[DocPair], thresholds: &[f64]) -> Vec<(f64, usize)> {
    thresholds
        .iter()
        .map(|&t| (t, select_pairs(tentative, t).len()))
        .collect()
}

/// [`tentative_pairs`] followed by [`select_pairs`] at `params.threshold`.
pub fn align_documents(
    src_store: &DocumentStore,
    src_lang: LangCode,
    tgt_store: &DocumentStore,
    tgt_lang: LangCode,
    translator: &dyn Translator,
    params: &RetrievalParams,
) -> Result<Vec<DocPair>> {
    let tentative = tentative_pairs(src_store, src_lang, tgt_store, tgt_lang, translator, params)?;
    Ok(select_pairs(&tentative, params.threshold))
}

pub fn doc_pairs_to_tsv(pairs: &[DocPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{}\n",
            tsv_field(&p.src_id),
            tsv_field(&p.tgt_id),
            p.score,
            tsv_field(&p.provenance)
        ));
    }
    out
}

pub fn write_doc_pairs(path: &Path, pairs: &[DocPair]) -> Result<()> {
    write_atomic(path, |w| w.write_all(doc_pairs_to_tsv(pairs).as_bytes()))
}

pub fn read_doc_pairs(path: &Path) -> Result<Vec<DocPair>> {
    parse_doc_pairs(&read_to_string(path)?)
}

pub fn parse_doc_pairs(text: &str) -> Result<Vec<DocPair>> {
    tsv_rows(text, 4)?
        .into_iter()
        .map(|(line, f)| {
            Ok(DocPair {
                src_id: f[0].to_string(),
                tgt_id: f[1].to_string(),
                score: f[2]
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad score {:?}", f[2])))?,
                provenance: f[3].to_string(),
            })
        })
        .collect()
}
