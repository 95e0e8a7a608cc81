//! Sentence alignment within a matched document pair.

mod bleualign;
mod gale_church;

use crate::corpus::Document;
use crate::error::Result;
use crate::lang::LangCode;
use crate::retrieval::{pivot_texts, DocPair};
use crate::translate::Translator;

pub use bleualign::{
    best_chain, bleu_similarity_matrix, bleualign, bleualign_with_matrix, Link, SimilarityMatrix,
};
pub use gale_church::{
    gale_church, gale_church_with, neg_ln_two_tail, AlignmentPath, Bead, BeadKind, GaleChurchParams,
};

pub const DEFAULT_MIN_SCORE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlignMethod {
    GaleChurch,
    Bleualign,
}

impl AlignMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AlignMethod::GaleChurch => "galechurch",
            AlignMethod::Bleualign => "bleualign",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentencePair {
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    pub src_sentence: String,
    pub tgt_sentence: String,
    /// Alignment confidence in [0, 1].
    pub score: f64,
    pub src_doc: String,
    pub tgt_doc: String,
    pub method: AlignMethod,
}

/// Translates both sides into the pivot (where needed), aligns with
/// [`bleualign`], and maps links back to the original sentences.
pub fn align_document_pair(
    pair: &DocPair,
    src_doc: &Document,
    tgt_doc: &Document,
    translator: &dyn Translator,
    pivot: LangCode,
    min_score: f64,
) -> Result<Vec<SentencePair>> {
    debug_assert_eq!(pair.src_id, src_doc.id);
    debug_assert_eq!(pair.tgt_id, tgt_doc.id);
    if src_doc.sentences.is_empty() || tgt_doc.sentences.is_empty() {
        return Ok(Vec::new());
    }
    let src_pivot = pivot_texts(&[src_doc], src_doc.lang, pivot, translator)?.remove(0);
    let tgt_pivot = pivot_texts(&[tgt_doc], tgt_doc.lang, pivot, translator)?.remove(0);
    Ok(bleualign(&src_pivot, &tgt_pivot, min_score)
        .into_iter()
        .map(|l| SentencePair {
            src_lang: src_doc.lang,
            tgt_lang: tgt_doc.lang,
            src_sentence: src_doc.sentences[l.src].clone(),
            tgt_sentence: tgt_doc.sentences[l.tgt].clone(),
            score: l.score,
            src_doc: src_doc.id.clone(),
            tgt_doc: tgt_doc.id.clone(),
            method: AlignMethod::Bleualign,
        })
        .collect())
}

/// Length-only alignment of two documents. Every bead with sentences on both
/// sides becomes a pair (multi-sentence sides joined by a space); the score is
/// `exp(-bead cost)`.
pub fn align_document_pair_by_length(
    src_doc: &Document,
    tgt_doc: &Document,
) -> Result<Vec<SentencePair>> {
    let lens = |d: &Document| {
        d.sentences
            .iter()
            .map(|s| s.chars().count())
            .collect::<Vec<_>>()
    };
    let params = GaleChurchParams::default();
    let (src_lens, tgt_lens) = (lens(src_doc), lens(tgt_doc));
    let path = gale_church_with(&params, &src_lens, &tgt_lens)?;
    Ok(path
        .beads
        .iter()
        .filter(|b| !b.src.is_empty() && !b.tgt.is_empty())
        .map(|b| {
            let s = src_doc.sentences[b.src.clone()].join(" ");
            let t = tgt_doc.sentences[b.tgt.clone()].join(" ");
            let cost = params.bead_cost(
                b.kind,
                src_lens[b.src.clone()].iter().sum(),
                tgt_lens[b.tgt.clone()].iter().sum(),
            );
            SentencePair {
                src_lang: src_doc.lang,
                tgt_lang: tgt_doc.lang,
                src_sentence: s,
                tgt_sentence: t,
                score: (-cost).exp().clamp(0.0, 1.0),
                src_doc: src_doc.id.clone(),
                tgt_doc: tgt_doc.id.clone(),
                method: AlignMethod::GaleChurch,
            }
        })
        .collect())
}
