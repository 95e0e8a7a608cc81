//! The iterative mining loop: retrieve document pairs, align sentences,
//! filter, measure, and decide whether another round is worthwhile.

mod bridge;
mod pairs;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{align_document_pair, SentencePair, DEFAULT_MIN_SCORE};
use crate::corpus::DocumentStore;
use crate::error::{Error, Result};
use crate::filter::{apply_filters, FilterConfig};
use crate::io::write_atomic;
use crate::lang::LangCode;
use crate::retrieval::{
    pseudo_retrieval_accuracy, select_pairs, tentative_pairs, threshold_sweep, write_doc_pairs,
    DocPair, GroundTruth, RetrievalParams, RetrievalTokenizer, DEFAULT_THRESHOLD,
    DEFAULT_WINDOW_DAYS,
};
use crate::translate::{Memo, Translator};

pub use bridge::{bridge_multiparallel, corpus_grid, CorpusGrid, GridCell, MultiParallelTable};
pub use pairs::{pairs_to_tsv, parse_pairs, read_pairs, write_pairs};

pub const DEFAULT_STOP_EPSILON: f64 = 0.02;
pub const DEFAULT_MAX_ITERATIONS: usize = 5;

#[derive(Clone, Debug)]
pub struct IterationConfig {
    pub pivot: LangCode,
    pub window_days: u32,
    /// Per-language overrides of `default_threshold`.
    pub thresholds: BTreeMap<LangCode, f64>,
    pub default_threshold: f64,
    pub min_score: f64,
    pub filter: FilterConfig,
    pub stop_epsilon: f64,
    pub max_iterations: usize,
    pub tokenizer: RetrievalTokenizer,
    /// Date tolerance used when inferring ground truth from metadata.
    pub truth_tolerance_days: u32,
    /// Thresholds at which the accepted-pair curve is reported.
    pub sweep: Vec<f64>,
}

impl IterationConfig {
    pub fn new(pivot: LangCode) -> Self {
        IterationConfig {
            pivot,
            window_days: DEFAULT_WINDOW_DAYS,
            thresholds: BTreeMap::new(),
            default_threshold: DEFAULT_THRESHOLD,
            min_score: DEFAULT_MIN_SCORE,
            filter: FilterConfig::default(),
            stop_epsilon: DEFAULT_STOP_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tokenizer: RetrievalTokenizer::Words,
            truth_tolerance_days: 0,
            sweep: (0..=20).map(|i| i as f64 / 20.0).collect(),
        }
    }

    pub fn threshold(&self, lang: LangCode) -> f64 {
        self.thresholds
            .get(&lang)
            .copied()
            .unwrap_or(self.default_threshold)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stop_epsilon > 0.0 && self.stop_epsilon < 1.0) {
            return Err(Error::Config(format!(
                "stop_epsilon {} outside (0, 1)",
                self.stop_epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_score) {
            return Err(Error::Config(format!(
                "min_score {} outside [0, 1]",
                self.min_score
            )));
        }
        for (lang, t) in
            std::iter::once((&self.pivot, &self.default_threshold)).chain(&self.thresholds)
        {
            if !(0.0..=1.0).contains(t) {
                return Err(Error::Config(format!(
                    "threshold {t} for {lang} outside [0, 1]"
                )));
            }
        }
        self.filter.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LangReport {
    pub threshold: f64,
    /// Source documents that had any candidate at all.
    pub candidates: usize,
    pub doc_pairs: usize,
    /// Sentence pairs before filtering.
    pub aligned_sentences: usize,
    pub sentence_pairs: usize,
    pub truth_pairs: usize,
    /// Absent when metadata yields no ground truth.
    pub pseudo_accuracy: Option<f64>,
    pub doc_pair_delta: i64,
    pub sentence_pair_delta: i64,
    pub threshold_curve: Vec<(f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub pivot: LangCode,
    pub languages: BTreeMap<LangCode, LangReport>,
    pub total_doc_pairs: usize,
    pub total_sentence_pairs: usize,
    pub doc_pair_delta: i64,
    pub sentence_pair_delta: i64,
}

impl IterationReport {
    pub fn doc_pairs_per_lang(&self) -> BTreeMap<LangCode, usize> {
        self.languages
            .iter()
            .map(|(&l, r)| (l, r.doc_pairs))
            .collect()
    }

    pub fn sentence_pairs_per_lang(&self) -> BTreeMap<LangCode, usize> {
        self.languages
            .iter()
            .map(|(&l, r)| (l, r.sentence_pairs))
            .collect()
    }

    pub fn pseudo_accuracy_per_lang(&self) -> BTreeMap<LangCode, f64> {
        self.languages
            .iter()
            .filter_map(|(&l, r)| r.pseudo_accuracy.map(|a| (l, a)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}

/// Everything one round produces, keyed by non-pivot language.
#[derive(Clone, Debug)]
pub struct IterationOutput {
    pub doc_pairs: BTreeMap<LangCode, Vec<DocPair>>,
    pub corpora: BTreeMap<LangCode, Vec<SentencePair>>,
    pub report: IterationReport,
}

struct LangResult {
    lang: LangCode,
    doc_pairs: Vec<DocPair>,
    pairs: Vec<SentencePair>,
    report: LangReport,
}

fn run_language(
    cfg: &IterationConfig,
    store: &DocumentStore,
    translator: &dyn Translator,
    iteration: usize,
    lang: LangCode,
) -> Result<LangResult> {
    let pivot = cfg.pivot;
    let threshold = cfg.threshold(lang);
    let params = RetrievalParams {
        pivot,
        window_days: cfg.window_days,
        threshold,
        tokenizer: cfg.tokenizer.clone(),
        provenance: format!("iter{iteration}"),
    };
    let tentative = tentative_pairs(store, lang, store, pivot, translator, &params)
        .map_err(|e| e.in_stage(lang, "retrieval"))?;
    let doc_pairs = select_pairs(&tentative, threshold);

    let mut aligned = Vec::new();
    for dp in &doc_pairs {
        let (src, tgt) = (store.get(&dp.src_id), store.get(&dp.tgt_id));
        let (Some(src), Some(tgt)) = (src, tgt) else {
            return Err(
                Error::UnindexedCandidate(dp.tgt_id.clone()).in_stage(lang, "sentence alignment")
            );
        };
        aligned.extend(
            align_document_pair(dp, src, tgt, translator, pivot, cfg.min_score)
                .map_err(|e| e.in_stage(lang, "sentence alignment"))?,
        );
    }
    let pairs = apply_filters(&aligned, lang, pivot, &cfg.filter);

    let truth = GroundTruth::from_metadata(store, lang, store, pivot, cfg.truth_tolerance_days);
    let pseudo_accuracy = if truth.is_empty() {
        None
    } else {
        Some(
            pseudo_retrieval_accuracy(&doc_pairs, &truth)
                .map_err(|e| e.in_stage(lang, "evaluation"))?,
        )
    };
    let report = LangReport {
        threshold,
        candidates: tentative.len(),
        doc_pairs: doc_pairs.len(),
        aligned_sentences: aligned.len(),
        sentence_pairs: pairs.len(),
        truth_pairs: truth.len(),
        pseudo_accuracy,
        doc_pair_delta: 0,
        sentence_pair_delta: 0,
        threshold_curve: threshold_sweep(&tentative, &cfg.sweep),
    };
    Ok(LangResult {
        lang,
        doc_pairs,
        pairs,
        report,
    })
}

/// One full round over every non-pivot language in `store`. Languages run in
/// parallel on the current rayon pool; the result does not depend on its size.
/// Deltas are taken against `previous`, or against zero for a first round.
pub fn run_iteration(
    cfg: &IterationConfig,
    store: &DocumentStore,
    translator: &dyn Translator,
    iteration: usize,
    previous: Option<&IterationReport>,
) -> Result<IterationOutput> {
    cfg.validate()?;
    if store.documents(cfg.pivot).next().is_none() {
        return Err(Error::Config(format!(
            "store has no {} documents",
            cfg.pivot
        )));
    }
    let memo = Memo::new(translator);
    let langs: Vec<LangCode> = store.languages().filter(|&l| l != cfg.pivot).collect();
    let results = langs
        .par_iter()
        .map(|&lang| run_language(cfg, store, &memo, iteration, lang))
        .collect::<Result<Vec<_>>>()?;

    let mut out = IterationOutput {
        doc_pairs: BTreeMap::new(),
        corpora: BTreeMap::new(),
        report: IterationReport {
            iteration,
            pivot: cfg.pivot,
            languages: BTreeMap::new(),
            total_doc_pairs: 0,
            total_sentence_pairs: 0,
            doc_pair_delta: 0,
            sentence_pair_delta: 0,
        },
    };
    for mut r in results {
        let prev = previous.and_then(|p| p.languages.get(&r.lang));
        r.report.doc_pair_delta =
            r.report.doc_pairs as i64 - prev.map_or(0, |p| p.doc_pairs as i64);
        r.report.sentence_pair_delta =
            r.report.sentence_pairs as i64 - prev.map_or(0, |p| p.sentence_pairs as i64);
        let rep = &mut out.report;
        rep.total_doc_pairs += r.report.doc_pairs;
        rep.total_sentence_pairs += r.report.sentence_pairs;
        rep.languages.insert(r.lang, r.report);
        out.doc_pairs.insert(r.lang, r.doc_pairs);
        out.corpora.insert(r.lang, r.pairs);
    }
    let rep = &mut out.report;
    rep.doc_pair_delta =
        rep.total_doc_pairs as i64 - previous.map_or(0, |p| p.total_doc_pairs as i64);
    rep.sentence_pair_delta =
        rep.total_sentence_pairs as i64 - previous.map_or(0, |p| p.total_sentence_pairs as i64);
    Ok(out)
}

/// Writes `iter<k>/pairs.<xx>-<pivot>.tsv`, `iter<k>/docpairs.<xx>-<pivot>.tsv`
/// and `iter<k>/report.json` under `root`. Returns the iteration directory.
pub fn write_iteration(root: &Path, output: &IterationOutput) -> Result<PathBuf> {
    let report = &output.report;
    let dir = root.join(format!("iter{}", report.iteration));
    let pivot = report.pivot;
    for (lang, pairs) in &output.corpora {
        write_pairs(&dir.join(format!("pairs.{lang}-{pivot}.tsv")), pairs)?;
    }
    for (lang, pairs) in &output.doc_pairs {
        write_doc_pairs(&dir.join(format!("docpairs.{lang}-{pivot}.tsv")), pairs)?;
    }
    write_atomic(&dir.join("report.json"), |w| {
        w.write_all(report.to_json().as_bytes())
    })?;
    Ok(dir)
}

/// True once the iteration cap is reached or total document pairs grew by
/// less than `stop_epsilon` relative to the previous round.
pub fn should_stop(history: &[IterationReport], cfg: &IterationConfig) -> bool {
    let Some(last) = history.last() else {
        return false;
    };
    if last.iteration >= cfg.max_iterations {
        return true;
    }
    let [.., prev, last] = history else {
        return false;
    };
    let (p, c) = (prev.total_doc_pairs as f64, last.total_doc_pairs as f64);
    if p == 0.0 {
        return c == 0.0;
    }
    (c - p) / p < cfg.stop_epsilon
}
