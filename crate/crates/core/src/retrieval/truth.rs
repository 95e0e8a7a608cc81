use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::DocPair;
use crate::corpus::DocumentStore;
use crate::error::{Error, Result};
use crate::io::{read_to_string, tsv_rows};
use crate::lang::LangCode;

/// Reference document pairs, usually inferred from article metadata.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub pairs: BTreeSet<(String, String)>,
}

impl GroundTruth {
    /// Pairs whose ministry tags match and whose dates are within
    /// `date_tolerance_days`. Only unambiguous matches are kept: the source
    /// must have exactly one such target and the target exactly one source.
    pub fn from_metadata(
        src_store: &DocumentStore,
        src_lang: LangCode,
        tgt_store: &DocumentStore,
        tgt_lang: LangCode,
        date_tolerance_days: u32,
    ) -> Self {
        let mut proposals = Vec::new();
        for src in src_store.documents(src_lang) {
            let Some(date) = src.date else { continue };
            let matches: Vec<_> = tgt_store
                .query_date_window(tgt_lang, date, date_tolerance_days)
                .into_iter()
                .filter(|t| t.same_ministry(src))
                .collect();
            if let [only] = matches.as_slice() {
                proposals.push((src.id.clone(), only.id.clone()));
            }
        }
        let mut claims: BTreeMap<&str, usize> = BTreeMap::new();
        for (_, t) in &proposals {
            *claims.entry(t.as_str()).or_default() += 1;
        }
        let pairs = proposals
            .iter()
            .filter(|(_, t)| claims[t.as_str()] == 1)
            .cloned()
            .collect();
        GroundTruth { pairs }
    }

    /// Two-column TSV: source id, target id.
    pub fn read_tsv(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        Ok(GroundTruth {
            pairs: tsv_rows(&text, 2)?
                .into_iter()
                .map(|(_, f)| (f[0].to_string(), f[1].to_string()))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Percentage of ground-truth sources whose emitted pair points at the right
/// target, rounded to two decimals. Unpaired sources count as wrong.
pub fn pseudo_retrieval_accuracy(pairs: &[DocPair], truth: &GroundTruth) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let emitted: BTreeMap<&str, &str> = pairs
        .iter()
        .map(|p| (p.src_id.as_str(), p.tgt_id.as_str()))
        .collect();
    let correct = truth
        .pairs
        .iter()
        .filter(|(s, t)| emitted.get(s.as_str()) == Some(&t.as_str()))
        .count();
    let pct = 100.0 * correct as f64 / truth.len() as f64;
    Ok((pct * 100.0).round() / 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use chrono::NaiveDate;

    fn pair(s: &str, t: &str) -> DocPair {
        DocPair {
            src_id: s.into(),
            tgt_id: t.into(),
            score: 1.0,
            provenance: String::new(),
        }
    }

    fn truth(p: &[(&str, &str)]) -> GroundTruth {
        GroundTruth {
            pairs: p
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        }
    }

    #[test]
    fn accuracy_arithmetic() {
        let t = truth(&[("a", "x"), ("b", "y"), ("c", "z")]);
        assert_eq!(
            pseudo_retrieval_accuracy(&[pair("a", "x"), pair("b", "y"), pair("c", "q")], &t)
                .unwrap(),
            66.67
        );
        assert_eq!(
            pseudo_retrieval_accuracy(&[pair("a", "x"), pair("b", "y"), pair("c", "z")], &t)
                .unwrap(),
            100.0
        );
        assert_eq!(pseudo_retrieval_accuracy(&[], &t).unwrap(), 0.0);
        assert!(matches!(
            pseudo_retrieval_accuracy(&[], &GroundTruth::default()),
            Err(Error::EmptyTruth)
        ));
    }

    #[test]
    fn metadata_truth_keeps_unambiguous_matches() {
        let d = |n| NaiveDate::from_ymd_opt(2020, 1, n).unwrap();
        let doc = |id: &str, lang, day, m: &str| {
            Document::new(id, lang, vec!["s".into()])
                .with_date(d(day))
                .with_ministry(m)
        };
        let store = DocumentStore::new([
            doc("h1", LangCode::Hi, 1, "Finance"),
            doc("e1", LangCode::En, 1, "FINANCE"),
            doc("h2", LangCode::Hi, 2, "Health"),
            doc("e2", LangCode::En, 2, "health"),
            doc("e3", LangCode::En, 2, "Health"),
            doc("h4", LangCode::Hi, 5, "Rail"),
            doc("e4", LangCode::En, 6, "Rail"),
        ])
        .unwrap();
        let t = GroundTruth::from_metadata(&store, LangCode::Hi, &store, LangCode::En, 0);
        assert_eq!(t, truth(&[("h1", "e1")]));
        let t = GroundTruth::from_metadata(&store, LangCode::Hi, &store, LangCode::En, 1);
        assert!(t.pairs.contains(&("h4".into(), "e4".into())));
    }
}
