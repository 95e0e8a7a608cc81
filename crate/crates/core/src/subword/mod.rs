//! Unigram-LM subword vocabularies: training, Viterbi segmentation, and the
//! cross-language union used as the shared pipeline vocabulary.
//!
//! Vocabulary entries never contain the word-boundary marker. The marker is
//! attached to the first piece of every word at segmentation time and turned
//! back into a space by [`detokenize`]. Text that itself contains U+2581 does
//! not round-trip.

mod trainer;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_to_string, tsv_rows, write_atomic};
use crate::lang::LangCode;

pub use trainer::{train_unigram, TraceStep, UnigramConfig, UnigramTrainer};

/// Word-boundary sentinel prepended to word-initial pieces.
pub const MARKER: char = '\u{2581}';

/// Log-probability penalty below the least likely entry given to characters
/// missing from the vocabulary.
const UNKNOWN_PENALTY: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub text: String,
    pub unknown: bool,
}

#[derive(Clone, Debug)]
pub struct SubwordVocab {
    lang: LangCode,
    marker: char,
    entries: HashMap<String, f64>,
    max_len: usize,
    unknown_log_prob: f64,
}

impl SubwordVocab {
    /// Builds a vocabulary from (token, log-probability) entries.
    pub fn new(lang: LangCode, entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        let entries: HashMap<String, f64> = entries.into_iter().collect();
        let max_len = entries.keys().map(|t| t.chars().count()).max().unwrap_or(1);
        let min = entries
            .values()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0_f64, f64::min);
        SubwordVocab {
            lang,
            marker: MARKER,
            entries,
            max_len,
            unknown_log_prob: min - UNKNOWN_PENALTY,
        }
    }

    pub fn lang(&self) -> LangCode {
        self.lang
    }

    pub fn marker(&self) -> char {
        self.marker
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn log_prob(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn tokens(&self) -> BTreeSet<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    /// Entries sorted by descending probability (at file precision), then token.
    pub fn sorted_entries(&self) -> Vec<(&str, f64)> {
        let mut rows: Vec<(&str, f64)> =
            self.entries.iter().map(|(t, &p)| (t.as_str(), p)).collect();
        rows.sort_by(|a, b| file_key(b.1).cmp(&file_key(a.1)).then_with(|| a.0.cmp(b.0)));
        rows
    }

    /// Maximum-probability segmentation, marker on word-initial pieces.
    pub fn segment(&self, sentence: &str) -> Vec<String> {
        self.segment_pieces(sentence)
            .into_iter()
            .map(|p| p.text)
            .collect()
    }

    /// Like [`segment`](Self::segment) but flags pieces for characters the
    /// vocabulary does not contain.
    pub fn segment_pieces(&self, sentence: &str) -> Vec<Piece> {
        let mut out = Vec::new();
        for word in sentence.split(' ').filter(|w| !w.is_empty()) {
            let start = out.len();
            self.segment_word(word, &mut out);
            out[start].text.insert(0, self.marker);
        }
        out
    }

    fn segment_word(&self, word: &str, out: &mut Vec<Piece>) {
        let bounds: Vec<usize> = word
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(word.len()))
            .collect();
        let n = bounds.len() - 1;
        let mut best = vec![f64::NEG_INFINITY; n + 1];
        let mut back = vec![(0usize, false); n + 1];
        best[0] = 0.0;
        for end in 1..=n {
            for start in end.saturating_sub(self.max_len)..end {
                if best[start] == f64::NEG_INFINITY {
                    continue;
                }
                let piece = &word[bounds[start]..bounds[end]];
                let (lp, unknown) = match self.entries.get(piece) {
                    Some(&lp) => (lp, false),
                    None if end - start == 1 => (self.unknown_log_prob, true),
                    None => continue,
                };
                let score = best[start] + lp;
                if score > best[end] {
                    best[end] = score;
                    back[end] = (start, unknown);
                }
            }
        }
        let mut pieces = Vec::new();
        let mut end = n;
        while end > 0 {
            let (start, unknown) = back[end];
            pieces.push(Piece {
                text: word[bounds[start]..bounds[end]].to_string(),
                unknown,
            });
            end = start;
        }
        out.extend(pieces.into_iter().rev());
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (token, lp) in self.sorted_entries() {
            out.push_str(&format!("{token}\t{lp:.6}\n"));
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| w.write_all(self.to_tsv().as_bytes()))
    }

    pub fn read_tsv(path: &Path, lang: LangCode) -> Result<Self> {
        Self::parse_tsv(&read_to_string(path)?, lang)
    }

    pub fn parse_tsv(text: &str, lang: LangCode) -> Result<Self> {
        let mut entries = Vec::new();
        for (line, fields) in tsv_rows(text, 2)? {
            let lp: f64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad log-probability {:?}", fields[1])))?;
            entries.push((fields[0].to_string(), lp));
        }
        Ok(SubwordVocab::new(lang, entries))
    }
}

fn file_key(lp: f64) -> i64 {
    (lp * 1e6).round() as i64
}

/// Inverse of [`SubwordVocab::segment`].
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for token in tokens {
        let token = token.as_ref();
        match token.strip_prefix(MARKER) {
            Some(rest) => {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(rest);
            }
            None => out.push_str(token),
        }
    }
    out
}

/// Token inventory shared across languages, with the languages that
/// contributed each token.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnionVocab {
    pub origin: BTreeMap<String, BTreeSet<LangCode>>,
}

impl UnionVocab {
    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.origin.contains_key(token)
    }

    /// `token<TAB>lang,lang,...` rows in token order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (token, langs) in &self.origin {
            let langs: Vec<&str> = langs.iter().map(|l| l.as_str()).collect();
            out.push_str(&format!("{token}\t{}\n", langs.join(",")));
        }
        out
    }
}

pub fn union_vocabs(vocabs: &[SubwordVocab]) -> UnionVocab {
    let mut union = UnionVocab::default();
    for vocab in vocabs {
        for token in vocab.entries.keys() {
            union
                .origin
                .entry(token.clone())
                .or_default()
                .insert(vocab.lang);
        }
    }
    union
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab(entries: &[(&str, f64)]) -> SubwordVocab {
        SubwordVocab::new(
            LangCode::En,
            entries.iter().map(|&(t, p)| (t.to_string(), p.ln())),
        )
    }

    #[test]
    fn prefers_whole_piece_when_more_likely() {
        // log 0.5 > log 0.25 + log 0.25
        let v = vocab(&[("a", 0.25), ("b", 0.25), ("ab", 0.5)]);
        assert_eq!(v.segment("ab"), vec!["\u{2581}ab"]);
        // log 0.1 < log 0.45 + log 0.45
        let v = vocab(&[("a", 0.45), ("b", 0.45), ("ab", 0.1)]);
        assert_eq!(v.segment("ab"), vec!["\u{2581}a", "b"]);
    }

    #[test]
    fn characters_only() {
        let v = vocab(&[("a", 0.3), ("b", 0.3), ("c", 0.4)]);
        assert_eq!(v.segment("abc"), vec!["\u{2581}a", "b", "c"]);
        assert!(v.segment("").is_empty());
    }

    #[test]
    fn unknown_characters_are_flagged() {
        let v = vocab(&[("a", 1.0)]);
        let pieces = v.segment_pieces("aza");
        assert_eq!(
            pieces,
            vec![
                Piece {
                    text: "\u{2581}a".into(),
                    unknown: false
                },
                Piece {
                    text: "z".into(),
                    unknown: true
                },
                Piece {
                    text: "a".into(),
                    unknown: false
                },
            ]
        );
        assert_eq!(detokenize(&v.segment("aza a")), "aza a");
    }

    #[test]
    fn detokenize_examples() {
        assert_eq!(detokenize(&["\u{2581}a", "b"]), "ab");
        assert_eq!(detokenize(&["\u{2581}a", "\u{2581}b"]), "a b");
        assert_eq!(detokenize::<&str>(&[]), "");
    }

    #[test]
    fn union_records_origin() {
        let a = SubwordVocab::new(LangCode::Hi, [("a".into(), -1.0), ("ab".into(), -1.0)]);
        let b = SubwordVocab::new(LangCode::Ta, [("a".into(), -1.0), ("cd".into(), -1.0)]);
        let u = union_vocabs(&[a.clone(), b]);
        assert_eq!(u.len(), 3);
        assert_eq!(u.origin["a"], [LangCode::Hi, LangCode::Ta].into());
        let single = union_vocabs(std::slice::from_ref(&a));
        assert_eq!(
            single
                .origin
                .keys()
                .map(String::as_str)
                .collect::<BTreeSet<_>>(),
            a.tokens()
        );
    }

    #[test]
    fn tsv_order_and_roundtrip() {
        let v = vocab(&[("b", 0.25), ("a", 0.25), ("ab", 0.5)]);
        let text = v.to_tsv();
        assert_eq!(text, "ab\t-0.693147\na\t-1.386294\nb\t-1.386294\n");
        let back = SubwordVocab::parse_tsv(&text, LangCode::En).unwrap();
        assert_eq!(back.to_tsv(), text);
    }

    proptest! {
        #[test]
        fn union_commutes_and_associates(
            a in prop::collection::btree_set("[a-d]{1,3}", 1..6),
            b in prop::collection::btree_set("[a-d]{1,3}", 1..6),
            c in prop::collection::btree_set("[a-d]{1,3}", 1..6),
        ) {
            let mk = |l, s: &BTreeSet<String>| SubwordVocab::new(l, s.iter().map(|t| (t.clone(), -1.0)));
            let (va, vb, vc) = (mk(LangCode::Hi, &a), mk(LangCode::Ta, &b), mk(LangCode::Te, &c));
            let ab_c = union_vocabs(&[va.clone(), vb.clone(), vc.clone()]);
            let c_ba = union_vocabs(&[vc, vb, va]);
            prop_assert_eq!(&ab_c, &c_ba);
            prop_assert!(ab_c.len() <= a.len() + b.len() + c.len());
        }

        #[test]
        fn segment_roundtrip(s in "[a-cअ-औ]{1,6}( [a-cअ-औ]{1,6}){0,4}") {
            let v = vocab(&[("a", 0.2), ("b", 0.2), ("ab", 0.3), ("abc", 0.3)]);
            prop_assert_eq!(detokenize(&v.segment(&s)), s);
        }
    }
}
