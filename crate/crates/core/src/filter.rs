//! Admission filters for aligned sentence pairs.

use std::collections::HashSet;

use crate::align::SentencePair;
use crate::corpus::normalize_text;
use crate::error::{Error, Result};
use crate::lang::LangCode;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterConfig {
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    /// Largest tolerated share of letters outside the expected script.
    pub max_foreign_fraction: f64,
    pub min_tokens: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            ratio_lo: 0.5,
            ratio_hi: 2.0,
            max_foreign_fraction: 0.2,
            min_tokens: 1,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_lo > 0.0 && self.ratio_lo <= 1.0 && self.ratio_hi >= 1.0) {
            return Err(Error::Config(format!(
                "length ratio bounds need 0 < lo <= 1 <= hi, got [{}, {}]",
                self.ratio_lo, self.ratio_hi
            )));
        }
        if !(0.0..=1.0).contains(&self.max_foreign_fraction) {
            return Err(Error::Config(format!(
                "max_foreign_fraction {} outside [0, 1]",
                self.max_foreign_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScriptClass {
    Latin,
    Devanagari,
    Bengali,
    Oriya,
    Tamil,
    Telugu,
    Malayalam,
    Gujarati,
    Gurmukhi,
    Arabic,
    Other,
}

impl ScriptClass {
    /// Block-based classification of a single code point.
    pub fn of(c: char) -> ScriptClass {
        match c as u32 {
            0x0041..=0x005A
            | 0x0061..=0x007A
            | 0x00C0..=0x00D6
            | 0x00D8..=0x00F6
            | 0x00F8..=0x024F
            | 0x1E00..=0x1EFF => ScriptClass::Latin,
            0x0900..=0x097F | 0xA8E0..=0xA8FF => ScriptClass::Devanagari,
            0x0980..=0x09FF => ScriptClass::Bengali,
            0x0A00..=0x0A7F => ScriptClass::Gurmukhi,
            0x0A80..=0x0AFF => ScriptClass::Gujarati,
            0x0B00..=0x0B7F => ScriptClass::Oriya,
            0x0B80..=0x0BFF => ScriptClass::Tamil,
            0x0C00..=0x0C7F => ScriptClass::Telugu,
            0x0D00..=0x0D7F => ScriptClass::Malayalam,
            0x0600..=0x06FF | 0x0750..=0x077F | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF => {
                ScriptClass::Arabic
            }
            _ => ScriptClass::Other,
        }
    }

    pub fn expected(lang: LangCode) -> ScriptClass {
        match lang {
            LangCode::En => ScriptClass::Latin,
            LangCode::Hi | LangCode::Mr => ScriptClass::Devanagari,
            LangCode::Bn => ScriptClass::Bengali,
            LangCode::Or => ScriptClass::Oriya,
            LangCode::Ta => ScriptClass::Tamil,
            LangCode::Te => ScriptClass::Telugu,
            LangCode::Ml => ScriptClass::Malayalam,
            LangCode::Gu => ScriptClass::Gujarati,
            LangCode::Pa => ScriptClass::Gurmukhi,
            LangCode::Ur => ScriptClass::Arabic,
        }
    }
}

fn token_count(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Whitespace-token length ratio `src / tgt` within `[ratio_lo, ratio_hi]`,
/// both sides having at least `min_tokens` tokens.
pub fn length_ratio_ok(src: &str, tgt: &str, cfg: &FilterConfig) -> bool {
    let (s, t) = (token_count(src), token_count(tgt));
    if s < cfg.min_tokens.max(1) || t < cfg.min_tokens.max(1) {
        return false;
    }
    let ratio = s as f64 / t as f64;
    ratio >= cfg.ratio_lo && ratio <= cfg.ratio_hi
}

/// Share of letters written in a script other than the declared language's
/// must not exceed `max_foreign_fraction`. Digits, punctuation and symbols are
/// not letters; a sentence without letters fails.
pub fn script_ok(sentence: &str, declared: LangCode, cfg: &FilterConfig) -> bool {
    let expected = ScriptClass::expected(declared);
    let (mut letters, mut foreign) = (0usize, 0usize);
    for c in sentence.chars().filter(|c| c.is_alphabetic()) {
        letters += 1;
        if ScriptClass::of(c) != expected {
            foreign += 1;
        }
    }
    letters > 0 && foreign as f64 <= cfg.max_foreign_fraction * letters as f64
}

/// Keeps pairs passing both predicates on both sides, then drops repeats of
/// the same normalized (source, target) sentences. Order is preserved.
pub fn apply_filters(
    pairs: &[SentencePair],
    src_lang: LangCode,
    tgt_lang: LangCode,
    cfg: &FilterConfig,
) -> Vec<SentencePair> {
    let mut seen = HashSet::new();
    pairs
        .iter()
        .filter(|p| {
            length_ratio_ok(&p.src_sentence, &p.tgt_sentence, cfg)
                && script_ok(&p.src_sentence, src_lang, cfg)
                && script_ok(&p.tgt_sentence, tgt_lang, cfg)
        })
        .filter(|p| {
            seen.insert((
                normalize_text(&p.src_sentence),
                normalize_text(&p.tgt_sentence),
            ))
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::AlignMethod;
    use proptest::prelude::*;

    fn words(n: usize) -> String {
        vec!["w"; n].join(" ")
    }

    #[test]
    fn ratio_bounds_are_closed() {
        let cfg = FilterConfig::default();
        assert!(length_ratio_ok(&words(10), &words(5), &cfg));
        assert!(!length_ratio_ok(&words(10), &words(4), &cfg));
        assert!(length_ratio_ok(&words(7), &words(7), &cfg));
        assert!(length_ratio_ok(&words(5), &words(10), &cfg));
        assert!(!length_ratio_ok(&words(49), &words(100), &cfg));
        assert!(!length_ratio_ok(&words(201), &words(100), &cfg));
        assert!(!length_ratio_ok("", &words(1), &cfg));
    }

    #[test]
    fn script_checks() {
        let cfg = FilterConfig::default();
        assert!(script_ok("यह एक वाक्य है।", LangCode::Hi, &cfg));
        assert!(script_ok("यह एक वाक्य है।", LangCode::Mr, &cfg));
        assert!(!script_ok("this is latin", LangCode::Ta, &cfg));
        assert!(!script_ok("123 !?", LangCode::En, &cfg));
        // 18 Bengali letters + 2 Latin = 10% foreign
        let mixed = format!("{} PM", "\u{995}".repeat(18));
        assert!(script_ok(&mixed, LangCode::Bn, &cfg));
        let heavy = format!("{} PMOX", "\u{995}".repeat(6));
        assert!(!script_ok(&heavy, LangCode::Bn, &cfg));
    }

    fn sp(src: &str, tgt: &str) -> SentencePair {
        SentencePair {
            src_lang: LangCode::Hi,
            tgt_lang: LangCode::En,
            src_sentence: src.into(),
            tgt_sentence: tgt.into(),
            score: 1.0,
            src_doc: "s".into(),
            tgt_doc: "t".into(),
            method: AlignMethod::Bleualign,
        }
    }

    #[test]
    fn crafted_five() {
        let cfg = FilterConfig::default();
        let pairs = vec![
            sp("राम घर गया", "Ram went home"),
            sp("राम", "Ram went home today with his friends"),
            sp("सीता आई", "Sita came"),
            sp("Sita came", "Sita came"),
            sp("वह पढ़ता है", "he reads"),
        ];
        let out = apply_filters(&pairs, LangCode::Hi, LangCode::En, &cfg);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], pairs[0]);
        assert_eq!(out[1], pairs[2]);
        assert_eq!(out[2], pairs[4]);
    }

    #[test]
    fn duplicates_dropped_once() {
        let cfg = FilterConfig::default();
        let pairs = vec![sp("राम घर", "Ram home"), sp("राम  घर", "Ram home")];
        let once = apply_filters(&pairs, LangCode::Hi, LangCode::En, &cfg);
        assert_eq!(once.len(), 1);
        assert_eq!(apply_filters(&once, LangCode::Hi, LangCode::En, &cfg), once);
    }

    fn arb_pair() -> impl Strategy<Value = SentencePair> {
        ("[क-ह a-c]{0,12}", "[a-cक-ह ]{0,12}").prop_map(|(a, b)| sp(&a, &b))
    }

    proptest! {
        #[test]
        fn subset_idempotent_and_monotone(
            pairs in prop::collection::vec(arb_pair(), 0..30),
            lo in 0.3f64..1.0, hi in 1.0f64..3.0, foreign in 0.0f64..0.6,
        ) {
            let cfg = FilterConfig { ratio_lo: lo, ratio_hi: hi, max_foreign_fraction: foreign, min_tokens: 1 };
            let out = apply_filters(&pairs, LangCode::Hi, LangCode::En, &cfg);
            prop_assert_eq!(&apply_filters(&out, LangCode::Hi, LangCode::En, &cfg), &out);
            let mut it = pairs.iter();
            for p in &out {
                prop_assert!(it.any(|q| q == p));
            }
            let relaxed = FilterConfig { ratio_lo: lo * 0.8, ratio_hi: hi * 1.2, max_foreign_fraction: (foreign + 0.1).min(1.0), min_tokens: 1 };
            let wider = apply_filters(&pairs, LangCode::Hi, LangCode::En, &relaxed);
            prop_assert!(out.len() <= wider.len());
            for p in &out {
                prop_assert!(wider.contains(p));
            }
        }
    }
}
