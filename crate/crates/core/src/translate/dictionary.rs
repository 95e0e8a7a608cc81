use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::Translator;
use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::lang::LangCode;

/// Token-substitution translator.
///
/// Dictionary files are TSV. Two-column rows (`source<TAB>target`) apply to
/// every direction; four-column rows (`src_lang<TAB>tgt_lang<TAB>source<TAB>target`)
/// apply to one direction and take precedence.
///
/// With noise `p`, each token is left untranslated with probability `p`. The
/// draw for a token depends only on the seed, the direction, the sentence and
/// the token position, so a run at lower noise translates a superset of the
/// tokens translated at higher noise.
#[derive(Clone, Debug, Default)]
pub struct DictionaryTranslator {
    any: HashMap<String, String>,
    directed: HashMap<(LangCode, LangCode), HashMap<String, String>>,
    noise: f64,
    seed: u64,
}

impl DictionaryTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dict = DictionaryTranslator::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                [src, tgt] => dict.insert_any(src, tgt),
                [sl, tl, src, tgt] => {
                    let sl = sl
                        .parse()
                        .map_err(|_| Error::parse(i + 1, format!("unknown language {sl:?}")))?;
                    let tl = tl
                        .parse()
                        .map_err(|_| Error::parse(i + 1, format!("unknown language {tl:?}")))?;
                    dict.insert(sl, tl, src, tgt);
                }
                _ => {
                    return Err(Error::parse(
                        i + 1,
                        format!("expected 2 or 4 tab-separated fields, found {}", f.len()),
                    ))
                }
            }
        }
        Ok(dict)
    }

    pub fn insert_any(&mut self, src: &str, tgt: &str) {
        self.any.insert(src.to_string(), tgt.to_string());
    }

    pub fn insert(&mut self, src_lang: LangCode, tgt_lang: LangCode, src: &str, tgt: &str) {
        self.directed
            .entry((src_lang, tgt_lang))
            .or_default()
            .insert(src.to_string(), tgt.to_string());
    }

    pub fn with_noise(mut self, noise: f64, seed: u64) -> Self {
        self.noise = noise;
        self.seed = seed;
        self
    }

    fn lookup(&self, src: LangCode, tgt: LangCode, token: &str) -> Option<&str> {
        self.directed
            .get(&(src, tgt))
            .and_then(|m| m.get(token))
            .or_else(|| self.any.get(token))
            .map(String::as_str)
    }

    /// Whole-token lookup first; failing that, the alphanumeric core is
    /// looked up with leading and trailing punctuation mapped character by
    /// character.
    fn map_token(&self, src: LangCode, tgt: LangCode, token: &str) -> String {
        if let Some(t) = self.lookup(src, tgt, token) {
            return t.to_string();
        }
        let core_start = token
            .char_indices()
            .find(|(_, c)| c.is_alphanumeric())
            .map_or(token.len(), |(i, _)| i);
        let core_end = token
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_alphanumeric())
            .map_or(core_start, |(i, c)| i + c.len_utf8());
        let (lead, core, trail) = (
            &token[..core_start],
            &token[core_start..core_end],
            &token[core_end..],
        );
        let affix = |s: &str| -> String {
            s.chars()
                .map(|c| {
                    let mut b = [0; 4];
                    self.lookup(src, tgt, c.encode_utf8(&mut b))
                        .map_or_else(|| c.to_string(), str::to_string)
                })
                .collect()
        };
        let core = self.lookup(src, tgt, core).unwrap_or(core);
        format!("{}{}{}", affix(lead), core, affix(trail))
    }

    fn sentence_rng(&self, src: LangCode, tgt: LangCode, line: &str) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(src.as_str());
        h.update(tgt.as_str());
        h.update(line.as_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest[..32]);
        ChaCha8Rng::from_seed(seed)
    }

    pub fn translate_line(&self, src: LangCode, tgt: LangCode, line: &str) -> String {
        let mut rng = self.sentence_rng(src, tgt, line);
        line.split_whitespace()
            .map(|tok| {
                let keep: f64 = rng.random();
                if keep < self.noise {
                    tok.to_string()
                } else {
                    self.map_token(src, tgt, tok)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Translator for DictionaryTranslator {
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        Ok(lines
            .iter()
            .map(|l| self.translate_line(src, tgt, l))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HI: LangCode = LangCode::Hi;
    const EN: LangCode = LangCode::En;

    #[test]
    fn substitutes_tokens() {
        let d = DictionaryTranslator::parse("chat\tcat\n").unwrap();
        assert_eq!(d.translate_line(HI, EN, "le chat"), "le cat");
    }

    #[test]
    fn directed_rows_win_and_affixes_map() {
        let d =
            DictionaryTranslator::parse("a\tgeneric\nhi\ten\ta\tspecific\nhi\ten\t\u{964}\t.\n")
                .unwrap();
        assert_eq!(d.translate_line(HI, EN, "a a\u{964}"), "specific specific.");
        assert_eq!(d.translate_line(LangCode::Ta, EN, "(a)"), "(generic)");
    }

    #[test]
    fn bad_row_is_reported() {
        let err = DictionaryTranslator::parse("a\tb\nonly-one\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
    }

    #[test]
    fn noise_is_deterministic_and_nested() {
        let mut d = DictionaryTranslator::new();
        for w in ["a", "b", "c", "d", "e", "f", "g", "h"] {
            d.insert_any(w, &w.to_uppercase());
        }
        let line = "a b c d e f g h a b c d e f g h";
        let at = |p: f64| d.clone().with_noise(p, 7).translate_line(HI, EN, line);
        assert_eq!(at(0.5), at(0.5));
        assert_eq!(at(0.0), line.to_uppercase());
        assert_eq!(at(1.0), line);
        let translated = |s: String| -> Vec<bool> {
            s.split(' ')
                .map(|t| t.chars().all(|c| c.is_uppercase()))
                .collect()
        };
        let (lo, mid, hi) = (
            translated(at(0.2)),
            translated(at(0.5)),
            translated(at(0.8)),
        );
        for i in 0..lo.len() {
            assert!(!hi[i] || mid[i]);
            assert!(!mid[i] || lo[i]);
        }
    }
}
