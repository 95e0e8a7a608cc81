//! Translation backends. The pipeline only ever talks to a [`Translator`];
//! model training lives outside this crate and is plugged in through the
//! `exec` backend or a precomputed cache.

mod cache;
mod dictionary;
mod exec;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::lang::LangCode;

pub use cache::{build_cache, CachedTranslator, CACHE_HEADER};
pub use dictionary::DictionaryTranslator;
pub use exec::ExecTranslator;

pub const DEFAULT_BATCH_SIZE: usize = 64;

pub trait Translator: Send + Sync {
    /// Returns exactly one output line per input line, in order.
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationBatch {
    pub src: LangCode,
    pub tgt: LangCode,
    pub lines: Vec<String>,
}

/// Declarative backend selection.
#[derive(Clone, Debug, PartialEq)]
pub enum TranslatorSpec {
    Identity,
    Dictionary {
        path: PathBuf,
        /// Probability of leaving a token untranslated.
        noise: f64,
        seed: u64,
    },
    Exec {
        /// Program followed by its fixed arguments.
        command: Vec<String>,
        batch_size: usize,
    },
    Cached {
        path: PathBuf,
    },
}

impl TranslatorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TranslatorSpec::Identity => "identity",
            TranslatorSpec::Dictionary { .. } => "dictionary",
            TranslatorSpec::Exec { .. } => "exec",
            TranslatorSpec::Cached { .. } => "cached",
        }
    }

    pub fn build(&self) -> Result<Box<dyn Translator>> {
        Ok(match self {
            TranslatorSpec::Identity => Box::new(Identity),
            TranslatorSpec::Dictionary { path, noise, seed } => {
                if !(0.0..=1.0).contains(noise) {
                    return Err(Error::Config(format!("noise {noise} outside [0, 1]")));
                }
                Box::new(DictionaryTranslator::from_file(path)?.with_noise(*noise, *seed))
            }
            TranslatorSpec::Exec {
                command,
                batch_size,
            } => Box::new(ExecTranslator::new(command.clone(), *batch_size)?),
            TranslatorSpec::Cached { path } => Box::new(CachedTranslator::from_file(path)?),
        })
    }
}

/// Builds the backend described by `spec` and runs one batch through it.
pub fn translate_batch(spec: &TranslatorSpec, batch: &TranslationBatch) -> Result<Vec<String>> {
    if batch.src == batch.tgt && *spec != TranslatorSpec::Identity {
        return Err(Error::Config(format!(
            "{} backend cannot translate {} into itself",
            spec.kind(),
            batch.src
        )));
    }
    spec.build()?.translate(batch.src, batch.tgt, &batch.lines)
}

pub struct Identity;

impl Translator for Identity {
    fn translate(&self, _src: LangCode, _tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        Ok(lines.to_vec())
    }
}

impl<T: Translator + ?Sized> Translator for Box<T> {
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        (**self).translate(src, tgt, lines)
    }
}

impl<T: Translator + ?Sized> Translator for &T {
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        (**self).translate(src, tgt, lines)
    }
}

type MemoKey = (LangCode, LangCode, String);

/// In-memory cache in front of another translator. Each distinct sentence is
/// sent to the backend once.
pub struct Memo<T> {
    inner: T,
    seen: Mutex<HashMap<MemoKey, String>>,
}

impl<T: Translator> Memo<T> {
    pub fn new(inner: T) -> Self {
        Memo {
            inner,
            seen: Mutex::new(HashMap::new()),
        }
    }
}

impl<T: Translator> Translator for Memo<T> {
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        let missing: Vec<String> = {
            let seen = self.seen.lock().unwrap();
            let mut missing: Vec<String> = Vec::new();
            let mut queued = std::collections::HashSet::new();
            for line in lines {
                if !seen.contains_key(&(src, tgt, line.clone())) && queued.insert(line.as_str()) {
                    missing.push(line.clone());
                }
            }
            missing
        };
        if !missing.is_empty() {
            let out = self.inner.translate(src, tgt, &missing)?;
            if out.len() != missing.len() {
                return Err(Error::LineCountMismatch {
                    expected: missing.len(),
                    got: out.len(),
                });
            }
            let mut seen = self.seen.lock().unwrap();
            for (line, t) in missing.into_iter().zip(out) {
                seen.insert((src, tgt, line), t);
            }
        }
        let seen = self.seen.lock().unwrap();
        Ok(lines
            .iter()
            .map(|l| seen[&(src, tgt, l.clone())].clone())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn identity_is_verbatim() {
        let batch = TranslationBatch {
            src: LangCode::Hi,
            tgt: LangCode::En,
            lines: vec!["x".into(), "y".into()],
        };
        assert_eq!(
            translate_batch(&TranslatorSpec::Identity, &batch).unwrap(),
            batch.lines
        );
    }

    #[test]
    fn same_language_needs_identity() {
        let batch = TranslationBatch {
            src: LangCode::Hi,
            tgt: LangCode::Hi,
            lines: vec!["x".into()],
        };
        let spec = TranslatorSpec::Cached {
            path: "nope".into(),
        };
        assert!(matches!(
            translate_batch(&spec, &batch),
            Err(Error::Config(_))
        ));
    }

    struct Counting(AtomicUsize);

    impl Translator for Counting {
        fn translate(&self, _: LangCode, _: LangCode, lines: &[String]) -> Result<Vec<String>> {
            self.0.fetch_add(lines.len(), Ordering::SeqCst);
            Ok(lines.iter().map(|l| l.to_uppercase()).collect())
        }
    }

    #[test]
    fn memo_translates_each_sentence_once() {
        let memo = Memo::new(Counting(AtomicUsize::new(0)));
        let lines: Vec<String> = ["a", "b", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            memo.translate(LangCode::Hi, LangCode::En, &lines).unwrap(),
            ["A", "B", "A"]
        );
        memo.translate(LangCode::Hi, LangCode::En, &lines).unwrap();
        assert_eq!(memo.inner.0.load(Ordering::SeqCst), 2);
    }
}
