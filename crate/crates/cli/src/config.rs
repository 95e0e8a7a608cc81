//! `iterate` configuration file (TOML). Every key is optional and defaults to
//! the library default; unknown keys are rejected. Relative paths are
//! resolved against the directory holding the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use itermine::pipeline::IterationConfig;
use itermine::retrieval::RetrievalTokenizer;
use itermine::subword::SubwordVocab;
use itermine::translate::DEFAULT_BATCH_SIZE;
use itermine::{FilterConfig, LangCode, TranslatorSpec};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    /// Document collection (JSONL).
    pub store: Option<PathBuf>,
    /// Root for `iter<k>/` directories.
    pub output: Option<PathBuf>,
    pub pivot: Option<LangCode>,
    pub window_days: Option<u32>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub thresholds: BTreeMap<LangCode, f64>,
    pub min_score: Option<f64>,
    pub ratio_lo: Option<f64>,
    pub ratio_hi: Option<f64>,
    pub max_foreign_fraction: Option<f64>,
    pub min_tokens: Option<usize>,
    pub stop_epsilon: Option<f64>,
    pub max_iterations: Option<usize>,
    pub truth_tolerance_days: Option<u32>,
    /// Subword vocabulary used for retrieval terms instead of words.
    pub subword_vocab: Option<PathBuf>,
    pub backend: Option<String>,
    pub dictionary: Option<PathBuf>,
    pub noise: Option<f64>,
    /// Noise for iterations 1, 2, ...; the last value repeats.
    #[serde(default)]
    pub noise_schedule: Vec<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub command: Vec<String>,
    pub batch_size: Option<usize>,
    pub cache: Option<PathBuf>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: CliConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.store,
            &mut cfg.output,
            &mut cfg.subword_vocab,
            &mut cfg.dictionary,
            &mut cfg.cache,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn iteration_config(&self) -> Result<IterationConfig> {
        let mut cfg = IterationConfig::new(self.pivot.unwrap_or(LangCode::En));
        let filter = FilterConfig::default();
        cfg.filter = FilterConfig {
            ratio_lo: self.ratio_lo.unwrap_or(filter.ratio_lo),
            ratio_hi: self.ratio_hi.unwrap_or(filter.ratio_hi),
            max_foreign_fraction: self
                .max_foreign_fraction
                .unwrap_or(filter.max_foreign_fraction),
            min_tokens: self.min_tokens.unwrap_or(filter.min_tokens),
        };
        cfg.window_days = self.window_days.unwrap_or(cfg.window_days);
        cfg.default_threshold = self.threshold.unwrap_or(cfg.default_threshold);
        cfg.thresholds = self.thresholds.clone();
        cfg.min_score = self.min_score.unwrap_or(cfg.min_score);
        cfg.stop_epsilon = self.stop_epsilon.unwrap_or(cfg.stop_epsilon);
        cfg.max_iterations = self.max_iterations.unwrap_or(cfg.max_iterations);
        cfg.truth_tolerance_days = self
            .truth_tolerance_days
            .unwrap_or(cfg.truth_tolerance_days);
        if let Some(path) = &self.subword_vocab {
            let vocab = SubwordVocab::read_tsv(path, cfg.pivot)?;
            cfg.tokenizer = RetrievalTokenizer::Subword(vocab.into());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Backend for iteration `k` (1-based).
    pub fn translator_spec(&self, k: usize, seed_override: Option<u64>) -> Result<TranslatorSpec> {
        let noise = match self.noise_schedule.as_slice() {
            [] => self.noise.unwrap_or(0.0),
            s => s[(k - 1).min(s.len() - 1)],
        };
        let seed = seed_override.or(self.seed).unwrap_or(0);
        translator_spec(
            self.backend.as_deref().unwrap_or("identity"),
            self.dictionary.clone(),
            noise,
            seed,
            self.command.clone(),
            self.batch_size.unwrap_or(DEFAULT_BATCH_SIZE),
            self.cache.clone(),
        )
    }
}

pub fn translator_spec(
    backend: &str,
    dictionary: Option<PathBuf>,
    noise: f64,
    seed: u64,
    command: Vec<String>,
    batch_size: usize,
    cache: Option<PathBuf>,
) -> Result<TranslatorSpec> {
    Ok(match backend {
        "identity" => TranslatorSpec::Identity,
        "dictionary" => TranslatorSpec::Dictionary {
            path: dictionary.context("dictionary backend needs a dictionary file")?,
            noise,
            seed,
        },
        "exec" => {
            if command.is_empty() {
                bail!("exec backend needs a command");
            }
            TranslatorSpec::Exec {
                command,
                batch_size,
            }
        }
        "cached" => TranslatorSpec::Cached {
            path: cache.context("cached backend needs a cache file")?,
        },
        other => bail!("unknown backend {other:?} (expected identity, dictionary, exec or cached)"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<CliConfig>("pivott = \"en\"").is_err());
        let cfg: CliConfig = toml::from_str("pivot = \"hi\"\n[thresholds]\nta = 0.3\n").unwrap();
        let it = cfg.iteration_config().unwrap();
        assert_eq!(it.pivot, LangCode::Hi);
        assert_eq!(it.threshold(LangCode::Ta), 0.3);
        assert_eq!(it.threshold(LangCode::Te), 0.51);
    }

    #[test]
    fn defaults_match_library() {
        let it = CliConfig::default().iteration_config().unwrap();
        let lib = IterationConfig::new(LangCode::En);
        assert_eq!(it.window_days, lib.window_days);
        assert_eq!(it.default_threshold, lib.default_threshold);
        assert_eq!(it.min_score, lib.min_score);
        assert_eq!(it.filter, lib.filter);
        assert_eq!(it.stop_epsilon, lib.stop_epsilon);
        assert_eq!(it.max_iterations, lib.max_iterations);
        assert_eq!(
            CliConfig::default().translator_spec(1, None).unwrap(),
            TranslatorSpec::Identity
        );
    }

    #[test]
    fn noise_schedule_repeats_last() {
        let cfg: CliConfig = toml::from_str(
            "backend = \"dictionary\"\ndictionary = \"d.tsv\"\nnoise_schedule = [0.8, 0.4]\n",
        )
        .unwrap();
        let noise = |k| match cfg.translator_spec(k, Some(3)).unwrap() {
            TranslatorSpec::Dictionary { noise, seed, .. } => {
                assert_eq!(seed, 3);
                noise
            }
            _ => unreachable!(),
        };
        assert_eq!((noise(1), noise(2), noise(3)), (0.8, 0.4, 0.4));
    }
}
