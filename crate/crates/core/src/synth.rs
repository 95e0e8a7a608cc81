//! Deterministic synthetic multilingual collections with known answers.
//!
//! Each story is rendered once per language, with the same concept sequence
//! in every language. Copies outside the pivot get jittered dates and may
//! lose a sentence. Distractor documents with unrelated content are mixed in.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{normalize_text, Document, DocumentStore};
use crate::error::Result;
use crate::io::write_atomic;
use crate::lang::LangCode;
use crate::retrieval::GroundTruth;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rendering {
    /// Every language uses the same Latin surface words, so the identity
    /// translator is a perfect oracle.
    Shared,
    /// Each language writes concepts as distinct words in its own script; the
    /// generated dictionary maps them into the pivot.
    Lexicon,
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub pivot: LangCode,
    /// Non-pivot languages.
    pub languages: Vec<LangCode>,
    pub stories: usize,
    /// Distractors per language, as a fraction of `stories`.
    pub distractor_fraction: f64,
    pub sentences: (usize, usize),
    pub words: (usize, usize),
    pub concepts: usize,
    pub stories_per_day: usize,
    pub ministries: usize,
    /// Chance that a non-pivot copy loses one sentence.
    pub drop_rate: f64,
    pub rendering: Rendering,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(pivot: LangCode, languages: Vec<LangCode>, stories: usize, seed: u64) -> Self {
        SynthConfig {
            pivot,
            languages,
            stories,
            distractor_fraction: 0.1,
            sentences: (4, 9),
            words: (6, 14),
            concepts: 3000,
            stories_per_day: 3,
            ministries: 40,
            drop_rate: 0.15,
            rendering: Rendering::Lexicon,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub store: DocumentStore,
    /// True (language document, pivot document) pairs per non-pivot language.
    pub truth: BTreeMap<LangCode, GroundTruth>,
    /// Four-column dictionary TSV into the pivot; empty for shared rendering.
    pub dictionary: String,
}

impl Fixture {
    /// Writes `docs.jsonl`, `dictionary.tsv` and `truth.<xx>-<pivot>.tsv`.
    pub fn write(&self, dir: &Path, pivot: LangCode) -> Result<()> {
        self.store.write_jsonl(&dir.join("docs.jsonl"))?;
        write_atomic(&dir.join("dictionary.tsv"), |w| {
            w.write_all(self.dictionary.as_bytes())
        })?;
        for (lang, truth) in &self.truth {
            let mut text = String::new();
            for (s, t) in &truth.pairs {
                text.push_str(&format!("{s}\t{t}\n"));
            }
            write_atomic(&dir.join(format!("truth.{lang}-{pivot}.tsv")), |w| {
                w.write_all(text.as_bytes())
            })?;
        }
        Ok(())
    }
}

const INDIC_CONSONANTS: [u32; 15] = [
    0x15, 0x19, 0x1A, 0x1C, 0x1E, 0x1F, 0x23, 0x24, 0x28, 0x2A, 0x2E, 0x2F, 0x30, 0x32, 0x38,
];
const INDIC_SIGNS: [Option<u32>; 6] = [
    None,
    Some(0x3E),
    Some(0x3F),
    Some(0x40),
    Some(0x41),
    Some(0x47),
];
const ARABIC_LETTERS: [char; 15] = [
    'ب', 'ت', 'ج', 'د', 'ر', 'س', 'ع', 'ف', 'ق', 'ل', 'م', 'ن', 'و', 'ی', 'ہ',
];
const ARABIC_SIGNS: [&str; 3] = ["", "ا", "ے"];

fn indic_base(lang: LangCode) -> Option<u32> {
    Some(match lang {
        LangCode::Hi | LangCode::Mr => 0x0900,
        LangCode::Bn => 0x0980,
        LangCode::Pa => 0x0A00,
        LangCode::Gu => 0x0A80,
        LangCode::Or => 0x0B00,
        LangCode::Ta => 0x0B80,
        LangCode::Te => 0x0C00,
        LangCode::Ml => 0x0D00,
        LangCode::En | LangCode::Ur => return None,
    })
}

fn syllables(lang: LangCode) -> Vec<String> {
    if let Some(base) = indic_base(lang) {
        let mut out = Vec::new();
        for c in INDIC_CONSONANTS {
            for s in INDIC_SIGNS {
                let mut syl = String::new();
                syl.push(char::from_u32(base + c).unwrap());
                if let Some(s) = s {
                    syl.push(char::from_u32(base + s).unwrap());
                }
                out.push(syl);
            }
        }
        return out;
    }
    if lang == LangCode::Ur {
        return ARABIC_LETTERS
            .iter()
            .flat_map(|l| ARABIC_SIGNS.iter().map(move |s| format!("{l}{s}")))
            .collect();
    }
    "bdfgklmnprstvz"
        .chars()
        .flat_map(|c| "aeiou".chars().map(move |v| format!("{c}{v}")))
        .collect()
}

/// Concept `id` spelled with the syllable table: the base-B digits of
/// `id + B`, so distinct ids give distinct words.
fn spell(id: usize, table: &[String]) -> String {
    let b = table.len();
    let mut n = id + b;
    let mut digits = Vec::new();
    while n > 0 {
        digits.push(n % b);
        n /= b;
    }
    normalize_text(
        &digits
            .iter()
            .rev()
            .map(|&d| table[d].as_str())
            .collect::<String>(),
    )
}

fn terminator(lang: LangCode) -> &'static str {
    match lang {
        LangCode::Hi | LangCode::Mr | LangCode::Bn | LangCode::Pa | LangCode::Or => "\u{964}",
        LangCode::Ur => "\u{6D4}",
        _ => ".",
    }
}

struct Lexicon {
    words: BTreeMap<LangCode, Vec<String>>,
}

impl Lexicon {
    fn new(cfg: &SynthConfig) -> Self {
        let mut words = BTreeMap::new();
        for &lang in std::iter::once(&cfg.pivot).chain(&cfg.languages) {
            let table = match cfg.rendering {
                Rendering::Shared => syllables(LangCode::En),
                Rendering::Lexicon => syllables(lang),
            };
            words.insert(lang, (0..cfg.concepts).map(|i| spell(i, &table)).collect());
        }
        Lexicon { words }
    }

    fn render(&self, lang: LangCode, rendering: Rendering, sentence: &[usize]) -> String {
        let w = &self.words[&lang];
        let mut s = sentence
            .iter()
            .map(|&c| w[c].as_str())
            .collect::<Vec<_>>()
            .join(" ");
        s.push_str(match rendering {
            Rendering::Shared => ".",
            Rendering::Lexicon => terminator(lang),
        });
        s
    }
}

fn draw_story(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let topic: Vec<usize> = (0..8).map(|_| rng.random_range(0..cfg.concepts)).collect();
    let n = rng.random_range(cfg.sentences.0..=cfg.sentences.1);
    (0..n)
        .map(|_| {
            let len = rng.random_range(cfg.words.0..=cfg.words.1);
            (0..len)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        topic[rng.random_range(0..topic.len())]
                    } else {
                        let u: f64 = rng.random();
                        ((u * u * cfg.concepts as f64) as usize).min(cfg.concepts - 1)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn generate(cfg: &SynthConfig) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lex = Lexicon::new(cfg);
    let base = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    let days = cfg.stories.div_ceil(cfg.stories_per_day.max(1)).max(1) as u64;
    let ministry = |rng: &mut ChaCha8Rng| {
        format!("Ministry {:02}", rng.random_range(0..cfg.ministries.max(1)))
    };

    let mut docs = Vec::new();
    let mut truth: BTreeMap<LangCode, GroundTruth> = cfg
        .languages
        .iter()
        .map(|&l| (l, GroundTruth::default()))
        .collect();
    for story in 0..cfg.stories {
        let content = draw_story(cfg, &mut rng);
        let date = base + Days::new((story / cfg.stories_per_day.max(1)) as u64);
        let m = ministry(&mut rng);
        let pivot_id = format!("{}-s{story:04}", cfg.pivot);
        let render = |lang, sents: &[Vec<usize>]| -> Vec<String> {
            sents
                .iter()
                .map(|s| lex.render(lang, cfg.rendering, s))
                .collect()
        };
        docs.push(
            Document::new(pivot_id.clone(), cfg.pivot, render(cfg.pivot, &content))
                .with_date(date)
                .with_ministry(m.clone()),
        );
        for &lang in &cfg.languages {
            let mut sents = content.clone();
            if sents.len() > 1 && rng.random_bool(cfg.drop_rate) {
                sents.remove(rng.random_range(0..sents.len()));
            }
            let jitter: i64 = match rng.random_range(0..20) {
                0..=2 => -1,
                3..=5 => 1,
                _ => 0,
            };
            let d = if jitter < 0 {
                date - Days::new(1)
            } else {
                date + Days::new(jitter as u64)
            };
            let id = format!("{lang}-s{story:04}");
            docs.push(
                Document::new(id.clone(), lang, render(lang, &sents))
                    .with_date(d)
                    .with_ministry(m.clone()),
            );
            truth
                .get_mut(&lang)
                .unwrap()
                .pairs
                .insert((id, pivot_id.clone()));
        }
    }
    let distractors = (cfg.stories as f64 * cfg.distractor_fraction).round() as usize;
    for &lang in std::iter::once(&cfg.pivot).chain(&cfg.languages) {
        for i in 0..distractors {
            let content = draw_story(cfg, &mut rng);
            let date = base + Days::new(rng.random_range(0..days));
            let m = ministry(&mut rng);
            let sents = content
                .iter()
                .map(|s| lex.render(lang, cfg.rendering, s))
                .collect();
            docs.push(
                Document::new(format!("{lang}-x{i:04}"), lang, sents)
                    .with_date(date)
                    .with_ministry(m),
            );
        }
    }

    let mut dictionary = String::new();
    if cfg.rendering == Rendering::Lexicon {
        let pivot_words = &lex.words[&cfg.pivot];
        for &lang in &cfg.languages {
            for (w, p) in lex.words[&lang].iter().zip(pivot_words) {
                dictionary.push_str(&format!("{lang}\t{}\t{w}\t{p}\n", cfg.pivot));
            }
            let (t, pt) = (terminator(lang), terminator(cfg.pivot));
            if t != pt {
                dictionary.push_str(&format!("{lang}\t{}\t{t}\t{pt}\n", cfg.pivot));
            }
        }
    }
    Fixture {
        store: DocumentStore::new(docs).expect("generated ids are unique"),
        truth,
        dictionary,
    }
}
