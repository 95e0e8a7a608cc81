use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::SubwordVocab;
use crate::error::{Error, Result};
use crate::lang::LangCode;

const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct UnigramConfig {
    pub target_size: usize,
    /// Longest seed candidate, in characters.
    pub seed_max_len: usize,
    /// Minimum corpus frequency for multi-character seed candidates.
    pub freq_floor: u64,
    /// Share of multi-character tokens dropped per pruning round.
    pub prune_fraction: f64,
    pub em_steps_per_round: usize,
}

impl Default for UnigramConfig {
    fn default() -> Self {
        UnigramConfig {
            target_size: 4000,
            seed_max_len: 8,
            freq_floor: 2,
            prune_fraction: 0.2,
            em_steps_per_round: 2,
        }
    }
}

/// Corpus log-likelihood around one EM step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceStep {
    pub round: usize,
    pub vocab_size: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Copy)]
struct Edge {
    start: u32,
    end: u32,
    token: u32,
}

struct Word {
    count: f64,
    len: usize,
    edges: Vec<Edge>,
}

/// Stepwise unigram-LM trainer. [`train_unigram`] drives it to completion;
/// the individual steps are public so that likelihood can be checked between
/// them.
pub struct UnigramTrainer {
    config: UnigramConfig,
    words: Vec<(Vec<char>, f64)>,
    lattices: Vec<Word>,
    pieces: Vec<String>,
    log_probs: Vec<f64>,
    round: usize,
    trace: Vec<TraceStep>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl UnigramTrainer {
    /// Splits the corpus into words and seeds the candidate pool: every
    /// character, plus every substring of 2..=`seed_max_len` characters
    /// occurring at least `freq_floor` times. Initial probabilities are
    /// proportional to frequency.
    pub fn new<S: AsRef<str>>(corpus: &[S], config: UnigramConfig) -> Result<Self> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for sentence in corpus {
            for word in sentence.as_ref().split_whitespace() {
                *counts.entry(word).or_default() += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut words: Vec<(Vec<char>, f64)> = counts
            .into_iter()
            .map(|(w, c)| (w.chars().collect(), c as f64))
            .collect();
        words.sort_by(|a, b| a.0.cmp(&b.0));

        let chars: BTreeSet<char> = words.iter().flat_map(|(w, _)| w.iter().copied()).collect();
        if config.target_size < chars.len() {
            return Err(Error::TargetTooSmall {
                target: config.target_size,
                chars: chars.len(),
            });
        }

        let mut freq: HashMap<String, f64> = HashMap::new();
        for (w, c) in &words {
            for start in 0..w.len() {
                for len in 1..=config.seed_max_len.max(1).min(w.len() - start) {
                    let s: String = w[start..start + len].iter().collect();
                    *freq.entry(s).or_default() += c;
                }
            }
        }
        let mut seeds: Vec<(String, f64)> = freq
            .into_iter()
            .filter(|(s, f)| s.chars().count() == 1 || *f >= config.freq_floor as f64)
            .collect();
        seeds.sort_by(|a, b| a.0.cmp(&b.0));
        let total: f64 = seeds.iter().map(|(_, f)| f).sum();

        let mut trainer = UnigramTrainer {
            config,
            words,
            lattices: Vec::new(),
            pieces: seeds.iter().map(|(s, _)| s.clone()).collect(),
            log_probs: seeds.iter().map(|(_, f)| (f / total).ln()).collect(),
            round: 0,
            trace: Vec::new(),
        };
        trainer.rebuild_lattices();
        Ok(trainer)
    }

    pub fn config(&self) -> &UnigramConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Current (token, log-probability) pairs.
    pub fn pieces(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.pieces
            .iter()
            .map(String::as_str)
            .zip(self.log_probs.iter().copied())
    }

    /// Distinct training words with their corpus counts.
    pub fn words(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.words.iter().map(|(w, c)| (w.iter().collect(), *c))
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    fn rebuild_lattices(&mut self) {
        let index: HashMap<&str, u32> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i as u32))
            .collect();
        let max_len = self
            .pieces
            .iter()
            .map(|p| p.chars().count())
            .max()
            .unwrap_or(1);
        self.lattices = self
            .words
            .par_iter()
            .map(|(w, c)| {
                let mut edges = Vec::new();
                let mut buf = String::new();
                for start in 0..w.len() {
                    buf.clear();
                    for end in start + 1..=(start + max_len).min(w.len()) {
                        buf.push(w[end - 1]);
                        if let Some(&token) = index.get(buf.as_str()) {
                            edges.push(Edge {
                                start: start as u32,
                                end: end as u32,
                                token,
                            });
                        }
                    }
                }
                Word {
                    count: *c,
                    len: w.len(),
                    edges,
                }
            })
            .collect();
    }

    fn forward(&self, word: &Word) -> Vec<f64> {
        let mut alpha = vec![f64::NEG_INFINITY; word.len + 1];
        alpha[0] = 0.0;
        // edges are ordered by start position, so alpha[start] is final when read
        for e in &word.edges {
            let lp = self.log_probs[e.token as usize];
            let v = alpha[e.start as usize] + lp;
            alpha[e.end as usize] = log_add(alpha[e.end as usize], v);
        }
        alpha
    }

    /// Corpus log-likelihood under the current parameters, summing over every
    /// segmentation of every word.
    pub fn log_likelihood(&self) -> f64 {
        let parts: Vec<f64> = self
            .lattices
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|w| w.count * self.forward(w)[w.len])
                    .sum::<f64>()
            })
            .collect();
        parts.into_iter().sum()
    }

    /// One expectation-maximization step at fixed vocabulary. Returns the
    /// log-likelihood before and after the update.
    pub fn em_step(&mut self) -> TraceStep {
        let n = self.pieces.len();
        let parts: Vec<(Vec<f64>, f64)> = self
            .lattices
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut expected = vec![0.0; n];
                let mut ll = 0.0;
                for w in chunk {
                    let alpha = self.forward(w);
                    let z = alpha[w.len];
                    if z == f64::NEG_INFINITY {
                        ll = f64::NEG_INFINITY;
                        continue;
                    }
                    ll += w.count * z;
                    let mut beta = vec![f64::NEG_INFINITY; w.len + 1];
                    beta[w.len] = 0.0;
                    for e in w.edges.iter().rev() {
                        let lp = self.log_probs[e.token as usize];
                        let v = beta[e.end as usize] + lp;
                        beta[e.start as usize] = log_add(beta[e.start as usize], v);
                    }
                    for e in &w.edges {
                        let lp = self.log_probs[e.token as usize];
                        let post = alpha[e.start as usize] + lp + beta[e.end as usize] - z;
                        expected[e.token as usize] += w.count * post.exp();
                    }
                }
                (expected, ll)
            })
            .collect();

        let mut expected = vec![0.0; n];
        let mut before = 0.0;
        for (part, ll) in parts {
            for (acc, v) in expected.iter_mut().zip(part) {
                *acc += v;
            }
            before += ll;
        }
        let total: f64 = expected.iter().sum();
        for (lp, c) in self.log_probs.iter_mut().zip(&expected) {
            *lp = (c / total).ln();
        }
        let after = self.log_likelihood();
        let step = TraceStep {
            round: self.round,
            vocab_size: n,
            before,
            after,
        };
        self.trace.push(step);
        step
    }

    /// Drops the multi-character tokens whose removal costs the least
    /// likelihood, never going below the target size. Returns how many were
    /// removed.
    ///
    /// Loss of a token is its Viterbi frequency times the log-probability gap
    /// between the token and the best segmentation of its own string without
    /// it.
    pub fn prune(&mut self) -> usize {
        let target = self.config.target_size;
        let multi: Vec<usize> = (0..self.pieces.len())
            .filter(|&i| self.pieces[i].chars().count() > 1)
            .collect();
        let budget = self.pieces.len().saturating_sub(target);
        let k = ((multi.len() as f64 * self.config.prune_fraction).ceil() as usize)
            .min(budget)
            .min(multi.len());
        if k == 0 {
            return 0;
        }

        let mut viterbi_freq = vec![0.0; self.pieces.len()];
        for w in &self.lattices {
            for token in self.viterbi(w) {
                viterbi_freq[token as usize] += w.count;
            }
        }

        let index: HashMap<&str, usize> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let mut losses: Vec<(f64, usize)> = multi
            .iter()
            .map(|&i| {
                let f = viterbi_freq[i];
                if f == 0.0 {
                    return (0.0, i);
                }
                let alt = self.best_without(i, &index);
                (f * (self.log_probs[i] - alt), i)
            })
            .collect();
        losses.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| self.pieces[a.1].cmp(&self.pieces[b.1]))
        });
        let removed: BTreeSet<usize> = losses.iter().take(k).map(|&(_, i)| i).collect();

        let mut pieces = Vec::with_capacity(self.pieces.len() - k);
        let mut probs = Vec::with_capacity(self.pieces.len() - k);
        for (i, (p, lp)) in self
            .pieces
            .drain(..)
            .zip(self.log_probs.drain(..))
            .enumerate()
        {
            if !removed.contains(&i) {
                pieces.push(p);
                probs.push(lp.exp());
            }
        }
        floor_characters(&pieces, &mut probs);
        let total: f64 = probs.iter().sum();
        self.log_probs = probs.into_iter().map(|p| (p / total).ln()).collect();
        self.pieces = pieces;
        self.rebuild_lattices();
        self.round += 1;
        k
    }

    fn viterbi(&self, w: &Word) -> Vec<u32> {
        let mut best = vec![f64::NEG_INFINITY; w.len + 1];
        let mut back: Vec<Option<(u32, u32)>> = vec![None; w.len + 1];
        best[0] = 0.0;
        for e in &w.edges {
            let v = best[e.start as usize] + self.log_probs[e.token as usize];
            if v > best[e.end as usize] {
                best[e.end as usize] = v;
                back[e.end as usize] = Some((e.start, e.token));
            }
        }
        let mut tokens = Vec::new();
        let mut end = w.len;
        while let Some((start, token)) = back[end] {
            tokens.push(token);
            end = start as usize;
        }
        tokens
    }

    fn best_without(&self, skip: usize, index: &HashMap<&str, usize>) -> f64 {
        let chars: Vec<char> = self.pieces[skip].chars().collect();
        let n = chars.len();
        let mut best = vec![f64::NEG_INFINITY; n + 1];
        best[0] = 0.0;
        for start in 0..n {
            if best[start] == f64::NEG_INFINITY {
                continue;
            }
            let mut buf = String::new();
            for end in start + 1..=n {
                buf.push(chars[end - 1]);
                if start == 0 && end == n {
                    break;
                }
                if let Some(&i) = index.get(buf.as_str()) {
                    let v = best[start] + self.log_probs[i];
                    if v > best[end] {
                        best[end] = v;
                    }
                }
            }
        }
        best[n]
    }

    /// Finalizes into a vocabulary. Characters whose probability vanished get
    /// the smallest surviving probability before renormalization.
    pub fn finish(self, lang: LangCode) -> SubwordVocab {
        let mut probs: Vec<f64> = self.log_probs.iter().map(|lp| lp.exp()).collect();
        floor_characters(&self.pieces, &mut probs);
        let total: f64 = probs.iter().sum();
        SubwordVocab::new(
            lang,
            self.pieces
                .into_iter()
                .zip(probs)
                .map(|(t, p)| (t, (p / total).ln())),
        )
    }
}

fn floor_characters(pieces: &[String], probs: &mut [f64]) {
    let floor = probs
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    for (p, prob) in pieces.iter().zip(probs.iter_mut()) {
        if *prob <= 0.0 && p.chars().count() == 1 {
            *prob = floor;
        }
    }
}

/// Trains a unigram vocabulary: EM rounds alternating with pruning until the
/// vocabulary reaches `target_size` or the candidate pool is exhausted.
pub fn train_unigram<S: AsRef<str>>(
    lang: LangCode,
    corpus: &[S],
    config: &UnigramConfig,
) -> Result<SubwordVocab> {
    Ok(run(corpus, config)?.finish(lang))
}

pub(crate) fn run<S: AsRef<str>>(corpus: &[S], config: &UnigramConfig) -> Result<UnigramTrainer> {
    let mut trainer = UnigramTrainer::new(corpus, config.clone())?;
    loop {
        for _ in 0..config.em_steps_per_round.max(1) {
            trainer.em_step();
        }
        if trainer.len() <= config.target_size || trainer.prune() == 0 {
            break;
        }
    }
    Ok(trainer)
}
