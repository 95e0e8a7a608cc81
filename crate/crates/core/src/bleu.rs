//! BLEU with the conventions of the `case.mixed+numrefs.1+smooth.exp+tok.13a`
//! signature: mteval-v13a tokenization, no case folding, one reference,
//! exponential smoothing of zero-match precisions.

use std::collections::HashMap;
use std::fmt;
use std::ops::AddAssign;
use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

struct Rules {
    symbols: Regex,
    period_after: Regex,
    period_before: Regex,
    dash_after_digit: Regex,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        symbols: Regex::new(r"([\{-\~\[-`\x20-\&\(-\+:-@/])").unwrap(),
        period_after: Regex::new(r"([^0-9])([\.,])").unwrap(),
        period_before: Regex::new(r"([\.,])([^0-9])").unwrap(),
        dash_after_digit: Regex::new(r"([0-9])(-)").unwrap(),
    })
}

/// mteval-v13a tokenization.
pub fn tokenize_13a(text: &str) -> Vec<String> {
    let mut line = text
        .replace("<skipped>", "")
        .replace("-\n", "")
        .replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let r = rules();
    let line = format!(" {line} ");
    let line = r.symbols.replace_all(&line, " ${1} ");
    let line = r.period_after.replace_all(&line, "${1} ${2} ");
    let line = r.period_before.replace_all(&line, " ${1} ${2}");
    let line = r.dash_after_digit.replace_all(&line, "${1} ${2} ");
    line.split_whitespace().map(str::to_string).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Smoothing {
    None,
    #[default]
    Exp,
}

/// Maps token strings to dense ids so n-grams can be packed into integers.
#[derive(Clone, Debug, Default)]
pub struct Interner(HashMap<String, u32>);

impl Interner {
    pub fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.0.get(token) {
            return id;
        }
        let id = self.0.len() as u32;
        self.0.insert(token.to_string(), id);
        id
    }

    pub fn intern_all(&mut self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.intern(t)).collect()
    }
}

/// Sorted n-gram counts of one segment, orders 1..=max_n.
#[derive(Clone, Debug)]
pub struct NgramProfile {
    len: usize,
    orders: Vec<Vec<(u128, u32)>>,
}

impl NgramProfile {
    pub fn new(ids: &[u32], max_n: usize) -> Self {
        let orders = (1..=max_n)
            .map(|n| {
                let mut grams: Vec<u128> = ids
                    .windows(n)
                    .map(|w| w.iter().fold(0u128, |acc, &id| (acc << 32) | id as u128))
                    .collect();
                grams.sort_unstable();
                let mut counted: Vec<(u128, u32)> = Vec::new();
                for g in grams {
                    match counted.last_mut() {
                        Some((last, c)) if *last == g => *c += 1,
                        _ => counted.push((g, 1)),
                    }
                }
                counted
            })
            .collect();
        NgramProfile {
            len: ids.len(),
            orders,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Sufficient statistics: clipped matches and totals per order, plus lengths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn between(hyp: &NgramProfile, reference: &NgramProfile, max_n: usize) -> Self {
        let mut matches = vec![0; max_n];
        let mut totals = vec![0; max_n];
        for n in 0..max_n {
            let (h, r) = (&hyp.orders[n], &reference.orders[n]);
            totals[n] = hyp.len.saturating_sub(n) as u64;
            let (mut i, mut j) = (0, 0);
            while i < h.len() && j < r.len() {
                match h[i].0.cmp(&r[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        matches[n] += h[i].1.min(r[j].1) as u64;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        BleuStats {
            matches,
            totals,
            hyp_len: hyp.len as u64,
            ref_len: reference.len as u64,
        }
    }

    pub fn from_text(hyp: &str, reference: &str, max_n: usize) -> Self {
        let mut interner = Interner::default();
        let h = interner.intern_all(&tokenize_13a(hyp));
        let r = interner.intern_all(&tokenize_13a(reference));
        BleuStats::between(
            &NgramProfile::new(&h, max_n),
            &NgramProfile::new(&r, max_n),
            max_n,
        )
    }

    /// Turns counts into a score.
    ///
    /// The k-th order with zero matches gets precision `1 / (2^k * total)`
    /// under exponential smoothing. Orders the hypothesis is too short to
    /// contain are left out of the geometric mean, so a short segment scored
    /// against itself still reaches 100. Without a single matching n-gram the
    /// score is 0 whatever the smoothing.
    pub fn score(&self, smoothing: Smoothing) -> BleuScore {
        let max_n = self.totals.len();
        let mut precisions = vec![0.0; max_n];
        let brevity_penalty = if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        };
        if self.hyp_len == 0 || self.matches.iter().all(|&m| m == 0) {
            return BleuScore {
                score: 0.0,
                precisions,
                brevity_penalty,
                hyp_len: self.hyp_len,
                ref_len: self.ref_len,
            };
        }
        let mut order = max_n;
        let mut smooth = 1.0;
        for (n, p) in precisions.iter_mut().enumerate().take(max_n) {
            let (m, t) = (self.matches[n], self.totals[n]);
            if t == 0 {
                order = n;
                break;
            }
            *p = if m > 0 {
                m as f64 / t as f64
            } else if smoothing == Smoothing::Exp {
                smooth *= 2.0;
                1.0 / (smooth * t as f64)
            } else {
                0.0
            };
        }
        let used = &precisions[..order];
        let score = if used.contains(&0.0) {
            0.0
        } else {
            let mean_log = used.iter().map(|p| p.ln()).sum::<f64>() / order as f64;
            brevity_penalty * mean_log.exp() * 100.0
        };
        BleuScore {
            score,
            precisions,
            brevity_penalty,
            hyp_len: self.hyp_len,
            ref_len: self.ref_len,
        }
    }
}

impl AddAssign<&BleuStats> for BleuStats {
    fn add_assign(&mut self, rhs: &BleuStats) {
        if self.totals.is_empty() {
            self.matches = vec![0; rhs.totals.len()];
            self.totals = vec![0; rhs.totals.len()];
        }
        for n in 0..self.totals.len() {
            self.matches[n] += rhs.matches[n];
            self.totals[n] += rhs.totals[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BleuScore {
    /// 0..=100.
    pub score: f64,
    /// Modified precisions as fractions, after smoothing.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl fmt::Display for BleuScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let precisions: Vec<String> = self
            .precisions
            .iter()
            .map(|p| format!("{:.1}", p * 100.0))
            .collect();
        write!(
            f,
            "BLEU = {:.2} {} (BP = {:.3}, hyp_len = {}, ref_len = {})",
            self.score,
            precisions.join("/"),
            self.brevity_penalty,
            self.hyp_len,
            self.ref_len
        )
    }
}

fn check_order(max_n: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&max_n) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "BLEU order {max_n} outside 1..={MAX_ORDER}"
        )))
    }
}

pub fn sentence_bleu(
    hyp: &str,
    reference: &str,
    max_n: usize,
    smoothing: Smoothing,
) -> Result<BleuScore> {
    check_order(max_n)?;
    Ok(BleuStats::from_text(hyp, reference, max_n).score(smoothing))
}

/// Corpus-level BLEU: counts are summed over all segments before precisions
/// are taken.
pub fn corpus_bleu<H: AsRef<str>, R: AsRef<str>>(
    hyps: &[H],
    refs: &[R],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<BleuScore> {
    check_order(max_n)?;
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    let mut total = BleuStats {
        matches: vec![0; max_n],
        totals: vec![0; max_n],
        ..BleuStats::default()
    };
    for (h, r) in hyps.iter().zip(refs) {
        total += &BleuStats::from_text(h.as_ref(), r.as_ref(), max_n);
    }
    Ok(total.score(smoothing))
}
