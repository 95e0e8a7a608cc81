use rayon::prelude::*;

use super::gale_church::{gale_church, BeadKind};
use crate::bleu::{tokenize_13a, BleuStats, Interner, NgramProfile, Smoothing};

const ORDER: usize = 2;

/// Row-major `src x tgt` matrix of symmetrized sentence BLEU-2 in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        SimilarityMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Entry (i, j) is the mean of smoothed BLEU-2 in both directions between
/// `translated_src[i]` and `tgt[j]`, scaled to [0, 1].
pub fn bleu_similarity_matrix<S: AsRef<str> + Sync, T: AsRef<str> + Sync>(
    translated_src: &[S],
    tgt: &[T],
) -> SimilarityMatrix {
    let mut interner = Interner::default();
    let mut profile = |s: &str| NgramProfile::new(&interner.intern_all(&tokenize_13a(s)), ORDER);
    let src: Vec<NgramProfile> = translated_src.iter().map(|s| profile(s.as_ref())).collect();
    let tgt: Vec<NgramProfile> = tgt.iter().map(|s| profile(s.as_ref())).collect();
    let cols = tgt.len();
    let data: Vec<f64> = (0..src.len() * cols)
        .into_par_iter()
        .with_min_len(256)
        .map(|k| {
            let (a, b) = (&src[k / cols], &tgt[k % cols]);
            let ab = BleuStats::between(a, b, ORDER).score(Smoothing::Exp).score;
            let ba = BleuStats::between(b, a, ORDER).score(Smoothing::Exp).score;
            ((ab + ba) / 200.0).clamp(0.0, 1.0)
        })
        .collect();
    SimilarityMatrix {
        rows: src.len(),
        cols,
        data,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub src: usize,
    pub tgt: usize,
    pub score: f64,
}

/// Highest-total-score chain of 1-1 links, strictly increasing in both
/// coordinates, using only entries `>= min_score`. On equal totals the chain
/// without the extra link is preferred.
pub fn best_chain(matrix: &SimilarityMatrix, min_score: f64) -> Vec<Link> {
    let (n, m) = (matrix.rows, matrix.cols);
    let w = m + 1;
    let mut best = vec![0.0f64; (n + 1) * w];
    for i in 1..=n {
        for j in 1..=m {
            let mut v = best[(i - 1) * w + j].max(best[i * w + j - 1]);
            let s = matrix.get(i - 1, j - 1);
            if s >= min_score {
                v = v.max(best[(i - 1) * w + j - 1] + s);
            }
            best[i * w + j] = v;
        }
    }
    let mut links = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        let here = best[i * w + j];
        if here == best[(i - 1) * w + j] {
            i -= 1;
        } else if here == best[i * w + j - 1] {
            j -= 1;
        } else {
            links.push(Link {
                src: i - 1,
                tgt: j - 1,
                score: matrix.get(i - 1, j - 1),
            });
            i -= 1;
            j -= 1;
        }
    }
    links.reverse();
    links
}

/// MT-based sentence alignment over a precomputed similarity matrix.
///
/// Anchors come from [`best_chain`]. When at least one anchor exists, each
/// unaligned stretch between anchors (and before the first and after the last)
/// is aligned by sentence length, and its 1-1 beads are kept if their
/// similarity reaches `min_score / 2`. Without anchors the result is empty.
pub fn bleualign_with_matrix(
    matrix: &SimilarityMatrix,
    src_lens: &[usize],
    tgt_lens: &[usize],
    min_score: f64,
) -> Vec<Link> {
    let anchors = best_chain(matrix, min_score);
    if anchors.is_empty() {
        return anchors;
    }
    let mut out = Vec::with_capacity(anchors.len());
    let mut prev = (0usize, 0usize);
    let ends = anchors
        .iter()
        .map(|a| (a.src, a.tgt, Some(*a)))
        .chain(std::iter::once((matrix.rows, matrix.cols, None)));
    for (si, ti, anchor) in ends {
        let (src_gap, tgt_gap) = (prev.0..si, prev.1..ti);
        if !src_gap.is_empty() && !tgt_gap.is_empty() {
            let sl: Vec<usize> = src_lens[src_gap.clone()]
                .iter()
                .map(|&l| l.max(1))
                .collect();
            let tl: Vec<usize> = tgt_lens[tgt_gap.clone()]
                .iter()
                .map(|&l| l.max(1))
                .collect();
            let path = gale_church(&sl, &tl).expect("lengths are positive");
            for bead in path.beads.iter().filter(|b| b.kind == BeadKind::OneOne) {
                let (i, j) = (
                    src_gap.start + bead.src.start,
                    tgt_gap.start + bead.tgt.start,
                );
                let score = matrix.get(i, j);
                if score >= min_score / 2.0 {
                    out.push(Link {
                        src: i,
                        tgt: j,
                        score,
                    });
                }
            }
        }
        if let Some(a) = anchor {
            out.push(a);
            prev = (a.src + 1, a.tgt + 1);
        }
    }
    out
}

pub fn bleualign<S: AsRef<str> + Sync, T: AsRef<str> + Sync>(
    translated_src: &[S],
    tgt: &[T],
    min_score: f64,
) -> Vec<Link> {
    let matrix = bleu_similarity_matrix(translated_src, tgt);
    let src_lens: Vec<usize> = translated_src
        .iter()
        .map(|s| s.as_ref().chars().count())
        .collect();
    let tgt_lens: Vec<usize> = tgt.iter().map(|s| s.as_ref().chars().count()).collect();
    bleualign_with_matrix(&matrix, &src_lens, &tgt_lens, min_score)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_best_total(m: &SimilarityMatrix, min: f64) -> f64 {
        fn go(m: &SimilarityMatrix, min: f64, i: usize, j: usize) -> f64 {
            let mut best = 0.0f64;
            for a in i..m.rows() {
                for b in j..m.cols() {
                    if m.get(a, b) >= min {
                        best = best.max(m.get(a, b) + go(m, min, a + 1, b + 1));
                    }
                }
            }
            best
        }
        go(m, min, 0, 0)
    }

    #[test]
    fn chain_matches_brute_force() {
        let vals = [
            [0.9, 0.1, 0.0, 0.3],
            [0.2, 0.05, 0.8, 0.0],
            [0.0, 0.7, 0.6, 0.1],
            [0.4, 0.0, 0.2, 0.95],
        ];
        let m = SimilarityMatrix::from_fn(4, 4, |i, j| vals[i][j]);
        for min in [0.0, 0.1, 0.5, 0.85] {
            let chain = best_chain(&m, min);
            let total: f64 = chain.iter().map(|l| l.score).sum();
            assert!((total - brute_best_total(&m, min)).abs() < 1e-12);
            assert!(chain
                .windows(2)
                .all(|w| w[0].src < w[1].src && w[0].tgt < w[1].tgt));
        }
    }

    fn sentences(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identity_links_everything() {
        let s = sentences(&[
            "the minister opened the new bridge today",
            "officials praised the rapid construction work",
            "traffic is expected to ease next month",
        ]);
        let links = bleualign(&s, &s, 0.1);
        assert_eq!(links.len(), 3);
        for (k, l) in links.iter().enumerate() {
            assert_eq!((l.src, l.tgt, l.score), (k, k, 1.0));
        }
    }

    #[test]
    fn perfect_threshold_on_different_text_is_empty() {
        let a = sentences(&["one two three four", "five six seven eight"]);
        let b = sentences(&["one two three five", "five six seven nine"]);
        assert!(bleualign(&a, &b, 1.0).is_empty());
    }

    #[test]
    fn disjoint_entries_sit_under_floor() {
        let m = bleu_similarity_matrix(&["a b c d e f g h i j"], &["k l m n o p q r s t"]);
        assert_eq!(m.get(0, 0), 0.0);
        // twenty tokens each, one shared: p1 = 1/20, p2 = 1/(2*19)
        let src: Vec<String> = (0..20).map(|i| format!("s{i}")).collect();
        let mut tgt: Vec<String> = (0..20).map(|i| format!("t{i}")).collect();
        tgt[0] = "s0".into();
        let m = bleu_similarity_matrix(&[src.join(" ")], &[tgt.join(" ")]);
        let expect = (0.05f64 / 38.0).sqrt();
        assert!((m.get(0, 0) - expect).abs() < 1e-12, "{}", m.get(0, 0));
        assert!(m.get(0, 0) < 0.05);
        assert_eq!((m.rows(), m.cols()), (1, 1));
    }
}
