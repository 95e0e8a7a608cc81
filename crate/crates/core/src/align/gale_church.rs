use std::ops::Range;

use crate::error::{Error, Result};

/// Sentence-count shape of an alignment bead, in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BeadKind {
    OneOne,
    OneZero,
    ZeroOne,
    TwoOne,
    OneTwo,
    TwoTwo,
}

impl BeadKind {
    pub const ALL: [BeadKind; 6] = [
        BeadKind::OneOne,
        BeadKind::OneZero,
        BeadKind::ZeroOne,
        BeadKind::TwoOne,
        BeadKind::OneTwo,
        BeadKind::TwoTwo,
    ];

    /// (source sentences, target sentences)
    pub fn sizes(self) -> (usize, usize) {
        match self {
            BeadKind::OneOne => (1, 1),
            BeadKind::OneZero => (1, 0),
            BeadKind::ZeroOne => (0, 1),
            BeadKind::TwoOne => (2, 1),
            BeadKind::OneTwo => (1, 2),
            BeadKind::TwoTwo => (2, 2),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BeadKind::OneOne => "1-1",
            BeadKind::OneZero => "1-0",
            BeadKind::ZeroOne => "0-1",
            BeadKind::TwoOne => "2-1",
            BeadKind::OneTwo => "1-2",
            BeadKind::TwoTwo => "2-2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bead {
    pub kind: BeadKind,
    pub src: Range<usize>,
    pub tgt: Range<usize>,
}

/// Monotonic tiling of both documents by beads.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlignmentPath {
    pub beads: Vec<Bead>,
    pub cost: f64,
}

impl AlignmentPath {
    /// True when the beads cover `0..src_len` and `0..tgt_len` contiguously,
    /// each index exactly once.
    pub fn tiles(&self, src_len: usize, tgt_len: usize) -> bool {
        let (mut i, mut j) = (0, 0);
        for b in &self.beads {
            let (di, dj) = b.kind.sizes();
            if b.src != (i..i + di) || b.tgt != (j..j + dj) {
                return false;
            }
            i += di;
            j += dj;
        }
        i == src_len && j == tgt_len
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaleChurchParams {
    /// Expected target characters per source character.
    pub c: f64,
    /// Variance of that ratio per source character.
    pub s2: f64,
    pub cost_cap: f64,
}

impl Default for GaleChurchParams {
    fn default() -> Self {
        GaleChurchParams {
            c: 1.0,
            s2: 6.8,
            cost_cap: 25.0,
        }
    }
}

impl GaleChurchParams {
    pub fn prior(&self, kind: BeadKind) -> f64 {
        match kind {
            BeadKind::OneOne => 0.89,
            BeadKind::OneZero | BeadKind::ZeroOne => 0.0099,
            BeadKind::TwoOne | BeadKind::OneTwo => 0.089,
            BeadKind::TwoTwo => 0.011,
        }
    }

    /// `-ln P(match | lengths)` with the standard-normal tail, capped.
    pub fn length_cost(&self, src_chars: usize, tgt_chars: usize) -> f64 {
        if src_chars == 0 {
            return if tgt_chars == 0 { 0.0 } else { self.cost_cap };
        }
        let s = src_chars as f64;
        let delta = (tgt_chars as f64 - self.c * s) / (s * self.s2).sqrt();
        neg_ln_two_tail(delta.abs()).min(self.cost_cap)
    }

    pub fn bead_cost(&self, kind: BeadKind, src_chars: usize, tgt_chars: usize) -> f64 {
        self.length_cost(src_chars, tgt_chars) - self.prior(kind).ln()
    }
}

/// `-ln(2 * (1 - Phi(z)))` for `z >= 0`, i.e. `-ln erfc(z / sqrt 2)`, using the
/// rational approximation of erfc with absolute error below 1.5e-7. Working in
/// log space avoids the cancellation of `1 - erf` in the tail.
pub fn neg_ln_two_tail(z: f64) -> f64 {
    const P: f64 = 0.327_591_1;
    const A: [f64; 5] = [
        0.254_829_592,
        -0.284_496_736,
        1.421_413_741,
        -1.453_152_027,
        1.061_405_429,
    ];
    let x = z / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (A[0] + t * (A[1] + t * (A[2] + t * (A[3] + t * A[4]))));
    x * x - poly.ln()
}

pub fn gale_church(src_lens: &[usize], tgt_lens: &[usize]) -> Result<AlignmentPath> {
    gale_church_with(&GaleChurchParams::default(), src_lens, tgt_lens)
}

/// Minimum-cost bead path by dynamic programming. On equal cost the bead kind
/// earliest in [`BeadKind::ALL`] wins.
pub fn gale_church_with(
    params: &GaleChurchParams,
    src_lens: &[usize],
    tgt_lens: &[usize],
) -> Result<AlignmentPath> {
    if src_lens.iter().chain(tgt_lens).any(|&l| l == 0) {
        return Err(Error::NonPositiveLength);
    }
    let (n, m) = (src_lens.len(), tgt_lens.len());
    let prefix = |lens: &[usize]| {
        std::iter::once(0)
            .chain(lens.iter().scan(0, |acc, &l| {
                *acc += l;
                Some(*acc)
            }))
            .collect::<Vec<usize>>()
    };
    let (sp, tp) = (prefix(src_lens), prefix(tgt_lens));

    let w = m + 1;
    let mut cost = vec![f64::INFINITY; (n + 1) * w];
    let mut back: Vec<Option<BeadKind>> = vec![None; (n + 1) * w];
    cost[0] = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            for kind in BeadKind::ALL {
                let (di, dj) = kind.sizes();
                if di > i || dj > j {
                    continue;
                }
                let prev = cost[(i - di) * w + (j - dj)];
                if prev == f64::INFINITY {
                    continue;
                }
                let c = prev + params.bead_cost(kind, sp[i] - sp[i - di], tp[j] - tp[j - dj]);
                if c < cost[i * w + j] {
                    cost[i * w + j] = c;
                    back[i * w + j] = Some(kind);
                }
            }
        }
    }

    let mut beads = Vec::new();
    let (mut i, mut j) = (n, m);
    while let Some(kind) = back[i * w + j] {
        let (di, dj) = kind.sizes();
        beads.push(Bead {
            kind,
            src: i - di..i,
            tgt: j - dj..j,
        });
        i -= di;
        j -= dj;
    }
    beads.reverse();
    Ok(AlignmentPath {
        beads,
        cost: cost[n * w + m],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(p: &AlignmentPath) -> Vec<&'static str> {
        p.beads.iter().map(|b| b.kind.as_str()).collect()
    }

    #[test]
    fn equal_lengths_align_one_to_one() {
        let p = gale_church(&[10, 20], &[10, 20]).unwrap();
        assert_eq!(kinds(&p), ["1-1", "1-1"]);
        assert!(p.tiles(2, 2));
    }

    #[test]
    fn merged_source() {
        let p = gale_church(&[10, 12], &[22]).unwrap();
        assert_eq!(kinds(&p), ["2-1"]);
    }

    #[test]
    fn degenerate_sides() {
        assert_eq!(kinds(&gale_church(&[10], &[]).unwrap()), ["1-0"]);
        assert_eq!(kinds(&gale_church(&[], &[3, 4]).unwrap()), ["0-1", "0-1"]);
        let empty = gale_church(&[], &[]).unwrap();
        assert!(empty.beads.is_empty());
        assert_eq!(empty.cost, 0.0);
        assert!(matches!(
            gale_church(&[0], &[1]),
            Err(Error::NonPositiveLength)
        ));
    }

    #[test]
    fn tail_approximation() {
        // 2 * (1 - Phi(z)) reference values
        for (z, p) in [
            (0.0, 1.0),
            (1.0, 0.317_310_507_862_914),
            (1.96, 0.049_995_790_296_440),
            (3.0, 0.002_699_796_063_260),
        ] {
            let approx = (-neg_ln_two_tail(z)).exp();
            assert!((approx - p).abs() < 3e-7, "z={z}: {approx} vs {p}");
        }
    }

    #[test]
    fn cost_is_capped() {
        let p = GaleChurchParams::default();
        assert_eq!(p.length_cost(1, 10_000), 25.0);
        assert_eq!(p.length_cost(0, 5), 25.0);
        assert_eq!(p.length_cost(10, 10), neg_ln_two_tail(0.0));
    }
}
