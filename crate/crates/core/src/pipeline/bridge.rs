use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::align::SentencePair;
use crate::corpus::normalize_text;
use crate::lang::LangCode;

/// Sentence pairs for every language pair, keyed with the smaller code first.
/// Each stored tuple holds the key's first language's sentence first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiParallelTable {
    pairs: BTreeMap<(LangCode, LangCode), BTreeSet<(String, String)>>,
}

impl MultiParallelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `(sx, sy)` for languages `x != y`; returns false for `x == y` or
    /// a pair already present.
    pub fn insert(&mut self, x: LangCode, y: LangCode, sx: &str, sy: &str) -> bool {
        if x == y {
            return false;
        }
        let (key, entry) = if x < y {
            ((x, y), (sx.to_string(), sy.to_string()))
        } else {
            ((y, x), (sy.to_string(), sx.to_string()))
        };
        self.pairs.entry(key).or_default().insert(entry)
    }

    /// Pairs between `x` and `y`, with `x`'s sentence first.
    pub fn get(&self, x: LangCode, y: LangCode) -> BTreeSet<(String, String)> {
        if x <= y {
            self.pairs.get(&(x, y)).cloned().unwrap_or_default()
        } else {
            self.pairs
                .get(&(y, x))
                .map(|s| s.iter().map(|(a, b)| (b.clone(), a.clone())).collect())
                .unwrap_or_default()
        }
    }

    pub fn count(&self, x: LangCode, y: LangCode) -> usize {
        let key = if x <= y { (x, y) } else { (y, x) };
        self.pairs.get(&key).map_or(0, BTreeSet::len)
    }

    pub fn keys(&self) -> impl Iterator<Item = (LangCode, LangCode)> + '_ {
        self.pairs.keys().copied()
    }

    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (&(LangCode, LangCode), &BTreeSet<(String, String)>)> {
        self.pairs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.values().all(BTreeSet::is_empty)
    }

    /// Adds the pivot-centric pairs themselves.
    pub fn insert_corpora(&mut self, corpora: &BTreeMap<LangCode, Vec<SentencePair>>) {
        for pairs in corpora.values() {
            for p in pairs {
                self.insert(p.src_lang, p.tgt_lang, &p.src_sentence, &p.tgt_sentence);
            }
        }
    }
}

/// Joins pivot-centric corpora on their pivot (target) side. For languages
/// `x != y`, every `(sx, sy)` whose pivot sentences are equal after
/// normalization is emitted, including all cross products.
pub fn bridge_multiparallel(corpora: &BTreeMap<LangCode, Vec<SentencePair>>) -> MultiParallelTable {
    let mut by_pivot: BTreeMap<String, BTreeMap<LangCode, BTreeSet<&str>>> = BTreeMap::new();
    for (&lang, pairs) in corpora {
        for p in pairs {
            by_pivot
                .entry(normalize_text(&p.tgt_sentence))
                .or_default()
                .entry(lang)
                .or_default()
                .insert(p.src_sentence.as_str());
        }
    }
    let mut table = MultiParallelTable::new();
    for sides in by_pivot.values() {
        let langs: Vec<_> = sides.iter().collect();
        for (i, (&x, xs)) in langs.iter().enumerate() {
            for (&y, ys) in &langs[i + 1..] {
                for sx in xs.iter() {
                    for sy in ys.iter() {
                        table.insert(x, y, sx, sy);
                    }
                }
            }
        }
    }
    table
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridCell {
    pub row: LangCode,
    pub col: LangCode,
    pub count: usize,
    /// Signed change against the baseline, when one was given.
    pub delta: Option<i64>,
}

/// Upper-triangular pair counts in [`LangCode::TABLE_ORDER`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusGrid {
    pub cells: Vec<GridCell>,
}

pub fn corpus_grid(
    table: &MultiParallelTable,
    baseline: Option<&MultiParallelTable>,
) -> CorpusGrid {
    let order = LangCode::TABLE_ORDER;
    let mut cells = Vec::new();
    for (i, &row) in order.iter().enumerate() {
        for &col in &order[i + 1..] {
            let count = table.count(row, col);
            cells.push(GridCell {
                row,
                col,
                count,
                delta: baseline.map(|b| count as i64 - b.count(row, col) as i64),
            });
        }
    }
    CorpusGrid { cells }
}

impl CorpusGrid {
    pub fn get(&self, x: LangCode, y: LangCode) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| (c.row, c.col) == (x, y) || (c.row, c.col) == (y, x))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\tcol\tcount\tdelta\n");
        for c in &self.cells {
            let delta = c.delta.map_or(String::new(), |d| format!("{d:+}"));
            out.push_str(&format!("{}\t{}\t{}\t{}\n", c.row, c.col, c.count, delta));
        }
        out
    }
}

impl fmt::Display for CorpusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = LangCode::TABLE_ORDER;
        let text = |c: &GridCell| match c.delta {
            Some(d) => format!("{} ({d:+})", c.count),
            None => c.count.to_string(),
        };
        let width = self
            .cells
            .iter()
            .map(|c| text(c).len())
            .max()
            .unwrap_or(1)
            .max(2);
        write!(f, "  ")?;
        for l in &order[1..] {
            write!(f, " {:>width$}", l.as_str())?;
        }
        writeln!(f)?;
        for (i, &row) in order[..order.len() - 1].iter().enumerate() {
            write!(f, "{row}")?;
            for (j, &col) in order[1..].iter().enumerate() {
                if j < i {
                    write!(f, " {:>width$}", "")?;
                } else {
                    let cell = self.get(row, col).map(text).unwrap_or_default();
                    write!(f, " {cell:>width$}")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
