use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lang::LangCode;

/// Sparse vector over term ids, sorted by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector(Vec<(u32, f64)>);

impl SparseVector {
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&(_, v)| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// tf-idf vectors for a fixed document collection in pivot-language token
/// space. tf is `1 + ln(count)`, idf is `ln(N / df)`, and every vector is
/// L2-normalized (documents whose weights are all zero keep the zero vector).
#[derive(Clone, Debug)]
pub struct TfIdfIndex {
    pivot: LangCode,
    terms: HashMap<String, u32>,
    idf: Vec<f64>,
    vectors: HashMap<String, SparseVector>,
    doc_count: usize,
}

impl TfIdfIndex {
    pub fn build<S: AsRef<str> + Sync>(pivot: LangCode, docs: &[(String, Vec<S>)]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let mut seen = BTreeSet::new();
        for (id, _) in docs {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }

        let vocab: BTreeSet<&str> = docs
            .iter()
            .flat_map(|(_, toks)| toks.iter().map(AsRef::as_ref))
            .collect();
        let terms: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), i as u32))
            .collect();

        let counts: Vec<BTreeMap<u32, usize>> = docs
            .par_iter()
            .map(|(_, toks)| {
                let mut c = BTreeMap::new();
                for t in toks {
                    *c.entry(terms[t.as_ref()]).or_default() += 1;
                }
                c
            })
            .collect();

        let mut df = vec![0usize; terms.len()];
        for c in &counts {
            for &t in c.keys() {
                df[t as usize] += 1;
            }
        }
        let n = docs.len() as f64;
        let idf: Vec<f64> = df.iter().map(|&d| (n / d as f64).ln()).collect();

        let vectors = docs
            .par_iter()
            .zip(counts.par_iter())
            .map(|((id, _), c)| (id.clone(), weigh(c, &idf)))
            .collect();

        Ok(TfIdfIndex {
            pivot,
            terms,
            idf,
            vectors,
            doc_count: docs.len(),
        })
    }

    pub fn pivot(&self) -> LangCode {
        self.pivot
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.terms.get(token).map(|&t| self.idf[t as usize])
    }

    pub fn vector(&self, id: &str) -> Option<&SparseVector> {
        self.vectors.get(id)
    }

    /// Vector for text outside the collection; tokens the index has never
    /// seen carry no weight.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut c = BTreeMap::new();
        for t in tokens {
            if let Some(&id) = self.terms.get(t.as_ref()) {
                *c.entry(id).or_default() += 1;
            }
        }
        weigh(&c, &self.idf)
    }

    /// Cosine similarity of two indexed documents.
    pub fn score(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.get(a)?;
        let vb = self.get(b)?;
        Ok(clamp_unit(va.dot(vb)))
    }

    fn get(&self, id: &str) -> Result<&SparseVector> {
        self.vectors
            .get(id)
            .ok_or_else(|| Error::UnindexedCandidate(id.to_string()))
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn weigh(counts: &BTreeMap<u32, usize>, idf: &[f64]) -> SparseVector {
    let raw: Vec<(u32, f64)> = counts
        .iter()
        .map(|(&t, &c)| (t, (1.0 + (c as f64).ln()) * idf[t as usize]))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let norm = raw.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return SparseVector::default();
    }
    SparseVector(raw.into_iter().map(|(t, w)| (t, w / norm)).collect())
}

/// Scores `candidates` against `query`: descending score, ties by ascending id.
pub fn rank_candidates<S: AsRef<str>>(
    index: &TfIdfIndex,
    query: &SparseVector,
    candidates: &[S],
) -> Result<Vec<(String, f64)>> {
    let mut ranked = candidates
        .iter()
        .map(|c| {
            let v = index.get(c.as_ref())?;
            Ok((c.as_ref().to_string(), clamp_unit(query.dot(v))))
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}
