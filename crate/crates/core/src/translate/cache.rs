use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use super::Translator;
use crate::corpus::DocumentStore;
use crate::error::{Error, Result};
use crate::io::{read_to_string, tsv_field, write_atomic};
use crate::lang::LangCode;

pub const CACHE_HEADER: &str = "src_lang\ttgt_lang\tsource\ttranslation";

/// Read-only translator backed by a cache file; any sentence not in the cache
/// is an error.
#[derive(Clone, Debug, Default)]
pub struct CachedTranslator {
    entries: HashMap<(LangCode, LangCode), HashMap<String, String>>,
}

impl CachedTranslator {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cache = CachedTranslator::default();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || (i == 0 && line == CACHE_HEADER) {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let [sl, tl, src, tgt] = f.as_slice() else {
                return Err(Error::parse(
                    i + 1,
                    format!("expected 4 fields, found {}", f.len()),
                ));
            };
            let sl: LangCode = sl
                .parse()
                .map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            let tl: LangCode = tl
                .parse()
                .map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            cache
                .entries
                .entry((sl, tl))
                .or_default()
                .insert(src.to_string(), tgt.to_string());
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Translator for CachedTranslator {
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        let table = self.entries.get(&(src, tgt));
        lines
            .iter()
            .map(|l| {
                table
                    .and_then(|t| t.get(l))
                    .cloned()
                    .ok_or_else(|| Error::CacheMiss {
                        src,
                        tgt,
                        sentence: l.clone(),
                    })
            })
            .collect()
    }
}

/// Translates every distinct sentence of the `src` documents once and writes
/// the cache file. Returns the number of entries written.
pub fn build_cache(
    store: &DocumentStore,
    translator: &dyn Translator,
    src: LangCode,
    tgt: LangCode,
    path: &Path,
) -> Result<usize> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut rows: Vec<(String, String)> = Vec::new();
    for doc in store.documents(src) {
        let fresh: Vec<String> = doc
            .sentences
            .iter()
            .filter(|s| seen.insert(s.as_str()))
            .cloned()
            .collect();
        if fresh.is_empty() {
            continue;
        }
        let out = translator
            .translate(src, tgt, &fresh)
            .map_err(|e| Error::InDocument {
                doc_id: doc.id.clone(),
                source: Box::new(e),
            })?;
        if out.len() != fresh.len() {
            return Err(Error::InDocument {
                doc_id: doc.id.clone(),
                source: Box::new(Error::LineCountMismatch {
                    expected: fresh.len(),
                    got: out.len(),
                }),
            });
        }
        rows.extend(fresh.into_iter().zip(out));
    }
    write_atomic(path, |w| {
        writeln!(w, "{CACHE_HEADER}")?;
        for (s, t) in &rows {
            writeln!(w, "{src}\t{tgt}\t{}\t{}", tsv_field(s), tsv_field(t))?;
        }
        Ok(())
    })?;
    Ok(rows.len())
}
