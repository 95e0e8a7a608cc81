use std::io::Write;
use std::path::Path;

use crate::align::{AlignMethod, SentencePair};
use crate::error::{Error, Result};
use crate::io::{read_to_string, tsv_field, tsv_rows, write_atomic};

/// One row per pair: src_lang, tgt_lang, src, tgt, score, src_doc, tgt_doc.
pub fn pairs_to_tsv(pairs: &[SentencePair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}\n",
            p.src_lang,
            p.tgt_lang,
            tsv_field(&p.src_sentence),
            tsv_field(&p.tgt_sentence),
            p.score,
            tsv_field(&p.src_doc),
            tsv_field(&p.tgt_doc),
        ));
    }
    out
}

pub fn write_pairs(path: &Path, pairs: &[SentencePair]) -> Result<()> {
    write_atomic(path, |w| w.write_all(pairs_to_tsv(pairs).as_bytes()))
}

pub fn read_pairs(path: &Path) -> Result<Vec<SentencePair>> {
    parse_pairs(&read_to_string(path)?)
}

/// The file format does not record the aligner, so every row comes back
/// marked as [`AlignMethod::Bleualign`].
pub fn parse_pairs(text: &str) -> Result<Vec<SentencePair>> {
    tsv_rows(text, 7)?
        .into_iter()
        .map(|(line, f)| {
            let lang = |s: &str| {
                s.parse()
                    .map_err(|e: Error| Error::parse(line, e.to_string()))
            };
            Ok(SentencePair {
                src_lang: lang(f[0])?,
                tgt_lang: lang(f[1])?,
                src_sentence: f[2].to_string(),
                tgt_sentence: f[3].to_string(),
                score: f[4]
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad score {:?}", f[4])))?,
                src_doc: f[5].to_string(),
                tgt_doc: f[6].to_string(),
                method: AlignMethod::Bleualign,
            })
        })
        .collect()
}
