use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::Serialize;
use serde_json::{Map, Value};

use super::{normalize_text, segment_sentences};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::lang::LangCode;

/// One article.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Document {
    pub id: String,
    pub lang: LangCode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ministry: Option<String>,
    pub title: String,
    pub sentences: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, lang: LangCode, sentences: Vec<String>) -> Self {
        Document {
            id: id.into(),
            lang,
            date: None,
            ministry: None,
            title: String::new(),
            sentences,
            url: None,
        }
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.date = Some(date);
        self
    }

    pub fn with_ministry(mut self, ministry: impl Into<String>) -> Self {
        self.ministry = Some(ministry.into());
        self
    }

    /// Case-insensitive ministry comparison; missing tags never match.
    pub fn same_ministry(&self, other: &Document) -> bool {
        match (&self.ministry, &other.ministry) {
            (Some(a), Some(b)) => a.to_lowercase() == b.to_lowercase(),
            _ => false,
        }
    }

    fn normalized(mut self) -> Self {
        self.title = normalize_text(&self.title);
        self.ministry = self.ministry.map(|m| normalize_text(&m));
        self.sentences = self
            .sentences
            .iter()
            .map(|s| normalize_text(s))
            .filter(|s| !s.is_empty())
            .collect();
        self
    }
}

/// An immutable, indexed collection of documents across languages.
#[derive(Clone, Debug, Default)]
pub struct DocumentStore {
    docs: BTreeMap<String, Document>,
    order: Vec<String>,
    by_lang: BTreeMap<LangCode, Vec<String>>,
    by_date: BTreeMap<LangCode, BTreeMap<NaiveDate, Vec<String>>>,
}

impl PartialEq for DocumentStore {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs
    }
}

impl DocumentStore {
    /// Builds a store, normalizing every text field. Empty sentences are dropped.
    pub fn new(docs: impl IntoIterator<Item = Document>) -> Result<Self> {
        let mut store = DocumentStore::default();
        for doc in docs {
            store.insert(doc.normalized())?;
        }
        Ok(store)
    }

    fn insert(&mut self, doc: Document) -> Result<()> {
        if self.docs.contains_key(&doc.id) {
            return Err(Error::DuplicateId(doc.id));
        }
        self.order.push(doc.id.clone());
        self.by_lang
            .entry(doc.lang)
            .or_default()
            .push(doc.id.clone());
        if let Some(date) = doc.date {
            let ids = self
                .by_date
                .entry(doc.lang)
                .or_default()
                .entry(date)
                .or_default();
            let at = ids.binary_search(&doc.id).unwrap_err();
            ids.insert(at, doc.id.clone());
        }
        self.docs.insert(doc.id.clone(), doc);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.docs.get(id)
    }

    /// Languages present, in code order.
    pub fn languages(&self) -> impl Iterator<Item = LangCode> + '_ {
        self.by_lang.keys().copied()
    }

    /// Documents of one language in ingestion order.
    pub fn documents(&self, lang: LangCode) -> impl Iterator<Item = &Document> + '_ {
        self.by_lang
            .get(&lang)
            .into_iter()
            .flatten()
            .map(|id| &self.docs[id])
    }

    /// All documents in ingestion order.
    pub fn iter(&self) -> impl Iterator<Item = &Document> + '_ {
        self.order.iter().map(|id| &self.docs[id])
    }

    pub fn ids_by_lang(&self) -> &BTreeMap<LangCode, Vec<String>> {
        &self.by_lang
    }

    pub fn ids_by_date(&self, lang: LangCode) -> Option<&BTreeMap<NaiveDate, Vec<String>>> {
        self.by_date.get(&lang)
    }

    /// Documents of `lang` dated within `window_days` of `center`, ordered by
    /// (date, id). Undated documents are never returned.
    pub fn query_date_window(
        &self,
        lang: LangCode,
        center: NaiveDate,
        window_days: u32,
    ) -> Vec<&Document> {
        let Some(dates) = self.by_date.get(&lang) else {
            return Vec::new();
        };
        let span = Duration::days(window_days.into());
        let lo = center.checked_sub_signed(span).unwrap_or(NaiveDate::MIN);
        let hi = center.checked_add_signed(span).unwrap_or(NaiveDate::MAX);
        dates
            .range(lo..=hi)
            .flat_map(|(_, ids)| ids.iter().map(|id| &self.docs[id]))
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in self.iter() {
            out.push_str(&serde_json::to_string(doc).expect("documents serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| w.write_all(self.to_jsonl().as_bytes()))
    }
}

/// Reads a JSONL document file. See [`parse_jsonl`].
pub fn ingest_jsonl(path: &Path) -> Result<DocumentStore> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(doc) = parse_line(i + 1, &line)? {
            docs.push(doc);
        }
    }
    DocumentStore::new(docs)
}

/// Parses JSONL text into a store. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_jsonl(text: &str) -> Result<DocumentStore> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(doc) = parse_line(i + 1, line)? {
            docs.push(doc);
        }
    }
    DocumentStore::new(docs)
}

fn parse_line(line_no: usize, line: &str) -> Result<Option<Document>> {
    if line.trim().is_empty() {
        return Ok(None);
    }
    let value: Value =
        serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(Error::parse(line_no, "expected a JSON object"));
    };
    let known: BTreeSet<&str> = [
        "id",
        "lang",
        "date",
        "ministry",
        "title",
        "sentences",
        "body",
        "url",
    ]
    .into();
    if let Some(key) = obj.keys().find(|k| !known.contains(k.as_str())) {
        return Err(Error::parse(line_no, format!("unknown field {key}")));
    }

    let id = required_str(&obj, "id", line_no)?;
    let lang_code = required_str(&obj, "lang", line_no)?;
    let lang: LangCode = lang_code
        .parse()
        .map_err(|_| Error::parse(line_no, format!("unknown language code {lang_code:?}")))?;
    let date = optional_str(&obj, "date", line_no)?
        .map(|d| {
            NaiveDate::parse_from_str(&d, "%Y-%m-%d")
                .map_err(|e| Error::parse(line_no, format!("bad date {d:?}: {e}")))
        })
        .transpose()?;
    let ministry = optional_str(&obj, "ministry", line_no)?;
    let title = optional_str(&obj, "title", line_no)?.unwrap_or_default();
    let url = optional_str(&obj, "url", line_no)?;

    let sentences = match (obj.get("sentences"), obj.get("body")) {
        (Some(_), Some(_)) => {
            return Err(Error::parse(
                line_no,
                "fields sentences and body are exclusive",
            ))
        }
        (None, None) => return Err(Error::parse(line_no, "missing field sentences")),
        (Some(Value::Array(items)), None) => items
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                _ => Err(Error::parse(line_no, "sentences must be strings")),
            })
            .collect::<Result<Vec<_>>>()?,
        (Some(_), None) => return Err(Error::parse(line_no, "field sentences must be an array")),
        (None, Some(Value::String(body))) => segment_sentences(&normalize_text(body), lang),
        (None, Some(_)) => return Err(Error::parse(line_no, "field body must be a string")),
    };

    Ok(Some(Document {
        id,
        lang,
        date,
        ministry,
        title,
        sentences,
        url,
    }))
}

fn required_str(obj: &Map<String, Value>, key: &str, line_no: usize) -> Result<String> {
    optional_str(obj, key, line_no)?
        .ok_or_else(|| Error::parse(line_no, format!("missing field {key}")))
}

fn optional_str(obj: &Map<String, Value>, key: &str, line_no: usize) -> Result<Option<String>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(Error::parse(
            line_no,
            format!("field {key} must be a string"),
        )),
    }
}
