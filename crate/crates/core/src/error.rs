use std::path::PathBuf;

use crate::lang::LangCode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("unknown language code {0:?}")]
    UnknownLang(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error(
        "target vocabulary size {target} is below the {chars} distinct characters in the corpus"
    )]
    TargetTooSmall { target: usize, chars: usize },

    #[error("translator backend: {0}")]
    Backend(String),

    #[error("translator returned {got} lines for {expected} inputs")]
    LineCountMismatch { expected: usize, got: usize },

    #[error("translation cache has no entry for {src}->{tgt} sentence {sentence:?}")]
    CacheMiss {
        src: LangCode,
        tgt: LangCode,
        sentence: String,
    },

    #[error("while translating document {doc_id}: {source}")]
    InDocument {
        doc_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot build a tf-idf index over zero documents")]
    EmptyIndex,

    #[error("document {0:?} is not in the index")]
    UnindexedCandidate(String),

    #[error("ground truth is empty")]
    EmptyTruth,

    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },

    #[error("sentence lengths must be positive")]
    NonPositiveLength,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{lang} {stage}: {source}")]
    Stage {
        lang: LangCode,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, lang: LangCode, stage: &'static str) -> Self {
        Error::Stage {
            lang,
            stage,
            source: Box::new(self),
        }
    }
}
