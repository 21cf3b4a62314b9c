use std::path::PathBuf;

use thiserror::Error;

use crate::doc_model::BBox;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`]) which the
/// HTTP service puts in its error envelopes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("token {token_id} has a degenerate box {bbox:?}")]
    DegenerateBox { token_id: usize, bbox: BBox },

    #[error("token {token_id} box {bbox:?} lies outside the {page_w}x{page_h} page")]
    OutsidePage {
        token_id: usize,
        bbox: BBox,
        page_w: i64,
        page_h: i64,
    },

    #[error("pattern selection has no boxes")]
    EmptySelection,

    #[error("pattern selection has {0} boxes, at most 16 are allowed")]
    TooManyBoxes(usize),

    #[error("selection box #{index} {bbox:?} contains no token center")]
    NoTokenInBox { index: usize, bbox: BBox },

    #[error("selection box #{index} {bbox:?} overlaps no field")]
    NoFieldOverlap { index: usize, bbox: BBox },

    #[error("selection boxes #{first} and #{second} both resolve to field {field_id}")]
    DuplicateField {
        first: usize,
        second: usize,
        field_id: usize,
    },

    #[error("cannot label an empty value")]
    EmptyValue,

    #[error("cannot compare empty type signatures")]
    EmptySignature,

    #[error("invalid taxonomy rule `{name}`: {reason}")]
    InvalidRule { name: String, reason: String },

    #[error("no selected key field carries a label other than `other`")]
    NoLabeledNode,

    #[error("unknown pattern node {0}")]
    UnknownNode(usize),

    #[error("invalid score weights: {0}")]
    InvalidWeights(String),

    #[error("overlap ratio needs non-empty box lists")]
    EmptyItem,

    #[error("ground truth is for `{expected}` but result is for `{found}`")]
    DocMismatch { expected: String, found: String },

    #[error("unmatched document ids: {}", .0.join(", "))]
    UnmatchedDocs(Vec<String>),

    #[error("invalid corpus spec: {0}")]
    InvalidCorpusSpec(String),

    #[error("page overflow: layout needs {needed}px but page height is {page_h}px")]
    PageOverflow { needed: i64, page_h: i64 },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io_error",
            Error::Json { .. } => "malformed_json",
            Error::Schema(_) => "schema_violation",
            Error::DegenerateBox { .. } => "degenerate_box",
            Error::OutsidePage { .. } => "box_outside_page",
            Error::EmptySelection => "empty_selection",
            Error::TooManyBoxes(_) => "too_many_boxes",
            Error::NoTokenInBox { .. } => "no_token_in_box",
            Error::NoFieldOverlap { .. } => "no_field_overlap",
            Error::DuplicateField { .. } => "duplicate_field",
            Error::EmptyValue => "empty_value",
            Error::EmptySignature => "empty_signature",
            Error::InvalidRule { .. } => "invalid_rule",
            Error::NoLabeledNode => "no_labeled_node",
            Error::UnknownNode(_) => "unknown_node",
            Error::InvalidWeights(_) => "invalid_weights",
            Error::EmptyItem => "empty_item",
            Error::DocMismatch { .. } => "doc_mismatch",
            Error::UnmatchedDocs(_) => "unmatched_docs",
            Error::InvalidCorpusSpec(_) => "invalid_corpus_spec",
            Error::PageOverflow { .. } => "page_overflow",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
