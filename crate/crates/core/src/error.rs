use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Validation variants name the
/// invariant that was violated so the CLI can surface it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid label {label}: must be below {num_classes}")]
    InvalidLabel { label: usize, num_classes: usize },

    #[error("sss score {0} outside 1..=7")]
    InvalidScore(i64),

    #[error("pooling requires at least one frame")]
    NoFrames,

    #[error("embedding width {0} is not 1024")]
    EmbeddingWidth(usize),

    #[error("unknown task {0:?}")]
    UnknownTask(String),

    #[error("session {session}: utterance {task}#{index} exceeds task count {count}")]
    IndexOutOfRange {
        session: String,
        task: String,
        index: usize,
        count: usize,
    },

    #[error("session {session}: duplicate utterance {task}#{index}")]
    DuplicateUtterance {
        session: String,
        task: String,
        index: usize,
    },

    #[error("duplicate session id {0:?}")]
    DuplicateSession(String),

    #[error("session {session}: missing utterance {task}#{index}")]
    MissingUtterance {
        session: String,
        task: String,
        index: usize,
    },

    #[error("session {session}: label does not match sss score {sss}")]
    LabelMismatch { session: String, sss: u8 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("missing blob {0}")]
    MissingBlob(PathBuf),

    #[error("blob {path}: byte length {actual} does not equal 4*{frames}*1024 = {expected}")]
    BlobSize {
        path: PathBuf,
        frames: usize,
        expected: u64,
        actual: u64,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("class {class} has {count} members, need at least {needed}")]
    ClassTooSmall {
        class: &'static str,
        count: usize,
        needed: usize,
    },

    #[error("class {0} is absent")]
    MissingClass(&'static str),

    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("feature csv: {0}")]
    Features(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::EmptyBatch => "empty_batch",
            Error::InvalidLabel { .. } => "invalid_label",
            Error::InvalidScore(_) => "invalid_sss_score",
            Error::NoFrames => "no_frames",
            Error::EmbeddingWidth(_) => "embedding_width",
            Error::UnknownTask(_) => "unknown_task",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::DuplicateUtterance { .. } => "duplicate_utterance",
            Error::DuplicateSession(_) => "duplicate_session",
            Error::MissingUtterance { .. } => "missing_utterance",
            Error::LabelMismatch { .. } => "label_mismatch",
            Error::EmptyDataset => "empty_dataset",
            Error::Manifest(_) => "manifest",
            Error::MissingBlob(_) => "missing_blob",
            Error::BlobSize { .. } => "blob_size",
            Error::ModelFormat(_) => "model_format",
            Error::ClassTooSmall { .. } => "class_too_small",
            Error::MissingClass(_) => "missing_class",
            Error::LengthMismatch(..) => "length_mismatch",
            Error::EmptyInput => "empty_input",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Features(_) => "features",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
