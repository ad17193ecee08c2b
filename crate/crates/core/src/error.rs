use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the attribution pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("non-numeric value {value:?} at data row {row}, column `{column}`")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at data row {row}, column `{column}`")]
    NonFiniteValue { row: usize, column: String },

    #[error("label at data row {row} is {value:?}, expected 0 or 1")]
    NonBinaryLabel { row: usize, value: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("dataset labels contain a single class")]
    SingleClassDataset,

    #[error("duplicate feature name `{0}`")]
    DuplicateFeatureName(String),

    #[error("feature name must not be empty")]
    EmptyFeatureName,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("split with seed {seed} leaves a partition without one of the label classes")]
    DegenerateSplit { seed: u64 },

    #[error("cannot reach positive fraction {target} from {positives} positive and {negatives} negative rows")]
    InfeasibleProportion {
        target: f64,
        positives: usize,
        negatives: usize,
    },

    #[error("feature index {index} out of range for {arity} features")]
    IndexOutOfRange { index: usize, arity: usize },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training set contains a single class")]
    SingleClassTrainingSet,

    #[error("model expects {expected} features, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("curve requires both positive and negative labels")]
    SingleClassLabels,

    #[error("precision-recall curve requires at least one positive label")]
    NoPositiveLabels,

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("{features} features exceed the exact-mode cap of {cap}; use permutation sampling")]
    TooManyFeaturesForExactMode { features: usize, cap: usize },

    #[error("payoff table holds {found} of {expected} coalitions")]
    IncompleteTable { expected: usize, found: usize },

    #[error("grid of {points} points is too coarse (need at least {min})")]
    GridTooCoarse { points: usize, min: usize },
}

impl Error {
    /// Stable variant name, used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
            Error::MissingColumn(_) => "MissingColumn",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::NonBinaryLabel { .. } => "NonBinaryLabel",
            Error::EmptyDataset => "EmptyDataset",
            Error::SingleClassDataset => "SingleClassDataset",
            Error::DuplicateFeatureName(_) => "DuplicateFeatureName",
            Error::EmptyFeatureName => "EmptyFeatureName",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::DegenerateSplit { .. } => "DegenerateSplit",
            Error::InfeasibleProportion { .. } => "InfeasibleProportion",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::UnknownFeature(_) => "UnknownFeature",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::SingleClassTrainingSet => "SingleClassTrainingSet",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::SingleClassLabels => "SingleClassLabels",
            Error::NoPositiveLabels => "NoPositiveLabels",
            Error::DegenerateCurve(_) => "DegenerateCurve",
            Error::TooManyFeaturesForExactMode { .. } => "TooManyFeaturesForExactMode",
            Error::IncompleteTable { .. } => "IncompleteTable",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
        }
    }

    /// True for problems with the input data (as opposed to the computation).
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::MissingColumn(_)
                | Error::NonNumericCell { .. }
                | Error::NonFiniteValue { .. }
                | Error::NonBinaryLabel { .. }
                | Error::EmptyDataset
                | Error::SingleClassDataset
                | Error::DuplicateFeatureName(_)
                | Error::EmptyFeatureName
                | Error::ShapeMismatch(_)
                | Error::DegenerateSplit { .. }
                | Error::InfeasibleProportion { .. }
                | Error::UnknownFeature(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
