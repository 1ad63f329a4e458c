use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by pipeline stage; [`RedError::category`] maps each
/// variant onto the coarse classes the CLI turns into exit codes.
#[derive(Debug, Error)]
pub enum RedError {
    // ---- input parsing / ingestion ----
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("both `{0}` and `{1}` columns present; supply exactly one idle-energy form")]
    AmbiguousIdleForm(String, String),
    #[error("data row {row}: cannot parse column `{column}` value `{value}`")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("data row {row}: {detail}")]
    BadRecord { row: usize, detail: String },
    #[error("data row {row}: duplicate measurement key ({key})")]
    DuplicateRecord { row: usize, key: String },
    #[error("no measurement records in input")]
    EmptyInput,
    #[error("configuration {config}: repeats disagree on {field} (deterministic encode expected)")]
    InconsistentRepeats { config: String, field: String },

    // ---- energy / stability ----
    #[error("inconsistent energies: total {total} J, idle {idle} J (need total >= idle >= 0)")]
    InconsistentEnergy { total: f64, idle: f64 },
    #[error("need at least 2 samples for a confidence interval, got {0}")]
    TooFewSamples(usize),
    #[error("energy samples must be positive, got {0}")]
    NonpositiveSample(f64),
    #[error("invalid significance parameters: alpha and beta must lie in (0, 1)")]
    BadSignificance,
    #[error("configuration {config}: derived encoding energy {energy} J is not positive, logarithm undefined")]
    NonpositiveEnergy { config: String, energy: f64 },
    #[error("configuration {config}: duplicate (log-rate, log-energy) coordinates in point set")]
    DuplicateCoordinate { config: String },
    #[error("configuration {config}: distortion {psnr} dB must be positive and finite")]
    BadDistortion { config: String, psnr: f64 },
    #[error("no origin rule matches: record {config} has no origin tag and no grid was configured")]
    MissingOrigin { config: String },

    // ---- numerical kernels ----
    #[error("least squares needs rows >= cols, got {rows} x {cols}")]
    UnderdeterminedSystem { rows: usize, cols: usize },
    #[error("design matrix is rank deficient (condition estimate {cond:.3e})")]
    RankDeficient { cond: f64 },
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },
    #[error("triangulation needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },
    #[error("all points are collinear; no 2-D triangulation exists")]
    CollinearPoints,
    #[error("duplicate point at index {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },
    #[error("query ({x}, {y}) lies outside the convex hull of the fitted points")]
    OutOfHull { x: f64, y: f64 },
    #[error("surface query ({r}, {e}) is not finite")]
    NonFiniteQuery { r: f64, e: f64 },
    #[error("invalid bracket [{lo}, {hi}]: lower bound must lie strictly below upper")]
    BadBracket { lo: f64, hi: f64 },
    #[error("no sign change over bracket [{lo}, {hi}]: target {target} is not attained")]
    NoSignChange { lo: f64, hi: f64, target: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("bisection did not converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("function is not monotone over bracket [{lo}, {hi}]; inversion is ambiguous")]
    NonMonotone { lo: f64, hi: f64 },

    // ---- fitting / metrics ----
    #[error("{method} fit needs at least {needed} supporting points, got {got}")]
    InsufficientData {
        method: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("metric undefined for an empty point list")]
    EmptyPointList,
    #[error("point {index} has zero distortion; relative error undefined")]
    ZeroDistortion { index: usize },
    #[error("all distortion values identical; R-square undefined (zero total variance)")]
    ZeroVariance,
    #[error("point {index} ({r}, {e}) not evaluable: {source}")]
    PointEvaluation {
        index: usize,
        r: f64,
        e: f64,
        source: Box<RedError>,
    },
    #[error("{method} on {encoder}/{sequence}: {source}")]
    Scoring {
        encoder: String,
        sequence: String,
        method: &'static str,
        source: Box<RedError>,
    },

    // ---- projection / analysis ----
    #[error("surfaces have no overlapping (r, e) domain; pass explicit axis bounds")]
    EmptyDomain,
    #[error("axis bounds invalid: {detail}")]
    BadAxis { detail: String },
    #[error("not enough encoder surfaces for this analysis: got {0}")]
    TooFewEncoders(usize),
    #[error("encoders were fitted on different sequences: {a} vs {b}")]
    MismatchedSequences { a: String, b: String },

    // ---- model files / CLI ----
    #[error("model file {path}: {detail}")]
    ModelFormat { path: String, detail: String },
    #[error("no data for encoder `{encoder}` (sequence `{sequence}`) in the input")]
    EncoderMismatch { encoder: String, sequence: String },
    #[error("{failed} of {total} configurations failed the energy stability check")]
    StabilityFailure { failed: usize, total: usize },
    #[error("{0}")]
    Usage(String),
}

/// Coarse error classes; each maps to a distinct CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Parse,
    Numerical,
    Domain,
    Stability,
}

impl RedError {
    pub fn category(&self) -> ErrorCategory {
        use RedError::*;
        match self {
            Usage(_) => ErrorCategory::Usage,
            Io(_) | Csv(_) | MissingColumn(_) | AmbiguousIdleForm(..) | BadCell { .. }
            | BadRecord { .. } | DuplicateRecord { .. } | EmptyInput
            | InconsistentRepeats { .. } | ModelFormat { .. } => ErrorCategory::Parse,
            RankDeficient { .. } | NonFiniteCoordinate { .. } | BadBracket { .. }
            | NoSignChange { .. } | ConvergenceFailure(_) | NonMonotone { .. }
            | BadTolerance(_) | ZeroVariance => ErrorCategory::Numerical,
            StabilityFailure { .. } => ErrorCategory::Stability,
            PointEvaluation { source, .. } | Scoring { source, .. } => source.category(),
            _ => ErrorCategory::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, RedError>;
