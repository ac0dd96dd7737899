use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("scale {scale} too large for series of length {len} (need len >= 2 * scale)")]
    ScaleTooLarge { scale: usize, len: usize },

    #[error("scale {scale} cannot support a polynomial fit of order {order} (need scale >= order + 2)")]
    DegenerateFit { scale: usize, order: usize },

    #[error("q must be a finite positive number, got {0}")]
    InvalidQ(f64),

    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("box layout mismatch: {left_boxes}x{left_scale} vs {right_boxes}x{right_scale}")]
    BoxMismatch {
        left_boxes: usize,
        left_scale: usize,
        right_boxes: usize,
        right_scale: usize,
    },

    #[error("correlation undefined: series{} has zero detrended variance", label_suffix(.label))]
    ZeroVariance { label: Option<String> },

    #[error("lag {tau} leaves an overlap of {overlap} samples, fewer than two boxes of {scale}")]
    OverlapTooShort { tau: i64, overlap: usize, scale: usize },

    #[error("need at least {need} series, got {got}")]
    TooFewSeries { need: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric or not finite at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, frobenius norm {frobenius:e})"
    )]
    NoConvergence {
        sweeps: usize,
        off_norm: f64,
        frobenius: f64,
    },

    #[error("vector is not unit length (squared norm {0})")]
    NotNormalized(f64),

    #[error("eigensignal is constant over the window")]
    ConstantEigensignal,

    #[error("degree distribution has {0} distinct degrees; a power-law fit needs at least 3")]
    InsufficientSupport(usize),

    #[error("edge list is not a spanning tree: {0}")]
    InvalidTree(&'static str),

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    #[error("inconsistent node sets across partitions (window {0})")]
    InconsistentNodes(usize),

    #[error("series length {len} shorter than window width {width}")]
    SeriesShorterThanWindow { len: usize, width: usize },

    #[error("invalid window plan: width {width}, step {step}")]
    InvalidWindowPlan { width: usize, step: usize },

    #[error("series is constant; cannot standardize")]
    ConstantSeries,

    #[error("price series needs at least two points")]
    TooShort,
}

fn label_suffix(label: &Option<String>) -> String {
    match label {
        Some(l) => alloc::format!(" `{l}`"),
        None => String::new(),
    }
}
