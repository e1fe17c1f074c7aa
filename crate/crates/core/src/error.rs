//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numeric kernels, solvers, model builders and the
/// evaluation harness.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The jitter ladder was exhausted without a successful factorization.
    #[error("matrix is not positive definite (jitter ladder exhausted at shift {last_shift:e})")]
    NotPositiveDefinite { last_shift: f64 },

    /// An iterative kernel failed to converge.
    #[error("{0} failed to converge")]
    ConvergenceFailure(&'static str),

    /// A reflector was requested for a zero vector.
    #[error("cannot build a reflector from the zero vector")]
    ZeroVector,

    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Lanczos hit an invariant subspace before reaching the tolerance.
    #[error("Lanczos breakdown before convergence")]
    Breakdown,

    /// Requested more columns than the smaller view dimension.
    #[error("k = {k} exceeds min view dimension {max}")]
    InvalidK { k: usize, max: usize },

    /// Fewer than two paired samples.
    #[error("need at least 2 paired samples, got {0}")]
    TooFewPaired(usize),

    /// Fewer than two samples in a view.
    #[error("need at least 2 samples in view, got {0}")]
    TooFewSamples(usize),

    /// Heat-kernel bandwidth collapsed to zero.
    #[error("degenerate bandwidth: {0}")]
    DegenerateBandwidth(String),

    /// A class id in 0..c has no labeled sample.
    #[error("class {0} has no labeled sample")]
    EmptyClass(usize),

    /// The model family needs labels that are absent.
    #[error("model requires labels for view {0}")]
    MissingLabels(usize),

    /// The model family needs a graph specification that is absent.
    #[error("model requires a graph specification")]
    MissingGraph,

    /// A builder was called with a family it does not handle.
    #[error("family {0} is not handled by this builder")]
    BadFamily(String),

    /// A hyperparameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Split ratios produce an unusable split.
    #[error("infeasible split: {0}")]
    RatioInfeasible(String),

    /// Nearest-neighbor classification with no training points.
    #[error("empty training set")]
    EmptyTrainingSet,

    /// Aggregation needs at least two trials.
    #[error("need at least 2 trial results, got {0}")]
    TooFewTrials(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
