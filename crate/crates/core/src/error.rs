//! Error type shared by all modules.

use alloc::string::String;

pub type Result<T> = core::result::Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// Malformed input: dimension mismatches, nonpositive weights, bad
    /// parameter ranges.
    #[error("input error: {0}")]
    Input(String),

    /// A frame or image frame failed the numerical rank check.
    #[error("rank error: {0}")]
    Rank(String),

    /// An iterative routine ran out of its iteration budget.
    #[error("convergence error after {iterations} iterations: {what}")]
    Convergence { what: String, iterations: usize },

    /// Monte Carlo acceptance rate fell below the floor; the frame is too
    /// ill-conditioned for rejection sampling at this dimension.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A series or iteration that should contract failed to: the probed
    /// direction or map is not hyperbolic at the working tolerances.
    #[error("hyperbolicity error: {0}")]
    Hyperbolicity(String),

    /// Graph-transform image does not cover the requested chart domain.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// Newton/bisection inversion failed at a grid node.
    #[error("root finding failed at node {node}: {what}")]
    RootFinding { what: String, node: usize },

    /// Distortion tail failed to decay geometrically.
    #[error("distortion error: {0}")]
    Distortion(String),

    /// Too few orbit points landed in the sampling window.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Test-system construction rejected the parameters.
    #[error("construction error: {0}")]
    Construction(String),
}

impl CoreError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CoreError::Input(msg.into())
    }

    pub(crate) fn rank(msg: impl Into<String>) -> Self {
        CoreError::Rank(msg.into())
    }
}
