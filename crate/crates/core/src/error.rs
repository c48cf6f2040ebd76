use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("solid voxels are not 6-connected ({components} components)")]
    DisconnectedSolid { components: usize },
    #[error("solid pattern on face y{axis}=0 differs from face y{axis}=1")]
    PeriodicMismatch { axis: usize },
    #[error("cell contains no solid voxel")]
    EmptySolid,
    #[error("mesh resolution {n} is not a positive multiple of mask resolution {m}")]
    ResolutionIncompatible { n: usize, m: usize },
    #[error("epsilon not reciprocal integer: {0}")]
    EpsilonNotReciprocalInteger(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("elasticity tensor violates index symmetry at {0:?}")]
    TensorSymmetry([usize; 4]),
    #[error("elasticity tensor is not coercive (smallest eigenvalue {0:e})")]
    NotCoercive(f64),
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("operator is not positive definite (curvature {0:e})")]
    IndefiniteDetected(f64),
    #[error("matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("eigen iteration did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
    #[error("the two forms share a kernel vector")]
    NullspaceOverlap,
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("input tensor field is not symmetric (deviation {0:e})")]
    AsymmetricInput(f64),
    #[error("cell solutions missing for {0}")]
    MissingSolutions(String),
    #[error("mesh does not match: {0}")]
    InconsistentMesh(String),
    #[error("vertical line through ({0}, {1}) meets no solid")]
    EmptyColumn(f64, f64),
    #[error("micro time {micro} and macro time {macro_} differ")]
    TimeMismatch { micro: f64, macro_: f64 },
    #[error("Picard iteration stalled at relative update {0:e}")]
    PicardNoConvergence(f64),
    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },
}

impl Error {
    /// True for errors raised by numerical solvers as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::MaxIterationsExceeded { .. }
                | Error::IndefiniteDetected(_)
                | Error::NotPositiveDefinite(_)
                | Error::ConvergenceFailure { .. }
                | Error::NullspaceOverlap
                | Error::SolverFailure(_)
                | Error::PicardNoConvergence(_)
        )
    }
}
