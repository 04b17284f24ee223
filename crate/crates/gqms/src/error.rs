use thiserror::Error;

/// Errors surfaced by the analysis library.
#[derive(Debug, Error)]
pub enum GqmsError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not symmetric within tolerance (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("matrix is not Hermitian within tolerance (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:.3e})")]
    NotPositiveSemidefinite { min_eig: f64 },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error(
        "drift/diffusion data violates the admissibility constraint (min eigenvalue {min_eig:.3e})"
    )]
    NotAdmissible { min_eig: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(&'static str),

    #[error("symplectic completion failed on the {block} block: {reason}")]
    SymplecticCompletion { block: String, reason: String },

    #[error("drift block is not strictly stable (spectral abscissa {abscissa:.3e})")]
    Unstable { abscissa: f64 },

    #[error("singular linear solve while computing {what}")]
    SingularSolve { what: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("model file error at `{field}`: {reason}")]
    ModelSchema { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GqmsError>;
