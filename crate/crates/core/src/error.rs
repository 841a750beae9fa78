use thiserror::Error;

pub type Result<T> = std::result::Result<T, DistillError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistillError {
    #[error("incident momentum must be positive, got kappa = {0}")]
    NonPositiveMomentum(f64),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("{label}: not mixing (second eigenvalue modulus {second_modulus})")]
    NotMixing { label: String, second_modulus: f64 },

    #[error("{label}: numerical failure ({detail}, residual {residual:e})")]
    NumericalFailure {
        label: String,
        detail: String,
        residual: f64,
    },

    #[error("{0}: eigensolver did not converge")]
    EigenFailure(String),

    #[error("fidelity formula inapplicable (degenerate population dynamics): denominator {0:e}")]
    FormulaInapplicable(f64),

    #[error("momentum distribution has mass {0:e} on k > 0, below the numerical floor")]
    InsufficientMass(f64),
}
