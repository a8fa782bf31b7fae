use thiserror::Error;

/// Errors raised by the engine.
///
/// Every variant carries a stable machine-readable code (see [`Error::code`])
/// so that front ends can report failures without parsing messages.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("incompatible algebras: {0}")]
    IncompatibleAlgebra(String),
    #[error("negative power of {0} is only allowed for u_1 in hat mode with q = 1")]
    NegativePower(String),
    #[error("index out of range: {0}")]
    BadIndex(String),
    #[error("grading undefined for the zero polynomial")]
    UndefinedGrading,
    #[error("input is not homogeneous in the odd variables")]
    InhomogeneousTheta,
    #[error("expected theta-degree {expected}, found {found}")]
    WrongThetaDegree { expected: usize, found: usize },
    #[error("operator coefficients must be free of odd variables")]
    OddCoefficient,
    #[error("operator matrix is not skew-adjoint")]
    NotSkewAdjoint,
    #[error("density is not a total derivative in this algebra")]
    NotExact,
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("Maurer-Cartan equation fails at order epsilon^{0}")]
    MaurerCartan(usize),
    #[error("first-order bihamiltonian compatibility fails")]
    FirstOrderIncompatible,
    #[error("input is not a cocycle: {0}")]
    NotCocycle(String),
    #[error("no solution in the given graded slice")]
    NoSolution,
    #[error("cochain is not in tail form (0, ..., 0, c)")]
    NotTailForm,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("antidifferentiation failed: {0}")]
    Antiderivative(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::IncompatibleAlgebra(_) => "incompatible_algebra",
            Error::NegativePower(_) => "negative_power",
            Error::BadIndex(_) => "bad_index",
            Error::UndefinedGrading => "undefined_grading",
            Error::InhomogeneousTheta => "inhomogeneous_theta",
            Error::WrongThetaDegree { .. } => "wrong_theta_degree",
            Error::OddCoefficient => "odd_coefficient",
            Error::NotSkewAdjoint => "not_skew_adjoint",
            Error::NotExact => "not_exact",
            Error::DegenerateMetric(_) => "degenerate_metric",
            Error::MaurerCartan(_) => "maurer_cartan_violation",
            Error::FirstOrderIncompatible => "first_order_incompatible",
            Error::NotCocycle(_) => "not_cocycle",
            Error::NoSolution => "no_solution",
            Error::NotTailForm => "not_tail_form",
            Error::Precondition(_) => "precondition",
            Error::Antiderivative(_) => "antiderivative",
            Error::Unsupported(_) => "unsupported",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
