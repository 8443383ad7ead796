use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("boundary forms are linearly dependent")]
    DependentForms,
    #[error("invalid boundary conditions: {0}")]
    InvalidBoundaryConditions(String),
    #[error("split-column determinants are only defined for even order (n = {0})")]
    OddOrderUnsupported(usize),
    #[error("boundary conditions are not Birkhoff regular (|m| = {magnitude:e})")]
    NotRegular { magnitude: f64 },
    #[error("argument of z = {z} lies outside the principal sector [0, 2pi/n)")]
    DegenerateArgument { z: String },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("annulus {annulus}: winding number {winding} but {found} roots located")]
    CountMismatch {
        annulus: usize,
        winding: usize,
        found: usize,
    },
    #[error("contour of radius {radius} passes within {distance:e} of an eigenvalue")]
    ContourTooClose { radius: f64, distance: f64 },
    #[error("annulus {annulus}: {perturbed} perturbed vs {unperturbed} unperturbed eigenvalues")]
    PairingMismatch {
        annulus: usize,
        perturbed: usize,
        unperturbed: usize,
    },
    #[error("Cesàro means not converged: error bar {error_bar:e} exceeds {tolerance:e}")]
    NotConverged { error_bar: f64, tolerance: f64 },
    #[error("sequence too short for Cesàro summation ({0} terms, need at least {1})")]
    TooFewTerms(usize, usize),
    #[error("measure has nonzero endpoint derivative Q'(0) = {qa}, Q'(1) = {qb}")]
    UnsupportedEndpointDerivative { qa: String, qb: String },
    #[error("xi2/xi1 lies on the positive real axis; the logarithm branch is ambiguous")]
    AmbiguousBranch,
    #[error("z = {z} is too close to the spectrum (|det| = {magnitude:e})")]
    NearSpectrum { z: String, magnitude: f64 },
    #[error("quadrature did not converge: estimated error {error:e} after {evaluations} evaluations")]
    QuadratureNotConverged { error: f64, evaluations: usize },
    #[error("a pole of the half-line integrand lies on the positive real axis")]
    PoleOnPath,
    #[error("root finder failed near z = {z}: {reason}")]
    RootNotFound { z: String, reason: String },
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotRegular { .. } => 2,
            Error::UnsupportedEndpointDerivative { .. } | Error::InvalidMeasure(_) => 3,
            Error::DependentForms
            | Error::InvalidBoundaryConditions(_)
            | Error::OddOrderUnsupported(_)
            | Error::DegenerateArgument { .. }
            | Error::Config(_) => 1,
            _ => 4,
        }
    }
}
