use thiserror::Error;

/// Errors produced by basis construction, operator building, solvers and
/// dynamics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Hilbert space dimension {dimension} exceeds the cap of {cap}")]
    DimensionCap { dimension: u128, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("eigensolver did not converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("numerical integrity: {0}")]
    NumericalIntegrity(String),

    #[error("at phi = {phi}: {source}")]
    AtPhase {
        phi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at J/U = {j_over_u}: {source}")]
    AtCoupling {
        j_over_u: f64,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: sizes, shapes, unsupported parameter combinations.
    Input,
    /// Solver, optimizer or integrator failure.
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionCap { .. }
            | Error::Domain(_)
            | Error::Contract(_)
            | Error::Unsupported(_) => ErrorKind::Input,
            Error::Convergence { .. }
            | Error::Bracketing(_)
            | Error::Optimization(_)
            | Error::NumericalIntegrity(_) => ErrorKind::Numerical,
            Error::AtPhase { source, .. } | Error::AtCoupling { source, .. } => source.kind(),
        }
    }

    pub(crate) fn at_phase(self, phi: f64) -> Error {
        Error::AtPhase {
            phi,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_coupling(self, j_over_u: f64) -> Error {
        Error::AtCoupling {
            j_over_u,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
