use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or solver parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Bad command-line flags, configuration values or call preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Adaptive quadrature ran out of subdivisions. `component` is the index
    /// of the worst vector component when several integrals run together.
    #[error(
        "quadrature did not converge{}: best estimate {value:e}, error bound {error:e}",
        component.map(|n| format!(" for component {n}")).unwrap_or_default()
    )]
    Convergence {
        component: Option<usize>,
        value: f64,
        error: f64,
    },

    #[error("expansion coefficient {n} did not converge: best estimate {value:e}, error bound {error:e}")]
    CoefficientConvergence { n: usize, value: f64, error: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("at S = {spot}: {source}")]
    AtSpot {
        spot: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn at_spot(self, spot: f64) -> Self {
        Error::AtSpot {
            spot,
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line driver: 1 for usage and file
    /// problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Io { .. } => 1,
            Error::AtSpot { source, .. } => source.exit_code(),
            Error::Domain(_)
            | Error::InvalidParameter(_)
            | Error::Convergence { .. }
            | Error::CoefficientConvergence { .. }
            | Error::Numerical(_) => 2,
        }
    }
}
