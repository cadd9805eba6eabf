use std::io;

/// Library error type. Pipeline stages wrap their causes with [`Error::stage`]
/// so a failure reports where in the estimation chain it happened.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The inverse-loss moment integral diverges when the SU sits on the PU
    /// circle; callers must perturb the radius or reject the geometry.
    #[error("singular geometry: |r0 - r1| = {gap_m:.3} m (r0 = {r0_m:.3} m, r1 = {r1_m:.3} m) is inside the 1 m guard")]
    SingularGeometry { r0_m: f64, r1_m: f64, gap_m: f64 },

    #[error("quadrature did not converge on [{a:e}, {b:e}]: {detail}")]
    Quadrature { a: f64, b: f64, detail: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Wrap with a pipeline stage label.
    pub fn stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Coarse classification, used by front ends to map errors to exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::Domain(_) => ErrorCategory::Config,
            Error::Io(_) => ErrorCategory::Io,
            Error::SingularGeometry { .. } | Error::Quadrature { .. } | Error::Numeric(_) => {
                ErrorCategory::Numeric
            }
            Error::Stage { source, .. } => source.category(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration or arguments.
    Config,
    /// Filesystem / stream failure.
    Io,
    /// Numerical failure surfaced from estimation.
    Numeric,
}

pub type Result<T> = std::result::Result<T, Error>;
