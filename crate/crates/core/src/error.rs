use thiserror::Error;

/// Errors produced by graph construction, dynamics, integration and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("graph not shell-regular: {0}")]
    NotShellRegular(String),

    /// Polar coordinates are undefined because a radial component vanished.
    #[error("polar singularity: radial component of class {class} is zero")]
    PolarSingularity { class: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// Newton iteration kept failing after the step size reached its floor.
    #[error("stiff failure at t = {t}: Newton iteration did not converge")]
    StiffFailure { t: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("singular matrix in linear solve")]
    SingularMatrix,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PolarSingularity { .. }
                | Error::StiffFailure { .. }
                | Error::MaxSteps(_)
                | Error::SingularMatrix
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
