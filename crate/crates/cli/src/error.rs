use thiserror::Error;

/// Failures surfaced to the command line, each with a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error(transparent)]
    Solver(#[from] sinkhorn_limit::Error),

    #[error("methods disagree by {gap:e} (allowed {allowed:e})")]
    MethodGap { gap: f64, allowed: f64 },

    #[error("observed degree {degree} above the bound {bound} for a {rows}x{cols} instance")]
    DegreeAboveBound {
        rows: usize,
        cols: usize,
        degree: usize,
        bound: u64,
    },

    #[error("cannot write report: {0}")]
    Output(String),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_DEFECT: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_INCONSISTENT: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;
pub const EXIT_RESOURCE_LIMIT: u8 = 5;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use sinkhorn_limit::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Usage(_) => EXIT_INVALID_INPUT,
            CliError::Solver(e) => match e {
                E::InconsistentMarginals { .. } | E::UnitIdeal => EXIT_INCONSISTENT,
                E::NotConverged { .. } => EXIT_NOT_CONVERGED,
                E::ResourceLimit(_) => EXIT_RESOURCE_LIMIT,
                E::NonPositiveInput { .. }
                | E::ShapeMismatch { .. }
                | E::InvalidConfig(_)
                | E::WrongShape { .. }
                | E::UnsupportedShape { .. }
                | E::InvalidDecimal(_)
                | E::InvalidVariable(_)
                | E::NonPositiveLambda(_) => EXIT_INVALID_INPUT,
                _ => EXIT_DEFECT,
            },
            CliError::MethodGap { .. } | CliError::DegreeAboveBound { .. } | CliError::Output(_) => EXIT_DEFECT,
        }
    }
}
