use alloc::string::String;

/// Errors raised by the estimation library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("rank zero design")]
    RankZero,

    #[error("design has full column rank; β identifiable")]
    FullColumnRank,

    #[error("regularization must be positive")]
    NonPositiveRegularization,

    #[error("schedule undefined for tiny n; supply h explicitly")]
    ScheduleUndefined,

    #[error("degenerate leverage; increase regularization")]
    DegenerateLeverage,

    #[error("no admissible tuning point")]
    NoAdmissiblePoint,

    #[error("vector is not in the row space of the design (residual {residual:e})")]
    NotInRowSpace { residual: f64 },

    #[error("undefined proportion")]
    UndefinedProportion,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Numerical failures are distinguished from bad input for exit-code purposes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankZero
                | Error::DegenerateLeverage
                | Error::NoAdmissiblePoint
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn ensure_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(alloc::format!("{what} contains non-finite values")))
    }
}
