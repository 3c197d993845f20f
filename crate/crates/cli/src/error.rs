use std::fmt;

use fatdist_core::Error as CoreError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    CheckFailed = 1,
    Schema = 2,
    Numeric = 3,
    NoFrame = 4,
    NotExact = 5,
    NotRegular = 6,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn name(self) -> &'static str {
        match self {
            Exit::Ok => "ok",
            Exit::CheckFailed => "check_failed",
            Exit::Schema => "schema",
            Exit::Numeric => "numeric",
            Exit::NoFrame => "no_frame",
            Exit::NotExact => "not_exact",
            Exit::NotRegular => "not_regular",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Schema,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.exit.name(), self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let exit = match &e {
            CoreError::DimensionMismatch(_)
            | CoreError::NonFinite { .. }
            | CoreError::InvalidForm(_)
            | CoreError::Precondition(_) => Exit::Schema,
            CoreError::NumericFailure(_)
            | CoreError::InternalInconsistency(_)
            | CoreError::Size { .. } => Exit::Numeric,
            CoreError::NoRoom(_) | CoreError::ConstructionFailure(_) => Exit::NoFrame,
            CoreError::NotExact(_) => Exit::NotExact,
            CoreError::NotRegular(_) => Exit::NotRegular,
        };
        Self {
            exit,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
