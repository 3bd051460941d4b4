use std::fmt;

use ddforge::analysis::AnalysisError;
use ddforge::bath::BathError;
use ddforge::sequence::SequenceError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<SequenceError> for CliError {
    fn from(e: SequenceError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BathError> for CliError {
    fn from(e: BathError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::BranchAmbiguity { .. } | AnalysisError::OutOfRange(_) => {
                CliError::Numeric(format!("{e}; rerun with a smaller --at-max"))
            }
            AnalysisError::Effective { .. } | AnalysisError::ZeroCoupling => CliError::Numeric(e.to_string()),
            AnalysisError::Sequence(s) => s.into(),
            AnalysisError::Pool(m) => CliError::Io(m),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
