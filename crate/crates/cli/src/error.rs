use std::fmt;
use std::path::Path;

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Core(symrnn::Error),
    /// Flags or config values that cannot be used.
    Usage(String),
    /// A requested metric needs an input that was not supplied.
    MissingOracle(String),
    /// A dataset sample outside the sector, by file line.
    SymmetryViolation {
        line: usize,
        path: String,
    },
}

pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_SYMMETRY: i32 = 4;
pub const EXIT_MISSING_ORACLE: i32 = 5;
pub const EXIT_DEGENERATE_PLANE: i32 = 6;

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Core(symrnn::Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    }

    pub fn exit_code(&self) -> i32 {
        use symrnn::Error as E;
        match self {
            CliError::Usage(_) => EXIT_VALIDATION,
            CliError::MissingOracle(_) => EXIT_MISSING_ORACLE,
            CliError::SymmetryViolation { .. } => EXIT_SYMMETRY,
            CliError::Core(e) => match e {
                E::Io(_) => EXIT_IO,
                E::ConvergenceFailure(_) | E::ZeroAmplitudeConfig(_) => EXIT_SOLVER,
                E::SymmetryViolatedSample { .. } => EXIT_SYMMETRY,
                E::DegeneratePlane => EXIT_DEGENERATE_PLANE,
                _ => EXIT_VALIDATION,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::MissingOracle(m) => write!(f, "missing input: {m}"),
            CliError::SymmetryViolation { line, path } => write!(
                f,
                "{path}: line {line} lies outside the S^z = 0 sector required by u1 training"
            ),
        }
    }
}

impl From<symrnn::Error> for CliError {
    fn from(e: symrnn::Error) -> Self {
        CliError::Core(e)
    }
}
