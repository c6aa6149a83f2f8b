use std::fmt;
use std::path::PathBuf;

/// Failures of the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", located(path, *line))]
    Config {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Run(#[from] lvspde::Error),
}

fn located(path: &std::path::Path, line: Option<usize>) -> impl fmt::Display + '_ {
    struct L<'a>(&'a std::path::Path, Option<usize>);
    impl fmt::Display for L<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match self.1 {
                Some(l) => write!(f, "{}:{l}", self.0.display()),
                None => write!(f, "{}", self.0.display()),
            }
        }
    }
    L(path, line)
}

impl CliError {
    /// Process exit code: 2 for configuration, usage and I/O problems, 1 for
    /// failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            message: e.to_string(),
        }
    }
}
