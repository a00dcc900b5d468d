use pcmlax_core::algebra::Violation;
use pcmlax_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SINGULAR: i32 = 3;
    pub const COMMUTATION: i32 = 4;
    pub const NILPOTENCY: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("algebra `{name}` fails validation: {}", summarize(violations))]
    InvalidAlgebra { name: String, violations: Vec<Violation> },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn summarize(v: &[Violation]) -> String {
    let shown: Vec<String> = v.iter().take(4).map(|x| format!("{x:?}")).collect();
    if v.len() > 4 {
        format!("{} (+{} more)", shown.join("; "), v.len() - 4)
    } else {
        shown.join("; ")
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_singularity() => exit::SINGULAR,
            CliError::Core(CoreError::SeriesDivergent { .. } | CoreError::Precondition { .. }) => exit::CHECK_FAILED,
            _ => exit::CONFIG,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
