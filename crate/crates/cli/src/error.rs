use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<bandgcn::Error> for CliError {
    fn from(e: bandgcn::Error) -> Self {
        use bandgcn::gcn::GcnError;
        match e {
            bandgcn::Error::Gcn(GcnError::InvalidConfig(m)) => CliError::Config(m),
            bandgcn::Error::Gcn(
                g @ (GcnError::StaleCache | GcnError::NonFiniteGradient { .. } | GcnError::Diverged(_)),
            ) => CliError::Internal(g.to_string()),
            bandgcn::Error::Graph(g) => CliError::Internal(g.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                bandgcn::Error::from(e).into()
            }
        })*
    };
}

via_core!(
    bandgcn::signal_io::SignalError,
    bandgcn::signal_io::EdfError,
    bandgcn::signal_io::AnnotationError,
    bandgcn::signal_io::SynthError,
    bandgcn::preprocess::PreprocessError,
    bandgcn::features::FeatureError,
    bandgcn::balance::BalanceError,
    bandgcn::graphs::GraphError,
    bandgcn::gcn::GcnError,
    bandgcn::eval::EvalError
);

/// Attaches a path to an I/O failure. Refusing to overwrite an output is a
/// configuration problem, anything else a data problem.
pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| {
        if e.kind() == std::io::ErrorKind::AlreadyExists {
            CliError::Config(format!("{} already exists; outputs are write-once", path.display()))
        } else {
            CliError::Data(format!("{}: {e}", path.display()))
        }
    }
}
