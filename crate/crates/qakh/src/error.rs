use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("balance error: slice {slice}: {detail}")]
    Balance { slice: usize, detail: String },
    #[error("range error: slice {slice}: position {pos} not in {lo}..={hi}")]
    Range { slice: usize, pos: i64, lo: i64, hi: i64 },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("seam error: {0}")]
    Seam(String),
    #[error("position error: {0}")]
    Position(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("ambiguity error: {0}")]
    Ambiguity(String),
    #[error("mismatch error: {0}")]
    Mismatch(String),
    #[error("location error: {0}")]
    Location(String),
    #[error("glue error: {0}")]
    Glue(String),
    #[error("unsupported link: {0}")]
    UnsupportedLink(String),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("crossing guard: diagram has {n} crossings, limit is {max}")]
    Guard { n: usize, max: usize },
}

impl Error {
    /// Input-validation failures, as opposed to failed checks or internal bugs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::Balance { .. }
                | Error::Range { .. }
                | Error::Location(_)
                | Error::Glue(_)
                | Error::UnsupportedLink(_)
                | Error::Guard { .. }
        )
    }

    /// Module that raises this kind of error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Schema(_) | Error::Balance { .. } | Error::Range { .. } | Error::Topology(_) | Error::Seam(_) => {
                "annular_diagram"
            }
            Error::Position(_) | Error::Domain(_) | Error::Calibration(_) => "cobordism_calc",
            Error::Ambiguity(_) | Error::Mismatch(_) => "burnside",
            Error::Location(_) | Error::Glue(_) | Error::UnsupportedLink(_) => "cobordism_maps",
            Error::Corpus(_) => "corpus",
            Error::Guard { .. } => "cli",
        }
    }
}
