use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    GridSize(usize),

    #[error("cannot convert {from} to {to}: incompatible dimensions")]
    UnitMismatch { from: &'static str, to: &'static str },

    #[error("operands live on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),

    #[error("field sampling does not match propagation settings: {0}")]
    SamplingMismatch(String),

    #[error("state norm {norm} deviates from 1 beyond tolerance {tol}")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("requested {requested} eigenstates but the grid supports at most {available}")]
    BasisTooLarge { requested: usize, available: usize },

    #[error("optimization diverged at iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

impl Error {
    /// Wrap an error with the workflow stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}
