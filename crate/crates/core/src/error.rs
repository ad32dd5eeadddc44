use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {level} exceeds the maximum supported level {max}")]
    LevelOverflow { level: u32, max: u32 },

    #[error("level {level} is too coarse: at least {required} is required")]
    InsufficientResolution { level: u32, required: u32 },

    #[error("{0}")]
    BoundViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate normalization: the driving path is numerically constant")]
    DegenerateNormalization,

    #[error("Haar index out of range: j={j}, k={k}")]
    IndexOutOfRange { j: u32, k: usize },

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("need at least {required} levels, got {got}")]
    InsufficientLevels { got: usize, required: usize },

    #[error("off-grid request: {0}")]
    OffGrid(String),

    #[error("reference level {level} exceeds the memory guard {max}")]
    MemoryGuard { level: u32, max: u32 },

    #[error("invalid input: {0}")]
    Parse(String),

    #[error("malformed Brownian dump: {0}")]
    Format(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 = usage, 2 = numeric failure, 3 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Format(_) => 3,
            Error::DegenerateNormalization | Error::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}
