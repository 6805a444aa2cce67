use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed inventory: {0}")]
    Inventory(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("elevation grid: {0}")]
    Grid(String),

    #[error("point ({x}, {y}) is outside the grid extent")]
    OutsideGrid { x: f64, y: f64 },

    #[error("all four neighbours of ({x}, {y}) are nodata")]
    NoData { x: f64, y: f64 },

    #[error("persistence: {0}")]
    Persistence(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("unsupported model format version {0}")]
    ModelVersion(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that originate from reading or writing files rather
    /// than from the content of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
