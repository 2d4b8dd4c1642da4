//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("topology: invalid multiplex dimension {0} (expected 1, 2, or 3)")]
    InvalidDims(usize),

    #[error("topology: axes {axes:?} must all be >= 1")]
    InvalidAxes { axes: Vec<usize> },

    #[error("topology: axes {axes:?} hold {capacity} cells, fewer than the {nozzles} nozzles requested")]
    Capacity {
        axes: Vec<usize>,
        capacity: usize,
        nozzles: usize,
    },

    #[error("topology: {len} axes given for a {dims}D scheme")]
    AxisCount { dims: usize, len: usize },

    #[error("nozzle index {index} out of range 1..={limit}")]
    NozzleRange { index: usize, limit: usize },

    #[error("coordinate {coord} outside axes of the {dims}D topology")]
    CoordRange { coord: String, dims: usize },

    #[error("scheduler: firing data carries {got} bits but the topology has {expected} nozzles")]
    DataLength { got: usize, expected: usize },

    #[error("driver: nominal drive {nominal} V lies outside the drive window [{lo}, {hi}] V")]
    NominalOutsideWindow { nominal: f64, lo: f64, hi: f64 },

    #[error("electrical fault: drive {drive} V meets or exceeds the {breakdown} V pass-gate breakdown")]
    Breakdown { drive: f64, breakdown: f64 },

    #[error("raster: {message} at byte {offset}")]
    RasterParse { offset: usize, message: String },

    #[error("trace: time regression, tick {tick} recorded after tick {last}")]
    TraceOrder { tick: u64, last: u64 },

    #[error("config: {0}")]
    Config(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn raster(offset: usize, message: impl Into<String>) -> Self {
        Error::RasterParse {
            offset,
            message: message.into(),
        }
    }
}
