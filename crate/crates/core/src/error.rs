//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} values but grid has {expected} nodes")]
    LengthMismatch { got: usize, expected: usize },

    #[error("non-finite value at node {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("state has {got} field(s), model '{model}' needs {expected}")]
    ArityMismatch {
        model: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} requires a periodic circle grid")]
    RequiresCircle { what: &'static str },

    #[error("{what} requires a zero-mean field (mean = {mean:e})")]
    NonZeroMean { what: &'static str, mean: f64 },

    #[error("invalid step control: {0}")]
    InvalidStepControl(String),

    #[error("solution blew up at t = {time}: max-norm {max_norm:e}")]
    BlowUp { time: f64, max_norm: f64 },

    #[error("diagnostic series is empty")]
    EmptySeries,

    #[error("flow map and trajectory come from different runs: {0}")]
    RunMismatch(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown functional '{name}' for model '{model}'")]
    UnknownFunctional { name: String, model: &'static str },

    #[error("experiment setup: {0}")]
    Experiment(String),

    #[error("sweep needs at least 3 parameter values, got {0}")]
    SweepTooFewValues(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
