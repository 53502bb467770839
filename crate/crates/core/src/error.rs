//! Error type shared by all simulator layers.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("path delay {delay_s} s outside the delay window of {window_s} s")]
    DelayOutOfWindow { delay_s: f64, window_s: f64 },

    #[error("stationarity region has no propagation paths")]
    EmptyRegion,

    #[error("all-zero power profile; spread is undefined")]
    ZeroProfile,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("target delay spread {target_s} s outside the attainable range (0, {max_s} s)")]
    TargetOutOfRange { target_s: f64, max_s: f64 },

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("time {t_s} s outside trajectory support [{start_s}, {end_s}] s")]
    OutOfSupport { t_s: f64, start_s: f64, end_s: f64 },

    #[error("scenario schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("FER oracle failed at grid point {index}: {msg}")]
    Oracle { index: usize, msg: String },

    #[error("table file error: {0}")]
    TableFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
