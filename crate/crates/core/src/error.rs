use thiserror::Error;

use crate::geometry::ChartId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point too close to the projection pole (|1 - x4| = {0:.3e})")]
    Pole(f64),
    #[error("point outside the chart overlap (|u| = {0:.3e})")]
    Overlap(f64),
    #[error("chart {0} is not supported by this object")]
    UnsupportedChart(ChartId),
    #[error("no transition registered from {from} to {to}")]
    NoTransition { from: ChartId, to: ChartId },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepFailure { t: f64, h: f64 },
    #[error("no chart covers the state at t = {0}")]
    ChartExit(f64),
    #[error("orbit does not close: best distance {distance:.3e} within time {horizon}")]
    NotClosed { distance: f64, horizon: f64 },
    #[error("no return to the section within time {0}")]
    NoReturn(f64),
    #[error("tangential crossing: transversality {0:.3e}")]
    TangentialCrossing(f64),
    #[error("on-curve Jacobian unavailable")]
    JacobianUnavailable,
    #[error("curves are too close: minimum distance {0:.3e}")]
    TooClose(f64),
    #[error("Gauss integral {0} is not within 0.2 of an integer")]
    Ambiguous(f64),
    #[error("{samples} samples are not enough for degree {degree}")]
    Undersampled { samples: usize, degree: i64 },
    #[error("map is not periodic: residual {0:.3e}")]
    NotPeriodic(f64),
    #[error("seed field is nonzero outside its support: {0:.3e}")]
    Support(f64),
    #[error("periodicity violated at {point:?}: {detail}")]
    PeriodicityViolation { point: Vec<f64>, detail: String },
    #[error("base drift circle failed to close: defect {0:.3e}")]
    NonReturningBase(f64),
    #[error("configuration error: {0}")]
    Config(String),
}
