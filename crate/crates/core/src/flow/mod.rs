//! Adaptive integration of chart-aware vector fields, sections, return maps,
//! minimal periods and winding counters.

mod events;
mod field;
mod integrator;
mod roots;
mod trajectory;

pub use events::{
    crossings, minimal_period, next_crossing, return_map, Crossing, Section, CLOSURE_FACTOR, DEFAULT_RETURN_BOUND,
    MIN_TRANSVERSALITY,
};
pub use field::{chart_consistency, fd_jacobian, FnField, Jacobian, VectorField, ZeroField};
pub use integrator::{ChartSwitch, Integrator, RunEnd, StepView};
pub use roots::brent;
pub use trajectory::{observable_angle, turns, winding_count, PeriodReport, Trajectory};
