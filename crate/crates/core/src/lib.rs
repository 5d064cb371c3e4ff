//! Numerical laboratory for circle bundles on 3-manifolds.
//!
//! The crate integrates chart-aware vector fields on `S^3`, on a solid-torus
//! neighbourhood of a distinguished fiber and on its blow-up, and uses the
//! flows to measure the integer invariants of the bundle (Euler number,
//! linking, divisor winding), to build the conjugacy between a perturbed
//! foliation by circles and the unperturbed one, and to study Thurston's
//! interpolating family on a 4-dimensional fiber product.

pub mod blowup;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod geometry;
pub mod hopf;
pub mod rigidity;
pub mod thurston;

pub use error::{Error, Result};
