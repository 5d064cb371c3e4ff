use std::sync::Arc;

use super::Bump;
use crate::error::{Error, Result};
use crate::flow::{Integrator, VectorField};
use crate::geometry::{ChartId, ChartPoint, Vector, MAX_DIM};

type Curve = dyn Fn(f64, f64) -> (f64, f64) + Send + Sync;

/// `Z = rho(|w|) (-x_c(phi), -y_c(phi), 0)` for a curve `w = c(phi)` of
/// leaves; its time-one map moves the curve onto the fiber `w = 0`.
#[derive(Clone)]
pub struct Straightening {
    curve: Arc<Curve>,
    pub epsilon: f64,
    pub bump: Bump,
    integ: Integrator,
}

/// Builds the straightening diffeomorphism for the curve `theta -> curve(theta, eps)`.
pub fn straighten_seifert_curve(
    curve: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    epsilon: f64,
    bump: Bump,
) -> Straightening {
    Straightening { curve: Arc::new(curve), epsilon, bump, integ: Integrator::new(1e-12) }
}

impl Straightening {
    pub fn curve_point(&self, theta: f64) -> (f64, f64) {
        (self.curve)(theta, self.epsilon)
    }

    /// `eta_eps(p)`, the time-one flow of the straightening field.
    pub fn apply(&self, p: &ChartPoint) -> Result<ChartPoint> {
        if p.chart() != ChartId::LocalTorus {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let c = p.coords();
        if (c[0] * c[0] + c[1] * c[1]).sqrt() >= self.bump.outer {
            // the field vanishes identically outside the tube
            return Ok(*p);
        }
        self.integ.flow(self, p, 1.0)
    }
}

impl VectorField for Straightening {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        let c = p.coords();
        let rho = self.bump.eval((c[0] * c[0] + c[1] * c[1]).sqrt());
        let (x, y) = self.curve_point(c[2]);
        let mut v = [0.0; MAX_DIM];
        v[0] = -rho * x;
        v[1] = -rho * y;
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::LocalTorus
    }

    fn name(&self) -> String {
        format!("straightening(eps={})", self.epsilon)
    }
}
