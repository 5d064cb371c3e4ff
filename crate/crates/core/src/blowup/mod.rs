//! Blow-up along the distinguished fiber: lifted fields, divisor dynamics,
//! the strict-transform section and the integer invariants.

mod invariants;
mod section;

pub use invariants::{gauss_linking, linking_number, transition_degree, LinkingReport};
pub use section::{meridian_section, strict_transform_section, transversality, TransversalityForm};

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::{fd_jacobian, Jacobian, VectorField};
use crate::geometry::{ChartId, ChartPoint, Vector, MAX_DIM};
use crate::hopf::{local_model_field, HopfField, LocalModel};

/// Finite-difference step used when a base field has no closed-form
/// Jacobian on the fiber.
pub const FD_STEP: f64 = 1e-5;

/// Lift of a field tangent to the distinguished fiber to the two blow-up
/// charts.
///
/// Off the divisor the slope equation `u' = (y' - u x')/x` is evaluated
/// directly; on it the limit `d_x y' + u d_y y' - u (d_x x' + u d_y x')` is
/// taken from the Jacobian of the base field on the fiber.
#[derive(Clone)]
pub struct LiftedField {
    pub base: Arc<dyn VectorField>,
    pub e: i64,
    base_chart: ChartId,
    xu: ChartId,
    vy: ChartId,
}

/// Lifts a field given on the solid-torus chart or on the north
/// stereographic chart.
pub fn lift_field(base: Arc<dyn VectorField>, e: i64) -> Result<LiftedField> {
    let (base_chart, xu, vy) = if base.supports(ChartId::LocalTorus) {
        (ChartId::LocalTorus, ChartId::BlowupXu, ChartId::BlowupVy)
    } else if base.supports(ChartId::StereoN) {
        (ChartId::StereoN, ChartId::StereoBlowupXu, ChartId::StereoBlowupVy)
    } else {
        return Err(Error::UnsupportedChart(ChartId::LocalTorus));
    };
    Ok(LiftedField { base, e, base_chart, xu, vy })
}

/// Lift of the local model `w' = -i E w, phi' = 1`.
pub fn lift_local_model(m: LocalModel) -> LiftedField {
    LiftedField {
        base: Arc::new(local_model_field(m)),
        e: m.e,
        base_chart: ChartId::LocalTorus,
        xu: ChartId::BlowupXu,
        vy: ChartId::BlowupVy,
    }
}

/// The Hopf field lifted to the blow-up of the north chart along `y1 = y2 = 0`.
pub fn lift_hopf() -> LiftedField {
    LiftedField {
        base: Arc::new(HopfField),
        e: 1,
        base_chart: ChartId::StereoN,
        xu: ChartId::StereoBlowupXu,
        vy: ChartId::StereoBlowupVy,
    }
}

/// The canonical divisor dynamics `x' = 0, u' = -E (1 + u^2), phi' = 1`,
/// realised as the lift of the local model restricted to `x = 0`.
pub fn divisor_field(e: i64) -> Result<LiftedField> {
    Ok(lift_local_model(LocalModel::with_default_radius(e)?))
}

/// `d(limit)` of the slope equation given the base Jacobian on the fiber.
fn limit_slope(j: &Jacobian, u: f64, xu_chart: bool) -> f64 {
    // a = first normal coordinate, b = second one
    let (daa, dab, dba, dbb) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    if xu_chart {
        dba + u * dbb - u * (daa + u * dab)
    } else {
        dab + u * daa - u * (dbb + u * dba)
    }
}

impl LiftedField {
    pub fn charts(&self) -> (ChartId, ChartId) {
        (self.xu, self.vy)
    }

    pub fn base_chart(&self) -> ChartId {
        self.base_chart
    }

    fn curve_jacobian(&self, s: f64) -> Result<Jacobian> {
        let on = ChartPoint::new(self.base_chart, &[0.0, 0.0, s]);
        if let Some(j) = self.base.jac_on_curve(&on) {
            return Ok(j);
        }
        fd_jacobian(self.base.as_ref(), &on, FD_STEP).map_err(|_| Error::JacobianUnavailable)
    }
}

impl VectorField for LiftedField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        let c = p.coords();
        let chart = p.chart();
        let xu_chart = if chart == self.xu {
            true
        } else if chart == self.vy {
            false
        } else {
            return Err(Error::UnsupportedChart(chart));
        };
        // (radial coordinate, slope, fiber coordinate)
        let (r, slope, s) = if xu_chart { (c[0], c[1], c[2]) } else { (c[1], c[0], c[2]) };
        let (a, b) = if xu_chart { (r, r * slope) } else { (slope * r, r) };
        let f = self.base.eval(&ChartPoint::new(self.base_chart, &[a, b, s]))?;
        let (fr, fo) = if xu_chart { (f[0], f[1]) } else { (f[1], f[0]) };
        let slope_dot = if r != 0.0 {
            (fo - slope * fr) / r
        } else {
            limit_slope(&self.curve_jacobian(s)?, slope, xu_chart)
        };
        let mut v = [0.0; MAX_DIM];
        if xu_chart {
            v[0] = fr;
            v[1] = slope_dot;
        } else {
            v[0] = slope_dot;
            v[1] = fr;
        }
        v[2] = f[2];
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == self.xu || chart == self.vy
    }

    fn name(&self) -> String {
        format!("lift({})", self.base.name())
    }
}

/// Divisor dynamics of the lifted Hopf field in angle coordinates
/// `(alpha, beta)`: `alpha` is twice the slope angle, `beta` the angle along
/// the fiber, `beta = 2 atan(y3)` in the north chart and
/// `pi - 2 atan(y3)` in the south chart.
///
/// Both rates come from the slope limit formula applied to the Hopf field
/// in whichever stereographic chart contains the fiber point.
#[derive(Clone, Copy, Debug, Default)]
pub struct StereoDivisorField;

impl VectorField for StereoDivisorField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::StereoDivisor {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let (alpha, beta) = (p.coords()[0], p.coords()[1]);
        let north = (beta - PI).abs() > PI / 2.0;
        let (chart, y3) = if north {
            (ChartId::StereoN, (beta / 2.0).tan())
        } else {
            (ChartId::StereoS, ((PI - beta) / 2.0).tan())
        };
        let on = ChartPoint::new(chart, &[0.0, 0.0, y3]);
        let j = match HopfField.jac_on_curve(&on) {
            Some(j) => j,
            None => fd_jacobian(&HopfField, &on, FD_STEP)?,
        };
        let half = alpha / 2.0;
        let alpha_dot = if half.cos().abs() >= half.sin().abs() {
            let u = half.tan();
            2.0 * limit_slope(&j, u, true) / (1.0 + u * u)
        } else {
            // alpha = pi - 2 atan v
            let v = 1.0 / half.tan();
            -2.0 * limit_slope(&j, v, false) / (1.0 + v * v)
        };
        let y3_dot = HopfField.eval(&on)?[2];
        let beta_dot = if north { 2.0 * y3_dot / (1.0 + y3 * y3) } else { -2.0 * y3_dot / (1.0 + y3 * y3) };
        let mut out = [0.0; MAX_DIM];
        out[0] = alpha_dot;
        out[1] = beta_dot;
        Ok(out)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::StereoDivisor
    }

    fn name(&self) -> String {
        "stereo-divisor".into()
    }
}

#[cfg(test)]
mod tests;
