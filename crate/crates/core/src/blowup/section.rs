use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow::{Section, VectorField};
use crate::geometry::{line_angle, wrap_signed, ChartId, ChartPoint, Vector};

/// The 1-form `(1/E) d arctan u` on the blow-up charts, with the sign of
/// the slope angle taken relative to the chart orientation (the stereographic
/// blow-up charts see the opposite sense of rotation). It evaluates to `-1`
/// on every unperturbed lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransversalityForm {
    pub e: i64,
}

impl TransversalityForm {
    pub fn new(e: i64) -> Result<Self> {
        if e == 0 {
            return Err(Error::Config("Euler number must be nonzero".into()));
        }
        Ok(TransversalityForm { e })
    }

    /// `eta(v)` at `p`.
    pub fn apply(&self, p: &ChartPoint, v: &Vector) -> Result<f64> {
        let c = p.coords();
        let d_theta = match p.chart() {
            ChartId::BlowupXu | ChartId::StereoBlowupXu => v[1] / (1.0 + c[1] * c[1]),
            // theta = pi/2 - atan v
            ChartId::BlowupVy | ChartId::StereoBlowupVy => -v[0] / (1.0 + c[0] * c[0]),
            other => return Err(Error::UnsupportedChart(other)),
        };
        Ok(pencil_sign(p.chart()) * d_theta / self.e as f64)
    }
}

/// `+1` on the solid-torus blow-up, `-1` on the stereographic one.
fn pencil_sign(chart: ChartId) -> f64 {
    -chart.meridian_sign()
}

/// `eta(f(p))`.
pub fn transversality(form: &TransversalityForm, f: &dyn VectorField, p: &ChartPoint) -> Result<f64> {
    form.apply(p, &f.eval(p)?)
}

/// Reduces an angle defined mod `pi` to `(-pi/2, pi/2]`.
fn wrap_half(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if r > PI / 2.0 {
        r - PI
    } else {
        r
    }
}

/// Strict transform of the pencil of half-planes `{theta = c mod pi}`
/// through the fiber, extended across the divisor. Crossings are counted
/// with `dtheta/dt` of sign `-sign(E)`.
pub fn strict_transform_section(e: i64, c: f64) -> Result<Section> {
    let form = TransversalityForm::new(e)?;
    let s = Section::new(
        format!("strict-transform(E={e}, c={c})"),
        move |p| {
            let theta = line_angle(p).ok_or(Error::UnsupportedChart(p.chart()))?;
            Ok(pencil_sign(p.chart()) * wrap_half(theta - c))
        },
        move |p, v| form.apply(p, v),
        Some(-(e.signum() as f64)),
    );
    let mut s = s;
    s.jump_guard = PI / 2.0;
    Ok(s)
}

/// The meridian disc `{phi = c}`, crossed once per turn of the fiber angle.
pub fn meridian_section(c: f64) -> Section {
    Section::new(
        format!("meridian(c={c})"),
        move |p| match p.chart() {
            ChartId::LocalTorus | ChartId::BlowupXu | ChartId::BlowupVy => Ok(wrap_signed(p.coords()[2] - c)),
            other => Err(Error::UnsupportedChart(other)),
        },
        |_, v| Ok(v[2]),
        Some(1.0),
    )
    .angular()
}
