//! Thurston's interpolating family on the fiber product of the unit tangent
//! bundle of the torus with the Heisenberg nilmanifold.

mod phases;

pub use phases::{
    closure_defect, dynamical_phase, geometric_phase, leaf_geometry, sweep, write_sweep_csv, ClosureReport,
    LeafGeometry, SweepRow,
};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::VectorField;
use crate::geometry::{wrap_angle, ChartId, ChartPoint, Vector, MAX_DIM};

/// A point of `T^2 = C / (2 pi Z x 2 pi Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusPoint {
    pub z: Complex64,
}

impl TorusPoint {
    pub fn new(z: Complex64) -> Self {
        TorusPoint { z: Complex64::new(wrap_angle(z.re), wrap_angle(z.im)) }
    }
}

/// A point of `H_3(R) / H_3(Z)` in the unit-cube fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeisPoint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `x - floor(x)`, mapped into `[0, 1)` even when rounding lands on 1.
fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Reduces `(a, b, c)` by left multiplication with lattice elements under
/// `(m, n, k) (a, b, c) = (m + a, n + b, k + c + m b)`.
pub fn heis_reduce(a: f64, b: f64, c: f64) -> HeisPoint {
    let b1 = frac(b);
    let m = -a.floor();
    let a1 = frac(a);
    let c1 = c + m * b1;
    HeisPoint { a: a1, b: b1, c: frac(c1) }
}

/// `(p, p')` in `S(T^2) x H` with matching torus projections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberProductPoint {
    pub base: TorusPoint,
    pub zeta: Complex64,
    pub heis: HeisPoint,
}

impl FiberProductPoint {
    /// Reads a point of the fiber-product chart `(x, y, zeta_re, zeta_im, x_U)`.
    /// The Heisenberg coordinates are `(x, y, x_U) / 2 pi`.
    pub fn from_chart(p: &ChartPoint) -> Result<Self> {
        if p.chart() != ChartId::FiberProduct {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let c = p.coords();
        let zeta = Complex64::new(c[2], c[3]);
        if (zeta.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPoint(format!("|zeta| = {} is not 1", zeta.norm())));
        }
        Ok(FiberProductPoint {
            base: TorusPoint::new(Complex64::new(c[0], c[1])),
            zeta,
            heis: heis_reduce(c[0] / TAU, c[1] / TAU, c[4] / TAU),
        })
    }

    /// Distance between the torus projections of the two factors.
    pub fn torus_mismatch(&self) -> f64 {
        let d = |u: f64, v: f64| {
            let r = (u - v).rem_euclid(TAU);
            r.min(TAU - r)
        };
        d(self.base.z.re, TAU * self.heis.a).hypot(d(self.base.z.im, TAU * self.heis.b))
    }
}

/// `lambda` and the two coefficients of `X = (alpha1 S_lambda, alpha2 X_mu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThurstonParams {
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// `(alpha1, alpha2) = (2 / (2 + lambda), lambda / (2 + lambda))`.
pub fn alpha_profile(lambda: f64) -> (f64, f64) {
    (2.0 / (2.0 + lambda), lambda / (2.0 + lambda))
}

impl ThurstonParams {
    pub fn new(lambda: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(alpha1 > 0.0) || !(alpha2 >= 0.0) {
            return Err(Error::Config(format!(
                "need lambda > 0, alpha1 > 0, alpha2 >= 0 (got {lambda}, {alpha1}, {alpha2})"
            )));
        }
        Ok(ThurstonParams { lambda, alpha1, alpha2 })
    }

    /// The profile coefficients.
    pub fn profile(lambda: f64) -> Result<Self> {
        let (a1, a2) = alpha_profile(lambda);
        Self::new(lambda, a1, a2)
    }

    /// Profile `alpha1` with `alpha2 = ratio * alpha1`.
    pub fn with_ratio(lambda: f64, ratio: f64) -> Result<Self> {
        let (a1, _) = alpha_profile(lambda);
        Self::new(lambda, a1, ratio * a1)
    }

    pub fn ratio(&self) -> f64 {
        self.alpha2 / self.alpha1
    }

    /// Period of the base drift circle, `2 pi lambda / alpha1`.
    pub fn drift_period(&self) -> f64 {
        TAU * self.lambda / self.alpha1
    }
}

/// `z' = zeta, zeta' = (i / lambda) zeta` on the unit tangent bundle chart
/// `(x, y, zeta_re, zeta_im)`.
#[derive(Clone, Copy, Debug)]
pub struct DriftField {
    pub lambda: f64,
}

pub fn drift_field(lambda: f64) -> Result<DriftField> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    Ok(DriftField { lambda })
}

/// Closed form `z(t) = z0 - i lambda zeta0 (e^{i t / lambda} - 1)`,
/// `zeta(t) = zeta0 e^{i t / lambda}`.
pub fn drift_flow(lambda: f64, z0: Complex64, zeta0: Complex64, t: f64) -> (Complex64, Complex64) {
    let e = Complex64::from_polar(1.0, t / lambda);
    (z0 - Complex64::i() * lambda * zeta0 * (e - 1.0), zeta0 * e)
}

impl VectorField for DriftField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::UnitTangent {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let c = p.coords();
        let zd = Complex64::i() * Complex64::new(c[2], c[3]) / self.lambda;
        let mut v = [0.0; MAX_DIM];
        v[0] = c[2];
        v[1] = c[3];
        v[2] = zd.re;
        v[3] = zd.im;
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::UnitTangent
    }

    fn name(&self) -> String {
        format!("drift(lambda={})", self.lambda)
    }
}

/// The coupled field on the fiber-product chart `(x, y, zeta_re, zeta_im, x_U)`:
/// the base moves by `alpha1 S_lambda` and the fiber coordinate by the
/// connection lift `x_U' = alpha2 - x y'`.
#[derive(Clone, Copy, Debug)]
pub struct ThurstonField {
    pub params: ThurstonParams,
}

pub fn thurston_field(params: ThurstonParams) -> ThurstonField {
    ThurstonField { params }
}

impl VectorField for ThurstonField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::FiberProduct {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let ThurstonParams { lambda, alpha1, alpha2 } = self.params;
        let c = p.coords();
        let zeta = Complex64::new(c[2], c[3]);
        let zd = alpha1 * zeta;
        let zetad = alpha1 * Complex64::i() * zeta / lambda;
        let mut v = [0.0; MAX_DIM];
        v[0] = zd.re;
        v[1] = zd.im;
        v[2] = zetad.re;
        v[3] = zetad.im;
        v[4] = alpha2 - c[0] * zd.im;
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::FiberProduct
    }

    fn name(&self) -> String {
        let p = self.params;
        format!("thurston(lambda={}, alpha1={}, alpha2={})", p.lambda, p.alpha1, p.alpha2)
    }
}

/// The two endpoint fields of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    /// `Y1 = (X_eta, 0)`: geodesic flow on the base, lifted horizontally.
    Geodesic,
    /// `Y2 = (0, X_mu)`: rotation of the Heisenberg fiber.
    Central,
}

impl VectorField for Endpoint {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::FiberProduct {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let c = p.coords();
        let mut v = [0.0; MAX_DIM];
        match self {
            Endpoint::Geodesic => {
                v[0] = c[2];
                v[1] = c[3];
                v[4] = -c[0] * c[3];
            }
            Endpoint::Central => v[4] = 1.0,
        }
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::FiberProduct
    }

    fn name(&self) -> String {
        format!("{self:?}").to_lowercase()
    }
}

#[cfg(test)]
mod tests;
