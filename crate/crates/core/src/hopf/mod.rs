//! The Hopf field on `S^3`, its quasi-section, the local model around a
//! fiber of Euler number `E`, and tangent perturbations.

mod perturb;
mod straighten;

pub use perturb::{make_tangent_perturbation, Bump, Generator, PerturbationSpec, Seed};
pub use straighten::{straighten_seifert_curve, Straightening};

use crate::error::{Error, Result};
use crate::flow::{Jacobian, Section, VectorField};
use crate::geometry::{
    stereo_inverse, stereo_pushforward, ChartId, ChartPoint, Vector, DEFAULT_TUBE_RADIUS, MAX_DIM,
};

/// `x' = A x` with `A` the rotation generator acting on `(x1, x2)` and on
/// `(x3, x4)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HopfField;

pub fn hopf_field() -> HopfField {
    HopfField
}

fn ambient_value(x: &[f64]) -> [f64; 4] {
    [-x[1], x[0], -x[3], x[2]]
}

impl VectorField for HopfField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        let c = p.coords();
        let mut v = [0.0; MAX_DIM];
        match p.chart() {
            ChartId::Ambient => v[..4].copy_from_slice(&ambient_value(c)),
            ChartId::StereoN => {
                let (y1, y2, y3) = (c[0], c[1], c[2]);
                v[0] = -y2 + y1 * y3;
                v[1] = y1 + y2 * y3;
                v[2] = 0.5 * (1.0 + y3 * y3 - (y1 * y1 + y2 * y2));
            }
            ChartId::StereoS => {
                let x = stereo_inverse(p)?.x;
                let w = stereo_pushforward(&x, &ambient_value(&x), false)?;
                v[..3].copy_from_slice(&w);
            }
            other => return Err(Error::UnsupportedChart(other)),
        }
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        matches!(chart, ChartId::Ambient | ChartId::StereoN | ChartId::StereoS)
    }

    /// Jacobian of the north-chart field on the axis `y1 = y2 = 0`.
    fn jac_on_curve(&self, p: &ChartPoint) -> Option<Jacobian> {
        if p.chart() != ChartId::StereoN {
            return None;
        }
        let y3 = p.coords()[2];
        let mut j = [[0.0; MAX_DIM]; MAX_DIM];
        j[0][0] = y3;
        j[0][1] = -1.0;
        j[1][0] = 1.0;
        j[1][1] = y3;
        j[2][2] = y3;
        Some(j)
    }

    fn name(&self) -> String {
        "hopf".into()
    }
}

/// Normal component `y1` of the Hopf field on `Sigma = {y2 = 0}`.
pub fn quasi_section_defect(p: &ChartPoint) -> Result<f64> {
    if p.chart() != ChartId::StereoN {
        return Err(Error::UnsupportedChart(p.chart()));
    }
    let c = p.coords();
    if c[1].abs() > 1e-9 {
        return Err(Error::InvalidPoint(format!("y2 = {} is not on the quasi-section", c[1])));
    }
    Ok(HopfField.eval(p)?[1])
}

/// The quasi-section `{x2 = 0}` in the ambient chart, crossed in both
/// directions.
pub fn quasi_section() -> Section {
    Section::new(
        "quasi-section",
        |p| match p.chart() {
            ChartId::Ambient => Ok(p.coords()[1]),
            other => Err(Error::UnsupportedChart(other)),
        },
        |_, v| Ok(v[1]),
        None,
    )
}

/// Solid torus `|w| < r` around a fiber of Euler number `E`, with the good
/// coordinates `(x, y, phi)`, `w = x + i y`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LocalModel {
    pub e: i64,
    pub r: f64,
}

impl LocalModel {
    pub fn new(e: i64, r: f64) -> Result<Self> {
        if e == 0 {
            return Err(Error::Config("Euler number must be nonzero".into()));
        }
        if !(r > 0.0) {
            return Err(Error::Config(format!("tube radius must be positive, got {r}")));
        }
        Ok(LocalModel { e, r })
    }

    pub fn with_default_radius(e: i64) -> Result<Self> {
        Self::new(e, DEFAULT_TUBE_RADIUS)
    }

    pub fn euler(&self) -> f64 {
        self.e as f64
    }
}

/// `w' = -i E w`, `phi' = 1`.
#[derive(Clone, Copy, Debug)]
pub struct LocalModelField {
    pub model: LocalModel,
}

pub fn local_model_field(m: LocalModel) -> LocalModelField {
    LocalModelField { model: m }
}

impl VectorField for LocalModelField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::LocalTorus {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let c = p.coords();
        let e = self.model.euler();
        let mut v = [0.0; MAX_DIM];
        v[0] = e * c[1];
        v[1] = -e * c[0];
        v[2] = 1.0;
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::LocalTorus
    }

    fn jac_on_curve(&self, p: &ChartPoint) -> Option<Jacobian> {
        if p.chart() != ChartId::LocalTorus {
            return None;
        }
        let e = self.model.euler();
        let mut j = [[0.0; MAX_DIM]; MAX_DIM];
        j[0][1] = e;
        j[1][0] = -e;
        Some(j)
    }

    fn name(&self) -> String {
        format!("local-model(E={})", self.model.e)
    }
}

/// Closed-form flow of the local model.
pub fn local_model_flow(m: &LocalModel, p: &ChartPoint, t: f64) -> ChartPoint {
    let c = p.coords();
    let a = -m.euler() * t;
    let (s, co) = a.sin_cos();
    ChartPoint::new(ChartId::LocalTorus, &[co * c[0] - s * c[1], s * c[0] + co * c[1], c[2] + t])
}
