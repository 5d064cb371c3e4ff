//! Charts and coordinate transitions.
//!
//! Only the charts this crate needs are modelled: the ambient `R^4` picture
//! of `S^3`, the two stereographic projections, the solid-torus chart around
//! the distinguished fiber, the two charts of its blow-up (`(x, u, phi)` and
//! `(v, y, phi)`), their stereographic analogues used for the Hopf example,
//! and the few flat charts of the 4-dimensional fiber-product example.
//!
//! Angular components are canonicalised to `[0, 2pi)` when a point is built;
//! comparisons between points go through [`ChartPoint::distance`], which
//! embeds both points in a common Euclidean space and is therefore immune to
//! branch cuts.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chart dimension in use.
pub const MAX_DIM: usize = 6;

/// Tangent vector in chart coordinates (only the first `dim` entries matter).
pub type Vector = [f64; MAX_DIM];

/// Safety margin for the stereographic charts: a chart is abandoned once
/// `|y|^2` exceeds this value (`x4 > 0.9` for the north chart).
pub const STEREO_SWITCH_R2: f64 = 19.0;
/// Open domain of a stereographic chart, `|x4 -+ 1| > 0.05`.
pub const STEREO_DOMAIN_R2: f64 = 39.0;
/// A blow-up chart is abandoned once its slope coordinate exceeds this.
pub const BLOWUP_SWITCH: f64 = 1.5;
/// Open domain of a blow-up chart in the slope coordinate.
pub const BLOWUP_DOMAIN: f64 = 4.0;
/// Default radius of the tube around the distinguished fiber.
pub const DEFAULT_TUBE_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChartId {
    /// `S^3` as the unit sphere of `R^4`.
    Ambient,
    /// Stereographic projection from the north pole `N = (0, 0, 0, 1)`.
    StereoN,
    /// Stereographic projection from the south pole.
    StereoS,
    /// Solid torus `(x, y, phi)` around the distinguished fiber `x = y = 0`.
    LocalTorus,
    /// Blow-up chart `(x, u, phi)` with `y = x u`.
    BlowupXu,
    /// Blow-up chart `(v, y, phi)` with `x = y v`.
    BlowupVy,
    /// Blow-up of the north stereographic chart along the `y3` axis: `(y1, u, y3)`.
    StereoBlowupXu,
    /// Second chart of the stereographic blow-up: `(v, y2, y3)`.
    StereoBlowupVy,
    /// Angle coordinates `(alpha, beta)` on the divisor of the stereographic
    /// blow-up: `alpha` is twice the slope angle, `beta` the angle along the fiber.
    StereoDivisor,
    /// Unit tangent bundle of the flat torus: `(Re z, Im z, Re zeta, Im zeta)`.
    UnitTangent,
    /// Fiber product `S(T^2) x_{T^2} H`: `(Re z, Im z, Re zeta, Im zeta, x_U)`.
    FiberProduct,
    /// Flat 2-torus with two angular coordinates.
    Torus2,
}

impl ChartId {
    pub const ALL: [ChartId; 12] = [
        ChartId::Ambient,
        ChartId::StereoN,
        ChartId::StereoS,
        ChartId::LocalTorus,
        ChartId::BlowupXu,
        ChartId::BlowupVy,
        ChartId::StereoBlowupXu,
        ChartId::StereoBlowupVy,
        ChartId::StereoDivisor,
        ChartId::UnitTangent,
        ChartId::FiberProduct,
        ChartId::Torus2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChartId::Ambient => "ambient",
            ChartId::StereoN => "stereo-N",
            ChartId::StereoS => "stereo-S",
            ChartId::LocalTorus => "local-torus",
            ChartId::BlowupXu => "blowup-xu",
            ChartId::BlowupVy => "blowup-vy",
            ChartId::StereoBlowupXu => "stereo-blowup-xu",
            ChartId::StereoBlowupVy => "stereo-blowup-vy",
            ChartId::StereoDivisor => "stereo-divisor",
            ChartId::UnitTangent => "unit-tangent",
            ChartId::FiberProduct => "fiber-product",
            ChartId::Torus2 => "torus2",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ChartId::Ambient | ChartId::UnitTangent => 4,
            ChartId::FiberProduct => 5,
            ChartId::StereoDivisor | ChartId::Torus2 => 2,
            _ => 3,
        }
    }

    pub fn is_angular(self, index: usize) -> bool {
        match self {
            ChartId::LocalTorus | ChartId::BlowupXu | ChartId::BlowupVy => index == 2,
            ChartId::StereoDivisor | ChartId::Torus2 => index < 2,
            _ => false,
        }
    }

    /// Which atlas the chart is registered in.
    pub fn atlas(self) -> Atlas {
        match self {
            ChartId::Ambient | ChartId::StereoN | ChartId::StereoS => Atlas::Sphere,
            ChartId::BlowupXu | ChartId::BlowupVy => Atlas::Blowup,
            ChartId::StereoBlowupXu | ChartId::StereoBlowupVy => Atlas::StereoBlowup,
            ChartId::LocalTorus => Atlas::SolidTorus,
            ChartId::StereoDivisor => Atlas::Divisor,
            ChartId::UnitTangent | ChartId::FiberProduct | ChartId::Torus2 => Atlas::Flat,
        }
    }

    /// Open domain predicate.
    pub fn contains(self, c: &[f64]) -> bool {
        if c.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ChartId::StereoN | ChartId::StereoS => norm2(&c[..3]) < STEREO_DOMAIN_R2,
            ChartId::BlowupXu | ChartId::BlowupVy => c[1].abs() < BLOWUP_DOMAIN,
            ChartId::StereoBlowupXu => c[1].abs() < BLOWUP_DOMAIN,
            ChartId::StereoBlowupVy => c[0].abs() < BLOWUP_DOMAIN,
            _ => true,
        }
    }

    /// Chart the integrator should move to once the safety margin is left.
    pub fn switch_target(self, c: &[f64]) -> Option<ChartId> {
        match self {
            ChartId::StereoN if norm2(&c[..3]) > STEREO_SWITCH_R2 => Some(ChartId::StereoS),
            ChartId::StereoS if norm2(&c[..3]) > STEREO_SWITCH_R2 => Some(ChartId::StereoN),
            ChartId::BlowupXu if c[1].abs() > BLOWUP_SWITCH => Some(ChartId::BlowupVy),
            ChartId::BlowupVy if c[0].abs() > BLOWUP_SWITCH => Some(ChartId::BlowupXu),
            ChartId::StereoBlowupXu if c[1].abs() > BLOWUP_SWITCH => Some(ChartId::StereoBlowupVy),
            ChartId::StereoBlowupVy if c[0].abs() > BLOWUP_SWITCH => Some(ChartId::StereoBlowupXu),
            _ => None,
        }
    }

    /// Orientation of the slope circle of a blow-up chart, fixed so that a
    /// positive turn is a meridian linking the blown-up fiber with number +1.
    pub fn meridian_sign(self) -> f64 {
        match self {
            ChartId::StereoBlowupXu | ChartId::StereoBlowupVy | ChartId::StereoDivisor => 1.0,
            _ => -1.0,
        }
    }
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChartId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChartId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown chart '{s}'")))
    }
}

/// The atlases a chart can belong to. Each chart lives in exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atlas {
    Sphere,
    SolidTorus,
    Blowup,
    StereoBlowup,
    Divisor,
    Flat,
}

impl Atlas {
    pub fn charts(self) -> &'static [ChartId] {
        match self {
            Atlas::Sphere => &[ChartId::Ambient, ChartId::StereoN, ChartId::StereoS],
            Atlas::SolidTorus => &[ChartId::LocalTorus],
            Atlas::Blowup => &[ChartId::BlowupXu, ChartId::BlowupVy],
            Atlas::StereoBlowup => &[ChartId::StereoBlowupXu, ChartId::StereoBlowupVy],
            Atlas::Divisor => &[ChartId::StereoDivisor],
            Atlas::Flat => &[ChartId::UnitTangent, ChartId::FiberProduct, ChartId::Torus2],
        }
    }

    /// Whether `p` (in some chart of this atlas) lies in the overlap with `to`.
    pub fn overlaps(self, p: &ChartPoint, to: ChartId) -> bool {
        transition(p, to).map(|q| to.contains(q.coords())).unwrap_or(false)
    }
}

/// A point in a named chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    chart: ChartId,
    c: [f64; MAX_DIM],
}

impl ChartPoint {
    /// Builds a point, reducing angular components to `[0, 2pi)`.
    ///
    /// Panics if `coords.len()` differs from the chart dimension.
    pub fn new(chart: ChartId, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), chart.dim(), "wrong coordinate count for {chart}");
        let mut c = [0.0; MAX_DIM];
        for (i, &v) in coords.iter().enumerate() {
            c[i] = if chart.is_angular(i) { wrap_angle(v) } else { v };
        }
        ChartPoint { chart, c }
    }

    /// Like [`ChartPoint::new`] but rejects points outside the chart domain.
    pub fn checked(chart: ChartId, coords: &[f64]) -> Result<Self> {
        if coords.len() != chart.dim() {
            return Err(Error::InvalidPoint(format!(
                "{} coordinates given for {chart}",
                coords.len()
            )));
        }
        if !chart.contains(coords) {
            return Err(Error::InvalidPoint(format!("{coords:?} outside {chart}")));
        }
        Ok(Self::new(chart, coords))
    }

    pub fn chart(&self) -> ChartId {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.chart.dim()]
    }

    pub fn raw(&self) -> [f64; MAX_DIM] {
        self.c
    }

    pub fn in_domain(&self) -> bool {
        self.chart.contains(self.coords())
    }

    /// Embedding into a Euclidean space shared by every chart of the atlas.
    pub fn embed(&self) -> Vec<f64> {
        let c = &self.c;
        match self.chart {
            ChartId::Ambient => c[..4].to_vec(),
            ChartId::StereoN | ChartId::StereoS => {
                let a = match self.chart {
                    ChartId::StereoN => stereo_inverse_raw([c[0], c[1], c[2]], true),
                    _ => stereo_inverse_raw([c[0], c[1], c[2]], false),
                };
                a.to_vec()
            }
            ChartId::LocalTorus => vec![c[0], c[1], c[2].cos(), c[2].sin()],
            ChartId::BlowupXu | ChartId::BlowupVy => {
                let (x, y, phi) = blow_down_raw(self.chart, c);
                let (c2, s2) = line_angle_double(self.chart, c);
                vec![x, y, phi.cos(), phi.sin(), c2, s2]
            }
            ChartId::StereoBlowupXu | ChartId::StereoBlowupVy => {
                let (x, y, s) = blow_down_raw(self.chart, c);
                let (c2, s2) = line_angle_double(self.chart, c);
                vec![x, y, s, c2, s2]
            }
            ChartId::StereoDivisor | ChartId::Torus2 => {
                vec![c[0].cos(), c[0].sin(), c[1].cos(), c[1].sin()]
            }
            ChartId::UnitTangent => vec![c[0].cos(), c[0].sin(), c[1].cos(), c[1].sin(), c[2], c[3]],
            ChartId::FiberProduct => vec![
                c[0].cos(),
                c[0].sin(),
                c[1].cos(),
                c[1].sin(),
                c[2],
                c[3],
                c[4].cos(),
                c[4].sin(),
            ],
        }
    }

    /// Euclidean distance between embeddings. Points of different atlases
    /// are infinitely far apart.
    pub fn distance(&self, other: &ChartPoint) -> f64 {
        if self.chart.atlas() != other.chart.atlas() {
            return f64::INFINITY;
        }
        let a = self.embed();
        let b = other.embed();
        a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    }
}

/// A point of `S^3` in `R^4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint {
    pub x: [f64; 4],
}

impl AmbientPoint {
    pub fn new(x: [f64; 4]) -> Result<Self> {
        let n = norm2(&x).sqrt();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPoint(format!("|x| = {n} is not 1")));
        }
        Ok(AmbientPoint { x })
    }

    /// Projects a nonzero vector radially onto the sphere.
    pub fn normalized(x: [f64; 4]) -> Self {
        let n = norm2(&x).sqrt();
        AmbientPoint { x: x.map(|v| v / n) }
    }

    pub fn to_chart(self) -> ChartPoint {
        ChartPoint::new(ChartId::Ambient, &self.x)
    }

    pub fn from_chart(p: &ChartPoint) -> Result<Self> {
        let q = transition(p, ChartId::Ambient)?;
        let c = q.coords();
        Ok(AmbientPoint { x: [c[0], c[1], c[2], c[3]] })
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// Reduces an angle to `[0, 2pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_signed(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance on the circle `R / 2pi Z`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_signed(a - b).abs()
}

fn stereo_inverse_raw(y: [f64; 3], north: bool) -> [f64; 4] {
    let r2 = norm2(&y);
    let d = 1.0 + r2;
    let x4 = if north { (r2 - 1.0) / d } else { (1.0 - r2) / d };
    [2.0 * y[0] / d, 2.0 * y[1] / d, 2.0 * y[2] / d, x4]
}

fn stereo_raw(x: &[f64], north: bool) -> Result<[f64; 3]> {
    let den = if north { 1.0 - x[3] } else { 1.0 + x[3] };
    if den.abs() < 1e-9 {
        return Err(Error::Pole(den.abs()));
    }
    Ok([x[0] / den, x[1] / den, x[2] / den])
}

/// Stereographic projection from the north pole, `y = x' / (1 - x4)`.
pub fn stereo_north(p: &AmbientPoint) -> Result<ChartPoint> {
    Ok(ChartPoint::new(ChartId::StereoN, &stereo_raw(&p.x, true)?))
}

/// Stereographic projection from the south pole, `y = x' / (1 + x4)`.
pub fn stereo_south(p: &AmbientPoint) -> Result<ChartPoint> {
    Ok(ChartPoint::new(ChartId::StereoS, &stereo_raw(&p.x, false)?))
}

/// Inverse of the stereographic projection of either chart.
pub fn stereo_inverse(y: &ChartPoint) -> Result<AmbientPoint> {
    let c = y.coords();
    match y.chart() {
        ChartId::StereoN => Ok(AmbientPoint { x: stereo_inverse_raw([c[0], c[1], c[2]], true) }),
        ChartId::StereoS => Ok(AmbientPoint { x: stereo_inverse_raw([c[0], c[1], c[2]], false) }),
        other => Err(Error::UnsupportedChart(other)),
    }
}

/// Pushes an ambient tangent vector `v` at `x` to a stereographic chart.
pub fn stereo_pushforward(x: &[f64], v: &[f64], north: bool) -> Result<[f64; 3]> {
    let (den, s) = if north { (1.0 - x[3], 1.0) } else { (1.0 + x[3], -1.0) };
    if den.abs() < 1e-9 {
        return Err(Error::Pole(den.abs()));
    }
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = v[i] / den + s * x[i] * v[3] / (den * den);
    }
    Ok(out)
}

/// Pulls a stereographic tangent vector back to `R^4`.
pub fn stereo_pullback(y: &[f64], w: &[f64], north: bool) -> [f64; 4] {
    let r2 = norm2(&y[..3]);
    let d = 1.0 + r2;
    let dot = y[0] * w[0] + y[1] * w[1] + y[2] * w[2];
    let mut out = [0.0; 4];
    for i in 0..3 {
        out[i] = 2.0 * w[i] / d - 4.0 * y[i] * dot / (d * d);
    }
    let dx4 = 4.0 * dot / (d * d);
    out[3] = if north { dx4 } else { -dx4 };
    out
}

/// Transition `(x, u, phi) -> (1/u, x u, phi)` between the blow-up charts.
pub fn blowup_chart_transition(p: &ChartPoint) -> Result<ChartPoint> {
    let c = p.coords();
    match p.chart() {
        ChartId::BlowupXu | ChartId::StereoBlowupXu => {
            if c[1].abs() < 1e-9 {
                return Err(Error::Overlap(c[1].abs()));
            }
            let to = if p.chart() == ChartId::BlowupXu { ChartId::BlowupVy } else { ChartId::StereoBlowupVy };
            Ok(ChartPoint::new(to, &[1.0 / c[1], c[0] * c[1], c[2]]))
        }
        ChartId::BlowupVy | ChartId::StereoBlowupVy => {
            if c[0].abs() < 1e-9 {
                return Err(Error::Overlap(c[0].abs()));
            }
            let to = if p.chart() == ChartId::BlowupVy { ChartId::BlowupXu } else { ChartId::StereoBlowupXu };
            Ok(ChartPoint::new(to, &[c[1] * c[0], 1.0 / c[0], c[2]]))
        }
        other => Err(Error::UnsupportedChart(other)),
    }
}

fn blow_down_raw(chart: ChartId, c: &[f64]) -> (f64, f64, f64) {
    match chart {
        ChartId::BlowupXu | ChartId::StereoBlowupXu => (c[0], c[0] * c[1], c[2]),
        _ => (c[1] * c[0], c[1], c[2]),
    }
}

/// `(cos 2 theta, sin 2 theta)` of the normal line through a blow-up point.
fn line_angle_double(chart: ChartId, c: &[f64]) -> (f64, f64) {
    match chart {
        ChartId::BlowupXu | ChartId::StereoBlowupXu => {
            let u = c[1];
            let d = 1.0 + u * u;
            ((1.0 - u * u) / d, 2.0 * u / d)
        }
        _ => {
            let v = c[0];
            let d = 1.0 + v * v;
            ((v * v - 1.0) / d, 2.0 * v / d)
        }
    }
}

/// Angle in `[0, pi)` of the normal line represented by a blow-up point.
pub fn line_angle(p: &ChartPoint) -> Option<f64> {
    let c = p.coords();
    let a = match p.chart() {
        ChartId::BlowupXu | ChartId::StereoBlowupXu => c[1].atan(),
        ChartId::BlowupVy | ChartId::StereoBlowupVy => PI / 2.0 - c[0].atan(),
        _ => return None,
    };
    Some(a.rem_euclid(PI))
}

/// Blow-down map `sigma`: `(x, u, phi) -> (x, x u, phi)`.
pub fn sigma(p: &ChartPoint) -> Result<ChartPoint> {
    let to = match p.chart() {
        ChartId::BlowupXu | ChartId::BlowupVy => ChartId::LocalTorus,
        ChartId::StereoBlowupXu | ChartId::StereoBlowupVy => ChartId::StereoN,
        other => return Err(Error::UnsupportedChart(other)),
    };
    let (x, y, s) = blow_down_raw(p.chart(), p.coords());
    Ok(ChartPoint::new(to, &[x, y, s]))
}

/// Inverse of `sigma` away from the distinguished fiber, choosing the chart
/// with the smaller slope.
pub fn sigma_inverse(p: &ChartPoint) -> Result<ChartPoint> {
    let (xu, vy) = match p.chart() {
        ChartId::LocalTorus => (ChartId::BlowupXu, ChartId::BlowupVy),
        ChartId::StereoN => (ChartId::StereoBlowupXu, ChartId::StereoBlowupVy),
        other => return Err(Error::UnsupportedChart(other)),
    };
    let c = p.coords();
    let (x, y) = (c[0], c[1]);
    if x == 0.0 && y == 0.0 {
        return Err(Error::InvalidPoint("sigma is not invertible on the blown-up fiber".into()));
    }
    if x.abs() >= y.abs() {
        Ok(ChartPoint::new(xu, &[x, y / x, c[2]]))
    } else {
        Ok(ChartPoint::new(vy, &[x / y, y, c[2]]))
    }
}

/// Coordinate transition between two charts of the same atlas.
pub fn transition(p: &ChartPoint, to: ChartId) -> Result<ChartPoint> {
    let from = p.chart();
    if from == to {
        return Ok(*p);
    }
    let c = p.coords();
    match (from, to) {
        (ChartId::Ambient, ChartId::StereoN) => Ok(ChartPoint::new(to, &stereo_raw(c, true)?)),
        (ChartId::Ambient, ChartId::StereoS) => Ok(ChartPoint::new(to, &stereo_raw(c, false)?)),
        (ChartId::StereoN | ChartId::StereoS, ChartId::Ambient) => Ok(stereo_inverse(p)?.to_chart()),
        (ChartId::StereoN, ChartId::StereoS) | (ChartId::StereoS, ChartId::StereoN) => {
            // inversion in the unit sphere
            let r2 = norm2(c);
            if r2 < 1e-18 {
                return Err(Error::Pole(r2));
            }
            Ok(ChartPoint::new(to, &[c[0] / r2, c[1] / r2, c[2] / r2]))
        }
        (ChartId::BlowupXu, ChartId::BlowupVy)
        | (ChartId::BlowupVy, ChartId::BlowupXu)
        | (ChartId::StereoBlowupXu, ChartId::StereoBlowupVy)
        | (ChartId::StereoBlowupVy, ChartId::StereoBlowupXu) => blowup_chart_transition(p),
        _ => Err(Error::NoTransition { from, to }),
    }
}

/// Jacobian-vector product of the transition `from -> to` at `p`.
pub fn push_vector(p: &ChartPoint, v: &[f64], to: ChartId) -> Result<Vector> {
    let from = p.chart();
    let c = p.coords();
    let mut out = [0.0; MAX_DIM];
    if from == to {
        out[..v.len()].copy_from_slice(v);
        return Ok(out);
    }
    match (from, to) {
        (ChartId::Ambient, ChartId::StereoN | ChartId::StereoS) => {
            let w = stereo_pushforward(c, v, to == ChartId::StereoN)?;
            out[..3].copy_from_slice(&w);
        }
        (ChartId::StereoN | ChartId::StereoS, ChartId::Ambient) => {
            out[..4].copy_from_slice(&stereo_pullback(c, v, from == ChartId::StereoN));
        }
        (ChartId::StereoN | ChartId::StereoS, ChartId::StereoN | ChartId::StereoS) => {
            let amb = stereo_inverse(p)?;
            let va = stereo_pullback(c, v, from == ChartId::StereoN);
            let w = stereo_pushforward(&amb.x, &va, to == ChartId::StereoN)?;
            out[..3].copy_from_slice(&w);
        }
        (ChartId::BlowupXu, ChartId::BlowupVy) | (ChartId::StereoBlowupXu, ChartId::StereoBlowupVy) => {
            // (x, u, s) -> (1/u, x u, s)
            let (x, u) = (c[0], c[1]);
            out[0] = -v[1] / (u * u);
            out[1] = u * v[0] + x * v[1];
            out[2] = v[2];
        }
        (ChartId::BlowupVy, ChartId::BlowupXu) | (ChartId::StereoBlowupVy, ChartId::StereoBlowupXu) => {
            // (v, y, s) -> (y v, 1/v, s)
            let (vv, y) = (c[0], c[1]);
            out[0] = y * v[0] + vv * v[1];
            out[1] = -v[0] / (vv * vv);
            out[2] = v[2];
        }
        _ => return Err(Error::NoTransition { from, to }),
    }
    Ok(out)
}

/// Differential of the blow-down map applied to a tangent vector.
pub fn sigma_push(p: &ChartPoint, v: &[f64]) -> Result<[f64; 3]> {
    let c = p.coords();
    match p.chart() {
        ChartId::BlowupXu | ChartId::StereoBlowupXu => Ok([v[0], c[1] * v[0] + c[0] * v[1], v[2]]),
        ChartId::BlowupVy | ChartId::StereoBlowupVy => Ok([c[1] * v[0] + c[0] * v[1], v[1], v[2]]),
        other => Err(Error::UnsupportedChart(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn stereo_examples() {
        let s = AmbientPoint::new([0.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(close(stereo_north(&s).unwrap().coords(), &[0.0, 0.0, 0.0], 1e-15));
        let e = AmbientPoint::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(stereo_north(&e).unwrap().coords(), &[1.0, 0.0, 0.0], 1e-15));
        let n = AmbientPoint::new([0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(stereo_north(&n), Err(Error::Pole(_))));
    }

    #[test]
    fn stereo_inverse_examples() {
        let o = ChartPoint::new(ChartId::StereoN, &[0.0, 0.0, 0.0]);
        assert!(close(&stereo_inverse(&o).unwrap().x, &[0.0, 0.0, 0.0, -1.0], 1e-15));
        let e = ChartPoint::new(ChartId::StereoN, &[1.0, 0.0, 0.0]);
        assert!(close(&stereo_inverse(&e).unwrap().x, &[1.0, 0.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn blowup_transition_examples() {
        let p = ChartPoint::new(ChartId::BlowupXu, &[1.0, 2.0, 0.0]);
        assert!(close(blowup_chart_transition(&p).unwrap().coords(), &[0.5, 2.0, 0.0], 1e-15));
        let q = ChartPoint::new(ChartId::BlowupXu, &[0.0, 1.0, PI]);
        assert!(close(blowup_chart_transition(&q).unwrap().coords(), &[1.0, 0.0, PI], 1e-15));
        let bad = ChartPoint::new(ChartId::BlowupXu, &[1.0, 0.0, 0.0]);
        assert!(matches!(blowup_chart_transition(&bad), Err(Error::Overlap(_))));
    }

    #[test]
    fn sigma_examples() {
        let a = ChartPoint::new(ChartId::BlowupXu, &[1.0, 0.0, 0.0]);
        assert!(close(sigma(&a).unwrap().coords(), &[1.0, 0.0, 0.0], 1e-15));
        for u in [-3.0, 0.0, 0.7, 2.5] {
            let d = ChartPoint::new(ChartId::BlowupXu, &[0.0, u, 1.0]);
            assert!(close(sigma(&d).unwrap().coords(), &[0.0, 0.0, 1.0], 1e-15));
        }
        let b = ChartPoint::new(ChartId::BlowupXu, &[2.0, 0.5, PI]);
        assert!(close(sigma(&b).unwrap().coords(), &[2.0, 1.0, PI], 1e-15));
    }

    #[test]
    fn transitions_round_trip_on_random_overlap_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let a = AmbientPoint::normalized(x).to_chart();
            for (c1, c2) in [
                (ChartId::StereoN, ChartId::Ambient),
                (ChartId::StereoS, ChartId::Ambient),
                (ChartId::StereoN, ChartId::StereoS),
            ] {
                let Ok(p) = transition(&a, c1) else { continue };
                let q = transition(&p, c2).unwrap();
                let back = transition(&q, c1).unwrap();
                assert!(close(back.coords(), p.coords(), 1e-12 * (1.0 + norm2(p.coords()))));
            }
            let u: f64 = rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let p = ChartPoint::new(ChartId::BlowupXu, &[rng.gen_range(-0.5..0.5), u, rng.gen_range(0.0..TAU)]);
            let back = transition(&transition(&p, ChartId::BlowupVy).unwrap(), ChartId::BlowupXu).unwrap();
            assert!(back.distance(&p) < 1e-12);
            assert!(close(back.coords(), p.coords(), 1e-12));
            checked += 1;
        }
    }

    #[test]
    fn cocycle_on_sphere_triple_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let a = AmbientPoint::normalized(x);
            if a.x[3].abs() > 0.9 {
                continue;
            }
            let n = stereo_north(&a).unwrap();
            let direct = transition(&n, ChartId::StereoS).unwrap();
            let via = transition(&transition(&n, ChartId::Ambient).unwrap(), ChartId::StereoS).unwrap();
            assert!(close(direct.coords(), via.coords(), 1e-12));
        }
    }

    #[test]
    fn sigma_inverse_is_fiberwise_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = rng.gen_range(0.01..0.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let y = x * rng.gen_range(-0.9..0.9);
            let p = ChartPoint::new(ChartId::LocalTorus, &[x, y, rng.gen_range(0.0..TAU)]);
            let up = sigma_inverse(&p).unwrap();
            assert!(close(sigma(&up).unwrap().coords(), p.coords(), 1e-12));
        }
    }

    #[test]
    fn pushforward_matches_finite_difference() {
        let p = ChartPoint::new(ChartId::BlowupXu, &[0.3, 0.8, 1.0]);
        let v = [0.2, -0.4, 1.0];
        let h = 1e-6;
        let plus = ChartPoint::new(ChartId::BlowupXu, &[0.3 + h * v[0], 0.8 + h * v[1], 1.0 + h * v[2]]);
        let minus = ChartPoint::new(ChartId::BlowupXu, &[0.3 - h * v[0], 0.8 - h * v[1], 1.0 - h * v[2]]);
        let a = transition(&plus, ChartId::BlowupVy).unwrap();
        let b = transition(&minus, ChartId::BlowupVy).unwrap();
        let fd: Vec<f64> = (0..3).map(|i| (a.coords()[i] - b.coords()[i]) / (2.0 * h)).collect();
        let w = push_vector(&p, &v, ChartId::BlowupVy).unwrap();
        assert!(close(&w[..3], &fd, 1e-7));
    }

    #[test]
    fn chart_names_parse() {
        for c in ChartId::ALL {
            assert_eq!(c.name().parse::<ChartId>().unwrap(), c);
            assert!(c.atlas().charts().contains(&c));
        }
    }

    proptest::proptest! {
        #[test]
        fn angle_reduction_idempotent(a in -1e3f64..1e3) {
            let once = wrap_angle(a);
            proptest::prop_assert!((0.0..TAU).contains(&once));
            proptest::prop_assert_eq!(wrap_angle(once), once);
        }

        #[test]
        fn stereo_round_trip(y0 in -5.0f64..5.0, y1 in -5.0f64..5.0, y2 in -5.0f64..5.0) {
            let y = ChartPoint::new(ChartId::StereoN, &[y0, y1, y2]);
            let a = stereo_inverse(&y).unwrap();
            proptest::prop_assert!((norm2(&a.x) - 1.0).abs() < 1e-12);
            let back = stereo_north(&a).unwrap();
            for i in 0..3 {
                proptest::prop_assert!((back.coords()[i] - y.coords()[i]).abs() < 1e-12 * (1.0 + norm2(y.coords())));
            }
        }
    }
}
