use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::blowup::meridian_section;
use crate::error::{Error, Result};
use crate::flow::{next_crossing, return_map, Integrator, VectorField, DEFAULT_RETURN_BOUND};
use crate::geometry::{ChartId, ChartPoint, Vector, MAX_DIM};

/// A map of the disc section, in coordinates `(x, y)`.
pub type PlaneMap = Arc<dyn Fn([f64; 2]) -> Result<[f64; 2]> + Send + Sync>;

const PERIODICITY_TOL: f64 = 1e-6;

fn c(w: [f64; 2]) -> Complex64 {
    Complex64::new(w[0], w[1])
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// `R_l^k(w)`: rotation by `2 pi k / l`.
pub fn rotate(l: i64, k: i64, w: [f64; 2]) -> [f64; 2] {
    pair(c(w) * Complex64::from_polar(1.0, TAU * k as f64 / l as f64))
}

/// `h^{-1} R_l h` with `h(w) = w + a w^2`, a periodic map of period `|l|`
/// tangent to `R_l` at the origin.
pub fn quadratic_conjugate(l: i64, a: f64) -> PlaneMap {
    Arc::new(move |w| {
        let z = c(w);
        let h = z + a * z * z;
        let r = h * Complex64::from_polar(1.0, TAU / l as f64);
        Ok(pair(quadratic_inverse(a, r)))
    })
}

/// Branch of `h^{-1}` through the origin.
fn quadratic_inverse(a: f64, z: Complex64) -> Complex64 {
    if a == 0.0 {
        return z;
    }
    2.0 * z / (1.0 + (1.0 + 4.0 * a * z).sqrt())
}

/// `zeta = (1/|l|) sum_k R_l^{-k} P^k`, evaluated directly.
#[derive(Clone)]
pub struct BochnerMap {
    p: PlaneMap,
    pub l: i64,
}

/// Checks `P(0) = 0` and `P^|l| = Id` on `check` and returns the averaged map.
pub fn bochner_linearize(p: PlaneMap, l: i64, check: &[[f64; 2]]) -> Result<BochnerMap> {
    if l == 0 {
        return Err(Error::Config("rotation order must be nonzero".into()));
    }
    let origin = p([0.0, 0.0])?;
    if origin[0].hypot(origin[1]) > PERIODICITY_TOL {
        return Err(Error::InvalidPoint(format!("P does not fix the origin: {origin:?}")));
    }
    let n = l.unsigned_abs() as usize;
    for w in check {
        let mut q = *w;
        for _ in 0..n {
            q = p(q)?;
        }
        let d = (q[0] - w[0]).hypot(q[1] - w[1]);
        if !(d <= PERIODICITY_TOL) {
            return Err(Error::NotPeriodic(d));
        }
    }
    Ok(BochnerMap { p, l })
}

impl BochnerMap {
    pub fn map(&self) -> &PlaneMap {
        &self.p
    }

    pub fn eval(&self, w: [f64; 2]) -> Result<[f64; 2]> {
        let n = self.l.unsigned_abs() as i64;
        let mut acc = [0.0, 0.0];
        let mut q = w;
        for k in 0..n {
            if k > 0 {
                q = (self.p)(q)?;
            }
            let r = rotate(self.l, -k, q);
            acc[0] += r[0];
            acc[1] += r[1];
        }
        Ok([acc[0] / n as f64, acc[1] / n as f64])
    }

    /// `|zeta(P(w)) - R_l(zeta(w))|`.
    pub fn residual(&self, w: [f64; 2]) -> Result<f64> {
        let a = self.eval((self.p)(w)?)?;
        let b = rotate(self.l, 1, self.eval(w)?);
        Ok((a[0] - b[0]).hypot(a[1] - b[1]))
    }

    /// Determinant of `D zeta` by central differences.
    pub fn jacobian_det(&self, w: [f64; 2]) -> Result<f64> {
        let h = 1e-6;
        let d = |i: usize| -> Result<[f64; 2]> {
            let mut a = w;
            let mut b = w;
            a[i] += h;
            b[i] -= h;
            let (fa, fb) = (self.eval(a)?, self.eval(b)?);
            Ok([(fa[0] - fb[0]) / (2.0 * h), (fa[1] - fb[1]) / (2.0 * h)])
        };
        let (dx, dy) = (d(0)?, d(1)?);
        Ok(dx[0] * dy[1] - dx[1] * dy[0])
    }
}

/// `n_r x n_theta` polar grid of the disc of the given radius, without the
/// origin.
pub fn polar_grid(n_r: usize, n_theta: usize, radius: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n_r * n_theta);
    for i in 1..=n_r {
        let r = radius * i as f64 / n_r as f64;
        for j in 0..n_theta {
            let t = TAU * j as f64 / n_theta as f64;
            out.push([r * t.cos(), r * t.sin()]);
        }
    }
    out
}

/// The linear model `w' = i w / l, phi' = 1`, whose meridian return map is `R_l`.
#[derive(Clone, Copy, Debug)]
pub struct LinearModel {
    pub l: i64,
}

impl LinearModel {
    pub fn flow(&self, p: &ChartPoint, t: f64) -> ChartPoint {
        let q = p.coords();
        let w = c([q[0], q[1]]) * Complex64::from_polar(1.0, t / self.l as f64);
        ChartPoint::new(ChartId::LocalTorus, &[w.re, w.im, q[2] + t])
    }
}

impl VectorField for LinearModel {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::LocalTorus {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let q = p.coords();
        let w = Complex64::i() * c([q[0], q[1]]) / self.l as f64;
        let mut v = [0.0; MAX_DIM];
        v[0] = w.re;
        v[1] = w.im;
        v[2] = 1.0;
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::LocalTorus
    }

    fn name(&self) -> String {
        format!("linear-model(l={})", self.l)
    }
}

/// Pushforward of the linear model by `(w, phi) -> (h^{-1}(w), phi)` with
/// `h(w) = w + a w^2`: `w' = i h(w) / (l h'(w))`. Its meridian return map
/// is `quadratic_conjugate(l, a)`.
pub fn perturbed_linear_field(l: i64, a: f64) -> crate::flow::FnField {
    crate::flow::FnField::new(format!("perturbed-linear(l={l}, a={a})"), &[ChartId::LocalTorus], move |p| {
        let q = p.coords();
        let z = c([q[0], q[1]]);
        let w = Complex64::i() * (z + a * z * z) / (l as f64 * (1.0 + 2.0 * a * z));
        let mut v = [0.0; MAX_DIM];
        v[0] = w.re;
        v[1] = w.im;
        v[2] = 1.0;
        Ok(v)
    })
}

/// First-return map of `f` to the meridian disc `{phi = 0}`.
pub fn meridian_return_map(f: Arc<dyn VectorField>, integ: Integrator) -> PlaneMap {
    let s = meridian_section(0.0);
    Arc::new(move |w| {
        let p = ChartPoint::new(ChartId::LocalTorus, &[w[0], w[1], 0.0]);
        let (q, _) = return_map(&integ, f.as_ref(), &s, &p, DEFAULT_RETURN_BOUND)?;
        Ok([q.coords()[0], q.coords()[1]])
    })
}

/// `eta = flow_L^tau . zeta . flow_X^{-tau}`, with `tau` the time since the
/// last crossing of the meridian `{phi = 0}`.
#[derive(Clone)]
pub struct Suspension {
    zeta: BochnerMap,
    field: Arc<dyn VectorField>,
    model: LinearModel,
    integ: Integrator,
}

pub fn suspend_conjugacy(zeta: BochnerMap, f: Arc<dyn VectorField>, l: i64, integ: Integrator) -> Suspension {
    Suspension { zeta, field: f, model: LinearModel { l }, integ }
}

impl Suspension {
    pub fn model(&self) -> LinearModel {
        self.model
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<ChartPoint> {
        let s = meridian_section(0.0);
        let (base, tau) = if s.g(p)?.abs() <= 1e-12 {
            (*p, 0.0)
        } else {
            let cr = next_crossing(&self.integ, self.field.as_ref(), &s, p, -DEFAULT_RETURN_BOUND)?;
            (cr.point, -cr.t)
        };
        let b = base.coords();
        let z = self.zeta.eval([b[0], b[1]])?;
        Ok(self.model.flow(&ChartPoint::new(ChartId::LocalTorus, &[z[0], z[1], 0.0]), tau))
    }

    /// `|flow_L^t(eta(p)) - eta(flow_X^t(p))|`.
    pub fn residual(&self, p: &ChartPoint, t: f64) -> Result<f64> {
        let a = self.model.flow(&self.eval(p)?, t);
        let b = self.eval(&self.integ.flow(self.field.as_ref(), p, t)?)?;
        Ok(a.distance(&b))
    }
}
