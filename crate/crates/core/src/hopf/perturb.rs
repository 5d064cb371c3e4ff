use std::sync::Arc;

use super::{local_model_field, LocalModel, LocalModelField};
use crate::error::{Error, Result};
use crate::flow::{Jacobian, VectorField};
use crate::geometry::{ChartId, ChartPoint, Vector, MAX_DIM};

/// Number of fixed RK4 steps used for the time-`eps` map of a generator.
const PSI_STEPS: usize = 4;

/// Smooth radial cutoff: 1 on `[0, inner]`, 0 on `[outer, inf)`, built from
/// `f(s) = exp(-1/s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub inner: f64,
    pub outer: f64,
}

fn f_exp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn df_exp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() / (s * s)
    }
}

impl Bump {
    /// Cutoff between `r/2` and `r`.
    pub fn tube(r: f64) -> Self {
        Bump { inner: 0.5 * r, outer: r }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.inner {
            return 1.0;
        }
        if s >= self.outer {
            return 0.0;
        }
        let t = (s - self.inner) / (self.outer - self.inner);
        let a = f_exp(1.0 - t);
        a / (a + f_exp(t))
    }

    pub fn derivative(&self, s: f64) -> f64 {
        if s <= self.inner || s >= self.outer {
            return 0.0;
        }
        let w = self.outer - self.inner;
        let t = (s - self.inner) / w;
        let (a, b) = (f_exp(1.0 - t), f_exp(t));
        let num = -df_exp(1.0 - t) * b - a * df_exp(t);
        num / ((a + b) * (a + b)) / w
    }
}

/// A compactly supported generator of tube diffeomorphisms preserving `phi`.
pub trait Generator: VectorField {
    /// Radius outside which the generator vanishes.
    fn support_radius(&self) -> f64;

    /// Jacobian of the generator; [`crate::flow::fd_jacobian`] is a valid
    /// fallback.
    fn jacobian(&self, p: &ChartPoint) -> Result<Jacobian>;
}

/// `|w|^2 rho(|w|) (a cos(m phi + delta) - s y, a sin(m phi + delta) + s x, 0)`.
///
/// Vanishes to second order on the fiber `w = 0`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Seed {
    pub amplitude: f64,
    pub m: i64,
    pub delta: f64,
    pub swirl: f64,
    pub radius: f64,
}

impl Seed {
    /// The default seed `|w|^2 rho (cos phi, sin phi, 0)`.
    pub fn standard(radius: f64) -> Self {
        Seed { amplitude: 1.0, m: 1, delta: 0.0, swirl: 0.0, radius }
    }

    /// Three seeds differing in angular mode, phase and swirl.
    pub fn family(radius: f64) -> [Seed; 3] {
        [
            Seed::standard(radius),
            Seed { amplitude: 0.8, m: 2, delta: 0.7, swirl: 0.5, radius },
            Seed { amplitude: 1.2, m: 0, delta: -1.1, swirl: -0.8, radius },
        ]
    }

    fn bump(&self) -> Bump {
        Bump::tube(self.radius)
    }
}

impl VectorField for Seed {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::LocalTorus {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let c = p.coords();
        let (x, y, phi) = (c[0], c[1], c[2]);
        let r2 = x * x + y * y;
        let q = r2 * self.bump().eval(r2.sqrt());
        let th = self.m as f64 * phi + self.delta;
        let mut v = [0.0; MAX_DIM];
        v[0] = q * (self.amplitude * th.cos() - self.swirl * y);
        v[1] = q * (self.amplitude * th.sin() + self.swirl * x);
        Ok(v)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::LocalTorus
    }

    fn name(&self) -> String {
        format!("seed(m={}, delta={}, swirl={})", self.m, self.delta, self.swirl)
    }
}

impl Generator for Seed {
    fn support_radius(&self) -> f64 {
        self.radius
    }

    fn jacobian(&self, p: &ChartPoint) -> Result<Jacobian> {
        let c = p.coords();
        let (x, y, phi) = (c[0], c[1], c[2]);
        let r = (x * x + y * y).sqrt();
        let b = self.bump();
        let rho = b.eval(r);
        let q = r * r * rho;
        // d(r^2 rho)/dx = x (2 rho + r rho')
        let k = 2.0 * rho + r * b.derivative(r);
        let (qx, qy) = (x * k, y * k);
        let mf = self.m as f64;
        let th = mf * phi + self.delta;
        let (s, co) = th.sin_cos();
        let v0 = self.amplitude * co - self.swirl * y;
        let v1 = self.amplitude * s + self.swirl * x;
        let mut j = [[0.0; MAX_DIM]; MAX_DIM];
        j[0][0] = qx * v0;
        j[0][1] = qy * v0 - q * self.swirl;
        j[0][2] = -q * self.amplitude * mf * s;
        j[1][0] = qx * v1 + q * self.swirl;
        j[1][1] = qy * v1;
        j[1][2] = q * self.amplitude * mf * co;
        Ok(j)
    }
}

type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// `X_eps = (psi_eps)_* X_0` for the time-`eps` map `psi_eps` of a
/// generator, optionally multiplied by the orbit-constant speed factor
/// `1 + speed |w(psi_eps^{-1} p)|^2`.
///
/// `psi_eps` is realised as a fixed number of classical RK4 steps; its
/// Jacobian is obtained from the variational equation discretised by the
/// same scheme and is therefore the exact derivative of the discrete map.
/// The resulting field is an exact pushforward, so every orbit is closed.
#[derive(Clone)]
pub struct PerturbationSpec {
    pub base: LocalModel,
    pub generator: Arc<dyn Generator>,
    pub epsilon: f64,
    pub speed: f64,
}

/// Builds `X_eps` after checking that the generator vanishes on the fiber
/// and outside its declared support.
pub fn make_tangent_perturbation(
    base: LocalModel,
    generator: Arc<dyn Generator>,
    epsilon: f64,
) -> Result<PerturbationSpec> {
    let r = generator.support_radius();
    for k in 0..32 {
        let phi = k as f64 * std::f64::consts::TAU / 32.0;
        for s in [1.0, 1.05, 1.5, 3.0] {
            let (x, y) = ((s * r) * (3.0 * phi).cos(), (s * r) * (3.0 * phi).sin());
            let v = generator.eval(&ChartPoint::new(ChartId::LocalTorus, &[x, y, phi]))?;
            let n = v[..3].iter().map(|a| a.abs()).fold(0.0, f64::max);
            if n > 1e-12 {
                return Err(Error::Support(n));
            }
        }
        let v = generator.eval(&ChartPoint::new(ChartId::LocalTorus, &[0.0, 0.0, phi]))?;
        let n = v[..3].iter().map(|a| a.abs()).fold(0.0, f64::max);
        if n > 1e-12 {
            return Err(Error::InvalidPoint(format!("generator does not vanish on the fiber ({n:.3e})")));
        }
    }
    Ok(PerturbationSpec { base, generator, epsilon, speed: 0.0 })
}

impl PerturbationSpec {
    /// Adds the radial speed modulation `1 + speed |w|^2`.
    pub fn with_speed(mut self, speed: f64) -> Self {
        self.speed = speed;
        self
    }

    pub fn unperturbed(&self) -> LocalModelField {
        local_model_field(self.base)
    }

    fn gen_eval(&self, z: &[f64; 3]) -> Result<([f64; 3], Mat3)> {
        let p = ChartPoint::new(ChartId::LocalTorus, z);
        let v = self.generator.eval(&p)?;
        let j = self.generator.jacobian(&p)?;
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                m[i][k] = j[i][k];
            }
        }
        Ok(([v[0], v[1], v[2]], m))
    }

    /// `psi_eps(z)` and its Jacobian.
    pub fn psi_with_jacobian(&self, z: [f64; 3]) -> Result<([f64; 3], Mat3)> {
        let mut y = z;
        let mut m: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        if self.epsilon == 0.0 {
            return Ok((y, m));
        }
        let h = self.epsilon / PSI_STEPS as f64;
        for _ in 0..PSI_STEPS {
            let (k1, a1) = self.gen_eval(&y)?;
            let m1 = mat_mul(&a1, &m);
            let y2: [f64; 3] = std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]);
            let m2s: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] + 0.5 * h * m1[i][j]));
            let (k2, a2) = self.gen_eval(&y2)?;
            let m2 = mat_mul(&a2, &m2s);
            let y3: [f64; 3] = std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]);
            let m3s: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] + 0.5 * h * m2[i][j]));
            let (k3, a3) = self.gen_eval(&y3)?;
            let m3 = mat_mul(&a3, &m3s);
            let y4: [f64; 3] = std::array::from_fn(|i| y[i] + h * k3[i]);
            let m4s: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] + h * m3[i][j]));
            let (k4, a4) = self.gen_eval(&y4)?;
            let m4 = mat_mul(&a4, &m4s);
            for i in 0..3 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                for j in 0..3 {
                    m[i][j] += h / 6.0 * (m1[i][j] + 2.0 * m2[i][j] + 2.0 * m3[i][j] + m4[i][j]);
                }
            }
        }
        Ok((y, m))
    }

    pub fn psi(&self, p: &ChartPoint) -> Result<ChartPoint> {
        let c = p.coords();
        let (y, _) = self.psi_with_jacobian([c[0], c[1], c[2]])?;
        Ok(ChartPoint::new(ChartId::LocalTorus, &y))
    }

    /// Inverse of `psi_eps` by Newton iteration in the `w` plane (`phi` is
    /// preserved by the generator).
    pub fn psi_inverse(&self, p: &ChartPoint) -> Result<ChartPoint> {
        Ok(self.invert(p)?.0)
    }

    /// `psi_eps^{-1}(p)` together with the Jacobian of `psi_eps` at the last
    /// Newton iterate, which differs from the returned point by rounding.
    fn invert(&self, p: &ChartPoint) -> Result<(ChartPoint, Mat3)> {
        let c = p.coords();
        if self.epsilon == 0.0 {
            return Ok((*p, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
        }
        // first-order inverse as the starting guess
        let (g, _) = self.gen_eval(&[c[0], c[1], c[2]])?;
        let mut q = [c[0] - self.epsilon * g[0], c[1] - self.epsilon * g[1], c[2]];
        let mut prev = f64::INFINITY;
        let mut jac;
        let mut iters = 0;
        loop {
            let (y, m) = self.psi_with_jacobian(q)?;
            jac = m;
            let (rx, ry) = (y[0] - c[0], y[1] - c[1]);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let dx = (m[1][1] * rx - m[0][1] * ry) / det;
            let dy = (-m[1][0] * rx + m[0][0] * ry) / det;
            q[0] -= dx;
            q[1] -= dy;
            iters += 1;
            // relative test keeps full accuracy near the fiber, where q is tiny
            let step = dx.hypot(dy);
            let scale = q[0].hypot(q[1]).max(f64::MIN_POSITIVE);
            if step <= 4e-16 * scale || step >= prev || iters == 60 {
                break;
            }
            prev = step;
        }
        Ok((ChartPoint::new(ChartId::LocalTorus, &q), jac))
    }

    /// Speed factor at a point of the unperturbed picture.
    fn kappa(&self, q: &[f64]) -> f64 {
        1.0 + self.speed * (q[0] * q[0] + q[1] * q[1])
    }

    /// Exact period of the orbit through `p`.
    pub fn period(&self, p: &ChartPoint) -> Result<f64> {
        let q = self.psi_inverse(p)?;
        Ok(std::f64::consts::TAU / self.kappa(q.coords()))
    }
}

impl VectorField for PerturbationSpec {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if p.chart() != ChartId::LocalTorus {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        let x0 = self.unperturbed();
        if self.epsilon == 0.0 && self.speed == 0.0 {
            return x0.eval(p);
        }
        let (q, m) = self.invert(p)?;
        let qc = q.coords();
        let v = x0.eval(&q)?;
        let k = self.kappa(qc);
        let mut out = [0.0; MAX_DIM];
        for i in 0..3 {
            out[i] = k * (0..3).map(|j| m[i][j] * v[j]).sum::<f64>();
        }
        Ok(out)
    }

    fn supports(&self, chart: ChartId) -> bool {
        chart == ChartId::LocalTorus
    }

    fn name(&self) -> String {
        format!("perturbation(eps={}, {})", self.epsilon, self.generator.name())
    }
}
