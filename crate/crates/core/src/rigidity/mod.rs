//! Period function, isochronization, periodicity of the return map, the
//! bundle conjugacy and the Bochner linearization of periodic disc maps.

mod bochner;
mod conjugacy;

pub use bochner::{
    bochner_linearize, meridian_return_map, perturbed_linear_field, polar_grid, quadratic_conjugate, rotate,
    suspend_conjugacy, BochnerMap, LinearModel, PlaneMap, Suspension,
};
pub use conjugacy::{build_conjugacy, conjugacy_for, equivariance_check, ConjugacyMap};

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{next_crossing, return_map, Integrator, Section, VectorField, DEFAULT_RETURN_BOUND};
use crate::geometry::{ChartId, ChartPoint, Vector, MAX_DIM};

/// `T(p)`: the sum of `returns` successive return times to a section, taken
/// from the most recent section point `p(eps)` on the orbit through `p`.
#[derive(Clone)]
pub struct PeriodFunction {
    field: Arc<dyn VectorField>,
    section: Section,
    returns: usize,
    integ: Integrator,
    /// Search bound for a single return or backward crossing.
    pub bound: f64,
}

/// Period function of a field whose orbits cross `s` exactly `2|E|` times.
pub fn period_function(f: Arc<dyn VectorField>, s: Section, e: i64, integ: Integrator) -> Result<PeriodFunction> {
    if e == 0 {
        return Err(Error::Config("Euler number must be nonzero".into()));
    }
    Ok(PeriodFunction::new(f, s, 2 * e.unsigned_abs() as usize, integ))
}

impl PeriodFunction {
    pub fn new(field: Arc<dyn VectorField>, section: Section, returns: usize, integ: Integrator) -> Self {
        PeriodFunction { field, section, returns, integ, bound: DEFAULT_RETURN_BOUND }
    }

    pub fn section(&self) -> &Section {
        &self.section
    }

    pub fn integrator(&self) -> &Integrator {
        &self.integ
    }

    pub fn on_section(&self, p: &ChartPoint) -> Result<bool> {
        Ok(self.section.g(p)?.abs() <= (100.0 * self.integ.tol).max(1e-8))
    }

    /// Most recent section point on the orbit through `p` and the time
    /// elapsed since it; `(p, 0)` when `p` lies on the section.
    pub fn base_point(&self, p: &ChartPoint) -> Result<(ChartPoint, f64)> {
        if self.on_section(p)? {
            return Ok((*p, 0.0));
        }
        let c = next_crossing(&self.integ, self.field.as_ref(), &self.section, p, -self.bound)?;
        Ok((c.point, -c.t))
    }

    /// `(tau, [tau_1, ..., tau_n])`: time since the base point and the
    /// successive return times from it.
    pub fn decompose(&self, p: &ChartPoint) -> Result<(f64, Vec<f64>)> {
        let (mut q, tau) = self.base_point(p)?;
        let mut times = Vec::with_capacity(self.returns);
        for _ in 0..self.returns {
            let (next, t) = return_map(&self.integ, self.field.as_ref(), &self.section, &q, self.bound)?;
            times.push(t);
            q = next;
        }
        Ok((tau, times))
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<f64> {
        Ok(self.decompose(p)?.1.iter().sum())
    }
}

type PeriodFn = dyn Fn(&ChartPoint) -> Result<f64> + Send + Sync;

/// `(T / 2 pi) f`: the reparametrization of `f` with all orbits of period `2 pi`.
#[derive(Clone)]
pub struct Isochronized {
    inner: Arc<dyn VectorField>,
    period: Arc<PeriodFn>,
    integ: Integrator,
}

pub fn isochronize(f: Arc<dyn VectorField>, t: PeriodFunction) -> Isochronized {
    let integ = t.integ;
    Isochronized { inner: f, period: Arc::new(move |p| t.eval(p)), integ }
}

impl Isochronized {
    /// Reparametrization by an arbitrary positive function constant on orbits.
    pub fn with_period(
        f: Arc<dyn VectorField>,
        period: impl Fn(&ChartPoint) -> Result<f64> + Send + Sync + 'static,
        integ: Integrator,
    ) -> Self {
        Isochronized { inner: f, period: Arc::new(period), integ }
    }

    pub fn inner(&self) -> &Arc<dyn VectorField> {
        &self.inner
    }

    pub fn period_at(&self, p: &ChartPoint) -> Result<f64> {
        let t = (self.period)(p)?;
        if !(t > 0.0) {
            return Err(Error::InvalidPoint(format!("period function is not positive: {t}")));
        }
        Ok(t)
    }

    /// Time-`t` map, computed as the flow of the inner field for `t T(p) / 2 pi`.
    pub fn flow(&self, p: &ChartPoint, t: f64) -> Result<ChartPoint> {
        if t == 0.0 {
            return Ok(*p);
        }
        self.integ.flow(self.inner.as_ref(), p, t * self.period_at(p)? / TAU)
    }
}

impl VectorField for Isochronized {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        let k = self.period_at(p)? / TAU;
        let v = self.inner.eval(p)?;
        let mut out = [0.0; MAX_DIM];
        for i in 0..MAX_DIM {
            out[i] = k * v[i];
        }
        Ok(out)
    }

    fn supports(&self, chart: ChartId) -> bool {
        self.inner.supports(chart)
    }

    fn name(&self) -> String {
        format!("isochronized({})", self.inner.name())
    }
}

/// Outcome of a periodicity check of the return map.
#[derive(Clone, Debug, Serialize)]
pub struct MontgomeryReport {
    pub e: i64,
    pub n_points: usize,
    /// `max |P^(2E)(p) - p|`.
    pub max_closure: f64,
    /// `max_p |P^k(p) - p|` for `k = 1, ..., 2E - 1`.
    pub displacement: Vec<f64>,
    pub threshold: f64,
}

/// Verifies `P^(2E) = Id` within `1e-6` and that every lower iterate moves
/// some sample point by more than `threshold`.
pub fn montgomery_check(
    integ: &Integrator,
    f: &dyn VectorField,
    s: &Section,
    e: i64,
    points: &[ChartPoint],
    threshold: f64,
) -> Result<MontgomeryReport> {
    const CLOSURE_TOL: f64 = 1e-6;
    let n = 2 * e.unsigned_abs() as usize;
    if n == 0 {
        return Err(Error::Config("Euler number must be nonzero".into()));
    }
    let mut displacement = vec![0.0f64; n - 1];
    let mut max_closure = 0.0f64;
    for p in points {
        let mut q = *p;
        for k in 1..=n {
            q = return_map(integ, f, s, &q, DEFAULT_RETURN_BOUND)?.0;
            let d = q.distance(p);
            if k < n {
                displacement[k - 1] = displacement[k - 1].max(d);
            } else {
                if !(d <= CLOSURE_TOL) {
                    return Err(Error::PeriodicityViolation {
                        point: p.coords().to_vec(),
                        detail: format!("|P^{n}(p) - p| = {d:.3e}"),
                    });
                }
                max_closure = max_closure.max(d);
            }
        }
    }
    if let Some(k) = displacement.iter().position(|&d| !(d > threshold)) {
        return Err(Error::PeriodicityViolation {
            point: points.first().map(|p| p.coords().to_vec()).unwrap_or_default(),
            detail: format!("P^{} moves no sample point by more than {threshold}", k + 1),
        });
    }
    Ok(MontgomeryReport { e, n_points: points.len(), max_closure, displacement, threshold })
}

/// A point of the strict transform of the line of angle `c` at signed
/// radial parameter `r` and fiber coordinate `s`, in whichever of the two
/// blow-up charts `(xu, vy)` has the smaller slope.
pub fn pencil_point(charts: (ChartId, ChartId), c: f64, r: f64, s: f64) -> ChartPoint {
    let (cs, sn) = (c.cos(), c.sin());
    if cs.abs() >= sn.abs() {
        ChartPoint::new(charts.0, &[r, sn / cs, s])
    } else {
        ChartPoint::new(charts.1, &[cs / sn, r, s])
    }
}
