use std::f64::consts::PI;
use std::sync::Arc;

use super::field::VectorField;
use super::integrator::{Integrator, StepView};
use super::roots::brent;
use super::trajectory::{observable_angle, PeriodReport, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, Vector};

/// Default bound on the time searched for a return.
pub const DEFAULT_RETURN_BOUND: f64 = 8.0 * PI;
/// A closed orbit must come back to within this multiple of the tolerance.
pub const CLOSURE_FACTOR: f64 = 10.0;
/// Crossings closer than this to the starting time are ignored.
const MIN_RETURN_TIME: f64 = 1e-7;
/// Smallest admissible `|transversality|` at a crossing.
pub const MIN_TRANSVERSALITY: f64 = 1e-8;

type GFn = dyn Fn(&ChartPoint) -> Result<f64> + Send + Sync;
type EtaFn = dyn Fn(&ChartPoint, &Vector) -> Result<f64> + Send + Sync;

/// Hypersurface `{g = 0}` with a transversality functional.
#[derive(Clone)]
pub struct Section {
    name: String,
    g: Arc<GFn>,
    eta: Arc<EtaFn>,
    /// Sign of `dg/dt` required of a counted crossing, in forward time.
    pub orientation: Option<f64>,
    /// Jumps of `g` across one step larger than this are branch cuts, not crossings.
    pub jump_guard: f64,
}

impl Section {
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(&ChartPoint) -> Result<f64> + Send + Sync + 'static,
        eta: impl Fn(&ChartPoint, &Vector) -> Result<f64> + Send + Sync + 'static,
        orientation: Option<f64>,
    ) -> Self {
        Section { name: name.into(), g: Arc::new(g), eta: Arc::new(eta), orientation, jump_guard: f64::INFINITY }
    }

    /// Marks `g` as an angle-valued function in `(-pi, pi]`.
    pub fn angular(mut self) -> Self {
        self.jump_guard = PI;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self, p: &ChartPoint) -> Result<f64> {
        (self.g)(p)
    }

    /// Transversality functional applied to a tangent vector at `p`.
    pub fn eta(&self, p: &ChartPoint, v: &Vector) -> Result<f64> {
        (self.eta)(p, v)
    }

    pub fn transversality(&self, p: &ChartPoint, f: &dyn VectorField) -> Result<f64> {
        self.eta(p, &f.eval(p)?)
    }

    /// Norm of the finite-difference gradient of `g` at `p`.
    pub fn grad_norm(&self, p: &ChartPoint) -> Result<f64> {
        let h = 1e-6;
        let n = p.dim();
        let mut acc = 0.0;
        for j in 0..n {
            let mut a = p.raw();
            let mut b = p.raw();
            a[j] += h;
            b[j] -= h;
            let d = (self.g(&ChartPoint::new(p.chart(), &a[..n]))? - self.g(&ChartPoint::new(p.chart(), &b[..n]))?)
                / (2.0 * h);
            acc += d * d;
        }
        Ok(acc.sqrt())
    }
}

/// A located crossing of a section.
#[derive(Clone, Copy, Debug)]
pub struct Crossing {
    /// Signed flow time from the starting point.
    pub t: f64,
    pub point: ChartPoint,
    pub transversality: f64,
}

fn crossing_in_step(s: &Section, v: &StepView, min_time: f64) -> Result<Option<Crossing>> {
    let g0 = s.g(&v.start())?;
    let g1 = s.g(&v.end_in_chart())?;
    let changes = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
    if !changes || (g1 - g0).abs() >= s.jump_guard {
        return Ok(None);
    }
    let slope = (g1 - g0) / (v.t1 - v.t0);
    if let Some(o) = s.orientation {
        if slope * o <= 0.0 {
            return Ok(None);
        }
    }
    let xtol = 1e-14 * (1.0 + v.t1.abs());
    let t = brent(|t| s.g(&v.point_at(t)?), v.t0, v.t1, g0, g1, xtol)?;
    if t.abs() < min_time {
        return Ok(None);
    }
    let point = v.point_at(t)?;
    let transversality = s.transversality(&point, v.field)?;
    if transversality.abs() < MIN_TRANSVERSALITY {
        return Err(Error::TangentialCrossing(transversality));
    }
    Ok(Some(Crossing { t, point, transversality }))
}

/// First crossing of `s` (with the section's orientation) along the flow from
/// `p`, searched up to signed time `t_max`. Crossings at the starting point
/// itself are skipped.
pub fn next_crossing(
    integ: &Integrator,
    f: &dyn VectorField,
    s: &Section,
    p: &ChartPoint,
    t_max: f64,
) -> Result<Crossing> {
    let mut found = None;
    integ.run(f, p, t_max, |v| {
        found = crossing_in_step(s, v, MIN_RETURN_TIME)?;
        Ok(found.is_none())
    })?;
    found.ok_or(Error::NoReturn(t_max.abs()))
}

/// All crossings of `s` along the flow from `p` for signed time `t`.
pub fn crossings(integ: &Integrator, f: &dyn VectorField, s: &Section, p: &ChartPoint, t: f64) -> Result<Vec<Crossing>> {
    let mut out = Vec::new();
    integ.run(f, p, t, |v| {
        if let Some(c) = crossing_in_step(s, v, MIN_RETURN_TIME)? {
            out.push(c);
        }
        Ok(true)
    })?;
    Ok(out)
}

/// First return of a section point to the section.
pub fn return_map(
    integ: &Integrator,
    f: &dyn VectorField,
    s: &Section,
    p: &ChartPoint,
    t_bound: f64,
) -> Result<(ChartPoint, f64)> {
    let g = s.g(p)?;
    if g.abs() > (100.0 * integ.tol).max(1e-8) {
        return Err(Error::InvalidPoint(format!("point is not on section {} (g = {g:.3e})", s.name())));
    }
    let tr = s.transversality(p, f)?;
    if tr.abs() < MIN_TRANSVERSALITY {
        return Err(Error::TangentialCrossing(tr));
    }
    let c = next_crossing(integ, f, s, p, t_bound)?;
    Ok((c.point, c.t))
}

fn dist2_and_slope(f: &dyn VectorField, e0: &[f64], p: &ChartPoint) -> Result<(f64, f64)> {
    let e = p.embed();
    let v = f.eval(p)?;
    let n = p.dim();
    let speed = v[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
    let d2: f64 = e.iter().zip(e0).map(|(a, b)| (a - b).powi(2)).sum();
    if speed == 0.0 {
        return Ok((d2, 0.0));
    }
    let delta = 1e-6 / speed.max(1.0);
    let mut a = p.raw();
    let mut b = p.raw();
    for i in 0..n {
        a[i] += delta * v[i];
        b[i] -= delta * v[i];
    }
    let ea = ChartPoint::new(p.chart(), &a[..n]).embed();
    let eb = ChartPoint::new(p.chart(), &b[..n]).embed();
    let slope: f64 = (0..e.len()).map(|i| 2.0 * (e[i] - e0[i]) * (ea[i] - eb[i]) / (2.0 * delta)).sum();
    Ok((d2, slope))
}

/// Smallest positive return time of the orbit through `p0`.
///
/// The squared embedding distance to `p0` is tracked once the orbit has left
/// a neighbourhood of the start; its first local minimum within
/// `CLOSURE_FACTOR * tol` of zero is refined by root-finding on its time
/// derivative.
pub fn minimal_period(integ: &Integrator, f: &dyn VectorField, p0: &ChartPoint, guess: f64) -> Result<PeriodReport> {
    const LEAVE: f64 = 1e-3;
    let threshold = CLOSURE_FACTOR * integ.tol;
    let e0 = p0.embed();
    let horizon = 2.0 * guess;
    let mut samples = vec![(0.0, *p0)];
    let mut left = false;
    let mut prev_slope = 0.0;
    let mut best = f64::INFINITY;
    let mut result: Option<(f64, ChartPoint, f64)> = None;
    let end = integ.run(f, p0, horizon, |v| {
        let here = v.end_in_chart();
        let (d2, slope) = dist2_and_slope(f, &e0, &here)?;
        if left && prev_slope < 0.0 && slope >= 0.0 {
            let t = brent(
                |t| Ok(dist2_and_slope(f, &e0, &v.point_at(t)?)?.1),
                v.t0,
                v.t1,
                prev_slope,
                slope,
                1e-15 * (1.0 + v.t1),
            )?;
            let q = v.point_at(t)?;
            let d = q.distance(p0);
            best = best.min(d);
            if d < threshold {
                result = Some((t, q, d));
                return Ok(false);
            }
        }
        samples.push((v.t1, v.end));
        if d2.sqrt() > LEAVE {
            left = true;
        }
        prev_slope = slope;
        Ok(true)
    })?;
    let Some((period, q, defect)) = result else {
        return Err(Error::NotClosed { distance: best, horizon });
    };
    samples.push((period, q));
    let switches = end.switches.into_iter().filter(|s| s.t <= period).collect();
    let traj = Trajectory { samples, tolerance: integ.tol, switches };
    let names = ["phi", "rp1", "arg_w", "zr", "zi", "arg_zeta", "xu"];
    let mut winding = std::collections::BTreeMap::new();
    for name in names {
        if traj.samples.iter().all(|(_, p)| observable_angle(name, p).is_some()) {
            winding.insert(name.to_string(), traj.winding(name)?);
        }
    }
    Ok(PeriodReport { period, closure_defect: defect, winding, n_steps: end.n_steps })
}
