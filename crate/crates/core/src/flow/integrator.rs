//! Dormand-Prince 5(4) with PI step-size control and chart switching.

use serde::Serialize;

use super::field::VectorField;
use crate::error::{Error, Result};
use crate::geometry::{transition, ChartId, ChartPoint, Vector, MAX_DIM};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th and 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub(crate) fn eval_raw(f: &dyn VectorField, chart: ChartId, y: &Vector) -> Result<Vector> {
    f.eval(&ChartPoint::new(chart, &y[..chart.dim()]))
}

/// One Dormand-Prince step of size `h` from `(y, k1)`. Returns the new
/// state, the field there and the embedded error vector.
pub(crate) fn dp_step(
    f: &dyn VectorField,
    chart: ChartId,
    y: &Vector,
    k1: &Vector,
    h: f64,
) -> Result<(Vector, Vector, Vector)> {
    let n = chart.dim();
    let mut k = [[0.0; MAX_DIM]; 7];
    k[0] = *k1;
    let mut ys = [0.0; MAX_DIM];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j][i];
            }
            ys[i] = y[i] + h * acc;
        }
        k[s] = eval_raw(f, chart, &ys)?;
    }
    // the last stage is evaluated at the 5th order solution (FSAL)
    let mut err = [0.0; MAX_DIM];
    for i in 0..n {
        err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
    }
    Ok((ys, k[6], err))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChartSwitch {
    pub t: f64,
    pub from: ChartId,
    pub to: ChartId,
}

/// Accepted step as seen by an observer. The step is expressed in the chart
/// it was taken in; `end` is the state after a possible chart switch.
pub struct StepView<'a> {
    pub field: &'a dyn VectorField,
    pub chart: ChartId,
    pub t0: f64,
    pub t1: f64,
    pub y0: Vector,
    pub y1: Vector,
    pub f0: Vector,
    pub f1: Vector,
    pub end: ChartPoint,
    pub switched: Option<ChartSwitch>,
}

impl StepView<'_> {
    pub fn start(&self) -> ChartPoint {
        ChartPoint::new(self.chart, &self.y0[..self.chart.dim()])
    }

    /// End of the step in the step's own chart.
    pub fn end_in_chart(&self) -> ChartPoint {
        ChartPoint::new(self.chart, &self.y1[..self.chart.dim()])
    }

    /// Cubic Hermite interpolant at time `t` in `[t0, t1]`.
    pub fn hermite(&self, t: f64) -> Vector {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let mut out = [0.0; MAX_DIM];
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        for i in 0..self.chart.dim() {
            out[i] = h00 * self.y0[i] + h * h10 * self.f0[i] + h01 * self.y1[i] + h * h11 * self.f1[i];
        }
        out
    }

    /// State at time `t`, recomputed with a single step from `t0`. Its local
    /// error is below that of the accepted step.
    pub fn redo(&self, t: f64) -> Result<Vector> {
        if t == self.t0 {
            return Ok(self.y0);
        }
        if t == self.t1 {
            return Ok(self.y1);
        }
        Ok(dp_step(self.field, self.chart, &self.y0, &self.f0, t - self.t0)?.0)
    }

    pub fn point_at(&self, t: f64) -> Result<ChartPoint> {
        let y = self.redo(t)?;
        Ok(ChartPoint::new(self.chart, &y[..self.chart.dim()]))
    }
}

/// Where and why a run stopped.
#[derive(Clone, Debug)]
pub struct RunEnd {
    pub point: ChartPoint,
    pub t: f64,
    pub n_steps: usize,
    pub switches: Vec<ChartSwitch>,
    /// True when the observer asked to stop before `t_end`.
    pub interrupted: bool,
}

/// Adaptive integrator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integrator {
    pub tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Integrator {
    pub fn new(tol: f64) -> Self {
        Integrator { tol, h_max: 0.1, max_steps: 2_000_000 }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    fn err_norm(&self, n: usize, y0: &Vector, y1: &Vector, err: &Vector) -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let sc = self.tol * (1.0 + y0[i].abs().max(y1[i].abs()));
            acc += (err[i] / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    }

    fn initial_step(&self, n: usize, y: &Vector, k: &Vector) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let sc = self.tol * (1.0 + y[i].abs());
            d0 += (y[i] / sc).powi(2);
            d1 += (k[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / n as f64).sqrt(), (d1 / n as f64).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-3 } else { 0.01 * d0 / d1 };
        h.min(self.h_max).max(1e-6)
    }

    /// Integrates from time 0 to `t_end` (either sign), calling `observer`
    /// after each accepted step. The observer returns `false` to stop.
    pub fn run(
        &self,
        f: &dyn VectorField,
        p0: &ChartPoint,
        t_end: f64,
        mut observer: impl FnMut(&StepView) -> Result<bool>,
    ) -> Result<RunEnd> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !f.supports(p0.chart()) {
            return Err(Error::UnsupportedChart(p0.chart()));
        }
        let mut chart = p0.chart();
        let mut n = chart.dim();
        let mut y = p0.raw();
        let mut k1 = eval_raw(f, chart, &y)?;
        let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
        let mut t = 0.0f64;
        let mut h = self.initial_step(n, &y, &k1);
        let mut err_old: f64 = 1e-4;
        let mut rejected = false;
        let mut n_steps = 0;
        let mut switches = Vec::new();
        while dir * (t_end - t) > 0.0 {
            if n_steps >= self.max_steps {
                return Err(Error::StepFailure { t, h });
            }
            let remaining = (t_end - t).abs();
            let last = h >= remaining;
            let hs = dir * if last { remaining } else { h };
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::StepFailure { t, h });
            }
            let (y1, k7, e) = dp_step(f, chart, &y, &k1, hs)?;
            let finite = y1[..n].iter().all(|v| v.is_finite());
            let err = if finite { self.err_norm(n, &y, &y1, &e) } else { f64::INFINITY };
            if !(err <= 1.0) || !chart.contains(&y1[..n]) {
                let fac = if err.is_finite() { (SAFETY * err.powf(-0.2)).max(FAC_MIN) } else { 0.25 };
                h *= fac.min(0.9);
                rejected = true;
                continue;
            }
            n_steps += 1;
            let t1 = if last { t_end } else { t + hs };
            let mut fac = SAFETY * err.max(1e-10).powf(-EXPO1) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected {
                fac = fac.min(1.0);
            }
            rejected = false;
            err_old = err.max(1e-4);

            let mut end = ChartPoint::new(chart, &y1[..n]);
            let mut k_next = k7;
            let mut switched = None;
            if let Some(to) = chart.switch_target(end.coords()) {
                if f.supports(to) {
                    let q = transition(&end, to)?;
                    let sw = ChartSwitch { t: t1, from: chart, to };
                    switches.push(sw);
                    switched = Some(sw);
                    end = q;
                    k_next = f.eval(&end)?;
                }
            }
            if !end.in_domain() {
                return Err(Error::ChartExit(t1));
            }
            let view = StepView {
                field: f,
                chart,
                t0: t,
                t1,
                y0: y,
                y1,
                f0: k1,
                f1: k7,
                end,
                switched,
            };
            let go_on = observer(&view)?;
            t = t1;
            y = end.raw();
            chart = end.chart();
            n = chart.dim();
            k1 = k_next;
            h = (h * fac).min(self.h_max);
            if !go_on {
                return Ok(RunEnd { point: end, t, n_steps, switches, interrupted: true });
            }
        }
        let point = ChartPoint::new(chart, &y[..n]);
        Ok(RunEnd { point, t, n_steps, switches, interrupted: false })
    }

    /// End point of the flow for time `t` (either sign).
    pub fn flow(&self, f: &dyn VectorField, p0: &ChartPoint, t: f64) -> Result<ChartPoint> {
        Ok(self.run(f, p0, t, |_| Ok(true))?.point)
    }
}
