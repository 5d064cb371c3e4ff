use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

use super::{thurston_field, ThurstonParams};
use crate::error::{Error, Result};
use crate::flow::{Integrator, Trajectory, VectorField};
use crate::geometry::{ChartId, ChartPoint};

/// Tolerance of the base-return check in [`closure_defect`].
const BASE_CLOSURE: f64 = 1e-6;

fn leaf(params: ThurstonParams, integ: &Integrator) -> Result<Trajectory> {
    let p0 = ChartPoint::new(ChartId::FiberProduct, &[0.0, 0.0, 1.0, 0.0, 0.0]);
    integ.integrate(&thurston_field(params), &p0, params.drift_period())
}

/// `oint x dy` around the drift circle of radius `lambda`, obtained by
/// integrating the lift with `alpha1 = 1, alpha2 = 0` over one turn.
pub fn geometric_phase(lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let params = ThurstonParams::new(lambda, 1.0, 0.0)?;
    let tr = leaf(params, &Integrator::new(1e-13))?;
    // x_U' = -x y', so the fiber coordinate drops by the enclosed area
    Ok(-tr.end().coords()[4])
}

/// `int_0^{2 pi lambda / alpha1} alpha2 dt`, by composite trapezoid rule.
pub fn dynamical_phase(params: &ThurstonParams) -> f64 {
    const N: usize = 64;
    let h = params.drift_period() / N as f64;
    let f = |_t: f64| params.alpha2;
    let mut acc = 0.5 * (f(0.0) + f(params.drift_period()));
    for i in 1..N {
        acc += f(i as f64 * h);
    }
    acc * h
}

/// Fiber displacement of one leaf of `X_lambda`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosureReport {
    /// `Delta x_U` over one drift period.
    pub delta: f64,
    /// Distance of `delta` from the nearest multiple of `2 pi`.
    pub defect: f64,
    /// The nearest multiple: `delta ~ 2 pi k`.
    pub k: i64,
    /// Return error of the base coordinates.
    pub base_error: f64,
}

/// Integrates one drift period of the coupled flow and measures how far the
/// fiber coordinate is from closing.
pub fn closure_defect(params: &ThurstonParams, integ: &Integrator) -> Result<ClosureReport> {
    let tr = leaf(*params, integ)?;
    let (a, b) = (tr.start().coords(), tr.end().coords());
    let base_error = (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
    if !(base_error <= BASE_CLOSURE) {
        return Err(Error::NonReturningBase(base_error));
    }
    let delta = b[4] - a[4];
    let k = (delta / TAU).round();
    Ok(ClosureReport { delta, defect: (delta - k * TAU).abs(), k: k as i64, base_error })
}

/// One row of a lambda sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub geometric_phase: f64,
    pub dynamical_phase: f64,
    pub closure_defect: f64,
    pub k_detected: i64,
}

/// Sweeps `lambda` over `[lmin, lmax]` with `alpha2 / alpha1 = factor * lambda / 2`
/// (`factor = 1` is the closing profile).
pub fn sweep(lmin: f64, lmax: f64, step: f64, factor: f64, integ: &Integrator) -> Result<Vec<SweepRow>> {
    if !(step > 0.0) || !(lmin > 0.0) || lmax < lmin {
        return Err(Error::Config(format!("bad sweep range [{lmin}, {lmax}] step {step}")));
    }
    let n = ((lmax - lmin) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| {
            let lambda = lmin + i as f64 * step;
            let params = ThurstonParams::with_ratio(lambda, factor * lambda / 2.0)?;
            let rep = closure_defect(&params, integ)?;
            Ok(SweepRow {
                lambda,
                alpha1: params.alpha1,
                alpha2: params.alpha2,
                geometric_phase: geometric_phase(lambda)?,
                dynamical_phase: dynamical_phase(&params),
                closure_defect: rep.defect,
                k_detected: rep.k,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
    }
    wtr.flush().map_err(|e| Error::Config(format!("csv output failed: {e}")))
}

/// Shape of one leaf: the diameter of its base projection and the share of
/// its length along the fiber, measured with the connection splitting.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LeafGeometry {
    pub base_diameter: f64,
    pub fiber_fraction: f64,
}

pub fn leaf_geometry(params: &ThurstonParams, integ: &Integrator) -> Result<LeafGeometry> {
    let tr = leaf(*params, integ)?;
    let f = thurston_field(*params);
    // pairwise diameter on at most 512 evenly spaced samples
    let stride = tr.samples.len().div_ceil(512).max(1);
    let base: Vec<(f64, f64)> = tr.samples.iter().step_by(stride).map(|(_, p)| (p.coords()[0], p.coords()[1])).collect();
    let mut diameter = 0.0f64;
    for (i, a) in base.iter().enumerate() {
        for b in &base[..i] {
            diameter = diameter.max((a.0 - b.0).hypot(a.1 - b.1));
        }
    }
    let (mut vertical, mut horizontal) = (0.0, 0.0);
    for (i, (t, p)) in tr.samples.iter().enumerate() {
        if i > 0 {
            let (t0, p0) = tr.samples[i - 1];
            let dt = t - t0;
            let speeds = |q: &ChartPoint| -> Result<(f64, f64)> {
                let v = f.eval(q)?;
                // connection form dx_U + x dy measures the vertical part
                Ok(((v[4] + q.coords()[0] * v[1]).abs(), v[0].hypot(v[1])))
            };
            let (v0, h0) = speeds(&p0)?;
            let (v1, h1) = speeds(p)?;
            vertical += 0.5 * dt * (v0 + v1);
            horizontal += 0.5 * dt * (h0 + h1);
        }
    }
    Ok(LeafGeometry { base_diameter: diameter, fiber_fraction: vertical / (vertical + horizontal) })
}
