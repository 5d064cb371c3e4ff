use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::geometry::{transition, ChartId, ChartPoint};

const MIN_DISTANCE: f64 = 1e-3;
const MAX_CLOSURE: f64 = 1e-6;
const REFINE_TOL: f64 = 1e-3;
const MAX_REFINE: u32 = 6;
const INTEGER_SLACK: f64 = 0.2;

/// Result of a linking-number evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct LinkingReport {
    pub value: i64,
    pub raw: f64,
    pub min_distance: f64,
    pub subdivisions: u32,
}

fn to_r3(p: &ChartPoint) -> Result<[f64; 3]> {
    let c = p.coords();
    match p.chart() {
        ChartId::StereoN => Ok([c[0], c[1], c[2]]),
        ChartId::StereoS | ChartId::Ambient => {
            let q = transition(p, ChartId::StereoN)?;
            let d = q.coords();
            Ok([d[0], d[1], d[2]])
        }
        ChartId::LocalTorus => {
            let rho = 1.0 + c[0];
            Ok([rho * c[2].cos(), rho * c[2].sin(), c[1]])
        }
        other => Err(Error::UnsupportedChart(other)),
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Splits every edge of a closed polyline into `k` equal pieces and returns
/// (midpoint, edge vector) pairs.
fn segments(poly: &[[f64; 3]], k: usize) -> Vec<([f64; 3], [f64; 3])> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n * k);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = sub(&b, &a);
        let step = [d[0] / k as f64, d[1] / k as f64, d[2] / k as f64];
        for j in 0..k {
            let s = (j as f64 + 0.5) / k as f64;
            out.push(([a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]], step));
        }
    }
    out
}

fn midpoint_sum(a: &[([f64; 3], [f64; 3])], b: &[([f64; 3], [f64; 3])]) -> f64 {
    let mut total = 0.0;
    for (pa, da) in a {
        let mut row = 0.0;
        for (pb, db) in b {
            let r = sub(pa, pb);
            let n = dot(&r, &r).sqrt();
            row += dot(&r, &cross(da, db)) / (n * n * n);
        }
        total += row;
    }
    total / (4.0 * PI)
}

fn min_distance(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let seg = |p: &[f64; 3], a0: &[f64; 3], a1: &[f64; 3]| {
        let d = sub(a1, a0);
        let l2 = dot(&d, &d);
        let s = if l2 > 0.0 { (dot(&sub(p, a0), &d) / l2).clamp(0.0, 1.0) } else { 0.0 };
        let q = [a0[0] + s * d[0], a0[1] + s * d[1], a0[2] + s * d[2]];
        let r = sub(p, &q);
        dot(&r, &r).sqrt()
    };
    let one_way = |x: &[[f64; 3]], y: &[[f64; 3]]| {
        let mut m = f64::INFINITY;
        for p in x {
            for j in 0..y.len() {
                m = m.min(seg(p, &y[j], &y[(j + 1) % y.len()]));
            }
        }
        m
    };
    one_way(a, b).min(one_way(b, a))
}

/// Gauss linking integral of two closed polylines in R^3 (the last vertex
/// is joined to the first), refined by edge subdivision until successive
/// values differ by less than `1e-3`.
pub fn gauss_linking(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<LinkingReport> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::InvalidPoint("polyline needs at least three vertices".into()));
    }
    let dmin = min_distance(a, b);
    if dmin <= MIN_DISTANCE {
        return Err(Error::TooClose(dmin));
    }
    let mut k = 1usize;
    let mut prev = midpoint_sum(&segments(a, k), &segments(b, k));
    let mut level = 0;
    loop {
        level += 1;
        k *= 2;
        let next = midpoint_sum(&segments(a, k), &segments(b, k));
        let done = (next - prev).abs() < REFINE_TOL || level >= MAX_REFINE;
        prev = next;
        if done {
            break;
        }
    }
    let value = prev.round();
    if (prev - value).abs() > INTEGER_SLACK {
        return Err(Error::Ambiguous(prev));
    }
    Ok(LinkingReport { value: value as i64, raw: prev, min_distance: dmin, subdivisions: level })
}

fn polyline(c: &Trajectory) -> Result<Vec<[f64; 3]>> {
    let defect = c.closure_defect();
    if !(defect <= MAX_CLOSURE) {
        return Err(Error::NotClosed { distance: defect, horizon: c.duration() });
    }
    let n = c.samples.len();
    // the last sample repeats the first one
    c.samples[..n - 1].iter().map(|(_, p)| to_r3(p)).collect()
}

/// Linking number of two closed orbits, embedded in R^3 through the north
/// stereographic chart or, for the solid-torus chart, as the standard torus
/// `((1 + x) cos phi, (1 + x) sin phi, y)`.
pub fn linking_number(c1: &Trajectory, c2: &Trajectory) -> Result<LinkingReport> {
    gauss_linking(&polyline(c1)?, &polyline(c2)?)
}

/// Degree of `theta -> (e^{i theta})^E` from the unwrapped phase at `n`
/// equally spaced samples.
pub fn transition_degree(e: i64, n_samples: usize) -> Result<i64> {
    if (n_samples as u64) < 8 * e.unsigned_abs() || n_samples < 2 {
        return Err(Error::Undersampled { samples: n_samples, degree: e });
    }
    let phase = |k: usize| {
        let theta = TAU * k as f64 / n_samples as f64;
        let (s, c) = (e as f64 * theta).sin_cos();
        s.atan2(c)
    };
    let mut total = 0.0;
    let mut last = phase(0);
    for k in 1..=n_samples {
        let cur = phase(k % n_samples);
        let mut d = cur - last;
        d -= TAU * (d / TAU).round();
        total += d;
        last = cur;
    }
    Ok((total / TAU).round() as i64)
}
