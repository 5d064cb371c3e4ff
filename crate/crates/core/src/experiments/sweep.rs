use std::f64::consts::{PI, TAU};

use super::bundle::sphere_chart_point;
use super::{Check, ExperimentConfig, Report};
use crate::error::Result;
use crate::flow::Integrator;
use crate::hopf::HopfField;
use crate::thurston::{closure_defect, geometric_phase, sweep, write_sweep_csv, ThurstonParams};

/// Lambdas at which the geometric phase is compared with `pi lambda^2`.
const PHASE_LAMBDAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

pub(super) fn thurston_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-10));
    let mut rep = Report::new(cfg);
    let mut phase_err = 0.0f64;
    for l in PHASE_LAMBDAS {
        let g = geometric_phase(l)?;
        phase_err = phase_err.max((g - PI * l * l).abs() / (PI * l * l));
    }
    rep.metric("geometric_phase_rel_error", phase_err);
    rep.check(Check::below("geometric phase vs pi lambda^2 (relative)", phase_err, 1e-8));

    let rows = sweep(cfg.lmin.unwrap_or(0.05), cfg.lmax.unwrap_or(20.0), cfg.step.unwrap_or(0.05), cfg.factor.unwrap_or(1.0), &integ)?;
    let equality = rows
        .iter()
        .map(|r| (r.geometric_phase - r.dynamical_phase).abs() / r.geometric_phase)
        .fold(0.0, f64::max);
    let worst = rows.iter().map(|r| r.closure_defect).fold(0.0, f64::max);
    rep.metric("rows", rows.len() as f64);
    rep.metric("phase_equality_rel_error", equality);
    rep.metric("max_closure_defect", worst);
    rep.check(Check::below("geometric = dynamical phase (relative)", equality, 1e-8));
    rep.check(Check::below("max closure defect", worst, 1e-6));
    if let Some(file) = cfg.csv_file()? {
        write_sweep_csv(&rows, file)?;
    }
    Ok(rep)
}

/// Without `lambda`, sweeps `lambda >= 0.5` off the profile (ratio
/// `factor * lambda / 2`, default factor 1.05) and requires every leaf to
/// miss closure by more than 0.05. With `lambda`, runs one leaf at the given
/// `ratio` and compares `Delta x_U` with `2 pi lambda ratio - pi lambda^2`.
pub(super) fn thurston_closure(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-10));
    let mut rep = Report::new(cfg);
    if let Some(lambda) = cfg.lambda {
        let ratio = cfg.ratio.unwrap_or(cfg.factor.unwrap_or(1.0) * lambda / 2.0);
        let c = closure_defect(&ThurstonParams::with_ratio(lambda, ratio)?, &integ)?;
        let want = TAU * lambda * ratio - PI * lambda * lambda;
        rep.metric("delta", c.delta);
        rep.metric("defect", c.defect);
        rep.metric("k", c.k as f64);
        rep.metric("base_error", c.base_error);
        rep.check(Check::below("|Delta - (2 pi lambda ratio - pi lambda^2)|", (c.delta - want).abs(), 1e-6));
        return Ok(rep);
    }
    let lmin = cfg.lmin.unwrap_or(0.5).max(0.5);
    let rows = sweep(lmin, cfg.lmax.unwrap_or(20.0), cfg.step.unwrap_or(0.05), cfg.factor.unwrap_or(1.05), &integ)?;
    let (mut min_defect, mut at) = (f64::INFINITY, 0.0);
    let (mut misses, mut k0_min) = (0usize, f64::INFINITY);
    for r in &rows {
        if r.closure_defect < min_defect {
            min_defect = r.closure_defect;
            at = r.lambda;
        }
        if r.closure_defect <= 0.05 {
            misses += 1;
        }
        if r.k_detected == 0 {
            k0_min = k0_min.min(r.closure_defect);
        }
    }
    rep.metric("rows", rows.len() as f64);
    rep.metric("min_closure_defect", min_defect);
    rep.metric("lambda_at_min", at);
    rep.metric("rows_at_or_below_0.05", misses as f64);
    rep.metric("min_defect_with_k0", k0_min);
    rep.check(Check::above("min closure defect off the profile", min_defect, 0.05));
    if misses > 0 {
        rep.note(format!(
            "{misses} of {} leaves have defect <= 0.05: Delta = {:.3} pi lambda^2 is below 0.05 for small lambda and \
             passes near 2 pi k at lambda^2 = 2k / ({:.3} - 1)",
            rows.len(),
            cfg.factor.unwrap_or(1.05) - 1.0,
            cfg.factor.unwrap_or(1.05),
        ));
    }
    if let Some(file) = cfg.csv_file()? {
        write_sweep_csv(&rows, file)?;
    }
    Ok(rep)
}

/// Largest `|phi^{2 pi}(p) - p|` over the sample points.
fn hopf_closure(points: &[crate::geometry::ChartPoint], tol: f64) -> Result<f64> {
    let integ = Integrator::new(tol);
    let mut worst = 0.0f64;
    for p in points {
        worst = worst.max(integ.flow(&HopfField, p, TAU)?.distance(p));
    }
    Ok(worst)
}

pub(super) fn integrator_order(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let points: Vec<_> = (0..cfg.n_or(10)).map(|_| sphere_chart_point(&mut rng)).collect::<Result<_>>()?;
    let mut ratios = Vec::new();
    for tol in [1e-6, 1e-8, 1e-10] {
        let tol = cfg.tol.unwrap_or(tol);
        let (a, b) = (hopf_closure(&points, tol)?, hopf_closure(&points, tol / 2.0)?);
        let ratio = a / b;
        rep.metric(&format!("defect_tol{tol:e}"), a);
        rep.metric(&format!("defect_tol{:e}", tol / 2.0), b);
        rep.metric(&format!("ratio_tol{tol:e}"), ratio);
        rep.metric(&format!("empirical_tol_exponent_tol{tol:e}"), ratio.log2());
        ratios.push(ratio);
        if cfg.tol.is_some() {
            break;
        }
    }
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    rep.check(Check::at_least("closure improvement from halving tol", worst, 4.0));
    Ok(rep)
}
