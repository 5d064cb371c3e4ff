use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Check, ExperimentConfig, Report};
use crate::blowup::{
    divisor_field, lift_field, lift_hopf, lift_local_model, linking_number, strict_transform_section,
    transition_degree as degree, transversality as eta, StereoDivisorField, TransversalityForm,
};
use crate::error::{Error, Result};
use crate::flow::{minimal_period, Integrator, Trajectory, VectorField};
use crate::geometry::{sigma, sigma_inverse, sigma_push, stereo_north, stereo_south, AmbientPoint, ChartId, ChartPoint};
use crate::hopf::{local_model_field, make_tangent_perturbation, HopfField, LocalModel, PerturbationSpec, Seed};
use crate::rigidity::{montgomery_check, pencil_point};

pub(super) fn model(e: i64) -> Result<LocalModel> {
    LocalModel::with_default_radius(e)
}

/// Perturbation built from seed `k` of the standard family.
pub(super) fn spec(e: i64, k: usize, eps: f64, speed: f64) -> Result<PerturbationSpec> {
    let seed = Seed::family(model(e)?.r)[k % 3];
    Ok(make_tangent_perturbation(model(e)?, Arc::new(seed), eps)?.with_speed(speed))
}

/// Blow-up point over a base point with `|w|` uniform in `[rmin, rmax]`.
pub(super) fn lifted_point(rng: &mut ChaCha8Rng, rmin: f64, rmax: f64) -> Result<ChartPoint> {
    let r = rng.gen_range(rmin..rmax);
    let th = rng.gen_range(0.0..TAU);
    sigma_inverse(&ChartPoint::new(ChartId::LocalTorus, &[r * th.cos(), r * th.sin(), rng.gen_range(0.0..TAU)]))
}

/// Uniform point of S^3 by rejection from the cube.
fn sphere_point(rng: &mut ChaCha8Rng) -> [f64; 4] {
    loop {
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = x.iter().map(|a| a * a).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return x.map(|a| a / n);
        }
    }
}

/// Stereographic chart point, projected from the pole farther away.
pub(super) fn sphere_chart_point(rng: &mut ChaCha8Rng) -> Result<ChartPoint> {
    let x = sphere_point(rng);
    let a = AmbientPoint::normalized(x);
    if x[3] <= 0.0 {
        stereo_north(&a)
    } else {
        stereo_south(&a)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(super) fn hopf_periods(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-10));
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let (mut err, mut closure) = (0.0f64, 0.0f64);
    let mut first = None;
    for _ in 0..cfg.n_or(100) {
        let p = sphere_chart_point(&mut rng)?;
        let pr = minimal_period(&integ, &HopfField, &p, TAU)?;
        err = err.max((pr.period - TAU).abs());
        closure = closure.max(pr.closure_defect);
        first.get_or_insert(p);
    }
    rep.metric("max_period_error", err);
    rep.metric("max_closure_defect", closure);
    rep.check(Check::below("max |T - 2 pi|", err, 1e-8));
    if let (Some(file), Some(p)) = (cfg.csv_file()?, first) {
        integ.integrate(&HopfField, &p, TAU)?.write_csv(file)?;
    }
    Ok(rep)
}

/// `max |d sigma(X~) - X o sigma|` over random blow-up chart points with
/// `|x|` log-uniform in `[1e-3, 0.5]`.
fn blow_down_error(base: Arc<dyn VectorField>, e: i64, n: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let lifted = lift_field(base.clone(), e)?;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let x = 10f64.powf(rng.gen_range(-3.0..0.5f64.log10())) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let s = rng.gen_range(-1.0..1.0);
        let phi = rng.gen_range(0.0..TAU);
        let p = if rng.gen_bool(0.5) {
            ChartPoint::new(ChartId::BlowupXu, &[x, s, phi])
        } else {
            ChartPoint::new(ChartId::BlowupVy, &[s, x, phi])
        };
        let down = sigma_push(&p, &lifted.eval(&p)?)?;
        let want = base.eval(&sigma(&p)?)?;
        worst = worst.max(max_abs_diff(&down, &want[..3]));
    }
    Ok(worst)
}

fn divisor_orbit(e: i64, integ: &Integrator) -> Result<Trajectory> {
    integ.integrate(&divisor_field(e)?, &ChartPoint::new(ChartId::BlowupXu, &[0.0, 0.3, 0.0]), TAU)
}

pub(super) fn blowup_divisor(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-10));
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let n = cfg.n_or(1000);
    let eulers = cfg.euler_or(&[1, 2, 3]);
    for &e in &eulers {
        let plain = blow_down_error(Arc::new(local_model_field(model(e)?)), e, n, &mut rng)?;
        rep.metric(&format!("blow_down_error_E{e}"), plain);
        rep.check(Check::below(&format!("blow-down E={e}"), plain, 1e-9));
        let pert = blow_down_error(Arc::new(spec(e, 0, 0.05, 0.0)?), e, n, &mut rng)?;
        rep.metric(&format!("blow_down_error_perturbed_E{e}"), pert);
        rep.check(Check::below(&format!("blow-down E={e} eps=0.05"), pert, 1e-9));

        let tr = divisor_orbit(e, &integ)?;
        rep.check(Check::equal(&format!("divisor rp1 winding E={e}"), tr.winding("rp1")?, 2 * e));
        rep.check(Check::equal(&format!("divisor phi winding E={e}"), tr.winding("phi")?, 1));
    }
    let tr = integ.integrate(&StereoDivisorField, &ChartPoint::new(ChartId::StereoDivisor, &[0.4, 0.3]), TAU)?;
    rep.check(Check::equal("Hopf divisor rp1 winding", tr.winding("rp1")?, 2));
    rep.check(Check::equal("Hopf divisor phi winding", tr.winding("phi")?, 1));
    if let Some(file) = cfg.csv_file()? {
        divisor_orbit(eulers[0], &integ)?.write_csv(file)?;
    }
    Ok(rep)
}

/// A Hopf fiber through `p`, closed by replacing the endpoint with the start.
fn hopf_fiber(p: [f64; 4], integ: &Integrator) -> Result<Trajectory> {
    let start = stereo_north(&AmbientPoint::normalized(p))?;
    let mut tr = integ.integrate(&HopfField, &start, TAU)?;
    let n = tr.samples.len();
    tr.samples[n - 1].1 = start;
    Ok(tr)
}

pub(super) fn linking(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-11));
    let mut rep = Report::new(cfg);
    for e in cfg.euler_or(&[1, 2, 3]) {
        let f = local_model_field(model(e)?);
        let orbit = |w0: f64| integ.integrate(&f, &ChartPoint::new(ChartId::LocalTorus, &[w0, 0.0, 0.0]), TAU);
        let lk = linking_number(&orbit(0.0)?, &orbit(0.2)?)?;
        rep.metric(&format!("gauss_integral_E{e}"), lk.raw);
        rep.check(Check::equal(&format!("linking number E={e}"), lk.value, e));
        rep.check(Check::equal(&format!("transition degree E={e}"), degree(e, cfg.n_or(64).max(8 * e.unsigned_abs() as usize))?, e));
        let w = divisor_orbit(e, &integ)?.winding("rp1")?;
        // compared as 2x to catch odd windings
        rep.check(Check::equal(&format!("divisor winding = 2E, E={e}"), w, 2 * e));
    }
    let a = hopf_fiber([0.6, 0.0, 0.8, 0.0], &integ)?;
    let b = hopf_fiber([0.0, 0.8, 0.0, 0.6], &integ)?;
    let lk = linking_number(&a, &b)?;
    rep.metric("hopf_gauss_integral", lk.raw);
    rep.check(Check::equal("Hopf fiber linking", lk.value, 1));
    Ok(rep)
}

pub(super) fn transition_degree(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::new(cfg);
    for e in cfg.euler_or(&[1, 2, 3]) {
        rep.check(Check::equal(&format!("degree E={e}"), degree(e, cfg.n_or(64))?, e));
    }
    Ok(rep)
}

pub(super) fn transversality(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let n = cfg.n_or(1000);
    let eps = cfg.epsilon_or(&[0.05]);
    let (mut unpert, mut pert, mut div) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for e in cfg.euler_or(&[1, 2, 3]) {
        let form = TransversalityForm::new(e)?;
        let plain = lift_local_model(model(e)?);
        for _ in 0..n {
            let (a, b) = (rng.gen_range(-0.45..0.45), rng.gen_range(-1.45..1.45));
            let a = if rng.gen_bool(0.1) { 0.0 } else { a };
            let p = if rng.gen_bool(0.5) {
                ChartPoint::new(ChartId::BlowupXu, &[a, b, rng.gen_range(0.0..TAU)])
            } else {
                ChartPoint::new(ChartId::BlowupVy, &[b, a, rng.gen_range(0.0..TAU)])
            };
            unpert = unpert.max((eta(&form, &plain, &p)? + 1.0).abs());
        }
        for (k, &ep) in eps.iter().enumerate() {
            let f = lift_field(Arc::new(spec(e, k, ep, 0.0)?), e)?;
            for _ in 0..n {
                let p = lifted_point(&mut rng, 0.0, 0.5)?;
                pert = pert.max(eta(&form, &f, &p)?);
            }
        }
    }
    // Hopf lift in the stereographic blow-up charts
    let form = TransversalityForm::new(1)?;
    let h = lift_hopf();
    for _ in 0..n {
        let c = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)];
        let chart = if rng.gen_bool(0.5) { ChartId::StereoBlowupXu } else { ChartId::StereoBlowupVy };
        unpert = unpert.max((eta(&form, &h, &ChartPoint::new(chart, &c))? + 1.0).abs());
    }
    // the perturbation leaves the divisor untouched
    for k in 0..10 {
        let e = [1, 2, 3, -1, -2][k % 5];
        let lifted = lift_field(Arc::new(spec(e, k, rng.gen_range(0.01..0.08), 0.0)?), e)?;
        let plain = lift_local_model(model(e)?);
        for _ in 0..(n / 10).max(1) {
            let s = rng.gen_range(-1.5..1.5);
            let phi = rng.gen_range(0.0..TAU);
            let p = if rng.gen_bool(0.5) {
                ChartPoint::new(ChartId::BlowupXu, &[0.0, s, phi])
            } else {
                ChartPoint::new(ChartId::BlowupVy, &[s, 0.0, phi])
            };
            div = div.max(max_abs_diff(&lifted.eval(&p)?[..3], &plain.eval(&p)?[..3]));
        }
    }
    rep.metric("max_unperturbed_deviation", unpert);
    rep.metric("max_perturbed_eta", pert);
    rep.metric("max_divisor_difference", div);
    rep.check(Check::below("max |eta~(X~0) + 1|", unpert, 1e-12));
    rep.check(Check::below("max eta~(X~eps)", pert, -0.5));
    rep.check(Check::below("max |X~eps - X~0| on divisor", div, 1e-8));
    Ok(rep)
}

fn record_montgomery(
    rep: &mut Report,
    label: &str,
    integ: &Integrator,
    f: &dyn VectorField,
    e: i64,
    c: f64,
    pts: &[ChartPoint],
) -> Result<()> {
    match montgomery_check(integ, f, &strict_transform_section(e, c)?, e, pts, 0.0) {
        Ok(m) => {
            let moved = m.displacement.iter().copied().fold(f64::INFINITY, f64::min);
            rep.metric(&format!("max_closure_{label}"), m.max_closure);
            rep.metric(&format!("min_displacement_{label}"), moved);
            rep.check(Check::below(&format!("|P^2E - Id| {label}"), m.max_closure, 1e-6));
            rep.check(Check::above(&format!("min_k max |P^k - Id| {label}"), moved, 1e-2));
        }
        Err(Error::PeriodicityViolation { point, detail }) => {
            rep.note(format!("{label}: {detail} at {point:?}"));
            rep.check(Check::below(&format!("|P^2E - Id| {label}"), f64::INFINITY, 1e-6));
        }
        Err(other) => return Err(other),
    }
    Ok(())
}

pub(super) fn montgomery(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-10));
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let n = cfg.n_or(50);
    let local = (ChartId::BlowupXu, ChartId::BlowupVy);
    const C: f64 = 0.4;
    for e in cfg.euler_or(&[1, 2, 3]) {
        for eps in [0.0].into_iter().chain(cfg.epsilon_or(&[0.05])) {
            let pts: Vec<ChartPoint> =
                (0..n).map(|_| pencil_point(local, C, rng.gen_range(-0.4..0.4), rng.gen_range(0.0..TAU))).collect();
            let f = lift_field(Arc::new(spec(e, 0, eps, 0.0)?), e)?;
            record_montgomery(&mut rep, &format!("E={e} eps={eps}"), &integ, &f, e, C, &pts)?;
        }
    }
    let hopf = (ChartId::StereoBlowupXu, ChartId::StereoBlowupVy);
    let pts: Vec<ChartPoint> =
        (0..n).map(|_| pencil_point(hopf, 0.0, rng.gen_range(0.6..1.4), rng.gen_range(-0.3..0.3))).collect();
    record_montgomery(&mut rep, "Hopf", &integ, &lift_hopf(), 1, 0.0, &pts)?;
    Ok(rep)
}
