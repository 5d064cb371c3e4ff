use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;

use super::bundle::{lifted_point, spec};
use super::{Check, ExperimentConfig, Report};
use crate::error::Result;
use crate::flow::{Integrator, VectorField};
use crate::geometry::{ChartId, ChartPoint};
use crate::hopf::{straighten_seifert_curve, Bump};
use crate::rigidity::{
    bochner_linearize, conjugacy_for, equivariance_check, meridian_return_map, perturbed_linear_field, polar_grid,
    quadratic_conjugate, suspend_conjugacy,
};

/// Speed modulation of the rigidity perturbations, so that the period
/// function is not constant.
const SPEED: f64 = 0.5;

pub(super) fn rigidity(cfg: &ExperimentConfig) -> Result<Report> {
    let integ = Integrator::new(cfg.tol_or(1e-9));
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let n = cfg.n_or(100);
    let (mut residual, mut equiv) = (0.0f64, 0.0f64);
    for e in cfg.euler_or(&[1]) {
        for k in 0..3 {
            for eps in cfg.epsilon_or(&[0.01, 0.05]) {
                let c = conjugacy_for(&spec(e, k, eps, SPEED)?, integ)?;
                let mut worst = 0.0f64;
                for i in 0..n {
                    let p = lifted_point(&mut rng, 0.05, 0.4)?;
                    worst = worst.max(c.residual(&p, 0.1 * (i % 10) as f64 * TAU)?);
                }
                let samples: Vec<_> = (0..n)
                    .map(|_| Ok((lifted_point(&mut rng, 0.05, 0.4)?, rng.gen_range(0.0..TAU))))
                    .collect::<Result<_>>()?;
                let eq = equivariance_check(&c, &samples)?;
                rep.metric(&format!("conjugacy_residual_E{e}_seed{k}_eps{eps}"), worst);
                rep.metric(&format!("equivariance_residual_E{e}_seed{k}_eps{eps}"), eq);
                residual = residual.max(worst);
                equiv = equiv.max(eq);
            }
        }
        let zero = conjugacy_for(&spec(e, 0, 0.0, 0.0)?, Integrator::new(1e-11))?;
        let mut ident = 0.0f64;
        for _ in 0..n {
            let p = lifted_point(&mut rng, 0.05, 0.4)?;
            ident = ident.max(zero.eval(&p)?.distance(&p));
        }
        rep.metric(&format!("identity_defect_E{e}"), ident);
        rep.check(Check::below(&format!("eps=0 identity E={e}"), ident, 1e-10));
    }
    rep.metric("conjugacy_residual", residual);
    rep.metric("equivariance_residual", equiv);
    rep.check(Check::below("conjugacy residual", residual, 1e-5));
    rep.check(Check::below("equivariance residual", equiv, 1e-5));
    Ok(rep)
}

pub(super) fn straighten(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let n = cfg.n_or(64);
    let bump = Bump::tube(0.5);
    for eps in cfg.epsilon_or(&[0.1]) {
        let s = straighten_seifert_curve(|th, e| (e * th.cos(), e * th.sin()), eps, bump);
        let mut leaf = 0.0f64;
        for k in 0..n {
            let th = k as f64 * TAU / n as f64;
            let (x, y) = s.curve_point(th);
            let q = s.apply(&ChartPoint::new(ChartId::LocalTorus, &[x, y, th]))?;
            leaf = leaf.max(q.coords()[0].hypot(q.coords()[1]));
        }
        // integrate the field itself rather than relying on the support shortcut
        let integ = Integrator::new(1e-12);
        let mut outside = 0.0f64;
        for _ in 0..n {
            let r = rng.gen_range(bump.outer..0.9);
            let th = rng.gen_range(0.0..TAU);
            let p = ChartPoint::new(ChartId::LocalTorus, &[r * th.cos(), r * th.sin(), rng.gen_range(0.0..TAU)]);
            outside = outside.max(integ.flow(&s, &p, 1.0)?.distance(&p));
        }
        rep.metric(&format!("max_leaf_distance_eps{eps}"), leaf);
        rep.metric(&format!("max_outside_motion_eps{eps}"), outside);
        rep.check(Check::below(&format!("leaf points to gamma_0, eps={eps}"), leaf, 1e-8));
        rep.check(Check::below(&format!("outside tube fixed, eps={eps}"), outside, 1e-12));
    }
    Ok(rep)
}

pub(super) fn bochner(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = cfg.rng();
    let mut rep = Report::new(cfg);
    let a = cfg.epsilon_or(&[0.05])[0];
    let grid = polar_grid(32, 32, 0.3);
    let integ = Integrator::new(cfg.tol_or(1e-12));
    let n = cfg.n_or(10);
    for l in cfg.orders.clone().unwrap_or_else(|| vec![1, 2, 3]) {
        let z = bochner_linearize(quadratic_conjugate(l, a), l, &grid)?;
        let mut worst = 0.0f64;
        for w in &grid {
            worst = worst.max(z.residual(*w)?);
        }
        rep.metric(&format!("linearization_residual_l{l}"), worst);
        rep.check(Check::below(&format!("|zeta P - R zeta| l={l}"), worst, 1e-6));

        let f: Arc<dyn VectorField> = Arc::new(perturbed_linear_field(l, a));
        let zf = bochner_linearize(meridian_return_map(f.clone(), integ), l, &polar_grid(4, 4, 0.3))?;
        let eta = suspend_conjugacy(zf, f, l, integ);
        let mut susp = 0.0f64;
        for _ in 0..n {
            let p = ChartPoint::new(
                ChartId::LocalTorus,
                &[rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(0.0..TAU)],
            );
            susp = susp.max(eta.residual(&p, rng.gen_range(0.0..TAU))?);
        }
        rep.metric(&format!("suspension_residual_l{l}"), susp);
        rep.check(Check::below(&format!("suspension residual l={l}"), susp, 1e-5));
    }
    Ok(rep)
}
