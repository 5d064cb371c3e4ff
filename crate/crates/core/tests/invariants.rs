//! Property tests of cross-module invariants, through the public API.

use std::f64::consts::TAU;
use std::sync::Arc;

use proptest::prelude::*;

use bundlelab::blowup::{lift_field, strict_transform_section};
use bundlelab::flow::{return_map, Integrator, VectorField};
use bundlelab::geometry::{sigma, sigma_inverse, stereo_north, AmbientPoint, ChartId, ChartPoint};
use bundlelab::hopf::{make_tangent_perturbation, straighten_seifert_curve, Bump, HopfField, LocalModel, Seed};
use bundlelab::rigidity::{conjugacy_for, pencil_point};
use bundlelab::thurston::{closure_defect, ThurstonParams};

fn spec(e: i64, k: usize, eps: f64, speed: f64) -> bundlelab::hopf::PerturbationSpec {
    let m = LocalModel::with_default_radius(e).unwrap();
    make_tangent_perturbation(m, Arc::new(Seed::family(m.r)[k % 3]), eps).unwrap().with_speed(speed)
}

fn base(r: f64, th: f64, phi: f64) -> ChartPoint {
    ChartPoint::new(ChartId::LocalTorus, &[r * th.cos(), r * th.sin(), phi])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn flow_group_property(
        x in prop::array::uniform4(-1.0..1.0f64),
        s in 0.0..3.0f64,
        t in 0.0..3.0f64,
    ) {
        prop_assume!(x.iter().map(|a| a * a).sum::<f64>() > 0.1 && x[3] < 0.5);
        let tol = 1e-10;
        let integ = Integrator::new(tol);
        let p = stereo_north(&AmbientPoint::normalized(x)).unwrap();
        let direct = integ.flow(&HopfField, &p, s + t).unwrap();
        let mid = integ.flow(&HopfField, &p, s).unwrap();
        let composed = integ.flow(&HopfField, &mid, t).unwrap();
        prop_assert!(direct.distance(&composed) < 10.0 * tol, "{}", direct.distance(&composed));
    }

    #[test]
    fn return_time_is_lipschitz(r in 0.05..0.35f64, s in 0.0..TAU, k in 0usize..3) {
        let f = lift_field(Arc::new(spec(1, k, 0.05, 0.5)), 1).unwrap();
        let sec = strict_transform_section(1, 0.3).unwrap();
        let integ = Integrator::new(1e-11);
        let charts = (ChartId::BlowupXu, ChartId::BlowupVy);
        let (p, q) = (pencil_point(charts, 0.3, r, s), pencil_point(charts, 0.3, r + 1e-3, s + 1e-3));
        let (_, tp) = return_map(&integ, &f, &sec, &p, 8.0 * std::f64::consts::PI).unwrap();
        let (_, tq) = return_map(&integ, &f, &sec, &q, 8.0 * std::f64::consts::PI).unwrap();
        // return times of nearby section points differ by at most L * dist, L = 5
        prop_assert!((tp - tq).abs() <= 5.0 * p.distance(&q), "{} vs {}", (tp - tq).abs(), p.distance(&q));
    }

    #[test]
    fn straightening_is_idempotent_on_the_fiber(eps in 0.02..0.15f64, th in 0.0..TAU) {
        let b = Bump::tube(0.5);
        let s = straighten_seifert_curve(|t, e| (e * t.cos(), e * (2.0 * t).sin()), eps, b);
        let (x, y) = s.curve_point(th);
        let once = s.apply(&ChartPoint::new(ChartId::LocalTorus, &[x, y, th])).unwrap();
        // straighten again along the curve the leaf now occupies
        let (qx, qy) = (once.coords()[0], once.coords()[1]);
        let again = straighten_seifert_curve(move |_, _| (qx, qy), eps, b);
        let twice = again.apply(&once).unwrap();
        let d = |p: &ChartPoint| p.coords()[0].hypot(p.coords()[1]);
        prop_assert!(d(&once) < 1e-8);
        prop_assert!((d(&twice) - d(&once)).abs() < 1e-10);
    }
}

/// `|w|^2` and `arg w + E phi` are first integrals of the unperturbed flow.
fn invariants(p: &ChartPoint, e: f64) -> (f64, f64) {
    let c = sigma(p).unwrap().coords().to_vec();
    (c[0] * c[0] + c[1] * c[1], (c[1].atan2(c[0]) + e * c[2]).rem_euclid(TAU))
}

#[test]
fn conjugacy_maps_orbits_into_orbits() {
    let c = conjugacy_for(&spec(1, 1, 0.05, 0.5), Integrator::new(1e-10)).unwrap();
    for (r, th, phi) in [(0.1, 0.3, 1.0), (0.25, 2.0, 4.0), (0.35, 5.0, 0.2)] {
        let p = sigma_inverse(&base(r, th, phi)).unwrap();
        let (i1, i2) = invariants(&c.eval(&p).unwrap(), 1.0);
        for k in 1..8 {
            let q = c.perturbed().flow(&p, 0.8 * k as f64).unwrap();
            let (j1, j2) = invariants(&c.eval(&q).unwrap(), 1.0);
            let d2 = (j2 - i2).rem_euclid(TAU);
            assert!((j1.sqrt() - i1.sqrt()).abs() < 1e-5 && d2.min(TAU - d2) * i1.sqrt() < 1e-5);
        }
    }
}

#[test]
fn closure_defect_is_continuous_along_the_profile() {
    let integ = Integrator::new(1e-11);
    let mut prev: Option<f64> = None;
    for i in 0..300 {
        let lambda = 0.05 + 0.01 * i as f64;
        let d = closure_defect(&ThurstonParams::profile(lambda).unwrap(), &integ).unwrap().defect;
        if let Some(p) = prev {
            assert!((d - p).abs() < 1e-4, "jump at lambda = {lambda}");
        }
        prev = Some(d);
    }
}

#[test]
fn perturbed_fields_are_tangent_on_the_fiber() {
    for k in 0..3 {
        for e in [1, 2, 3] {
            let s = spec(e, k, 0.08, 0.0);
            let x0 = s.unperturbed();
            for j in 0..64 {
                let p = base(0.0, 0.0, TAU * j as f64 / 64.0);
                let (a, b) = (s.eval(&p).unwrap(), x0.eval(&p).unwrap());
                assert!((0..3).all(|i| (a[i] - b[i]).abs() < 1e-10));
            }
        }
    }
}
