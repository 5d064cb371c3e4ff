use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::flow::Integrator;

fn ut(c: &[f64]) -> ChartPoint {
    ChartPoint::new(ChartId::UnitTangent, c)
}

#[test]
fn drift_examples() {
    let (z, _) = drift_flow(1.0, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), PI);
    assert!((z - Complex64::new(0.0, 2.0)).norm() < 1e-15);

    let f = drift_field(1.0).unwrap();
    let integ = Integrator::new(1e-12);
    let tr = integ.integrate(&f, &ut(&[0.0, 0.0, 1.0, 0.0]), TAU).unwrap();
    for (t, p) in &tr.samples {
        let c = p.coords();
        assert!((c[2].hypot(c[3]) - 1.0).abs() < 1e-10);
        let (z, _) = drift_flow(1.0, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), *t);
        assert!((z - Complex64::new(c[0], c[1])).norm() < 1e-9);
    }
    let end = tr.end().coords();
    assert!(end[0].hypot(end[1]) < 1e-8);
    let half = integ.flow(&f, &ut(&[0.0, 0.0, 1.0, 0.0]), PI).unwrap();
    assert!((half.coords()[1] - 2.0).abs() < 1e-9);
    assert!(drift_field(0.0).is_err());
}

#[test]
fn heis_examples() {
    assert_eq!(heis_reduce(0.5, 0.3, 0.2), HeisPoint { a: 0.5, b: 0.3, c: 0.2 });
    let h = heis_reduce(1.5, 0.3, 0.2);
    assert!((h.a - 0.5).abs() < 1e-15 && (h.b - 0.3).abs() < 1e-15 && (h.c - 0.9).abs() < 1e-15);
    assert_eq!(heis_reduce(0.0, 0.0, -0.25), HeisPoint { a: 0.0, b: 0.0, c: 0.75 });
}

/// Reduction by the opposite order: first `(m, 0, 0)`, then `(0, n, 0)`.
fn reduce_other_order(a: f64, b: f64, c: f64) -> HeisPoint {
    let m = -a.floor();
    let (a1, c1) = (a + m, c + m * b);
    let n = -b.floor();
    heis_reduce(a1, b + n, c1)
}

proptest! {
    #[test]
    fn heis_reduce_is_a_projection(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
        let h = heis_reduce(a, b, c);
        prop_assert!((0.0..1.0).contains(&h.a) && (0.0..1.0).contains(&h.b) && (0.0..1.0).contains(&h.c));
        prop_assert_eq!(heis_reduce(h.a, h.b, h.c), h);
        let o = reduce_other_order(a, b, c);
        let dc = (o.c - h.c).abs();
        prop_assert!((o.a - h.a).abs() < 1e-12 && (o.b - h.b).abs() < 1e-12 && dc.min(1.0 - dc) < 1e-12);
    }

    #[test]
    fn drift_conserves_speed(x in 0.0..6.0f64, y in 0.0..6.0f64, th in 0.0..6.3f64, lambda in 0.2..3.0f64) {
        let f = drift_field(lambda).unwrap();
        let q = Integrator::new(1e-11).flow(&f, &ut(&[x, y, th.cos(), th.sin()]), 2.0).unwrap();
        prop_assert!((q.coords()[2].hypot(q.coords()[3]) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn alpha_profile_examples() {
    assert_eq!(alpha_profile(0.0), (1.0, 0.0));
    assert_eq!(alpha_profile(2.0), (0.5, 0.5));
    let (a1, a2) = alpha_profile(1e6);
    assert!(a1 < 1e-5 && a2 > 1.0 - 1e-5);
    for l in [0.3, 1.0, 7.0] {
        let (a1, a2) = alpha_profile(l);
        assert!((a2 / a1 - l / 2.0).abs() < 1e-14 && (a1 + a2 - 1.0).abs() < 1e-15);
    }
}

#[test]
fn phase_examples() {
    assert_eq!(geometric_phase(0.0).unwrap(), 0.0);
    for l in [1.0, 2.0] {
        let g = geometric_phase(l).unwrap();
        assert!((g - PI * l * l).abs() < 1e-8 * PI * l * l, "{g}");
    }
    let p = ThurstonParams::with_ratio(1.0, 0.5).unwrap();
    assert!((dynamical_phase(&p) - PI).abs() < 1e-12);
    let p = ThurstonParams::with_ratio(1.0, 0.55).unwrap();
    assert!((dynamical_phase(&p) - 1.1 * PI).abs() < 1e-12);
    let p = ThurstonParams::new(1.0, 0.5, 0.0).unwrap();
    assert_eq!(dynamical_phase(&p), 0.0);
    let p = ThurstonParams::new(1.0, 0.5, 0.5).unwrap();
    assert!((dynamical_phase(&p) - TAU).abs() < 1e-12);
}

#[test]
fn closure_examples() {
    let integ = Integrator::new(1e-11);
    let p = ThurstonParams::new(1.0, 2.0 / 3.0, 1.0 / 3.0).unwrap();
    assert!(closure_defect(&p, &integ).unwrap().defect < 1e-6);
    let p = ThurstonParams::with_ratio(1.0, 0.55).unwrap();
    let want = (TAU * 0.55 - PI).abs();
    assert!((closure_defect(&p, &integ).unwrap().defect - want).abs() < 1e-8);
    let p = ThurstonParams::with_ratio(2.0, 1.0).unwrap();
    assert!(closure_defect(&p, &integ).unwrap().defect < 1e-6);
}

#[test]
fn pure_geometric_term_without_alpha2() {
    // with alpha2 = 0 the fiber moves only by -oint x dy
    let p = ThurstonParams::new(1.5, 0.7, 0.0).unwrap();
    let rep = closure_defect(&p, &Integrator::new(1e-12)).unwrap();
    assert!((rep.delta + PI * 1.5 * 1.5).abs() < 1e-8);
}

#[test]
fn fiber_product_consistency_along_the_flow() {
    let f = thurston_field(ThurstonParams::profile(1.3).unwrap());
    let p0 = ChartPoint::new(ChartId::FiberProduct, &[1.0, 2.0, 0.6, 0.8, 0.3]);
    let tr = Integrator::new(1e-11).integrate(&f, &p0, 9.0).unwrap();
    for (_, p) in &tr.samples {
        let q = FiberProductPoint::from_chart(p).unwrap();
        assert!(q.torus_mismatch() < 1e-9);
        assert!((q.zeta.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn endpoint_fields() {
    let p = ChartPoint::new(ChartId::FiberProduct, &[1.0, 2.0, 0.6, 0.8, 0.3]);
    assert_eq!(&Endpoint::Central.eval(&p).unwrap()[..5], &[0.0, 0.0, 0.0, 0.0, 1.0]);
    let v = Endpoint::Geodesic.eval(&p).unwrap();
    assert_eq!(&v[..4], &[0.6, 0.8, 0.0, 0.0]);
}

#[test]
fn marginal_limit_geometry() {
    let integ = Integrator::new(1e-9);
    let small = leaf_geometry(&ThurstonParams::profile(0.05).unwrap(), &integ).unwrap();
    let mid = leaf_geometry(&ThurstonParams::profile(1.0).unwrap(), &integ).unwrap();
    let large = leaf_geometry(&ThurstonParams::profile(20.0).unwrap(), &integ).unwrap();
    assert!((small.base_diameter - 0.1).abs() < 1e-3);
    assert!(small.base_diameter < mid.base_diameter);
    assert!(large.fiber_fraction > 0.9 && large.fiber_fraction > mid.fiber_fraction);
    assert!(small.fiber_fraction < 0.05);
}

#[test]
fn sweep_csv_columns() {
    let rows = sweep(0.5, 1.0, 0.25, 1.0, &Integrator::new(1e-10)).unwrap();
    assert_eq!(rows.len(), 3);
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("lambda,alpha1,alpha2,geometric_phase,dynamical_phase,closure_defect,k_detected\n"));
}
