use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::flow::{crossings, Integrator, Trajectory};
use crate::geometry::{sigma, sigma_push, AmbientPoint};
use crate::hopf::{make_tangent_perturbation, PerturbationSpec, Seed};

fn xu(c: &[f64]) -> ChartPoint {
    ChartPoint::new(ChartId::BlowupXu, c)
}

fn model(e: i64) -> LocalModel {
    LocalModel::with_default_radius(e).unwrap()
}

fn perturbed(e: i64, k: usize, eps: f64) -> PerturbationSpec {
    let seed = Seed::family(0.5)[k % 3];
    make_tangent_perturbation(model(e), Arc::new(seed), eps).unwrap()
}

#[test]
fn lifted_field_examples() {
    for e in [-2, 1, 3] {
        let f = lift_local_model(model(e));
        let v = f.eval(&xu(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(&v[..3], &[0.0, -(e as f64), 1.0]);
        for u in [-2.0, 0.0, 0.7] {
            let v = f.eval(&xu(&[0.0, u, 1.0])).unwrap();
            assert_eq!(&v[..3], &[0.0, -(e as f64) * (1.0 + u * u), 1.0]);
        }
    }
    let h = lift_hopf();
    let v = h.eval(&ChartPoint::new(ChartId::StereoBlowupXu, &[1.0, 0.0, 0.0])).unwrap();
    assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
}

#[test]
fn divisor_closed_form() {
    let f = divisor_field(1).unwrap();
    let q = Integrator::new(1e-12).flow(&f, &xu(&[0.0, 0.0, 0.0]), FRAC_PI_4).unwrap();
    assert_eq!(q.chart(), ChartId::BlowupXu);
    assert!((q.coords()[1] + 1.0).abs() < 1e-10);
    assert_eq!(q.coords()[0], 0.0);
}

#[test]
fn divisor_homotopy_type() {
    for e in [1, 2, 3, -1] {
        let f = divisor_field(e).unwrap();
        let tr = Integrator::new(1e-10).integrate(&f, &xu(&[0.0, 0.3, 0.0]), TAU).unwrap();
        assert_eq!(tr.winding("rp1").unwrap(), 2 * e, "E = {e}");
        assert_eq!(tr.winding("phi").unwrap(), 1);
        assert!(tr.closure_defect() < 1e-8);
    }
}

#[test]
fn hopf_divisor_homotopy_type() {
    let p = ChartPoint::new(ChartId::StereoDivisor, &[0.4, 0.3]);
    let tr = Integrator::new(1e-10).integrate(&StereoDivisorField, &p, TAU).unwrap();
    assert_eq!(tr.winding("rp1").unwrap(), 2);
    assert_eq!(tr.winding("phi").unwrap(), 1);
    assert!(tr.closure_defect() < 1e-8, "{}", tr.closure_defect());
}

#[test]
fn blow_down_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = perturbed(2, 1, 0.05);
    let lifted = lift_field(Arc::new(spec.clone()), 2).unwrap();
    for _ in 0..1000 {
        let r = 10f64.powf(rng.gen_range(-3.0..(0.45f64).log10()));
        let th = rng.gen_range(0.0..TAU);
        let base = ChartPoint::new(ChartId::LocalTorus, &[r * th.cos(), r * th.sin(), rng.gen_range(0.0..TAU)]);
        let p = crate::geometry::sigma_inverse(&base).unwrap();
        let v = lifted.eval(&p).unwrap();
        let down = sigma_push(&p, &v).unwrap();
        let want = spec.eval(&sigma(&p).unwrap()).unwrap();
        for i in 0..3 {
            assert!((down[i] - want[i]).abs() < 1e-9, "{i}: {} vs {}", down[i], want[i]);
        }
    }
}

#[test]
fn divisor_is_independent_of_the_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..10 {
        let e = [1, 2, 3, -1, -2][k % 5];
        let eps = rng.gen_range(0.01..0.08);
        let lifted = lift_field(Arc::new(perturbed(e, k, eps)), e).unwrap();
        let plain = lift_local_model(model(e));
        for _ in 0..100 {
            let chart = if rng.gen_bool(0.5) { ChartId::BlowupXu } else { ChartId::BlowupVy };
            let s = rng.gen_range(-1.5..1.5);
            let c = if chart == ChartId::BlowupXu { [0.0, s, rng.gen_range(0.0..TAU)] } else { [s, 0.0, rng.gen_range(0.0..TAU)] };
            let p = ChartPoint::new(chart, &c);
            let a = lifted.eval(&p).unwrap();
            let b = plain.eval(&p).unwrap();
            assert!((0..3).all(|i| (a[i] - b[i]).abs() < 1e-8), "{:?} vs {:?}", &a[..3], &b[..3]);
        }
    }
}

#[test]
fn missing_jacobian_is_reported() {
    struct Opaque;
    impl VectorField for Opaque {
        fn eval(&self, p: &ChartPoint) -> Result<Vector> {
            let c = p.coords();
            if c[0] != 0.0 || c[1] != 0.0 {
                return Err(Error::InvalidPoint("probe".into()));
            }
            let mut v = [0.0; MAX_DIM];
            v[2] = 1.0;
            Ok(v)
        }
        fn supports(&self, chart: ChartId) -> bool {
            chart == ChartId::LocalTorus
        }
    }
    let f = lift_field(Arc::new(Opaque), 1).unwrap();
    assert_eq!(f.eval(&xu(&[0.0, 0.5, 0.0])), Err(Error::JacobianUnavailable));
}

#[test]
fn section_examples() {
    let s = strict_transform_section(1, 0.0).unwrap();
    assert_eq!(s.g(&xu(&[0.2, 0.0, 0.0])).unwrap(), 0.0);
    let s = strict_transform_section(1, FRAC_PI_4).unwrap();
    assert!(s.g(&xu(&[0.2, 1.0, 0.3])).unwrap().abs() < 1e-15);
    assert!(strict_transform_section(0, 0.0).is_err());
}

#[test]
fn unperturbed_transversality_is_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for e in [1, 2, -3] {
        let form = TransversalityForm::new(e).unwrap();
        let f = lift_local_model(model(e));
        for _ in 0..200 {
            let chart = if rng.gen_bool(0.5) { ChartId::BlowupXu } else { ChartId::BlowupVy };
            let (a, b) = (rng.gen_range(-0.4..0.4), rng.gen_range(-1.4..1.4));
            let c = if chart == ChartId::BlowupXu { [a, b, 1.0] } else { [b, a, 1.0] };
            let t = transversality(&form, &f, &ChartPoint::new(chart, &c)).unwrap();
            assert!((t + 1.0).abs() < 1e-12);
        }
    }
    let form = TransversalityForm::new(1).unwrap();
    let h = lift_hopf();
    for c in [[0.7, 0.2, -1.0], [0.0, -3.0, 0.4]] {
        let p = ChartPoint::new(ChartId::StereoBlowupXu, &c);
        assert!((transversality(&form, &h, &p).unwrap() + 1.0).abs() < 1e-12);
    }
}

#[test]
fn perturbed_transversality_stays_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let form = TransversalityForm::new(1).unwrap();
    let f = lift_field(Arc::new(perturbed(1, 0, 0.05)), 1).unwrap();
    for _ in 0..1000 {
        let r = rng.gen_range(0.0..0.5);
        let th = rng.gen_range(0.0..PI);
        let base = ChartPoint::new(ChartId::LocalTorus, &[r * th.cos(), r * th.sin(), rng.gen_range(0.0..TAU)]);
        let p = if r == 0.0 { xu(&[0.0, 0.0, 0.0]) } else { crate::geometry::sigma_inverse(&base).unwrap() };
        assert!(transversality(&form, &f, &p).unwrap() < -0.5);
    }
    let t = transversality(&form, &f, &xu(&[0.0, 0.4, 2.0])).unwrap();
    assert!((t + 1.0).abs() < 1e-9);
}

#[test]
fn section_is_crossed_two_e_times_per_period() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let integ = Integrator::new(1e-9);
    for e in [1, 2] {
        let f = lift_field(Arc::new(perturbed(e, 2, 0.05)), e).unwrap();
        let s = strict_transform_section(e, 0.3).unwrap();
        for _ in 0..10 {
            let r = rng.gen_range(0.05..0.35);
            let th = rng.gen_range(0.0..TAU);
            let base = ChartPoint::new(ChartId::LocalTorus, &[r * th.cos(), r * th.sin(), 0.0]);
            let p = crate::geometry::sigma_inverse(&base).unwrap();
            let n = crossings(&integ, &f, &s, &p, TAU).unwrap().len() as i64;
            assert_eq!(n, 2 * e);
        }
    }
}

fn hopf_fiber(p: [f64; 4]) -> Trajectory {
    let a = AmbientPoint::normalized(p);
    let start = crate::geometry::stereo_north(&a).unwrap();
    let mut tr = Integrator::new(1e-11).integrate(&crate::hopf::HopfField, &start, TAU).unwrap();
    let first = tr.samples[0].1;
    let n = tr.samples.len();
    // exact closure: replace the endpoint by the start
    tr.samples[n - 1].1 = first;
    tr
}

#[test]
fn hopf_fibers_link_once() {
    let a = hopf_fiber([0.6, 0.0, 0.8, 0.0]);
    let b = hopf_fiber([0.0, 0.8, 0.0, 0.6]);
    assert_eq!(linking_number(&a, &b).unwrap().value, 1);
    let c = hopf_fiber([0.1, -0.5, 0.7, 0.5]);
    assert_eq!(linking_number(&a, &c).unwrap().value, 1);
}

fn local_orbit(e: i64, w0: f64) -> Trajectory {
    let f = crate::hopf::local_model_field(model(e));
    let p = ChartPoint::new(ChartId::LocalTorus, &[w0, 0.0, 0.0]);
    Integrator::new(1e-11).integrate(&f, &p, TAU).unwrap()
}

#[test]
fn local_model_linking_equals_euler_number() {
    for e in [1, 2, 3, -2] {
        let core = {
            let f = crate::hopf::local_model_field(model(e));
            Integrator::new(1e-11).integrate(&f, &ChartPoint::new(ChartId::LocalTorus, &[0.0, 0.0, 0.0]), TAU).unwrap()
        };
        let rep = linking_number(&core, &local_orbit(e, 0.2)).unwrap();
        assert_eq!(rep.value, e, "raw {}", rep.raw);
    }
}

#[test]
fn linking_errors_and_unlinked_circles() {
    let circle = |cx: f64| -> Vec<[f64; 3]> {
        (0..64).map(|k| {
            let t = TAU * k as f64 / 64.0;
            [cx + t.cos(), t.sin(), 0.0]
        }).collect()
    };
    assert_eq!(gauss_linking(&circle(0.0), &circle(5.0)).unwrap().value, 0);
    assert!(matches!(gauss_linking(&circle(0.0), &circle(0.0)), Err(Error::TooClose(_))));
    let open = local_orbit(1, 0.2);
    let mut cut = open.clone();
    cut.samples.truncate(open.samples.len() / 2);
    assert!(matches!(linking_number(&open, &cut), Err(Error::NotClosed { .. })));
}

#[test]
fn transition_degree_examples() {
    assert_eq!(transition_degree(3, 64).unwrap(), 3);
    assert_eq!(transition_degree(-2, 64).unwrap(), -2);
    assert!(matches!(transition_degree(1, 4), Err(Error::Undersampled { .. })));
}
