use std::f64::consts::TAU;
use std::sync::Arc;

use super::{isochronize, period_function, Isochronized};
use crate::blowup::{lift_field, meridian_section, strict_transform_section};
use crate::error::Result;
use crate::flow::{next_crossing, Integrator, Section, VectorField, DEFAULT_RETURN_BOUND};
use crate::hopf::PerturbationSpec;
use crate::geometry::ChartPoint;

/// `phi_eps(p) = flow_0(p(eps), tau(eps, p))`, where `p(eps)` is the most
/// recent crossing of the section along the `eps`-orbit through `p` and
/// `tau` the isochronous time elapsed since it.
#[derive(Clone)]
pub struct ConjugacyMap {
    eps: Isochronized,
    zero: Isochronized,
    section: Section,
    integ: Integrator,
    pub epsilon: f64,
}

pub fn build_conjugacy(
    f_eps: Isochronized,
    f0: Isochronized,
    s: Section,
    integ: Integrator,
    epsilon: f64,
) -> ConjugacyMap {
    ConjugacyMap { eps: f_eps, zero: f0, section: s, integ, epsilon }
}

impl ConjugacyMap {
    pub fn perturbed(&self) -> &Isochronized {
        &self.eps
    }

    pub fn unperturbed(&self) -> &Isochronized {
        &self.zero
    }

    /// `(p(eps), tau(eps, p))` with `tau` in `[0, 2 pi)`.
    pub fn section_time(&self, p: &ChartPoint) -> Result<(ChartPoint, f64)> {
        if self.section.g(p)?.abs() <= (100.0 * self.integ.tol).max(1e-8) {
            return Ok((*p, 0.0));
        }
        let inner = self.eps.inner().as_ref();
        let c = next_crossing(&self.integ, inner, &self.section, p, -DEFAULT_RETURN_BOUND)?;
        let tau = -c.t * TAU / self.eps.period_at(&c.point)?;
        Ok((c.point, tau.rem_euclid(TAU)))
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<ChartPoint> {
        let (base, tau) = self.section_time(p)?;
        self.zero.flow(&base, tau)
    }

    /// `|phi_eps(flow_eps(p, t)) - flow_0(phi_eps(p), t)|`.
    pub fn residual(&self, p: &ChartPoint, t: f64) -> Result<f64> {
        let lhs = self.eval(&self.eps.flow(p, t)?)?;
        let rhs = self.zero.flow(&self.eval(p)?, t)?;
        Ok(lhs.distance(&rhs))
    }
}

/// Largest equivariance residual over the sampled `(p, theta)` pairs.
pub fn equivariance_check(c: &ConjugacyMap, samples: &[(ChartPoint, f64)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (p, theta) in samples {
        worst = worst.max(c.residual(p, *theta)?);
    }
    Ok(worst)
}

/// The full pipeline for a perturbation of the local model: lift both fields
/// to the blow-up, isochronize them with the `2E`-return period function of
/// the strict-transform section, and conjugate through the meridian disc.
pub fn conjugacy_for(spec: &PerturbationSpec, integ: Integrator) -> Result<ConjugacyMap> {
    let e = spec.base.e;
    let iso = |f: Arc<dyn VectorField>| -> Result<Isochronized> {
        let lifted: Arc<dyn VectorField> = Arc::new(lift_field(f, e)?);
        let t = period_function(lifted.clone(), strict_transform_section(e, 0.0)?, e, integ)?;
        Ok(isochronize(lifted, t))
    };
    let eps = iso(Arc::new(spec.clone()))?;
    let zero = iso(Arc::new(spec.unperturbed()))?;
    Ok(build_conjugacy(eps, zero, meridian_section(0.0), integ, spec.epsilon))
}
