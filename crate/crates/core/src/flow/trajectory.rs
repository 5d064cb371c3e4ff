use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::Serialize;

use super::field::VectorField;
use super::integrator::{ChartSwitch, Integrator};
use crate::error::{Error, Result};
use crate::geometry::{wrap_signed, ChartId, ChartPoint};

/// Time-stamped samples of one integral curve, one per accepted step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, ChartPoint)>,
    pub tolerance: f64,
    pub switches: Vec<ChartSwitch>,
}

impl Trajectory {
    pub fn start(&self) -> &ChartPoint {
        &self.samples[0].1
    }

    pub fn end(&self) -> &ChartPoint {
        &self.samples[self.samples.len() - 1].1
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].0 - self.samples[0].0
    }

    /// Distance in the canonical embedding between the two ends.
    pub fn closure_defect(&self) -> f64 {
        self.start().distance(self.end())
    }

    /// Net unwrapped change of an angular observable.
    pub fn total_phase(&self, observable: &str) -> Result<f64> {
        let mut prev: Option<f64> = None;
        let mut total = 0.0;
        for (_, p) in &self.samples {
            let a = observable_angle(observable, p)
                .ok_or_else(|| Error::Config(format!("observable '{observable}' undefined on {}", p.chart())))?;
            if let Some(b) = prev {
                total += wrap_signed(a - b);
            }
            prev = Some(a);
        }
        Ok(total)
    }

    /// Signed number of complete turns of `observable`.
    pub fn winding(&self, observable: &str) -> Result<i64> {
        Ok(turns(self.total_phase(observable)?))
    }

    pub fn windings(&self, observables: &[&str]) -> Result<BTreeMap<String, i64>> {
        observables.iter().map(|o| Ok((o.to_string(), self.winding(o)?))).collect()
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Trajectory) -> Trajectory {
        let shift = self.samples[self.samples.len() - 1].0 - other.samples[0].0;
        let mut samples = self.samples.clone();
        samples.extend(other.samples.iter().skip(1).map(|(t, p)| (t + shift, *p)));
        let mut switches = self.switches.clone();
        switches.extend(other.switches.iter().map(|s| ChartSwitch { t: s.t + shift, ..*s }));
        Trajectory { samples, tolerance: self.tolerance.max(other.tolerance), switches }
    }

    /// CSV dump with columns `time, chart, c1..cn`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let width = self.samples.iter().map(|(_, p)| p.dim()).max().unwrap_or(0);
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
        let mut header = vec!["time".to_string(), "chart".to_string()];
        header.extend((1..=width).map(|i| format!("c{i}")));
        wtr.write_record(&header).map_err(io)?;
        for (t, p) in &self.samples {
            let mut row = vec![format!("{t:.17e}"), p.chart().name().to_string()];
            for i in 0..width {
                row.push(p.coords().get(i).map(|v| format!("{v:.17e}")).unwrap_or_default());
            }
            wtr.write_record(&row).map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Converts an unwrapped phase to whole turns: values within `1e-6` of an
/// integer are rounded, others truncated toward zero.
pub fn turns(phase: f64) -> i64 {
    let x = phase / TAU;
    if (x - x.round()).abs() < 1e-6 {
        x.round() as i64
    } else {
        x.trunc() as i64
    }
}

/// Named angular observables.
///
/// * `phi`: angle along the distinguished fiber.
/// * `rp1`: twice the slope angle of a blow-up point, oriented so that a
///   positive turn is a meridian of the blown-up fiber.
/// * `arg_w`: argument of the normal coordinate `w = x + i y`.
/// * `arg_zeta`, `xu`, `zr`, `zi`: angles of the fiber-product example.
/// * `c<i>`: the `i`-th coordinate (1-based) of an angular chart.
pub fn observable_angle(name: &str, p: &ChartPoint) -> Option<f64> {
    let c = p.coords();
    let chart = p.chart();
    match (name, chart) {
        ("phi", ChartId::LocalTorus | ChartId::BlowupXu | ChartId::BlowupVy) => Some(c[2]),
        ("phi", ChartId::StereoN | ChartId::StereoBlowupXu | ChartId::StereoBlowupVy) => Some(2.0 * c[2].atan()),
        ("phi", ChartId::StereoS) => Some(PI - 2.0 * c[2].atan()),
        ("phi", ChartId::StereoDivisor) => Some(c[1]),
        ("rp1", ChartId::StereoDivisor) => Some(c[0]),
        ("rp1", ChartId::BlowupXu | ChartId::StereoBlowupXu) => Some(chart.meridian_sign() * 2.0 * c[1].atan()),
        ("rp1", ChartId::BlowupVy | ChartId::StereoBlowupVy) => {
            Some(chart.meridian_sign() * (PI - 2.0 * c[0].atan()))
        }
        ("arg_w", ChartId::LocalTorus | ChartId::StereoN | ChartId::StereoS) => Some(c[1].atan2(c[0])),
        ("zr", ChartId::UnitTangent | ChartId::FiberProduct) => Some(c[0]),
        ("zi", ChartId::UnitTangent | ChartId::FiberProduct) => Some(c[1]),
        ("arg_zeta", ChartId::UnitTangent | ChartId::FiberProduct) => Some(c[3].atan2(c[2])),
        ("xu", ChartId::FiberProduct) => Some(c[4]),
        _ => {
            let i: usize = name.strip_prefix('c')?.parse().ok()?;
            (i >= 1 && i <= chart.dim() && chart.is_angular(i - 1)).then(|| c[i - 1])
        }
    }
}

/// Signed turn count of an observable along a trajectory.
pub fn winding_count(traj: &Trajectory, observable: &str) -> Result<i64> {
    traj.winding(observable)
}

/// Summary of a minimal-period search.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodReport {
    pub period: f64,
    pub closure_defect: f64,
    pub winding: BTreeMap<String, i64>,
    pub n_steps: usize,
}

impl Integrator {
    /// Samples of the integral curve through `p0` over `[0, t_final]`.
    pub fn integrate(&self, f: &dyn VectorField, p0: &ChartPoint, t_final: f64) -> Result<Trajectory> {
        let mut samples = vec![(0.0, *p0)];
        let end = self.run(f, p0, t_final, |v| {
            samples.push((v.t1, v.end));
            Ok(true)
        })?;
        Ok(Trajectory { samples, tolerance: self.tol, switches: end.switches })
    }
}
