//! Reproducible experiments with machine-readable reports.
//!
//! Random sampling uses `ChaCha8Rng::seed_from_u64(seed)` from `rand_chacha`,
//! which yields the same stream on every platform.

mod bundle;
mod rigid;
mod sweep;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one experiment run. Unset fields take per-experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Euler numbers.
    pub euler: Option<Vec<i64>>,
    pub epsilon: Option<Vec<f64>>,
    /// Rotation orders for the Bochner experiment.
    pub orders: Option<Vec<i64>>,
    pub lambda: Option<f64>,
    /// `alpha2 / alpha1` for a single closure run.
    pub ratio: Option<f64>,
    /// Sweep ratio as a multiple of the closing value `lambda / 2`.
    pub factor: Option<f64>,
    pub lmin: Option<f64>,
    pub lmax: Option<f64>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    /// Sample count.
    pub n: Option<usize>,
    pub seed: u64,
    /// Optional CSV output (trajectory or sweep table).
    pub csv: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig { experiment: experiment.to_string(), ..Default::default() }
    }

    /// Fields set in `other` replace those of `self`.
    pub fn overridden_by(mut self, other: &ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f.clone(); })*};
        }
        take!(euler, epsilon, orders, lambda, ratio, factor, lmin, lmax, step, tol, n, csv);
        if !other.experiment.is_empty() {
            self.experiment = other.experiment.clone();
        }
        if other.seed != 0 {
            self.seed = other.seed;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if find(&self.experiment).is_none() {
            return bad(format!("unknown experiment '{}'", self.experiment));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) || t >= 1.0 {
                return bad(format!("tol must lie in (0, 1), got {t}"));
            }
        }
        if self.n == Some(0) {
            return bad("n must be positive".into());
        }
        if let Some(es) = &self.euler {
            if es.is_empty() || es.contains(&0) {
                return bad("Euler numbers must be nonzero".into());
            }
        }
        if let Some(ls) = &self.orders {
            if ls.is_empty() || ls.contains(&0) {
                return bad("rotation orders must be nonzero".into());
            }
        }
        if let Some(eps) = &self.epsilon {
            if eps.iter().any(|e| !(e.abs() <= 0.2)) {
                return bad("epsilon must satisfy |epsilon| <= 0.2".into());
            }
        }
        for (name, v) in [("lambda", self.lambda), ("factor", self.factor), ("lmin", self.lmin), ("lmax", self.lmax), ("step", self.step)] {
            if let Some(x) = v {
                if !(x > 0.0) {
                    return bad(format!("{name} must be positive, got {x}"));
                }
            }
        }
        if let (Some(a), Some(b)) = (self.lmin, self.lmax) {
            if a > b {
                return bad(format!("lmin {a} exceeds lmax {b}"));
            }
        }
        if self.experiment == "transition-degree" {
            let n = self.n.unwrap_or(64);
            for e in self.euler.clone().unwrap_or_else(|| vec![1, 2, 3]) {
                if (n as u64) < 8 * e.unsigned_abs() {
                    return bad(format!("{n} samples are not enough for degree {e} (need {})", 8 * e.abs()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub(crate) fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub(crate) fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    pub(crate) fn euler_or(&self, default: &[i64]) -> Vec<i64> {
        self.euler.clone().unwrap_or_else(|| default.to_vec())
    }

    pub(crate) fn epsilon_or(&self, default: &[f64]) -> Vec<f64> {
        self.epsilon.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Creates the CSV file named in the configuration, if any.
    pub(crate) fn csv_file(&self) -> Result<Option<std::fs::File>> {
        match &self.csv {
            None => Ok(None),
            Some(path) => std::fs::File::create(path)
                .map(Some)
                .map_err(|e| Error::Config(format!("cannot create {path}: {e}"))),
        }
    }
}

/// One pass/fail comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<"`, `">"`, `">="` or `"=="`.
    pub relation: String,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, relation: "<".into(), bound, pass: value < bound }
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, relation: ">".into(), bound, pass: value > bound }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, relation: ">=".into(), bound, pass: value >= bound }
    }

    pub fn equal(name: &str, value: i64, want: i64) -> Self {
        Check { name: name.into(), value: value as f64, relation: "==".into(), bound: want as f64, pass: value == want }
    }
}

/// Result of an experiment. Everything except `wall_time` is a
/// deterministic function of the configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub params: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
    pub seed: u64,
    pub wall_time: f64,
}

impl Report {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        Report {
            experiment: cfg.experiment.clone(),
            params: cfg.clone(),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
            seed: cfg.seed,
            wall_time: 0.0,
        }
    }

    pub(crate) fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub(crate) fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub(crate) fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    /// Checks that failed.
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// An entry of the experiment table.
#[derive(Clone, Copy, Debug)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub claim: &'static str,
    run: fn(&ExperimentConfig) -> Result<Report>,
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo { name: "hopf-periods", claim: "every Hopf orbit on S^3 is closed with minimal period 2 pi", run: bundle::hopf_periods },
    ExperimentInfo { name: "blowup-divisor", claim: "the lift blows down to the base field; divisor orbits have homotopy type (2E, 1)", run: bundle::blowup_divisor },
    ExperimentInfo { name: "linking", claim: "linking number, transition degree and half the divisor winding all equal E; Hopf fibers link once", run: bundle::linking },
    ExperimentInfo { name: "transition-degree", claim: "the transition function (w/|w|)^E has degree E", run: bundle::transition_degree },
    ExperimentInfo { name: "transversality", claim: "eta~(X~0) = -1, eta~(X~eps) < 0 and X~eps = X~0 on the divisor", run: bundle::transversality },
    ExperimentInfo { name: "montgomery", claim: "the return map to the strict-transform section satisfies P^(2E) = Id, P^k != Id for k < 2E", run: bundle::montgomery },
    ExperimentInfo { name: "rigidity", claim: "the map phi_eps built from the section conjugates the isochronized flows", run: rigid::rigidity },
    ExperimentInfo { name: "straighten", claim: "the bump-modulated flow moves a curve of leaves onto the fiber and is the identity off the tube", run: rigid::straighten },
    ExperimentInfo { name: "bochner", claim: "averaging linearizes a periodic disc map; suspension conjugates the flow to the linear model", run: rigid::bochner },
    ExperimentInfo { name: "thurston-sweep", claim: "geometric phase pi lambda^2 equals the dynamical phase and leaves close along the alpha profile", run: sweep::thurston_sweep },
    ExperimentInfo { name: "thurston-closure", claim: "leaves close iff alpha2/alpha1 = lambda/2 (k = 0)", run: sweep::thurston_closure },
    ExperimentInfo { name: "integrator-order", claim: "halving the tolerance improves the Hopf closure defect", run: sweep::integrator_order },
];

pub fn find(name: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// Validates the configuration and runs the named experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let info = find(&cfg.experiment).ok_or_else(|| Error::Config(format!("unknown experiment '{}'", cfg.experiment)))?;
    let start = std::time::Instant::now();
    let mut report = (info.run)(cfg)?;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Text table of all experiments.
pub fn list_experiments() -> String {
    let width = EXPERIMENTS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    EXPERIMENTS.iter().map(|e| format!("{:width$}  {}\n", e.name, e.claim)).collect()
}

#[cfg(test)]
mod tests;
