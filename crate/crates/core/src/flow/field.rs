use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{push_vector, transition, ChartId, ChartPoint, Vector, MAX_DIM};

/// Jacobian in chart coordinates, `jac[i][j] = d f_i / d c_j`.
pub type Jacobian = [[f64; MAX_DIM]; MAX_DIM];

/// A vector field given chart by chart.
pub trait VectorField: Send + Sync {
    /// Tangent vector at `p`, in the chart of `p`.
    fn eval(&self, p: &ChartPoint) -> Result<Vector>;

    fn supports(&self, chart: ChartId) -> bool;

    /// Spatial Jacobian at points of the distinguished curve, when known in
    /// closed form.
    fn jac_on_curve(&self, _p: &ChartPoint) -> Option<Jacobian> {
        None
    }

    fn name(&self) -> String {
        "field".into()
    }
}

impl<F: VectorField + ?Sized> VectorField for Arc<F> {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        (**self).eval(p)
    }
    fn supports(&self, chart: ChartId) -> bool {
        (**self).supports(chart)
    }
    fn jac_on_curve(&self, p: &ChartPoint) -> Option<Jacobian> {
        (**self).jac_on_curve(p)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        (**self).eval(p)
    }
    fn supports(&self, chart: ChartId) -> bool {
        (**self).supports(chart)
    }
    fn jac_on_curve(&self, p: &ChartPoint) -> Option<Jacobian> {
        (**self).jac_on_curve(p)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

type EvalFn = dyn Fn(&ChartPoint) -> Result<Vector> + Send + Sync;

/// Field defined by a closure on a fixed set of charts.
#[derive(Clone)]
pub struct FnField {
    name: String,
    charts: Vec<ChartId>,
    f: Arc<EvalFn>,
}

impl FnField {
    pub fn new(
        name: impl Into<String>,
        charts: &[ChartId],
        f: impl Fn(&ChartPoint) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        FnField { name: name.into(), charts: charts.to_vec(), f: Arc::new(f) }
    }
}

impl VectorField for FnField {
    fn eval(&self, p: &ChartPoint) -> Result<Vector> {
        if !self.supports(p.chart()) {
            return Err(Error::UnsupportedChart(p.chart()));
        }
        (self.f)(p)
    }
    fn supports(&self, chart: ChartId) -> bool {
        self.charts.contains(&chart)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// The zero field on every chart.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroField;

impl VectorField for ZeroField {
    fn eval(&self, _p: &ChartPoint) -> Result<Vector> {
        Ok([0.0; MAX_DIM])
    }
    fn supports(&self, _chart: ChartId) -> bool {
        true
    }
    fn name(&self) -> String {
        "zero".into()
    }
}

/// Largest discrepancy between the value of `f` in the chart of `p` pushed to
/// `to` and the value of `f` evaluated directly in `to`, relative to the size
/// of the vectors.
pub fn chart_consistency(f: &dyn VectorField, p: &ChartPoint, to: ChartId) -> Result<f64> {
    let v = f.eval(p)?;
    let pushed = push_vector(p, &v[..p.dim()], to)?;
    let q = transition(p, to)?;
    let w = f.eval(&q)?;
    let n = to.dim();
    let scale = 1.0 + w[..n].iter().map(|a| a.abs()).fold(0.0, f64::max);
    Ok((0..n).map(|i| (pushed[i] - w[i]).abs()).fold(0.0, f64::max) / scale)
}

/// Central finite-difference Jacobian of `f` at `p` with step `h`.
pub fn fd_jacobian(f: &dyn VectorField, p: &ChartPoint, h: f64) -> Result<Jacobian> {
    let n = p.dim();
    let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
    for j in 0..n {
        let mut a = p.raw();
        let mut b = p.raw();
        a[j] += h;
        b[j] -= h;
        let fa = f.eval(&ChartPoint::new(p.chart(), &a[..n]))?;
        let fb = f.eval(&ChartPoint::new(p.chart(), &b[..n]))?;
        for i in 0..n {
            jac[i][j] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
