//! Riemannian metrics `a_ij(x)` and 1-forms `b_i(x)`.
//!
//! Built-in fields carry analytic first derivatives. Fields defined by
//! expressions fall back to central differences with step `1e-6·(1 + |x|)`.

use std::fmt::Debug;

use exmex::prelude::*;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;

fn fd_step(x: &[f64]) -> f64 {
    1e-6 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

pub trait MetricField: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn metric(&self, x: &[f64]) -> DMatrix<f64>;

    /// `∂a/∂x^k` for `k = 0..n`.
    fn metric_derivs(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let h = fd_step(x);
        (0..self.dim())
            .map(|k| {
                let mut e = vec![0.0; self.dim()];
                e[k] = 1.0;
                fd::directional(|p| self.metric(p), x, &e, h, 1)
            })
            .collect()
    }

    /// Whether `x` lies in the chart where the field is defined.
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }

    fn describe(&self) -> String;
}

pub trait OneFormField: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn form(&self, x: &[f64]) -> DVector<f64>;

    /// Entry `(i, j)` is `∂b_i/∂x^j`.
    fn form_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        fd::jacobian(|p| self.form(p), x, fd_step(x), 1)
    }

    fn describe(&self) -> String;
}

#[derive(Debug, Clone)]
pub struct Euclidean {
    pub n: usize,
}

impl MetricField for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n)
    }
    fn metric_derivs(&self, _x: &[f64]) -> Vec<DMatrix<f64>> {
        vec![DMatrix::zeros(self.n, self.n); self.n]
    }
    fn describe(&self) -> String {
        format!("euclidean(n={})", self.n)
    }
}

/// A constant symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct ConstantMetric {
    pub a: DMatrix<f64>,
}

impl MetricField for ConstantMetric {
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn metric(&self, _x: &[f64]) -> DMatrix<f64> {
        self.a.clone()
    }
    fn metric_derivs(&self, _x: &[f64]) -> Vec<DMatrix<f64>> {
        vec![DMatrix::zeros(self.dim(), self.dim()); self.dim()]
    }
    fn describe(&self) -> String {
        format!("constant({:?})", self.a.as_slice())
    }
}

/// `a = e^{2 w·x} I`.
#[derive(Debug, Clone)]
pub struct ExpConformal {
    pub w: DVector<f64>,
}

impl MetricField for ExpConformal {
    fn dim(&self) -> usize {
        self.w.len()
    }
    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::identity(n, n) * self.factor(x)
    }
    fn metric_derivs(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let f = self.factor(x);
        (0..n).map(|k| DMatrix::identity(n, n) * (2.0 * self.w[k] * f)).collect()
    }
    fn describe(&self) -> String {
        format!("exp_conformal(w={:?})", self.w.as_slice())
    }
}

impl ExpConformal {
    fn factor(&self, x: &[f64]) -> f64 {
        (2.0 * self.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()).exp()
    }
}

/// Riemannian part of the Funk metric on the unit ball:
/// `a_ij = δ_ij/w + x_i x_j/w²`, `w = 1 − |x|²`.
#[derive(Debug, Clone)]
pub struct FunkMetric {
    pub n: usize,
}

impl MetricField for FunkMetric {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let w = 1.0 - dot(x, x);
        DMatrix::from_fn(self.n, self.n, |i, j| delta(i, j) / w + x[i] * x[j] / (w * w))
    }
    fn metric_derivs(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let w = 1.0 - dot(x, x);
        let (w2, w3) = (w * w, w * w * w);
        (0..self.n)
            .map(|k| {
                DMatrix::from_fn(self.n, self.n, |i, j| {
                    2.0 * x[k] * delta(i, j) / w2
                        + (delta(i, k) * x[j] + x[i] * delta(j, k)) / w2
                        + 4.0 * x[i] * x[j] * x[k] / w3
                })
            })
            .collect()
    }
    fn contains(&self, x: &[f64]) -> bool {
        dot(x, x) < 1.0
    }
    fn describe(&self) -> String {
        format!("funk_ball(n={})", self.n)
    }
}

/// `b = c` everywhere.
#[derive(Debug, Clone)]
pub struct ConstantForm {
    pub b: DVector<f64>,
}

impl OneFormField for ConstantForm {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn form(&self, _x: &[f64]) -> DVector<f64> {
        self.b.clone()
    }
    fn form_jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    fn describe(&self) -> String {
        format!("constant({:?})", self.b.as_slice())
    }
}

/// `b_i = c_i + M_ij x^j`.
#[derive(Debug, Clone)]
pub struct LinearForm {
    pub m: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl LinearForm {
    pub fn new(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self { m, offset: DVector::zeros(n) }
    }
}

impl OneFormField for LinearForm {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn form(&self, x: &[f64]) -> DVector<f64> {
        &self.offset + &self.m * DVector::from_column_slice(x)
    }
    fn form_jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        self.m.clone()
    }
    fn describe(&self) -> String {
        format!("linear(M={:?}, c={:?})", self.m.transpose().as_slice(), self.offset.as_slice())
    }
}

/// `b_i = x_i/(1 − |x|²)`, the 1-form of the Funk metric.
#[derive(Debug, Clone)]
pub struct FunkForm {
    pub n: usize,
}

impl OneFormField for FunkForm {
    fn dim(&self) -> usize {
        self.n
    }
    fn form(&self, x: &[f64]) -> DVector<f64> {
        let w = 1.0 - dot(x, x);
        DVector::from_iterator(self.n, x.iter().map(|v| v / w))
    }
    fn form_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let w = 1.0 - dot(x, x);
        DMatrix::from_fn(self.n, self.n, |i, j| delta(i, j) / w + 2.0 * x[i] * x[j] / (w * w))
    }
    fn describe(&self) -> String {
        format!("funk_ball(n={})", self.n)
    }
}

/// A scalar expression in `x1, …, xn`.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    flat: FlatEx<f64>,
    /// Coordinate index of each variable, in the parser's order.
    slots: Vec<usize>,
}

impl Expr {
    pub fn parse(source: &str, n: usize) -> Result<Self> {
        let flat = exmex::parse::<f64>(source)
            .map_err(|e| Error::validation(source, format!("cannot parse expression: {e}")))?;
        let slots = flat
            .var_names()
            .iter()
            .map(|name| {
                name.strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&k| k >= 1 && k <= n)
                    .map(|k| k - 1)
                    .ok_or_else(|| Error::validation(source, format!("unknown variable `{name}` (use x1..x{n})")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { source: source.to_string(), flat, slots })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let vars: Vec<f64> = self.slots.iter().map(|&k| x[k]).collect();
        self.flat.eval(&vars).unwrap_or(f64::NAN)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// `a = diag(e_1(x), …, e_n(x))`.
#[derive(Debug, Clone)]
pub struct DiagonalMetric {
    pub entries: Vec<Expr>,
}

impl MetricField for DiagonalMetric {
    fn dim(&self) -> usize {
        self.entries.len()
    }
    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(self.dim(), self.entries.iter().map(|e| e.eval(x))))
    }
    fn describe(&self) -> String {
        let parts: Vec<&str> = self.entries.iter().map(Expr::source).collect();
        format!("diagonal({})", parts.join(", "))
    }
}

/// `a = λ(x) I`.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    pub n: usize,
    pub factor: Expr,
}

impl MetricField for ConformalMetric {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n) * self.factor.eval(x)
    }
    fn describe(&self) -> String {
        format!("conformal({})", self.factor.source())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn funk_derivatives_match_finite_differences() {
        let x = [0.3, -0.2, 0.1];
        let metric = FunkMetric { n: 3 };
        let h = 1e-4;
        for (k, analytic) in metric.metric_derivs(&x).iter().enumerate() {
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            let numeric = fd::directional(|p| metric.metric(p), &x, &e, h, 1);
            assert!((analytic - numeric).abs().max() < 1e-9);
        }
        let form = FunkForm { n: 3 };
        let numeric = fd::jacobian(|p| form.form(p), &x, h, 1);
        assert!((form.form_jacobian(&x) - numeric).abs().max() < 1e-9);
    }

    #[test]
    fn expressions_bind_coordinates() {
        let e = Expr::parse("x2^2 + exp(x1)", 2).unwrap();
        assert!((e.eval(&[0.0, 3.0]) - 10.0).abs() < 1e-14);
        assert!(Expr::parse("x3", 2).is_err());
        assert!(Expr::parse("y + 1", 2).is_err());
        let c = Expr::parse("4", 2).unwrap();
        assert_eq!(c.eval(&[0.1, 0.2]), 4.0);
    }

    #[test]
    fn expression_metric_uses_fd_fallback() {
        let m = DiagonalMetric { entries: vec![Expr::parse("1", 2).unwrap(), Expr::parse("x1^2", 2).unwrap()] };
        let d = m.metric_derivs(&[2.0, 0.5]);
        assert!(d[0][(0, 0)].abs() < 1e-12);
        assert!((d[0][(1, 1)] - 4.0).abs() < 1e-8);
        assert!(d[1].abs().max() < 1e-12);
    }
}
