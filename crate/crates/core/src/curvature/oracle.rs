//! From-definition oracles. These only evaluate `F(x, y)` and `ln σ(x)` and
//! differentiate numerically; none of them touch the scalar pack.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;

/// Steps and extrapolation depth for the nested differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSteps {
    /// y-step relative to `‖y‖` for derivatives of `F²` and the spray.
    pub y_rel: f64,
    /// Absolute x-step.
    pub x_abs: f64,
    pub levels: usize,
    /// y-step relative to `‖y‖` for the E oracle.
    pub e_rel: f64,
    pub e_levels: usize,
}

impl Default for OracleSteps {
    fn default() -> Self {
        Self { y_rel: 1e-2, x_abs: 1e-3, levels: 2, e_rel: 1e-4, e_levels: 1 }
    }
}

fn finite(v: &DVector<f64>) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn condition(g: &DMatrix<f64>, max: f64) -> Result<f64> {
    let eig = g.clone().symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= max) {
        return Err(Error::IllConditioned(cond));
    }
    Ok(cond)
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j` by central differences.
pub fn fundamental_tensor_oracle(
    f: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    steps: &OracleSteps,
    max_condition: f64,
) -> Result<DMatrix<f64>> {
    let h = steps.y_rel * norm(y);
    let g = fd::hessian(|v| f(x, v).powi(2), y, h, steps.levels) * 0.5;
    if !g.iter().all(|v| v.is_finite()) {
        return Err(Error::Degenerate("F not evaluable on the y-stencil".into()));
    }
    condition(&g, max_condition)?;
    Ok(g)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `G^i = ¼ g^{il}{[F²]_{x^k y^l} y^k − [F²]_{x^l}}`.
pub fn finsler_spray_oracle(
    f: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    steps: &OracleSteps,
    max_condition: f64,
) -> Result<DVector<f64>> {
    let ny = norm(y);
    let hy = steps.y_rel * ny;
    let lagrangian = |p: &[f64], v: &[f64]| f(p, v).powi(2);
    let g = fundamental_tensor_oracle(f, x, y, steps, max_condition)?;
    let grad_x = fd::gradient(|p| lagrangian(p, y), x, steps.x_abs, steps.levels);
    // [F²]_{x^k y^l} y^k is the derivative of ∇_y F² along y in x.
    let unit: Vec<f64> = y.iter().map(|c| c / ny).collect();
    let mixed = fd::directional(
        |p| fd::gradient(|v| lagrangian(p, v), y, hy, steps.levels),
        x,
        &unit,
        steps.x_abs,
        steps.levels,
    ) * ny;
    let rhs = (mixed - grad_x) * 0.25;
    if !finite(&rhs) {
        return Err(Error::Degenerate("F not evaluable on the x-stencil".into()));
    }
    g.cholesky().map(|c| c.solve(&rhs)).ok_or(Error::IllConditioned(f64::INFINITY))
}

/// `∂G^m/∂y^m` of any spray.
pub fn spray_divergence(spray: &dyn Fn(&[f64]) -> Result<DVector<f64>>, y: &[f64], steps: &OracleSteps) -> Result<f64> {
    let n = y.len();
    let h = steps.y_rel * norm(y);
    let err = RefCell::new(None);
    let mut total = 0.0;
    for m in 0..n {
        let mut e = vec![0.0; n];
        e[m] = 1.0;
        total += fd::directional(
            |v| match spray(v) {
                Ok(g) => g[m],
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            y,
            &e,
            h,
            steps.levels,
        );
    }
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `y^m ∂_m ln σ`.
pub fn log_volume_derivative(
    log_sigma: &dyn Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    y: &[f64],
    steps: &OracleSteps,
) -> Result<f64> {
    let ny = norm(y);
    let unit: Vec<f64> = y.iter().map(|c| c / ny).collect();
    let err = RefCell::new(None);
    let d = fd::directional(
        |p| {
            log_sigma(p).unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        },
        x,
        &unit,
        steps.x_abs,
        steps.levels,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(d * ny),
    }
}

/// `S = ∂G^m/∂y^m − y^m ∂_m ln σ` with the oracle spray.
pub fn s_curvature_oracle(
    f: &dyn Fn(&[f64], &[f64]) -> f64,
    log_sigma: &dyn Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    y: &[f64],
    steps: &OracleSteps,
    max_condition: f64,
) -> Result<f64> {
    let spray = |v: &[f64]| finsler_spray_oracle(f, x, v, steps, max_condition);
    Ok(spray_divergence(&spray, y, steps)? - log_volume_derivative(log_sigma, x, y, steps)?)
}

/// `E_ij = ½ ∂²S/∂y^i∂y^j`. The mixed stencil is evaluated once per pair, so
/// the result is symmetric as returned.
pub fn e_curvature_oracle(s: &dyn Fn(&[f64]) -> Result<f64>, y: &[f64], steps: &OracleSteps) -> Result<DMatrix<f64>> {
    let h = steps.e_rel * norm(y);
    let err = RefCell::new(None);
    let e = fd::hessian(
        |v| {
            s(v).unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        },
        y,
        h,
        steps.e_levels,
    ) * 0.5;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(e),
    }
}
