//! Central finite differences with Richardson extrapolation.
//!
//! Used only by the oracles and by the derivative fallback for user-supplied
//! fields. Every stencil here is even, so its error expands in powers of `h²`
//! and each Richardson level removes one of them.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

/// Values that finite differences can be taken of.
pub trait Linear: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Linear for T where T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

fn richardson<V: Linear>(estimates: Vec<V>) -> V {
    // estimates[k] uses step h / 2^k
    let mut table = estimates;
    let mut factor = 4.0;
    while table.len() > 1 {
        table = table
            .windows(2)
            .map(|w| (w[1].clone() * factor - w[0].clone()) * (1.0 / (factor - 1.0)))
            .collect();
        factor *= 4.0;
    }
    table.pop().expect("at least one estimate")
}

/// `d/dt f(t)` at `t = 0`.
pub fn derivative<V: Linear>(f: impl Fn(f64) -> V, h: f64, levels: usize) -> V {
    let est = (0..=levels)
        .map(|k| {
            let hk = h / f64::powi(2.0, k as i32);
            (f(hk) - f(-hk)) * (0.5 / hk)
        })
        .collect();
    richardson(est)
}

/// `d²/dt² f(t)` at `t = 0`.
pub fn second_derivative<V: Linear>(f: impl Fn(f64) -> V, h: f64, levels: usize) -> V {
    let centre = f(0.0);
    let est = (0..=levels)
        .map(|k| {
            let hk = h / f64::powi(2.0, k as i32);
            (f(hk) + f(-hk) - centre.clone() * 2.0) * (1.0 / (hk * hk))
        })
        .collect();
    richardson(est)
}

fn shifted(x: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(dir).map(|(a, d)| a + t * d).collect()
}

fn axis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Derivative of `f` at `x` along `dir`.
pub fn directional<V: Linear>(f: impl Fn(&[f64]) -> V, x: &[f64], dir: &[f64], h: f64, levels: usize) -> V {
    derivative(|t| f(&shifted(x, dir, t)), h, levels)
}

pub fn gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64, levels: usize) -> DVector<f64> {
    let n = x.len();
    DVector::from_iterator(n, (0..n).map(|i| directional(&f, x, &axis(n, i), h, levels)))
}

/// Jacobian of a vector field; column `j` holds `∂f/∂x^j`.
pub fn jacobian(f: impl Fn(&[f64]) -> DVector<f64>, x: &[f64], h: f64, levels: usize) -> DMatrix<f64> {
    let n = x.len();
    let cols: Vec<DVector<f64>> = (0..n).map(|j| directional(&f, x, &axis(n, j), h, levels)).collect();
    DMatrix::from_columns(&cols)
}

/// Hessian of a scalar function. Off-diagonal entries use the four-point mixed
/// stencil, evaluated once per unordered pair, so the result is symmetric.
pub fn hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64, levels: usize) -> DMatrix<f64> {
    let n = x.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let ei = axis(n, i);
        out[(i, i)] = second_derivative(|t| f(&shifted(x, &ei, t)), h, levels);
        for j in 0..i {
            let ej = axis(n, j);
            let est = (0..=levels)
                .map(|k| {
                    let hk = h / f64::powi(2.0, k as i32);
                    let at = |a: f64, b: f64| {
                        let p: Vec<f64> = (0..n).map(|m| x[m] + a * ei[m] + b * ej[m]).collect();
                        f(&p)
                    };
                    (at(hk, hk) - at(hk, -hk) - at(-hk, hk) + at(-hk, -hk)) / (4.0 * hk * hk)
                })
                .collect();
            let v = richardson(est);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
