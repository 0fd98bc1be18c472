//! Truncated univariate Taylor series ("jets").
//!
//! A [`Jet`] of order `K` at basepoint `s0` stores the normalized Taylor
//! coefficients `c_k = f^(k)(s0) / k!` for `k = 0..=K`. Arithmetic and the
//! elementary functions propagate those coefficients exactly (up to rounding),
//! which gives every s-derivative the curvature formulas need without finite
//! differences.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 8;

/// Default truncation order. `Ω''` needs `φ^(5)`; one spare order.
pub const DEFAULT_ORDER: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet order {0} outside 1..={MAX_ORDER}")]
    BadOrder(usize),
    #[error("non-finite basepoint or coefficient")]
    NonFinite,
    #[error("jets differ in order ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("jets differ in basepoint ({0} vs {1})")]
    BasepointMismatch(f64, f64),
    #[error("division by a jet with leading coefficient {0:e}")]
    DivisionByZeroJet(f64),
    #[error("{func} undefined at leading coefficient {value}")]
    DomainError { func: &'static str, value: f64 },
}

/// Binary jet operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions with Taylor recurrences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElemFn {
    Pow(f64),
    Sqrt,
    Exp,
    Ln,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    order: usize,
    basepoint: f64,
    coeffs: [f64; MAX_ORDER + 1],
}

impl Jet {
    /// The identity function `s ↦ s` expanded at `s0`.
    pub fn var(s0: f64, order: usize) -> Result<Self, JetError> {
        let mut jet = Self::constant(s0, s0, order)?;
        jet.coeffs[1] = 1.0;
        Ok(jet)
    }

    pub fn constant(value: f64, s0: f64, order: usize) -> Result<Self, JetError> {
        if order == 0 || order > MAX_ORDER {
            return Err(JetError::BadOrder(order));
        }
        if !value.is_finite() || !s0.is_finite() {
            return Err(JetError::NonFinite);
        }
        let mut coeffs = [0.0; MAX_ORDER + 1];
        coeffs[0] = value;
        Ok(Self { order, basepoint: s0, coeffs })
    }

    /// Builds a jet from normalized Taylor coefficients; `coeffs.len() - 1` is the order.
    pub fn from_coeffs(s0: f64, coeffs: &[f64]) -> Result<Self, JetError> {
        let order = coeffs.len().saturating_sub(1);
        let mut jet = Self::constant(0.0, s0, order)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(JetError::NonFinite);
        }
        jet.coeffs[..coeffs.len()].copy_from_slice(coeffs);
        Ok(jet)
    }

    /// A constant with this jet's order and basepoint.
    pub fn constant_like(&self, value: f64) -> Self {
        let mut coeffs = [0.0; MAX_ORDER + 1];
        coeffs[0] = value;
        Self { order: self.order, basepoint: self.basepoint, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basepoint(&self) -> f64 {
        self.basepoint
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..=self.order]
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `f^(k)(s0) = k! · c_k`.
    ///
    /// Panics if `k` exceeds the order.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= self.order, "derivative {k} beyond jet order {}", self.order);
        self.coeffs[k] * factorial(k)
    }

    /// Jet of `f'`, one order shorter (an order-1 jet yields a bare value).
    pub fn diff(&self) -> Self {
        let order = self.order.saturating_sub(1);
        let mut coeffs = [0.0; MAX_ORDER + 1];
        for k in 0..self.order {
            coeffs[k] = (k + 1) as f64 * self.coeffs[k + 1];
        }
        Self { order, basepoint: self.basepoint, coeffs }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut coeffs = [0.0; MAX_ORDER + 1];
        coeffs[..=order].copy_from_slice(&self.coeffs[..=order]);
        Self { order, basepoint: self.basepoint, coeffs }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    pub fn add_scalar(&self, value: f64) -> Self {
        let mut out = *self;
        out.coeffs[0] += value;
        out
    }

    /// Checked binary operation: both operands must share order and basepoint.
    pub fn arith(&self, other: &Self, op: JetOp) -> Result<Self, JetError> {
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        if self.basepoint != other.basepoint {
            return Err(JetError::BasepointMismatch(self.basepoint, other.basepoint));
        }
        match op {
            JetOp::Add => Ok(*self + *other),
            JetOp::Sub => Ok(*self - *other),
            JetOp::Mul => Ok(*self * *other),
            JetOp::Div => self.checked_div(other),
        }
    }

    /// Quotient truncated at the shorter order. Rejects divisors whose leading
    /// coefficient is below `1e-12 · (1 + |numerator leading coefficient|)`.
    pub fn checked_div(&self, other: &Self) -> Result<Self, JetError> {
        let (a, b) = common(self, other);
        let b0 = b.coeffs[0];
        if b0.abs() < 1e-12 * (1.0 + a.coeffs[0].abs()) {
            return Err(JetError::DivisionByZeroJet(b0));
        }
        let mut q = [0.0; MAX_ORDER + 1];
        for k in 0..=a.order {
            let mut acc = a.coeffs[k];
            for i in 1..=k {
                acc -= b.coeffs[i] * q[k - i];
            }
            q[k] = acc / b0;
        }
        Ok(Self { order: a.order, basepoint: a.basepoint, coeffs: q })
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        self.constant_like(1.0).checked_div(self)
    }

    pub fn elem(&self, func: ElemFn) -> Result<Self, JetError> {
        match func {
            ElemFn::Pow(r) => self.powf(r),
            ElemFn::Sqrt => self.sqrt(),
            ElemFn::Exp => Ok(self.exp()),
            ElemFn::Ln => self.ln(),
        }
    }

    pub fn powf(&self, r: f64) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if r.fract() == 0.0 && r >= 0.0 && r <= 64.0 {
            return Ok(self.powi(r as u32));
        }
        if a0 <= 0.0 {
            return Err(JetError::DomainError { func: "pow", value: a0 });
        }
        let mut p = [0.0; MAX_ORDER + 1];
        p[0] = a0.powf(r);
        for k in 1..=self.order {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (r * j as f64 - (k - j) as f64) * self.coeffs[j] * p[k - j];
            }
            p[k] = acc / (k as f64 * a0);
        }
        Ok(Self { order: self.order, basepoint: self.basepoint, coeffs: p })
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut out = Self { order: self.order, basepoint: self.basepoint, coeffs: [0.0; MAX_ORDER + 1] };
        out.coeffs[0] = 1.0;
        let mut base = *self;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out * base;
            }
            base = base * base;
            e >>= 1;
        }
        out
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(JetError::DomainError { func: "sqrt", value: a0 });
        }
        let mut r = [0.0; MAX_ORDER + 1];
        r[0] = a0.sqrt();
        for k in 1..=self.order {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= r[j] * r[k - j];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Ok(Self { order: self.order, basepoint: self.basepoint, coeffs: r })
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; MAX_ORDER + 1];
        e[0] = self.coeffs[0].exp();
        for k in 1..=self.order {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Self { order: self.order, basepoint: self.basepoint, coeffs: e }
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(JetError::DomainError { func: "ln", value: a0 });
        }
        let mut l = [0.0; MAX_ORDER + 1];
        l[0] = a0.ln();
        for k in 1..=self.order {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= j as f64 * l[j] * self.coeffs[k - j] / k as f64;
            }
            l[k] = acc / a0;
        }
        Ok(Self { order: self.order, basepoint: self.basepoint, coeffs: l })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_finite())
    }
}

fn common(a: &Jet, b: &Jet) -> (Jet, Jet) {
    debug_assert_eq!(a.basepoint, b.basepoint, "jets expanded at different points");
    let order = a.order.min(b.order);
    (a.truncate(order), b.truncate(order))
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

// Operator forms truncate to the shorter operand; use `Jet::arith` for the
// strict contract.
impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let (mut a, b) = common(&self, &rhs);
        for k in 0..=a.order {
            a.coeffs[k] += b.coeffs[k];
        }
        a
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let (mut a, b) = common(&self, &rhs);
        for k in 0..=a.order {
            a.coeffs[k] -= b.coeffs[k];
        }
        a
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (a, b) = common(&self, &rhs);
        let mut c = [0.0; MAX_ORDER + 1];
        for k in 0..=a.order {
            c[k] = (0..=k).map(|i| a.coeffs[i] * b.coeffs[k - i]).sum();
        }
        Jet { order: a.order, basepoint: a.basepoint, coeffs: c }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Result of a finite-difference derivative estimate.
#[derive(Debug, Clone, Copy)]
pub struct FdEstimate {
    pub value: f64,
    /// Difference between the two Richardson levels.
    pub error: f64,
}

/// Central finite-difference estimate of `f^(k)(s0)`, `1 ≤ k ≤ 4`, with one
/// Richardson extrapolation level (`h` and `h/2`).
pub fn fd_check<F: Fn(f64) -> f64>(f: F, s0: f64, k: usize, h: f64) -> FdEstimate {
    assert!((1..=4).contains(&k), "fd_check supports derivatives 1..=4");
    let stencil = |h: f64| -> f64 {
        let v = |i: f64| f(s0 + i * h);
        match k {
            1 => (v(1.0) - v(-1.0)) / (2.0 * h),
            2 => (v(1.0) - 2.0 * v(0.0) + v(-1.0)) / (h * h),
            3 => (v(2.0) - 2.0 * v(1.0) + 2.0 * v(-1.0) - v(-2.0)) / (2.0 * h * h * h),
            _ => (v(2.0) - 4.0 * v(1.0) + 6.0 * v(0.0) - 4.0 * v(-1.0) + v(-2.0)) / (h * h * h * h),
        }
    };
    let coarse = stencil(h);
    let fine = stencil(0.5 * h);
    FdEstimate { value: (4.0 * fine - coarse) / 3.0, error: (fine - coarse).abs() }
}
