//! The frame adapted to β: orthonormal for `a`, with `b^i/b` as first vector.
//! In it, `y = (y¹, y^A)` and `ᾱ = |y^A|`, which is how the residual suites
//! split curvature identities into their `s`-dependent parts.

use nalgebra::{DMatrix, DVector};

use super::{BetaData, PointGeometry};
use crate::error::{Error, Result};

/// Columns of `e` are the frame vectors, so `eᵀ a e = I` and `eᵀ b = (b, 0, …, 0)`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub e: DMatrix<f64>,
    pub b: f64,
    /// `max |eᵀ a e − I|`
    pub orthonormality_residual: f64,
    /// `max |eᵀ b − (b, 0, …)|`
    pub alignment_residual: f64,
}

impl AdaptedFrame {
    /// Coordinates of a vector in the frame, `e⁻¹ v = eᵀ a v`.
    pub fn components(&self, a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.e.transpose() * (a * v)
    }

    /// A covariant 2-tensor in the frame.
    pub fn tensor(&self, t: &DMatrix<f64>) -> DMatrix<f64> {
        self.e.transpose() * t * &self.e
    }

    pub fn covector(&self, w: &DVector<f64>) -> DVector<f64> {
        self.e.transpose() * w
    }
}

fn a_dot(a: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(&(a * v))
}

pub fn adapted_frame(pg: &PointGeometry) -> Result<AdaptedFrame> {
    let n = pg.x.len();
    let b = pg.b();
    if !(b > 0.0) {
        return Err(Error::ZeroBeta);
    }
    let a = &pg.a;
    let mut basis: Vec<DVector<f64>> = vec![&pg.b_upper / b];
    for axis in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        let scale = a_dot(a, &v, &v).sqrt();
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for u in &basis {
                let c = a_dot(a, u, &v);
                v -= u * c;
            }
        }
        let norm = a_dot(a, &v, &v).sqrt();
        if norm <= 1e-8 * scale {
            continue;
        }
        v /= norm;
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-14) {
            if *first < 0.0 {
                v = -v;
            }
        }
        basis.push(v);
    }
    if basis.len() != n {
        return Err(Error::SingularMetric);
    }
    let e = DMatrix::from_columns(&basis);
    let ortho = (e.transpose() * a * &e - DMatrix::identity(n, n)).abs().max();
    let mut target = DVector::zeros(n);
    target[0] = b;
    let align = (e.transpose() * &pg.b_lower - target).abs().max();
    Ok(AdaptedFrame { e, b, orthonormality_residual: ortho, alignment_residual: align })
}

/// β-data in the adapted frame at a direction `y`.
#[derive(Debug, Clone)]
pub struct SpecialData {
    pub s: f64,
    pub b: f64,
    pub alpha_bar: f64,
    pub r11: f64,
    pub r1a: DVector<f64>,
    pub s1a: DVector<f64>,
    pub rab: DMatrix<f64>,
    pub r10_bar: f64,
    pub s10_bar: f64,
    pub r00_bar: f64,
    pub r0_bar: f64,
    pub s0_bar: f64,
    /// Largest of `|s₁|`, `|r₁ − b r₁₁|`, `|r_A − b r₁A|`, `|s_A − b s₁A|`.
    pub identity_residual: f64,
    /// Largest mismatch between `r_0`, `s_0`, `r_00` and their reconstruction
    /// from the barred parts.
    pub reconstruction_residual: f64,
}

pub fn transform_special(pg: &PointGeometry, bd: &BetaData, frame: &AdaptedFrame, y: &DVector<f64>) -> Result<SpecialData> {
    let n = y.len();
    let b = frame.b;
    let alpha = pg.alpha(y);
    let s = pg.beta(y) / alpha;
    let b2 = b * b;
    let yt = frame.components(&pg.a, y);
    let alpha_bar = yt.rows(1, n - 1).norm();
    if s * s >= b2 || alpha_bar <= 1e-12 * alpha {
        return Err(Error::OutOfCone { s2: s * s, b2 });
    }
    let rt = frame.tensor(&bd.r);
    let st = frame.tensor(&bd.s);
    let r11 = rt[(0, 0)];
    let r1a = DVector::from_iterator(n - 1, (1..n).map(|k| rt[(0, k)]));
    let s1a = DVector::from_iterator(n - 1, (1..n).map(|k| st[(0, k)]));
    let rab = rt.view((1, 1), (n - 1, n - 1)).into_owned();
    let ya = yt.rows(1, n - 1).into_owned();
    let r10_bar = r1a.dot(&ya);
    let s10_bar = s1a.dot(&ya);
    let r00_bar = ya.dot(&(&rab * &ya));

    let r_frame = frame.covector(&bd.r_i);
    let s_frame = frame.covector(&bd.s_i);
    let mut identity = s_frame[0].abs().max((r_frame[0] - b * r11).abs());
    for k in 0..n - 1 {
        identity = identity.max((r_frame[k + 1] - b * r1a[k]).abs()).max((s_frame[k + 1] - b * s1a[k]).abs());
    }

    let root = (b2 - s * s).sqrt();
    let r0 = s * b * r11 * alpha_bar / root + b * r10_bar;
    let s0 = b * s10_bar;
    let r00 = s * s * alpha_bar * alpha_bar / (b2 - s * s) * r11 + 2.0 * s * alpha_bar / root * r10_bar + r00_bar;
    let recon = (r0 - bd.r_0).abs().max((s0 - bd.s_0).abs()).max((r00 - bd.r_00).abs());

    Ok(SpecialData {
        s,
        b,
        alpha_bar,
        r11,
        r1a,
        s1a,
        rab,
        r10_bar,
        s10_bar,
        r00_bar,
        r0_bar: b * r10_bar,
        s0_bar: s0,
        identity_residual: identity,
        reconstruction_residual: recon,
    })
}
