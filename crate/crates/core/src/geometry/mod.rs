//! Pointwise Riemannian data: Christoffel symbols, the covariant derivative
//! of β and its symmetric/antisymmetric parts with their contractions.

pub mod fields;
pub mod frame;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;

pub use fields::{
    ConformalMetric, ConstantForm, ConstantMetric, DiagonalMetric, Euclidean, ExpConformal, Expr, FunkForm,
    FunkMetric, LinearForm, MetricField, OneFormField,
};
pub use frame::{adapted_frame, transform_special, AdaptedFrame, SpecialData};

/// Γ^k_ij, stored as `gamma[k][(i, j)]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub gamma: Vec<DMatrix<f64>>,
}

impl Christoffel {
    /// `Γ^i_jk u^j v^k`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.gamma.len(), self.gamma.iter().map(|g| u.dot(&(g * v))))
    }

    /// `Γ^k_km`, the gradient of `ln √det a`.
    pub fn trace(&self) -> DVector<f64> {
        let n = self.gamma.len();
        DVector::from_iterator(n, (0..n).map(|m| (0..n).map(|k| self.gamma[k][(k, m)]).sum()))
    }
}

fn check_dim(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension(format!("point has {} coordinates, field expects {n}", x.len())));
    }
    Ok(())
}

/// Inverse of a symmetric positive-definite matrix; `SingularMetric` otherwise.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularMetric);
    }
    let sym = (a + a.transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(Error::SingularMetric)?;
    Ok(chol.inverse())
}

pub fn christoffel(metric: &dyn MetricField, x: &[f64]) -> Result<Christoffel> {
    check_dim(metric.dim(), x)?;
    let a_inv = spd_inverse(&metric.metric(x))?;
    Ok(christoffel_from(&a_inv, &metric.metric_derivs(x)))
}

fn christoffel_from(a_inv: &DMatrix<f64>, da: &[DMatrix<f64>]) -> Christoffel {
    let n = a_inv.nrows();
    // lowered symbols Γ_{l,ij} = ½(∂_i a_jl + ∂_j a_il − ∂_l a_ij)
    let lowered: Vec<DMatrix<f64>> = (0..n)
        .map(|l| DMatrix::from_fn(n, n, |i, j| 0.5 * (da[i][(j, l)] + da[j][(i, l)] - da[l][(i, j)])))
        .collect();
    let gamma = (0..n)
        .map(|k| {
            let mut g = DMatrix::zeros(n, n);
            for (l, low) in lowered.iter().enumerate() {
                g += low * a_inv[(k, l)];
            }
            g
        })
        .collect();
    Christoffel { gamma }
}

/// Everything about `a` and `β` at a single point that does not depend on `y`.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub x: Vec<f64>,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    pub sqrt_det_a: f64,
    pub christoffel: Christoffel,
    pub b_lower: DVector<f64>,
    pub b_upper: DVector<f64>,
    pub b2: f64,
    /// `b_{i|j}`
    pub db_cov: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// `r_j = b^i r_ij`
    pub r_vec: DVector<f64>,
    /// `s_j = b^i s_ij`
    pub s_vec: DVector<f64>,
}

impl PointGeometry {
    pub fn new(metric: &dyn MetricField, form: &dyn OneFormField, x: &[f64]) -> Result<Self> {
        check_dim(metric.dim(), x)?;
        check_dim(form.dim(), x)?;
        let a = metric.metric(x);
        let a_inv = spd_inverse(&a)?;
        let det = a.determinant();
        let christoffel = christoffel_from(&a_inv, &metric.metric_derivs(x));
        let b_lower = form.form(x);
        if !b_lower.iter().all(|v| v.is_finite()) {
            return Err(Error::Degenerate("1-form not finite at the probe point".into()));
        }
        let b_upper = &a_inv * &b_lower;
        let b2 = b_lower.dot(&b_upper);
        let jac = form.form_jacobian(x);
        let n = x.len();
        let db_cov = DMatrix::from_fn(n, n, |i, j| {
            jac[(i, j)] - (0..n).map(|k| b_lower[k] * christoffel.gamma[k][(i, j)]).sum::<f64>()
        });
        let r = (&db_cov + db_cov.transpose()) * 0.5;
        let s = (&db_cov - db_cov.transpose()) * 0.5;
        let r_vec = r.transpose() * &b_upper;
        let s_vec = s.transpose() * &b_upper;
        Ok(Self {
            x: x.to_vec(),
            a,
            a_inv,
            sqrt_det_a: det.sqrt(),
            christoffel,
            b_lower,
            b_upper,
            b2,
            db_cov,
            r,
            s,
            r_vec,
            s_vec,
        })
    }

    pub fn b(&self) -> f64 {
        self.b2.sqrt()
    }

    pub fn alpha(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.a * y)).sqrt()
    }

    pub fn beta(&self, y: &DVector<f64>) -> f64 {
        self.b_lower.dot(y)
    }

    /// Spray coefficients of α, `Ḡ^i = ½ Γ^i_jk y^j y^k`.
    pub fn alpha_spray(&self, y: &DVector<f64>) -> DVector<f64> {
        self.christoffel.contract(y, y) * 0.5
    }

    /// `y^m ∂_m ln √det a`.
    pub fn dlog_volume(&self, y: &DVector<f64>) -> f64 {
        self.christoffel.trace().dot(y)
    }

    pub fn beta_data(&self, y: &DVector<f64>) -> Result<BetaData> {
        if y.len() != self.x.len() {
            return Err(Error::Dimension(format!("direction has {} components, expected {}", y.len(), self.x.len())));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(Error::Degenerate("zero direction".into()));
        }
        let r_i0 = &self.r * y;
        let s_lower_i0 = &self.s * y;
        let s_i0 = &self.a_inv * &s_lower_i0;
        Ok(BetaData {
            b2: self.b2,
            r: self.r.clone(),
            s: self.s.clone(),
            r_i: self.r_vec.clone(),
            s_i: self.s_vec.clone(),
            r_0: self.r_vec.dot(y),
            s_0: self.s_vec.dot(y),
            r_00: y.dot(&r_i0),
            s_i0,
            r_i0,
            s_lower_i0,
            b_lower: self.b_lower.clone(),
            b_upper: self.b_upper.clone(),
            y_lower: &self.a * y,
        })
    }
}

/// The β-derivation tensors and their contractions at `(x, y)`.
#[derive(Debug, Clone)]
pub struct BetaData {
    pub b2: f64,
    pub r: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub r_i: DVector<f64>,
    pub s_i: DVector<f64>,
    pub r_0: f64,
    pub s_0: f64,
    pub r_00: f64,
    /// `s^i_0`, index raised with `a`.
    pub s_i0: DVector<f64>,
    /// `r_i0 = r_ij y^j`
    pub r_i0: DVector<f64>,
    /// `s_i0 = s_ij y^j`, index down.
    pub s_lower_i0: DVector<f64>,
    pub b_lower: DVector<f64>,
    pub b_upper: DVector<f64>,
    /// `y_i = a_ij y^j`
    pub y_lower: DVector<f64>,
}

impl BetaData {
    /// Largest violation of the structural identities: symmetry of `r`,
    /// antisymmetry of `s`, `s_i b^i = 0`.
    pub fn identity_residual(&self) -> f64 {
        let sym = (&self.r - self.r.transpose()).abs().max();
        let anti = (&self.s + self.s.transpose()).abs().max();
        let sb = self.s_i.dot(&self.b_upper).abs();
        sym.max(anti).max(sb)
    }
}

pub fn beta_data(metric: &dyn MetricField, form: &dyn OneFormField, x: &[f64], y: &[f64]) -> Result<BetaData> {
    PointGeometry::new(metric, form, x)?.beta_data(&DVector::from_column_slice(y))
}

/// `|y(b) − (r_0 + s_0)/b|`, the derivative of `b = ‖β‖_α` along `y`
/// taken by finite differences with step `h`.
pub fn db_check(metric: &dyn MetricField, form: &dyn OneFormField, x: &[f64], y: &[f64], h: f64) -> Result<f64> {
    let pg = PointGeometry::new(metric, form, x)?;
    if pg.b2 <= 0.0 {
        return Err(Error::ZeroBeta);
    }
    let bd = pg.beta_data(&DVector::from_column_slice(y))?;
    let norm = |p: &[f64]| {
        let a_inv = spd_inverse(&metric.metric(p)).unwrap_or_else(|_| DMatrix::from_element(p.len(), p.len(), f64::NAN));
        let b = form.form(p);
        b.dot(&(a_inv * &b)).sqrt()
    };
    let numeric = fd::directional(norm, x, y, h, 1);
    Ok((numeric - (bd.r_0 + bd.s_0) / pg.b()).abs())
}
