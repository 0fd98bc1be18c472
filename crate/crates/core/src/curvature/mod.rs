//! Sprays, fundamental and angular tensors, volume forms, S and E.
//!
//! [`PointCurvature`] fixes a fixture and a point `x` and evaluates each
//! quantity at directions `y`, either by the closed forms in [`closed`] or by
//! the finite-difference oracles in [`oracle`].

pub mod closed;
pub mod oracle;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use closed::{
    angular_metric, angular_metric_closed, distortion, e_coefficients, e_curvature_assemble, e_curvature_closed,
    finsler_spray_closed, fundamental_tensor_closed, s_curvature_closed, CoefficientForm,
};
pub use oracle::OracleSteps;

use crate::error::{Error, Result};
use crate::fd;
use crate::fixture::Fixture;
use crate::geometry::{BetaData, PointGeometry};
use crate::scalar::{bh_factor, bh_ratio, PhiSpec, ScalarPack};

/// Below this `b`, `f'(b)/(b f(b))` is replaced by its limit `(ln f)''(0)`.
const SMALL_B: f64 = 1e-6;

/// `f'(b)/(b f(b))` for the Busemann–Hausdorff factor.
pub fn log_slope_over_b(phi: &PhiSpec, b: f64, n: usize) -> Result<f64> {
    if b > SMALL_B {
        return Ok(bh_factor(phi, b, n)?.dlogf_db / b);
    }
    // f is even in b, so f'(b)/b → f''(0)/f(0) = (ln f)''(0).
    let h = 1e-2 * phi.b0.min(1.0);
    let lf = |t: f64| bh_ratio(phi, t.abs(), n).map(f64::ln).unwrap_or(f64::NAN);
    let v = fd::second_derivative(lf, h, 2);
    if !v.is_finite() {
        return Err(Error::QuadratureFailure { b });
    }
    Ok(v)
}

/// `σ_BH = √det a · f(b)`.
pub fn sigma_bh(phi: &PhiSpec, pg: &PointGeometry) -> Result<f64> {
    Ok(pg.sqrt_det_a * bh_ratio(phi, pg.b(), pg.x.len())?)
}

/// Everything evaluated at one direction.
#[derive(Debug, Clone)]
pub struct Direction {
    pub y: DVector<f64>,
    pub alpha: f64,
    pub s: f64,
    pub pack: ScalarPack,
    pub beta: BetaData,
}

impl Direction {
    pub fn finsler(&self) -> f64 {
        self.alpha * self.pack.phi.value()
    }
}

/// A fixture frozen at one point.
#[derive(Debug, Clone)]
pub struct PointCurvature<'a> {
    pub fixture: &'a Fixture,
    pub geometry: PointGeometry,
    /// `f(b)`
    pub bh_ratio: f64,
    /// `f'(b)/(b f(b))`
    pub log_slope_over_b: f64,
    pub steps: OracleSteps,
}

impl<'a> PointCurvature<'a> {
    pub fn new(fixture: &'a Fixture, x: &[f64]) -> Result<Self> {
        fixture.check_point(x)?;
        let geometry = fixture.geometry(x)?;
        let b = geometry.b();
        Ok(Self {
            fixture,
            bh_ratio: bh_ratio(&fixture.phi, b, fixture.n)?,
            log_slope_over_b: log_slope_over_b(&fixture.phi, b, fixture.n)?,
            geometry,
            steps: OracleSteps::default(),
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.geometry.x
    }

    pub fn direction(&self, y: &DVector<f64>) -> Result<Direction> {
        let beta = self.geometry.beta_data(y)?;
        let alpha = self.geometry.alpha(y);
        if !(alpha > 0.0) {
            return Err(Error::Degenerate("α(y) = 0".into()));
        }
        // clamp rounding so that s² ≤ b² holds when y is parallel to b
        let b = self.geometry.b();
        let s = (self.geometry.beta(y) / alpha).clamp(-b, b);
        let pack = ScalarPack::new(&self.fixture.phi, s, self.geometry.b2, self.fixture.n)?;
        Ok(Direction { y: y.clone(), alpha, s, pack, beta })
    }

    pub fn finsler(&self, y: &DVector<f64>) -> f64 {
        self.fixture.finsler(self.x(), y.as_slice())
    }

    pub fn sigma_bh(&self) -> f64 {
        self.geometry.sqrt_det_a * self.bh_ratio
    }

    /// The fixture's volume density, including any shift.
    pub fn sigma(&self) -> f64 {
        let shift = self
            .fixture
            .volume_shift
            .as_ref()
            .map_or(0.0, |w| w.iter().zip(self.x()).map(|(w, x)| w * x).sum::<f64>());
        self.sigma_bh() * shift.exp()
    }

    pub fn alpha_spray(&self, y: &DVector<f64>) -> DVector<f64> {
        self.geometry.alpha_spray(y)
    }

    pub fn spray_closed(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.direction(y)?;
        Ok(finsler_spray_closed(&d.pack, &d.beta, &self.alpha_spray(y), d.alpha, y))
    }

    pub fn s_closed(&self, y: &DVector<f64>) -> Result<f64> {
        let d = self.direction(y)?;
        Ok(s_curvature_closed(&d.pack, &d.beta, self.log_slope_over_b, d.alpha) - self.fixture.shift_along(y))
    }

    pub fn e_closed(&self, y: &DVector<f64>, form: CoefficientForm) -> Result<(DMatrix<f64>, [f64; 11])> {
        let d = self.direction(y)?;
        Ok(e_curvature_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a, form))
    }

    /// E assembled with `y_i = g_ij y^j` instead of `a_ij y^j`.
    pub fn e_closed_g_lowered(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.direction(y)?;
        let c = e_coefficients(&d.pack, d.alpha, d.beta.r_0, d.beta.s_0, d.beta.r_00, CoefficientForm::Corrected);
        let g = fundamental_tensor_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a);
        Ok(e_curvature_assemble(&c, &d.beta, &self.geometry.a, &(g * y)))
    }

    pub fn g_closed(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.direction(y)?;
        Ok(fundamental_tensor_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a))
    }

    pub fn h_closed(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.direction(y)?;
        Ok(angular_metric_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a))
    }

    /// Right side of the divergence identity:
    /// `y^m ∂_m ln σ_α + 2Ψ(r_0 + s_0) − α⁻¹Φ/(2Δ²)(r_00 − 2αQs_0)`.
    pub fn divergence_identity(&self, y: &DVector<f64>) -> Result<f64> {
        let d = self.direction(y)?;
        let q = d.pack.q.value();
        Ok(self.geometry.dlog_volume(y) + 2.0 * d.pack.psi.value() * (d.beta.r_0 + d.beta.s_0)
            - d.pack.omega.value() / d.alpha * (d.beta.r_00 - 2.0 * d.alpha * q * d.beta.s_0))
    }

    /// `∂G^m/∂y^m` of the closed-form spray.
    pub fn spray_closed_divergence(&self, y: &DVector<f64>) -> Result<f64> {
        let spray = |v: &[f64]| self.spray_closed(&DVector::from_column_slice(v));
        oracle::spray_divergence(&spray, y.as_slice(), &self.steps)
    }

    pub fn divergence_residual(&self, y: &DVector<f64>) -> Result<f64> {
        Ok((self.spray_closed_divergence(y)? - self.divergence_identity(y)?).abs())
    }

    fn f(&self) -> impl Fn(&[f64], &[f64]) -> f64 + '_ {
        |x, y| self.fixture.finsler(x, y)
    }

    pub fn spray_oracle(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let f = self.f();
        oracle::finsler_spray_oracle(&f, self.x(), y.as_slice(), &self.steps, self.fixture.tolerances.condition_max)
    }

    pub fn g_oracle(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let f = self.f();
        oracle::fundamental_tensor_oracle(&f, self.x(), y.as_slice(), &self.steps, self.fixture.tolerances.condition_max)
    }

    pub fn s_oracle(&self, y: &DVector<f64>) -> Result<f64> {
        let f = self.f();
        let log_sigma = |p: &[f64]| self.fixture.log_volume(p);
        oracle::s_curvature_oracle(
            &f,
            &log_sigma,
            self.x(),
            y.as_slice(),
            &self.steps,
            self.fixture.tolerances.condition_max,
        )
    }

    /// ½ of the y-Hessian of the closed-form S.
    pub fn e_oracle(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let s = |v: &[f64]| self.s_closed(&DVector::from_column_slice(v));
        oracle::e_curvature_oracle(&s, y.as_slice(), &self.steps)
    }

    pub fn report(&self, y: &DVector<f64>, with_oracles: bool) -> Result<CurvatureReport> {
        let d = self.direction(y)?;
        let f = d.finsler();
        let spray = finsler_spray_closed(&d.pack, &d.beta, &self.alpha_spray(y), d.alpha, y);
        let s_closed = s_curvature_closed(&d.pack, &d.beta, self.log_slope_over_b, d.alpha) - self.fixture.shift_along(y);
        let (e_closed, c) = e_curvature_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a, CoefficientForm::Corrected);
        let g = fundamental_tensor_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a);
        let h = angular_metric_closed(&d.pack, &d.beta, d.alpha, &self.geometry.a);
        let sigma = self.sigma();
        let (spray_oracle, s_oracle, e_oracle, g_oracle) = if with_oracles {
            (Some(self.spray_oracle(y)?), Some(self.s_oracle(y)?), Some(self.e_oracle(y)?), Some(self.g_oracle(y)?))
        } else {
            (None, None, None, None)
        };
        let e_norm = e_closed.norm();
        let h_norm = h.norm();
        Ok(CurvatureReport {
            x: self.x().to_vec(),
            y: y.as_slice().to_vec(),
            f,
            alpha: d.alpha,
            s: d.s,
            b2: self.geometry.b2,
            spray_closed: spray.as_slice().to_vec(),
            spray_oracle: spray_oracle.map(|v| v.as_slice().to_vec()),
            s_closed,
            s_oracle,
            e_closed: rows(&e_closed),
            e_oracle: e_oracle.as_ref().map(rows),
            g: rows(&g),
            g_oracle: g_oracle.as_ref().map(rows),
            h: rows(&h),
            tau: distortion(&g, sigma),
            sigma_bh: self.sigma_bh(),
            coefficients: c.to_vec(),
            divergence_residual: self.divergence_residual(y)?,
            e_euler_residual: relative(( &e_closed * y).norm(), e_norm * y.norm()),
            h_euler_residual: relative((&h * y).norm(), h_norm * y.norm()),
        })
    }
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Closed-form and oracle curvature at one `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(rename = "F")]
    pub f: f64,
    pub alpha: f64,
    pub s: f64,
    pub b2: f64,
    pub spray_closed: Vec<f64>,
    pub spray_oracle: Option<Vec<f64>>,
    #[serde(rename = "S_closed")]
    pub s_closed: f64,
    #[serde(rename = "S_oracle")]
    pub s_oracle: Option<f64>,
    #[serde(rename = "E_closed")]
    pub e_closed: Vec<Vec<f64>>,
    #[serde(rename = "E_oracle")]
    pub e_oracle: Option<Vec<Vec<f64>>>,
    pub g: Vec<Vec<f64>>,
    pub g_oracle: Option<Vec<Vec<f64>>>,
    pub h: Vec<Vec<f64>>,
    pub tau: f64,
    pub sigma_bh: f64,
    /// C1 … C11
    pub coefficients: Vec<f64>,
    pub divergence_residual: f64,
    pub e_euler_residual: f64,
    pub h_euler_residual: f64,
}
