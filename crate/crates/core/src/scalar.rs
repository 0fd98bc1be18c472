//! φ-profiles and the scalar functions of `(s, b²)` built from them.
//!
//! For `F = α φ(β/α)` every curvature formula is driven by
//!
//! ```text
//! Q = φ'/(φ − sφ')              Δ = 1 + sQ + (b² − s²)Q'
//! Φ = −(Q − sQ'){nΔ + 1 + sQ} − (b² − s²)(1 + sQ)Q''
//! Ψ = Q'/(2Δ)   Θ = (Q − sQ')/(2Δ)   Ω = Φ/(2Δ²)
//! Ξ = (b²Q + s)Φ/Δ²             Υ = d/ds[sΦ/Δ² − 2Ψb²]   (b² fixed)
//! ```
//!
//! [`ScalarPack`] holds each of these as a [`Jet`] in `s`, so derivatives
//! such as `Ω''` are exact.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet, DEFAULT_ORDER};
use crate::quadrature::GaussLegendre;

/// Relative tolerance for declaring a sampled profile constant.
pub const CONSTANCY_TOL: f64 = 1e-8;

/// Default number of points in constancy grids.
pub const PROFILE_GRID: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PhiFamily {
    /// φ ≡ 1
    Riemannian,
    /// φ = 1 + s
    Randers,
    /// φ = (1 + s)^(m+1)
    Power { m: f64 },
    /// φ = 1 + s²
    Quadratic,
    /// φ = k1 √(1 + k2 s²) + k3 s
    RandersType { k1: f64, k2: f64, k3: f64 },
    /// φ = Σ c_k s^k
    Taylor { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiSpec {
    #[serde(flatten)]
    pub family: PhiFamily,
    /// Validity radius: the profile is used for |s| < b0.
    pub b0: f64,
}

impl PhiSpec {
    /// Validates parameters and fills the family's default radius when `b0` is `None`.
    pub fn new(family: PhiFamily, b0: Option<f64>) -> Result<Self> {
        let b0 = b0.unwrap_or_else(|| default_radius(&family));
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::InvalidPhi(format!("validity radius b0 = {b0} must be positive")));
        }
        match &family {
            PhiFamily::Power { m } if !m.is_finite() => {
                return Err(Error::InvalidPhi("power exponent must be finite".into()))
            }
            PhiFamily::RandersType { k1, k2, k3 } => {
                if ![k1, k2, k3].iter().all(|k| k.is_finite()) {
                    return Err(Error::InvalidPhi("randers_type parameters must be finite".into()));
                }
                if *k1 <= 0.0 {
                    return Err(Error::InvalidPhi("randers_type requires k1 > 0".into()));
                }
            }
            PhiFamily::Taylor { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPhi("taylor coefficients must be finite and non-empty".into()));
                }
            }
            _ => {}
        }
        let spec = Self { family, b0 };
        // Kropina-like profiles (singular or non-positive at s = 0) are out of scope.
        let at_zero = spec.value(0.0);
        if !(at_zero.is_finite() && at_zero > 0.0) {
            return Err(Error::InvalidPhi(format!("phi(0) = {at_zero} must be positive")));
        }
        Ok(spec)
    }

    pub fn riemannian() -> Self {
        Self { family: PhiFamily::Riemannian, b0: 1.0 }
    }

    pub fn randers() -> Self {
        Self { family: PhiFamily::Randers, b0: 1.0 }
    }

    pub fn power(m: f64) -> Self {
        Self::new(PhiFamily::Power { m }, None).expect("finite exponent")
    }

    pub fn quadratic() -> Self {
        Self { family: PhiFamily::Quadratic, b0: 1.0 }
    }

    pub fn randers_type(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::new(PhiFamily::RandersType { k1, k2, k3 }, None)
    }

    pub fn taylor(coeffs: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(PhiFamily::Taylor { coeffs }, Some(radius))
    }

    pub fn label(&self) -> String {
        match &self.family {
            PhiFamily::Riemannian => "riemannian".into(),
            PhiFamily::Randers => "randers".into(),
            PhiFamily::Power { m } => format!("power(m={m})"),
            PhiFamily::Quadratic => "quadratic".into(),
            PhiFamily::RandersType { k1, k2, k3 } => format!("randers_type({k1},{k2},{k3})"),
            PhiFamily::Taylor { coeffs } => format!("taylor({coeffs:?})"),
        }
    }

    /// Plain evaluation, no domain check.
    pub fn value(&self, s: f64) -> f64 {
        match &self.family {
            PhiFamily::Riemannian => 1.0,
            PhiFamily::Randers => 1.0 + s,
            PhiFamily::Power { m } => (1.0 + s).powf(m + 1.0),
            PhiFamily::Quadratic => 1.0 + s * s,
            PhiFamily::RandersType { k1, k2, k3 } => k1 * (1.0 + k2 * s * s).sqrt() + k3 * s,
            PhiFamily::Taylor { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c),
        }
    }

    /// Taylor jet of φ at `s`.
    pub fn jet(&self, s: f64, order: usize) -> Result<Jet> {
        if !(s.abs() < self.b0) {
            return Err(Error::OutOfDomain { s, b0: self.b0 });
        }
        let var = Jet::var(s, order)?;
        let jet = match &self.family {
            PhiFamily::Riemannian => var.constant_like(1.0),
            PhiFamily::Randers => var + 1.0,
            PhiFamily::Power { m } => (var + 1.0).powf(m + 1.0)?,
            PhiFamily::Quadratic => var * var + 1.0,
            PhiFamily::RandersType { k1, k2, k3 } => {
                (var * var * *k2 + 1.0).sqrt()? * *k1 + var * *k3
            }
            PhiFamily::Taylor { coeffs } => coeffs
                .iter()
                .rev()
                .fold(var.constant_like(0.0), |acc, c| acc * var + *c),
        };
        Ok(jet)
    }

    /// Regularity functional `φ − sφ' + (b² − s²)φ''`.
    pub fn regularity(&self, s: f64, b: f64) -> Result<f64> {
        let j = self.jet(s, 2)?;
        Ok(j.value() - s * j.derivative(1) + (b * b - s * s) * j.derivative(2))
    }
}

fn default_radius(family: &PhiFamily) -> f64 {
    match family {
        PhiFamily::Power { m } if m.abs() > 1.0 => 1.0 / m.abs(),
        PhiFamily::RandersType { k2, .. } if *k2 < 0.0 => (1.0 / (-k2).sqrt()).min(1.0),
        _ => 1.0,
    }
}

/// Uniformly spaced grid with `count` points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub bmax: f64,
    pub min_phi: f64,
    pub min_regularity: f64,
    /// Where the regularity minimum was attained, `(s, b)`.
    pub worst_point: (f64, f64),
    pub passed: bool,
}

/// Checks `φ > 0` and `φ − sφ' + (b² − s²)φ'' > 0` on a grid of `|s| ≤ b ≤ bmax`.
pub fn phi_validate(phi: &PhiSpec, bmax: f64, grid_n: usize) -> Result<ValidationReport> {
    if !(bmax > 0.0 && bmax <= phi.b0) {
        return Err(Error::validation("bmax", format!("need 0 < bmax <= b0 = {}", phi.b0)));
    }
    let grid_n = grid_n.max(2);
    // The open end is sampled just inside the radius.
    let reach = if bmax < phi.b0 { bmax } else { bmax * (1.0 - 1e-9) };
    let mut min_phi = f64::INFINITY;
    let mut min_reg = f64::INFINITY;
    let mut worst = (0.0, 0.0);
    for b in uniform_grid(0.0, reach, grid_n) {
        for s in uniform_grid(-b, b, grid_n) {
            let value = phi.value(s);
            min_phi = min_phi.min(value);
            let reg = phi.regularity(s, b)?;
            if reg < min_reg {
                min_reg = reg;
                worst = (s, b);
            }
        }
    }
    Ok(ValidationReport {
        bmax,
        min_phi,
        min_regularity: min_reg,
        worst_point: worst,
        passed: min_phi > 0.0 && min_reg > 0.0,
    })
}

/// The derived scalars at one `(s, b², n)`, each as a jet in `s`.
#[derive(Debug, Clone)]
pub struct ScalarPack {
    pub s: f64,
    pub b2: f64,
    pub n: usize,
    pub phi: Jet,
    pub q: Jet,
    pub delta: Jet,
    /// Φ
    pub big_phi: Jet,
    pub psi: Jet,
    pub omega: Jet,
    pub theta: Jet,
    pub xi: Jet,
    /// `sΦ/Δ² − 2Ψb²`, whose s-derivative is Υ.
    pub branch_term: Jet,
    pub upsilon: Jet,
}

impl ScalarPack {
    pub fn new(phi: &PhiSpec, s: f64, b2: f64, n: usize) -> Result<Self> {
        Self::with_order(phi, s, b2, n, DEFAULT_ORDER)
    }

    pub fn with_order(phi: &PhiSpec, s: f64, b2: f64, n: usize, order: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("manifold dimension {n} < 2")));
        }
        if !(b2.is_finite() && s.is_finite()) {
            return Err(Error::Degenerate("non-finite s or b²".into()));
        }
        // s² ≤ b² up to rounding in β/α.
        if s * s > b2 * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::OutOfCone { s2: s * s, b2 });
        }
        // b = b0 is allowed: the metric degenerates only on the cone edge, which the Δ check rejects
        if b2 > phi.b0 * phi.b0 {
            return Err(Error::OutOfDomain { s: b2.sqrt(), b0: phi.b0 });
        }
        if order < 4 {
            return Err(Error::Degenerate(format!("jet order {order} too shallow for the pack")));
        }
        let var = Jet::var(s, order)?;
        let phi_jet = phi.jet(s, order)?;
        let dphi = phi_jet.diff();
        let denom = phi_jet - var * dphi;
        if denom.value() <= 0.0 {
            return Err(Error::Degenerate(format!("phi - s phi' = {} <= 0 at s = {s}", denom.value())));
        }
        let q = dphi.checked_div(&denom)?;
        let dq = q.diff();
        let d2q = dq.diff();
        let cone = -(var * var) + b2;
        let one_sq = var * q + 1.0;
        let delta = one_sq + cone * dq;
        if delta.value() <= 0.0 {
            return Err(Error::Degenerate(format!("Delta = {} <= 0 at s = {s}, b² = {b2}", delta.value())));
        }
        let q_minus = q - var * dq;
        let big_phi = -(q_minus * (delta * n as f64 + one_sq)) - cone * one_sq * d2q;
        let two_delta = delta * 2.0;
        let psi = dq.checked_div(&two_delta)?;
        let theta = q_minus.checked_div(&two_delta)?;
        let delta2 = delta * delta;
        let omega = big_phi.checked_div(&(delta2 * 2.0))?;
        let phi_over = big_phi.checked_div(&delta2)?;
        let xi = (q * b2 + var) * phi_over;
        let branch_term = var * phi_over - psi * (2.0 * b2);
        let upsilon = branch_term.diff();
        let pack = Self {
            s,
            b2,
            n,
            phi: phi_jet,
            q,
            delta,
            big_phi,
            psi,
            omega,
            theta,
            xi,
            branch_term,
            upsilon,
        };
        if ![&pack.q, &pack.delta, &pack.big_phi, &pack.psi, &pack.omega, &pack.xi, &pack.upsilon]
            .iter()
            .all(|j| j.is_finite())
        {
            return Err(Error::Degenerate(format!("non-finite scalar at s = {s}, b² = {b2}")));
        }
        Ok(pack)
    }

    /// `Φ/(2Δ²)` as plain value, the common factor in S.
    pub fn omega_value(&self) -> f64 {
        self.omega.value()
    }
}

/// `Q = φ'/(φ − sφ')` as a jet of order `order − 1`; it depends on φ alone.
pub fn q_jet(phi: &PhiSpec, s: f64, order: usize) -> Result<Jet> {
    let var = Jet::var(s, order)?;
    let phi_jet = phi.jet(s, order)?;
    let dphi = phi_jet.diff();
    let denom = phi_jet - var * dphi;
    if denom.value() <= 0.0 {
        return Err(Error::Degenerate(format!("phi - s phi' = {} <= 0 at s = {s}", denom.value())));
    }
    Ok(dphi.checked_div(&denom)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub variation: f64,
    pub max_abs: f64,
    pub tolerance: f64,
    pub constant: bool,
}

impl ProfileReport {
    pub fn from_values(s: Vec<f64>, values: Vec<f64>, tol: f64) -> Self {
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let variation = if values.is_empty() { 0.0 } else { max - min };
        let tolerance = tol * (1.0 + max_abs);
        Self { s, values, variation, max_abs, tolerance, constant: variation <= tolerance }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len().max(1) as f64
    }
}

/// Samples `extract(pack)` over an s-grid at fixed `b²`.
pub fn profile<F>(phi: &PhiSpec, b2: f64, n: usize, grid: &[f64], tol: f64, extract: F) -> Result<ProfileReport>
where
    F: Fn(&ScalarPack) -> f64,
{
    let values = grid
        .iter()
        .map(|&s| ScalarPack::new(phi, s, b2, n).map(|p| extract(&p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileReport::from_values(grid.to_vec(), values, tol))
}

/// Ξ over an s-grid, with a constancy verdict.
pub fn xi_profile(phi: &PhiSpec, b2: f64, n: usize, grid: &[f64]) -> Result<ProfileReport> {
    profile(phi, b2, n, grid, CONSTANCY_TOL, |p| p.xi.value())
}

/// Symmetric grid of `count` points filling 95% of the cone `|s| < b`.
pub fn cone_grid(b2: f64, count: usize) -> Vec<f64> {
    let b = b2.max(0.0).sqrt() * 0.95;
    uniform_grid(-b, b, count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandersTypeParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

/// Recognizes `φ = k1 √(1 + k2 s²) + k3 s` from the 2-jet at 0, confirmed on a grid.
pub fn randers_type_detect(phi: &PhiSpec) -> Option<RandersTypeParams> {
    let jet = phi.jet(0.0, 3).ok()?;
    let k1 = jet.value();
    let k3 = jet.derivative(1);
    let k2 = jet.derivative(2) / k1;
    if !(k1 > 0.0 && k2.is_finite()) {
        return None;
    }
    let reach = 0.9 * phi.b0.min(4.0);
    for s in uniform_grid(-reach, reach, PROFILE_GRID) {
        let under = 1.0 + k2 * s * s;
        if under <= 0.0 {
            return None;
        }
        let value = phi.value(s);
        let fit = k1 * under.sqrt() + k3 * s;
        if (value - fit).abs() > 1e-9 * (1.0 + value.abs()) {
            return None;
        }
    }
    Some(RandersTypeParams { k1, k2, k3 })
}

/// Busemann–Hausdorff factor `f(b) = σ_BH/σ_α` and its logarithmic derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BhFactor {
    pub t: f64,
    pub dlogf_db: f64,
}

/// `f(b) = ∫₀^π sin^{n−2}t dt / ∫₀^π sin^{n−2}t φ(b cos t)^{−n} dt`.
pub fn bh_ratio(phi: &PhiSpec, b: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Dimension(format!("manifold dimension {n} < 2")));
    }
    let rule = GaussLegendre::standard();
    let k = (n - 2) as i32;
    let nn = n as i32;
    let mut bad = false;
    let num = rule.integrate(0.0, std::f64::consts::PI, |t| t.sin().powi(k));
    let den = rule.integrate(0.0, std::f64::consts::PI, |t| {
        let v = phi.value(b * t.cos());
        if !(v > 0.0) {
            bad = true;
        }
        t.sin().powi(k) * v.powi(-nn)
    });
    if bad || !den.is_finite() {
        return Err(Error::QuadratureFailure { b });
    }
    Ok(num / den)
}

/// `f(b)` and `f'(b)/f(b)`; the derivative by Richardson-extrapolated central differences.
pub fn bh_factor(phi: &PhiSpec, b: f64, n: usize) -> Result<BhFactor> {
    if !(b >= 0.0 && b < phi.b0) {
        return Err(Error::OutOfDomain { s: b, b0: phi.b0 });
    }
    let t = bh_ratio(phi, b, n)?;
    let h = 1e-4 * b.max(1.0);
    if b + h >= phi.b0 {
        return Err(Error::OutOfDomain { s: b + h, b0: phi.b0 });
    }
    // f is even in b, so stencils crossing zero stay valid.
    let lf = |x: f64| bh_ratio(phi, x.abs(), n).map(f64::ln);
    let d = |h: f64| -> Result<f64> { Ok((lf(b + h)? - lf(b - h)?) / (2.0 * h)) };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok(BhFactor { t, dlogf_db: (4.0 * fine - coarse) / 3.0 })
}
