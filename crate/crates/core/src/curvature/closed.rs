//! Closed-form spray, S-curvature, E-curvature and fundamental tensor, all in
//! terms of the scalar pack at `s = β/α` and the β-data at `(x, y)`.

use nalgebra::{DMatrix, DVector};

use crate::geometry::BetaData;
use crate::scalar::ScalarPack;

/// `G^i = Ḡ^i + αQ s^i_0 + (r_00 − 2αQs_0)(Θ y^i/α + Ψ b^i)`.
pub fn finsler_spray_closed(
    pack: &ScalarPack,
    bd: &BetaData,
    gbar: &DVector<f64>,
    alpha: f64,
    y: &DVector<f64>,
) -> DVector<f64> {
    let q = pack.q.value();
    let common = bd.r_00 - 2.0 * alpha * q * bd.s_0;
    gbar + &bd.s_i0 * (alpha * q) + y * (common * pack.theta.value() / alpha) + &bd.b_upper * (common * pack.psi.value())
}

/// `S = {2Ψ − f'(b)/(b f(b))}(r_0 + s_0) − α⁻¹ Φ/(2Δ²) (r_00 − 2αQs_0)`.
///
/// `log_slope_over_b` is `f'(b)/(b f(b))`.
pub fn s_curvature_closed(pack: &ScalarPack, bd: &BetaData, log_slope_over_b: f64, alpha: f64) -> f64 {
    let q = pack.q.value();
    (2.0 * pack.psi.value() - log_slope_over_b) * (bd.r_0 + bd.s_0)
        - pack.omega.value() / alpha * (bd.r_00 - 2.0 * alpha * q * bd.s_0)
}

/// Which version of the E-curvature coefficients to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientForm {
    /// Equal to ½ of the y-Hessian of the S closed form.
    Corrected,
    /// The coefficients as usually printed: the Ω and Φ terms of C1–C4 carry
    /// `r_0` where `r_00` belongs, and C2 opens with Ψ'' instead of Ψ'.
    /// Kept so tests can show it disagrees with the oracle.
    AsPrinted,
}

/// `C1 … C11` at `(s, α)` for the given contractions.
pub fn e_coefficients(pack: &ScalarPack, alpha: f64, r0: f64, s0: f64, r00: f64, form: CoefficientForm) -> [f64; 11] {
    let s = pack.s;
    let a = alpha;
    let p = pack.big_phi.value();
    let d2 = pack.delta.value().powi(2);
    let (q, q1, q2) = (pack.q.value(), pack.q.derivative(1), pack.q.derivative(2));
    let (o1, o2) = (pack.omega.derivative(1), pack.omega.derivative(2));
    let (p1, p2) = (pack.psi.derivative(1), pack.psi.derivative(2));
    let (rr, lead) = match form {
        CoefficientForm::Corrected => (r00, p1),
        CoefficientForm::AsPrinted => (r0, p2),
    };
    let (a2, a3) = (a * a, a * a * a);

    let c1 = (p * a * q2 * s0 + 2.0 * a * d2 * p2 * r0 - d2 * o2 * rr
        + 2.0 * d2 * a * o2 * q * s0
        + 4.0 * d2 * a * o1 * q1 * s0
        + 2.0 * a * d2 * p2 * s0)
        / (2.0 * a3 * d2);
    let c2 = -(2.0 * a * d2 * lead * s0 - 2.0 * o1 * d2 * rr + 2.0 * o1 * d2 * a * q * s0 - d2 * o2 * s * rr
        + 2.0 * d2 * a * o2 * s * q * s0
        + 4.0 * d2 * a * o1 * q1 * s0 * s
        + 2.0 * a * d2 * p1 * r0
        + 2.0 * a * d2 * p2 * s * r0
        + 2.0 * a * d2 * p2 * s * s0
        + p * a * q1 * s0
        + p * a * q2 * s0 * s)
        / (2.0 * a2 * a2 * d2);
    let c3 = (4.0 * d2 * s * s * o2 * a * q * s0 - 2.0 * d2 * s * s * o2 * rr
        + 12.0 * a * d2 * p1 * s * r0
        + 12.0 * a * d2 * p1 * s * s0
        + 4.0 * a * d2 * p2 * s * s * r0
        + 4.0 * a * d2 * p2 * s * s * s0
        + 8.0 * d2 * s * s * o1 * a * q1 * s0
        + 2.0 * p * a * q2 * s0 * s * s
        - 10.0 * o1 * d2 * s * rr
        + 12.0 * o1 * d2 * s * a * q * s0
        + 6.0 * p * a * q1 * s0 * s
        - 3.0 * p * rr)
        / (4.0 * a2 * a3 * d2);
    let c4 = -(4.0 * a * d2 * p1 * s * s0 - p * rr - 2.0 * o1 * d2 * s * rr + 4.0 * o1 * d2 * s * a * q * s0
        + 4.0 * a * d2 * p1 * s * r0
        + 2.0 * p * a * q1 * s0 * s)
        / (4.0 * a3 * d2);
    let c5 = -o1 / a2;
    let c6 = (2.0 * d2 * s * o1 + p) / (2.0 * a3 * d2);
    let c7 = -p / (2.0 * a * d2);
    let c8 = (2.0 * o1 * d2 * q + 2.0 * d2 * p1 + p * q1) / (2.0 * a * d2);
    let c9 = -s * c8 / a;
    let c10 = p1 / a;
    let c11 = -s * c10 / a;
    [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11]
}

fn sym(u: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    u * v.transpose() + v * u.transpose()
}

/// Assembles `E_ij` from the eleven blocks. `y_lower` is `y` with its index
/// lowered; the a-lowering `bd.y_lower` is the one that matches the oracle.
pub fn e_curvature_assemble(c: &[f64; 11], bd: &BetaData, a: &DMatrix<f64>, y_lower: &DVector<f64>) -> DMatrix<f64> {
    let b = &bd.b_lower;
    let y = y_lower;
    b * b.transpose() * c[0]
        + sym(b, y) * c[1]
        + y * y.transpose() * c[2]
        + a * c[3]
        + sym(&bd.r_i0, b) * c[4]
        + sym(&bd.r_i0, y) * c[5]
        + &bd.r * c[6]
        + sym(&bd.s_i, b) * c[7]
        + sym(&bd.s_i, y) * c[8]
        + sym(&bd.r_i, b) * c[9]
        + sym(&bd.r_i, y) * c[10]
}

pub fn e_curvature_closed(
    pack: &ScalarPack,
    bd: &BetaData,
    alpha: f64,
    a: &DMatrix<f64>,
    form: CoefficientForm,
) -> (DMatrix<f64>, [f64; 11]) {
    let c = e_coefficients(pack, alpha, bd.r_0, bd.s_0, bd.r_00, form);
    (e_curvature_assemble(&c, bd, a, &bd.y_lower), c)
}

/// `F_{y^i} = (φ − sφ') y_i/α + φ' b_i`.
pub fn finsler_gradient(pack: &ScalarPack, bd: &BetaData, alpha: f64) -> DVector<f64> {
    let (phi, dphi) = (pack.phi.value(), pack.phi.derivative(1));
    &bd.y_lower * ((phi - pack.s * dphi) / alpha) + &bd.b_lower * dphi
}

/// `h_ij = φ{(φ − sφ')(a_ij − y_i y_j/α²) + φ''(b_i − s y_i/α)(b_j − s y_j/α)}`.
pub fn angular_metric_closed(pack: &ScalarPack, bd: &BetaData, alpha: f64, a: &DMatrix<f64>) -> DMatrix<f64> {
    let s = pack.s;
    let (phi, dphi, d2phi) = (pack.phi.value(), pack.phi.derivative(1), pack.phi.derivative(2));
    let unit = &bd.y_lower / alpha;
    let tilt = &bd.b_lower - &unit * s;
    (a - &unit * unit.transpose()) * (phi * (phi - s * dphi)) + &tilt * tilt.transpose() * (phi * d2phi)
}

/// `g = h + F_y F_yᵀ`.
pub fn fundamental_tensor_closed(pack: &ScalarPack, bd: &BetaData, alpha: f64, a: &DMatrix<f64>) -> DMatrix<f64> {
    let fy = finsler_gradient(pack, bd, alpha);
    angular_metric_closed(pack, bd, alpha, a) + &fy * fy.transpose()
}

/// `h = g − (g y)(g y)ᵀ / (yᵀ g y)`, which annihilates `y` exactly.
pub fn angular_metric(g: &DMatrix<f64>, y: &DVector<f64>) -> DMatrix<f64> {
    let gy = g * y;
    g - &gy * gy.transpose() / y.dot(&gy)
}

/// `τ = ln(√det g / σ)`.
pub fn distortion(g: &DMatrix<f64>, sigma: f64) -> f64 {
    (g.determinant().sqrt() / sigma).ln()
}
