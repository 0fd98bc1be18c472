//! Residual suites for the conditions on β and the ODEs on φ that the
//! classification runs through. Each function evaluates an identity on an
//! s-grid and reports the largest violation; none of them decides anything.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::log_slope_over_b;
use crate::error::{Error, Result};
use crate::geometry::PointGeometry;
use crate::scalar::{q_jet, randers_type_detect, PhiSpec, ProfileReport, ScalarPack};

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn packs(phi: &PhiSpec, b2: f64, n: usize, grid: &[f64]) -> Result<Vec<ScalarPack>> {
    grid.iter().map(|&s| ScalarPack::new(phi, s, b2, n)).collect()
}

/// Outcome of matching `r_ij`, `s_j` against the two parallel-like cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum BetaCase {
    /// `r_ij = ε(b² a_ij − b_i b_j)`, `s_j = 0`.
    Scaled { epsilon: f64, residual: f64 },
    /// `r_ij = 0`, `s_j = 0`.
    Parallel,
    Neither { r_norm: f64, s_norm: f64, fit_residual: f64 },
}

/// Classifies `(r, s_j)` given `a`, `b_i`, `b²`.
pub fn beta_case_from_tensors(
    r: &DMatrix<f64>,
    s_vec: &DVector<f64>,
    a: &DMatrix<f64>,
    b_lower: &DVector<f64>,
    b2: f64,
    zero_tol: f64,
    fit_tol: f64,
) -> Result<BetaCase> {
    if !(b2 > 0.0) {
        return Err(Error::ZeroBeta);
    }
    let r_norm = r.abs().max();
    let s_norm = s_vec.abs().max();
    if r_norm <= zero_tol && s_norm <= zero_tol {
        return Ok(BetaCase::Parallel);
    }
    let template = a * b2 - b_lower * b_lower.transpose();
    let epsilon = template.dot(r) / template.norm_squared();
    let fit_residual = (r - &template * epsilon).norm() / r.norm().max(f64::MIN_POSITIVE);
    if fit_residual <= fit_tol && s_norm <= zero_tol {
        return Ok(BetaCase::Scaled { epsilon, residual: fit_residual });
    }
    Ok(BetaCase::Neither { r_norm, s_norm, fit_residual })
}

pub fn beta_case_check(pg: &PointGeometry, zero_tol: f64, fit_tol: f64) -> Result<BetaCase> {
    beta_case_from_tensors(&pg.r, &pg.s_vec, &pg.a, &pg.b_lower, pg.b2, zero_tol, fit_tol)
}

/// `max |Φ + 2(n+1) k φ Δ²/(b² − s²)|` over the grid.
pub fn scaled_beta_ode_residual(phi: &PhiSpec, k: f64, b2: f64, n: usize, grid: &[f64]) -> Result<f64> {
    let nn = (n + 1) as f64;
    Ok(max_abs(packs(phi, b2, n, grid)?.iter().map(|p| {
        let d = p.delta.value();
        p.big_phi.value() + 2.0 * nn * k * p.phi.value() * d * d / (b2 - p.s * p.s)
    })))
}

#[derive(Debug, Clone, Serialize)]
pub struct Scan1 {
    pub k: f64,
    pub residual: f64,
    pub satisfied: bool,
}

/// Coarse scan of `k ∈ [−range, range]` followed by golden-section refinement.
/// The residual is a maximum of affine functions of `k`, hence convex.
pub fn scaled_beta_ode_scan(phi: &PhiSpec, b2: f64, n: usize, grid: &[f64], range: f64, tol: f64) -> Result<Scan1> {
    let f = |k: f64| scaled_beta_ode_residual(phi, k, b2, n, grid);
    let coarse = 200;
    let mut best = (0.0, f(0.0)?);
    for i in 0..=coarse {
        let k = -range + 2.0 * range * i as f64 / coarse as f64;
        let r = f(k)?;
        if r < best.1 {
            best = (k, r);
        }
    }
    let step = 2.0 * range / coarse as f64;
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if f(m1)? <= f(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let k = 0.5 * (lo + hi);
    let r = f(k)?;
    let (k, residual) = if r < best.1 { (k, r) } else { best };
    Ok(Scan1 { k, residual, satisfied: residual <= tol })
}

/// Parameters of the φ-equations. Unused entries are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OdeParams {
    pub k: f64,
    pub epsilon: f64,
    pub c: f64,
    pub nu: f64,
    pub mu: f64,
    pub lambda: f64,
    pub delta: f64,
}

/// The two expressions that are quadratic in `b²` at fixed `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum B2Expr {
    /// `Δ²{−2s(k − εb²)Ψ + (k − εs²)Φ/(2Δ²) + (n+1)cφ − sν}`, from the `r_ij` part.
    RPart,
    /// `Δ²{−2Ψ − QΦ/Δ² − λ(sΦ/Δ² − 2Ψb²) − δ}`, from the `s_j` part.
    SPart,
}

pub fn b2_expr(expr: B2Expr, p: &ScalarPack, prm: &OdeParams) -> f64 {
    let s = p.s;
    let b2 = p.b2;
    let d2 = p.delta.value().powi(2);
    let psi = p.psi.value();
    let big_phi = p.big_phi.value();
    match expr {
        B2Expr::RPart => {
            -2.0 * s * (prm.k - prm.epsilon * b2) * psi * d2 + (prm.k - prm.epsilon * s * s) * big_phi / 2.0
                + ((p.n + 1) as f64 * prm.c * p.phi.value() - s * prm.nu) * d2
        }
        B2Expr::SPart => {
            -2.0 * psi * d2 - p.q.value() * big_phi - prm.lambda * (s * big_phi - 2.0 * psi * b2 * d2)
                - prm.delta * d2
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub expr: B2Expr,
    pub s: f64,
    /// Coefficients of `b⁰`, `b²`, `b⁴`.
    pub coeffs: [f64; 3],
    pub nodes: [f64; 4],
    /// Relative error of the quadratic's prediction at the 4th node.
    pub fourth_node_error: f64,
    /// The `b⁴` coefficient in closed form: `Q'²{(ε − ν)s + (n+1)cφ}` or `Q'²(λ − δ)`.
    pub coeff4_closed: f64,
    /// `coeff0 + coeff2 s²`, and the closed form it should equal when
    /// `ν = ε, c = 0` (for `RPart`) or `δ = λ` (for `SPart`).
    pub low_part: f64,
    pub low_part_closed: f64,
}

/// Fits `expr(b²)` by a quadratic through three nodes in `(s², b0²)` and
/// checks the fourth.
pub fn b2_decompose(
    expr: B2Expr,
    phi: &PhiSpec,
    s: f64,
    n: usize,
    prm: &OdeParams,
    tol: f64,
) -> Result<Decomposition> {
    let top = phi.b0 * phi.b0;
    if s * s >= top {
        return Err(Error::OutOfDomain { s, b0: phi.b0 });
    }
    let span = top.min(4.0) - s * s;
    let nodes = [0.2, 0.4, 0.6, 0.8].map(|t| s * s + t * span);
    let mut vals = [0.0; 4];
    for (v, &b2) in vals.iter_mut().zip(&nodes) {
        *v = b2_expr(expr, &ScalarPack::new(phi, s, b2, n)?, prm);
    }
    let m = DMatrix::from_fn(3, 3, |i, j| nodes[i].powi(j as i32));
    let rhs = DVector::from_column_slice(&vals[..3]);
    let c = m.lu().solve(&rhs).ok_or(Error::Degenerate("Vandermonde system singular".into()))?;
    let coeffs = [c[0], c[1], c[2]];
    let predicted = coeffs[0] + coeffs[1] * nodes[3] + coeffs[2] * nodes[3] * nodes[3];
    let scale = max_abs(vals).max(f64::MIN_POSITIVE);
    let fourth_node_error = (predicted - vals[3]).abs() / scale;
    if fourth_node_error > tol {
        return Err(Error::NotPolynomial(fourth_node_error));
    }
    let q = q_jet(phi, s, 4)?;
    let (qv, q1) = (q.value(), q.derivative(1));
    let one_sq = 1.0 + s * qv;
    let q_minus = qv - s * q1;
    let nn = n as f64;
    let (coeff4_closed, low_part_closed) = match expr {
        B2Expr::RPart => (
            q1 * q1 * ((prm.epsilon - prm.nu) * s + (nn + 1.0) * prm.c * phi.value(s)),
            -0.5 * one_sq
                * ((nn - 1.0) * (prm.k - prm.epsilon * s * s) * q_minus + 2.0 * prm.k * qv + 2.0 * prm.epsilon * s),
        ),
        B2Expr::SPart => (
            q1 * q1 * (prm.lambda - prm.delta),
            one_sq * ((nn + 1.0) * qv * q_minus - q1 + prm.lambda * (nn * s * q_minus - 1.0)),
        ),
    };
    Ok(Decomposition {
        expr,
        s,
        coeffs,
        nodes,
        fourth_node_error,
        coeff4_closed,
        low_part: coeffs[0] + coeffs[1] * s * s,
        low_part_closed,
    })
}

/// `max |(n−1)(k − εs²)(Q − sQ') + 2kQ + 2εs|`.
pub fn q_ode_residual(phi: &PhiSpec, k: f64, epsilon: f64, n: usize, grid: &[f64]) -> Result<f64> {
    let nn = (n - 1) as f64;
    let mut worst = 0.0f64;
    for &s in grid {
        let q = q_jet(phi, s, 3)?;
        let r = nn * (k - epsilon * s * s) * (q.value() - s * q.derivative(1)) + 2.0 * k * q.value() + 2.0 * epsilon * s;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct QOdeShifted {
    pub residual: f64,
    /// `kQ'(0) + ε`, which must vanish for a solution.
    pub slope_condition: f64,
}

/// Same equation for `Q̃ = Q − sQ'(0)`, with the linear part carried by
/// `2(kQ'(0) + ε)s`.
pub fn q_ode_shifted_residual(phi: &PhiSpec, k: f64, epsilon: f64, n: usize, grid: &[f64]) -> Result<QOdeShifted> {
    let nn = (n - 1) as f64;
    let slope0 = q_jet(phi, 0.0, 3)?.derivative(1);
    let slope_condition = k * slope0 + epsilon;
    let mut worst = 0.0f64;
    for &s in grid {
        let q = q_jet(phi, s, 3)?;
        let qt = q.value() - s * slope0;
        let dqt = q.derivative(1) - slope0;
        let r = nn * (k - epsilon * s * s) * (qt - s * dqt) + 2.0 * k * qt + 2.0 * slope_condition * s;
        worst = worst.max(r.abs());
    }
    Ok(QOdeShifted { residual: worst, slope_condition })
}

#[derive(Debug, Clone, Serialize)]
pub struct Scan2 {
    pub k: f64,
    pub epsilon: f64,
    pub residual: f64,
    pub satisfied: bool,
}

/// The Q-equation is homogeneous in `(k, ε)`, so nontrivial solutions are searched on
/// the unit circle: 720 angles, then golden-section refinement around the best.
pub fn q_ode_scan(phi: &PhiSpec, n: usize, grid: &[f64], tol: f64) -> Result<Scan2> {
    let f = |t: f64| q_ode_residual(phi, t.cos(), t.sin(), n, grid);
    let coarse = 720;
    let step = std::f64::consts::TAU / coarse as f64;
    let mut best = (0.0, f(0.0)?);
    for i in 1..coarse {
        let t = i as f64 * step;
        let r = f(t)?;
        if r < best.1 {
            best = (t, r);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if f(m1)? <= f(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let r = f(t)?;
    let (t, residual) = if r < best.1 { (t, r) } else { best };
    Ok(Scan2 { k: t.cos(), epsilon: t.sin(), residual, satisfied: residual <= tol })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairResidual {
    pub first: f64,
    pub second: f64,
}

/// The weak-isotropy pair: `(k − εs²)Φ/(2Δ²) − [{ν + (k − εb²)μ}s − (n+1)cφ]`, and
/// and the Ξ equation `Φ/Δ²(Qb² + s) − b²(μ + λ)`.
pub fn weak_isotropy_residuals(phi: &PhiSpec, prm: &OdeParams, b2: f64, n: usize, grid: &[f64]) -> Result<PairResidual> {
    let ps = packs(phi, b2, n, grid)?;
    let nn = (n + 1) as f64;
    let first = max_abs(ps.iter().map(|p| {
        let s = p.s;
        (prm.k - prm.epsilon * s * s) * p.omega.value()
            - ((prm.nu + (prm.k - prm.epsilon * b2) * prm.mu) * s - nn * prm.c * p.phi.value())
    }));
    let second = max_abs(ps.iter().map(|p| p.xi.value() - b2 * (prm.mu + prm.lambda)));
    Ok(PairResidual { first, second })
}

/// Smallest achievable Ξ-equation residual over constant `μ + λ`: half the spread of Ξ.
pub fn xi_fit_min_residual(xi: &ProfileReport) -> f64 {
    0.5 * xi.variation
}

/// `ν` and `δ` as the volume factor determines them.
pub fn volume_matched_params(phi: &PhiSpec, b: f64, n: usize, k: f64, epsilon: f64, lambda: f64, eta_over_s: f64) -> Result<(f64, f64)> {
    let slope = log_slope_over_b(phi, b, n)?;
    let nu = -slope * (k - epsilon * b * b);
    let delta = -slope * (1.0 - lambda * b * b) - eta_over_s;
    Ok((nu, delta))
}

/// The same pair with `ν`, `δ` fixed by the volume factor: `−2s(k − εb²)Ψ + (k − εs²)Φ/(2Δ²) + (n+1)cφ − sν`, and
/// and `−2Ψ − QΦ/Δ² − λ(sΦ/Δ² − 2Ψb²) − δ`.
pub fn volume_matched_residuals(phi: &PhiSpec, prm: &OdeParams, b2: f64, n: usize, grid: &[f64]) -> Result<PairResidual> {
    let ps = packs(phi, b2, n, grid)?;
    let nn = (n + 1) as f64;
    let first = max_abs(ps.iter().map(|p| {
        let s = p.s;
        -2.0 * s * (prm.k - prm.epsilon * b2) * p.psi.value() + (prm.k - prm.epsilon * s * s) * p.omega.value()
            + nn * prm.c * p.phi.value()
            - s * prm.nu
    }));
    let second = max_abs(ps.iter().map(|p| {
        let d2 = p.delta.value().powi(2);
        let big = p.big_phi.value();
        -2.0 * p.psi.value() - p.q.value() * big / d2 - prm.lambda * (p.s * big / d2 - 2.0 * p.psi.value() * b2)
            - prm.delta
    }));
    Ok(PairResidual { first, second })
}

/// Residual of `s(sΦ/(2Δ²) − 2Ψb²) r₁₁ + (n+1)cb²φ + kΦ/(2Δ²)(b² − s²) − b s t₁`
/// with `t₁ = −(f'(b)/f(b)) r₁₁`.
pub fn frame_equation_residual(phi: &PhiSpec, r11: f64, k: f64, c: f64, b2: f64, n: usize, grid: &[f64]) -> Result<f64> {
    let b = b2.sqrt();
    let t1 = -log_slope_over_b(phi, b, n)? * b * r11;
    let nn = (n + 1) as f64;
    Ok(max_abs(packs(phi, b2, n, grid)?.iter().map(|p| {
        let s = p.s;
        let om = p.omega.value();
        s * (s * om - 2.0 * p.psi.value() * b2) * r11 + nn * c * b2 * p.phi.value() + k * om * (b2 - s * s) - b * s * t1
    })))
}

#[derive(Debug, Clone, Serialize)]
pub struct SignProbe {
    /// Residual with `r₁₁ = k − εb²`.
    pub plus: f64,
    /// Residual with `r₁₁ = −(k − εb²)`.
    pub minus: f64,
    /// `"plus"`, `"minus"`, `"both"` or `"neither"`.
    pub convention: &'static str,
}

/// Which sign of `r₁₁` makes the frame equation hold for a Randers metric
/// with `k = ε = 2c`, where the volume factor is known in closed form.
pub fn sign_convention_probe(n: usize, c: f64, b2: f64, grid_n: usize, tol: f64) -> Result<SignProbe> {
    let phi = PhiSpec::randers();
    let (k, eps) = (2.0 * c, 2.0 * c);
    let grid = crate::scalar::cone_grid(b2, grid_n);
    let r11 = k - eps * b2;
    let plus = frame_equation_residual(&phi, r11, k, c, b2, n, &grid)?;
    let minus = frame_equation_residual(&phi, -r11, k, c, b2, n, &grid)?;
    let convention = match (plus <= tol, minus <= tol) {
        (true, false) => "plus",
        (false, true) => "minus",
        (true, true) => "both",
        (false, false) => "neither",
    };
    Ok(SignProbe { plus, minus, convention })
}

/// `max |ε(b² − s²)Φ/(2Δ²) + (n+1)cφ|`.
pub fn phi_equation_residual(phi: &PhiSpec, epsilon: f64, c: f64, b2: f64, n: usize, grid: &[f64]) -> Result<f64> {
    let nn = (n + 1) as f64;
    Ok(max_abs(
        packs(phi, b2, n, grid)?
            .iter()
            .map(|p| epsilon * (b2 - p.s * p.s) * p.omega.value() + nn * c * p.phi.value()),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct UpsilonBranch {
    pub upsilon_zero: bool,
    /// `(sΦ/Δ² − 2Ψb²)/b²` on the grid; constant exactly when Υ vanishes.
    pub mu: ProfileReport,
    pub upsilon_max_abs: f64,
    pub advisory: Option<String>,
}

pub fn upsilon_branch(phi: &PhiSpec, b2: f64, n: usize, grid: &[f64], tol: f64) -> Result<UpsilonBranch> {
    let ps = packs(phi, b2, n, grid)?;
    let scale = if b2 > 0.0 { 1.0 / b2 } else { 1.0 };
    let mu = ProfileReport::from_values(grid.to_vec(), ps.iter().map(|p| p.branch_term.value() * scale).collect(), tol);
    let upsilon_max_abs = max_abs(ps.iter().map(|p| p.upsilon.value()));
    let upsilon_zero = mu.constant;
    let advisory = (upsilon_zero && randers_type_detect(phi).is_none()).then(|| {
        "the branch term is constant in s, which forces b to be constant: any fixture with db ≠ 0 is inconsistent with weak isotropy".to_string()
    });
    Ok(UpsilonBranch { upsilon_zero, mu, upsilon_max_abs, advisory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::Fixture;
    use crate::scalar::{cone_grid, uniform_grid, xi_profile};

    #[test]
    fn beta_cases() {
        let fx = Fixture::builtin("randers_parallel").unwrap();
        let pg = fx.geometry(&fx.points[0]).unwrap();
        assert_eq!(beta_case_check(&pg, 1e-10, 1e-8).unwrap(), BetaCase::Parallel);

        let radial = Fixture::new(
            "radial",
            std::sync::Arc::new(crate::geometry::Euclidean { n: 3 }),
            std::sync::Arc::new(crate::geometry::LinearForm::new(DMatrix::identity(3, 3) * 0.1)),
            PhiSpec::randers(),
            vec![vec![0.5, 1.0, -0.3]],
        )
        .unwrap();
        let pg = radial.geometry(&radial.points[0]).unwrap();
        assert!(matches!(beta_case_check(&pg, 1e-10, 1e-8).unwrap(), BetaCase::Neither { .. }));

        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let b = DVector::from_vec(vec![0.2, -0.1, 0.4]);
        let b2 = b.dot(&(a.clone().try_inverse().unwrap() * &b));
        let r = (&a * b2 - &b * b.transpose()) * 0.37;
        match beta_case_from_tensors(&r, &DVector::zeros(3), &a, &b, b2, 1e-10, 1e-8).unwrap() {
            BetaCase::Scaled { epsilon, .. } => assert!((epsilon - 0.37).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaled_beta_ode_examples() {
        let grid = cone_grid(0.25, 41);
        assert_eq!(scaled_beta_ode_residual(&PhiSpec::riemannian(), 0.0, 0.25, 2, &grid).unwrap(), 0.0);
        let r = scaled_beta_ode_residual(&PhiSpec::randers(), 0.0, 0.25, 2, &grid).unwrap();
        assert!((r - 3.0 * (1.0 + grid[grid.len() - 1])).abs() < 1e-12);
        let scan = scaled_beta_ode_scan(&PhiSpec::riemannian(), 0.25, 2, &grid, 2.0, 1e-8).unwrap();
        assert!(scan.satisfied && scan.k.abs() < 1e-8);
        assert!(!scaled_beta_ode_scan(&PhiSpec::quadratic(), 0.25, 2, &grid, 2.0, 1e-8).unwrap().satisfied);
    }

    #[test]
    fn decomposition_identities_on_builtins() {
        let prm_eq = OdeParams { k: 0.7, epsilon: 0.3, nu: 0.3, c: 0.0, ..Default::default() };
        let prm_big = OdeParams { lambda: 0.4, delta: 0.4, ..Default::default() };
        for phi in [PhiSpec::randers(), PhiSpec::power(1.0), PhiSpec::power(2.0), PhiSpec::quadratic()] {
            for s in [-0.2, 0.0, 0.15] {
                let d = b2_decompose(B2Expr::RPart, &phi, s, 3, &prm_eq, 1e-8).unwrap();
                assert!((d.coeffs[2] - d.coeff4_closed).abs() < 1e-8 * (1.0 + d.coeff4_closed.abs()));
                assert!((d.low_part - d.low_part_closed).abs() < 1e-8 * (1.0 + d.low_part_closed.abs()), "{d:?}");
                let d = b2_decompose(B2Expr::SPart, &phi, s, 3, &prm_big, 1e-8).unwrap();
                assert!((d.coeffs[2] - d.coeff4_closed).abs() < 1e-8);
                assert!((d.low_part - d.low_part_closed).abs() < 1e-8 * (1.0 + d.low_part_closed.abs()), "{d:?}");
            }
        }
        // φ'' = 0 for Randers, so the b⁴ coefficient vanishes for any parameters
        let d = b2_decompose(B2Expr::RPart, &PhiSpec::randers(), 0.1, 2, &OdeParams { c: 1.0, nu: 2.0, ..Default::default() }, 1e-8)
            .unwrap();
        assert!(d.coeffs[2].abs() < 1e-10);
        let d = b2_decompose(B2Expr::SPart, &PhiSpec::quadratic(), 0.0, 2, &prm_big, 1e-8).unwrap();
        assert!(d.coeffs[2].abs() < 1e-10);
    }

    #[test]
    fn q_ode_examples() {
        let grid = uniform_grid(-0.5, 0.5, 41);
        assert_eq!(q_ode_residual(&PhiSpec::quadratic(), 0.0, 0.0, 3, &grid).unwrap(), 0.0);
        // φ = √(1 + k₂s²) has Q = k₂s; ε = −k k₂ solves the equation
        let phi = PhiSpec::randers_type(1.0, 0.6, 0.0).unwrap();
        assert!(q_ode_residual(&phi, 1.3, -1.3 * 0.6, 3, &grid).unwrap() < 1e-8);
        let o = q_ode_shifted_residual(&phi, 1.3, -1.3 * 0.6, 3, &grid).unwrap();
        assert!(o.residual < 1e-8 && o.slope_condition.abs() < 1e-12);
        let r = q_ode_residual(&PhiSpec::randers(), 1.0, 0.0, 2, &grid).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        assert!(q_ode_scan(&phi, 3, &grid, 1e-8).unwrap().satisfied);
        assert!(!q_ode_scan(&PhiSpec::power(1.0), 3, &grid, 1e-8).unwrap().satisfied);
    }

    #[test]
    fn weak_isotropy_examples() {
        let grid = cone_grid(0.25, 41);
        let zero = OdeParams::default();
        let r = weak_isotropy_residuals(&PhiSpec::riemannian(), &zero, 0.25, 2, &grid).unwrap();
        assert!(r.first == 0.0 && r.second == 0.0);
        let r = weak_isotropy_residuals(&PhiSpec::randers(), &zero, 0.25, 2, &grid).unwrap();
        assert_eq!(r.first, 0.0);
        let xi = xi_profile(&PhiSpec::randers(), 0.25, 2, &grid).unwrap();
        assert!(xi_fit_min_residual(&xi) > 0.1);
    }

    #[test]
    fn sign_probe_prefers_plus() {
        let p = sign_convention_probe(2, 0.3, 0.25, 41, 1e-8).unwrap();
        assert_eq!(p.convention, "plus", "{p:?}");
        let p = sign_convention_probe(3, -0.2, 0.16, 41, 1e-8).unwrap();
        assert_eq!(p.convention, "plus", "{p:?}");
    }

    #[test]
    fn volume_matched_randers_consistency() {
        // same constructed metric as the sign probe, with ν taken from the volume factor
        let (n, c, b2): (usize, f64, f64) = (2, 0.3, 0.25);
        let (nu, _) = volume_matched_params(&PhiSpec::randers(), b2.sqrt(), n, 2.0 * c, 2.0 * c, 0.0, 0.0).unwrap();
        assert!((nu - 2.0 * 3.0 * c).abs() < 1e-8);
        let prm = OdeParams { k: 2.0 * c, epsilon: 2.0 * c, c, nu, ..Default::default() };
        let r = volume_matched_residuals(&PhiSpec::randers(), &prm, b2, n, &cone_grid(b2, 41)).unwrap();
        assert!(r.first < 1e-8, "{r:?}");
    }

    #[test]
    fn upsilon_examples() {
        let grid = cone_grid(0.25, 81);
        let r = upsilon_branch(&PhiSpec::randers(), 0.25, 2, &grid, 1e-8).unwrap();
        assert!(!r.upsilon_zero);
        let r = upsilon_branch(&PhiSpec::riemannian(), 0.25, 2, &grid, 1e-8).unwrap();
        assert!(r.upsilon_zero && r.mu.max_abs == 0.0 && r.advisory.is_none());
        assert!(!upsilon_branch(&PhiSpec::quadratic(), 0.25, 2, &grid, 1e-8).unwrap().upsilon_zero);
    }

    #[test]
    fn phi_equation_trivial() {
        let grid = cone_grid(0.25, 41);
        assert_eq!(phi_equation_residual(&PhiSpec::quadratic(), 0.0, 0.0, 0.25, 3, &grid).unwrap(), 0.0);
        assert!(phi_equation_residual(&PhiSpec::randers(), 0.5, 0.1, 0.25, 3, &grid).unwrap() > 0.0);
    }
}
