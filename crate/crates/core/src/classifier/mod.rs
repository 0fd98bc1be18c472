//! Isotropy verdicts and the branch logic around them.

pub mod fits;
pub mod residuals;
pub mod sampling;

use serde::Serialize;

use crate::curvature::PointCurvature;
use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::scalar::{cone_grid, randers_type_detect, xi_profile, PhiFamily, PhiSpec, ProfileReport, RandersTypeParams};
use crate::tolerances::{TolProfile, Tolerances};

pub use fits::{test_isotropic_e, test_isotropic_s, test_weak_isotropic_s, FitKind, IsotropyFit, SampleSet};
pub use residuals::{BetaCase, UpsilonBranch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    InconclusiveConstantXi,
    Violation,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceCheck {
    pub verdict: Verdict,
    pub xi: ProfileReport,
    pub isotropic_s: Option<IsotropyFit>,
    pub isotropic_e: Option<IsotropyFit>,
    pub c_gap: Option<f64>,
}

/// Samples `fixture.directions` unit-α directions at `x` and collects curvature for `profile`.
pub fn sample_set(pc: &PointCurvature, profile: TolProfile, seed: u64) -> Result<SampleSet> {
    let dirs = sampling::unit_alpha_directions(&pc.geometry, pc.fixture.directions, seed)?;
    SampleSet::collect(pc, &dirs, profile)
}

/// S-isotropy and E-isotropy must agree whenever Ξ is not constant.
pub fn s_e_equivalence(fixture: &Fixture, set: &SampleSet) -> Result<EquivalenceCheck> {
    let pg = fixture.geometry(&set.x)?;
    let tol = &fixture.tolerances;
    let grid = cone_grid(pg.b2, fixture.grid);
    let xi = xi_profile(&fixture.phi, pg.b2, fixture.n, &grid)?;
    if xi.constant {
        return Ok(EquivalenceCheck {
            verdict: Verdict::InconclusiveConstantXi,
            xi,
            isotropic_s: None,
            isotropic_e: None,
            c_gap: None,
        });
    }
    let fs = test_isotropic_s(set, tol.fit_s(set.profile))?;
    let fe = test_isotropic_e(set, tol.fit_e(set.profile))?;
    let c_gap = (fs.c - fe.c).abs();
    let verdict = match (fs.verdict, fe.verdict) {
        (true, true) if c_gap <= tol.c_match => Verdict::Equivalent,
        (false, false) => Verdict::Equivalent,
        _ => Verdict::Violation,
    };
    Ok(EquivalenceCheck { verdict, xi, isotropic_s: Some(fs), isotropic_e: Some(fe), c_gap: Some(c_gap) })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub fixture: String,
    pub x: Vec<f64>,
    pub profile: &'static str,
    pub b2: f64,
    /// `b = 0` or `φ ≡ 1`: F is the Riemannian metric α.
    pub riemannian: bool,
    pub xi_constant: bool,
    pub xi_variation: f64,
    pub upsilon_zero: bool,
    pub upsilon: UpsilonBranch,
    pub randers_type: Option<RandersTypeParams>,
    /// Absent when β vanishes at `x`.
    pub beta_case: Option<BetaCase>,
    pub isotropic_s: IsotropyFit,
    pub weak_isotropic_s: Option<IsotropyFit>,
    pub isotropic_e: IsotropyFit,
    pub equivalence_verdict: Verdict,
    pub advisories: Vec<String>,
}

pub fn classify(fixture: &Fixture, x: &[f64], profile: TolProfile, seed: u64) -> Result<ClassificationReport> {
    let pc = PointCurvature::new(fixture, x)?;
    let set = sample_set(&pc, profile, seed)?;
    let tol = &fixture.tolerances;
    let pg = &pc.geometry;
    let grid = cone_grid(pg.b2, fixture.grid);
    let upsilon = residuals::upsilon_branch(&fixture.phi, pg.b2, fixture.n, &grid, tol.constancy)?;
    let check = s_e_equivalence(fixture, &set)?;
    let isotropic_s = match check.isotropic_s.clone() {
        Some(f) => f,
        None => test_isotropic_s(&set, tol.fit_s(profile))?,
    };
    let isotropic_e = match check.isotropic_e.clone() {
        Some(f) => f,
        None => test_isotropic_e(&set, tol.fit_e(profile))?,
    };
    let mut advisories = Vec::new();
    let weak_isotropic_s = match test_weak_isotropic_s(&set, tol.fit_s(profile)) {
        Ok(f) => Some(f),
        Err(Error::RankDeficient) => {
            advisories.push("weak isotropy fit skipped: design matrix is rank deficient".to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let beta_case = if pg.b2 > 0.0 {
        Some(residuals::beta_case_check(pg, tol.beta_zero, tol.beta_fit)?)
    } else {
        None
    };
    if let Some(msg) = &upsilon.advisory {
        if pg.db_cov.abs().max() > tol.beta_zero {
            advisories.push(msg.clone());
        }
    }
    Ok(ClassificationReport {
        fixture: fixture.name.clone(),
        x: x.to_vec(),
        profile: profile.name(),
        b2: pg.b2,
        riemannian: pg.b2 == 0.0 || fixture.phi.family == PhiFamily::Riemannian,
        xi_constant: check.xi.constant,
        xi_variation: check.xi.variation,
        upsilon_zero: upsilon.upsilon_zero,
        upsilon,
        randers_type: randers_type_detect(&fixture.phi),
        beta_case,
        isotropic_s,
        weak_isotropic_s,
        isotropic_e,
        equivalence_verdict: check.verdict,
        advisories,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledBranchReport {
    /// Whether the stated hypotheses (weakly isotropic, Υ ≠ 0, not
    /// Randers-type) hold; the residuals are evaluated regardless.
    pub weak_isotropic: bool,
    pub upsilon_nonzero: bool,
    pub randers_type: bool,
    pub beta_case: BetaCase,
    pub epsilon: f64,
    pub c: f64,
    /// `ε(b² − s²)Φ/(2Δ²) + (n+1)cφ` over the cone grid.
    pub phi_equation: ProfileReport,
    pub phi_equation_residual: f64,
}

/// Checks the β condition and the φ equation for given `(r, s_j)` data and
/// isotropy factor `c`. Fails only when Ξ is constant.
pub fn scaled_branch_from_parts(
    phi: &PhiSpec,
    b2: f64,
    n: usize,
    grid_n: usize,
    beta_case: BetaCase,
    c: f64,
    weak_isotropic: bool,
    tol: &Tolerances,
) -> Result<ScaledBranchReport> {
    let grid = cone_grid(b2, grid_n);
    let xi = xi_profile(phi, b2, n, &grid)?;
    if xi.constant {
        return Err(Error::PreconditionNotMet("Ξ is constant".into()));
    }
    let upsilon = residuals::upsilon_branch(phi, b2, n, &grid, tol.constancy)?;
    let epsilon = match beta_case {
        BetaCase::Scaled { epsilon, .. } => epsilon,
        _ => 0.0,
    };
    let nn = (n + 1) as f64;
    let values = grid
        .iter()
        .map(|&s| {
            let p = crate::scalar::ScalarPack::new(phi, s, b2, n)?;
            Ok(epsilon * (b2 - s * s) * p.omega.value() + nn * c * p.phi.value())
        })
        .collect::<Result<Vec<_>>>()?;
    let phi_equation = ProfileReport::from_values(grid, values, tol.ode);
    Ok(ScaledBranchReport {
        weak_isotropic,
        upsilon_nonzero: !upsilon.upsilon_zero,
        randers_type: randers_type_detect(phi).is_some(),
        beta_case,
        epsilon,
        c,
        phi_equation_residual: phi_equation.max_abs,
        phi_equation,
    })
}

pub fn scaled_branch_check(fixture: &Fixture, x: &[f64], profile: TolProfile, seed: u64) -> Result<ScaledBranchReport> {
    let pc = PointCurvature::new(fixture, x)?;
    let tol = &fixture.tolerances;
    let pg = &pc.geometry;
    if pg.b2 == 0.0 {
        return Err(Error::PreconditionNotMet("β vanishes, Ξ is constant".into()));
    }
    let set = sample_set(&pc, profile, seed)?;
    let fit = test_weak_isotropic_s(&set, tol.fit_s(profile))?;
    let case = residuals::beta_case_check(pg, tol.beta_zero, tol.beta_fit)?;
    scaled_branch_from_parts(&fixture.phi, pg.b2, fixture.n, fixture.grid, case, fit.c, fit.verdict, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(name: &str, profile: TolProfile) -> EquivalenceCheck {
        let fx = Fixture::builtin(name).unwrap();
        let pc = PointCurvature::new(&fx, &fx.points[0]).unwrap();
        s_e_equivalence(&fx, &sample_set(&pc, profile, 0).unwrap()).unwrap()
    }

    #[test]
    fn equivalence_examples() {
        for name in ["randers_parallel", "funk", "nonzero_sij"] {
            let v = verdict(name, TolProfile::Strict);
            assert_eq!(v.verdict, Verdict::Equivalent, "{name}: {v:?}");
        }
        let funk = verdict("funk", TolProfile::Fd);
        assert_eq!(funk.verdict, Verdict::Equivalent);
        assert!((funk.isotropic_s.unwrap().c - 0.5).abs() < 1e-3);
        let nz = verdict("nonzero_sij", TolProfile::Strict);
        assert!(!nz.isotropic_s.unwrap().verdict && !nz.isotropic_e.unwrap().verdict);
        assert_eq!(verdict("riemannian", TolProfile::Strict).verdict, Verdict::InconclusiveConstantXi);
    }

    #[test]
    fn classify_parallel_randers() {
        let fx = Fixture::builtin("randers_parallel").unwrap();
        let r = classify(&fx, &fx.points[0], TolProfile::Strict, 0).unwrap();
        assert!(!r.xi_constant && !r.upsilon_zero && !r.riemannian);
        assert_eq!(r.beta_case, Some(BetaCase::Parallel));
        assert!(r.isotropic_s.verdict && r.weak_isotropic_s.unwrap().verdict && r.isotropic_e.verdict);
        assert!(r.randers_type.is_some());
        assert_eq!(r.equivalence_verdict, Verdict::Equivalent);
    }

    #[test]
    fn classify_is_deterministic() {
        let fx = Fixture::builtin("linear_quadratic_n2").unwrap();
        let a = serde_json::to_string(&classify(&fx, &fx.points[0], TolProfile::Strict, 4).unwrap()).unwrap();
        let b = serde_json::to_string(&classify(&fx, &fx.points[0], TolProfile::Strict, 4).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_branch_examples() {
        let fx = Fixture::builtin("riemannian").unwrap();
        assert!(matches!(
            scaled_branch_check(&fx, &fx.points[0], TolProfile::Strict, 0),
            Err(Error::PreconditionNotMet(_))
        ));
        let case = BetaCase::Scaled { epsilon: 0.0, residual: 0.0 };
        let r = scaled_branch_from_parts(&PhiSpec::quadratic(), 0.25, 3, 41, case, 0.0, true, &Tolerances::default()).unwrap();
        assert_eq!(r.phi_equation_residual, 0.0);
        assert!(r.upsilon_nonzero && !r.randers_type);
        let case = BetaCase::Scaled { epsilon: 0.4, residual: 0.0 };
        let r = scaled_branch_from_parts(&PhiSpec::randers(), 0.25, 3, 41, case, 0.1, true, &Tolerances::default()).unwrap();
        assert!(r.phi_equation_residual > 1e-3 && r.randers_type);
        let fx = Fixture::builtin("funk").unwrap();
        let r = scaled_branch_check(&fx, &fx.points[0], TolProfile::Strict, 0).unwrap();
        assert!(r.weak_isotropic);
    }
}
