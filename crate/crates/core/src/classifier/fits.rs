//! Least-squares isotropy fits over a set of directions at one point.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::{angular_metric, CoefficientForm, PointCurvature};
use crate::error::{Error, Result};
use crate::tolerances::TolProfile;

/// Curvature at one direction, as consumed by the fits.
#[derive(Debug, Clone)]
pub struct Sample {
    pub y: DVector<f64>,
    pub f: f64,
    pub s: f64,
    pub e: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub x: Vec<f64>,
    pub n: usize,
    pub profile: TolProfile,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    /// Closed forms for [`TolProfile::Strict`], oracles for [`TolProfile::Fd`].
    pub fn collect(pc: &PointCurvature, directions: &[DVector<f64>], profile: TolProfile) -> Result<Self> {
        let samples = directions
            .iter()
            .map(|y| {
                let f = pc.finsler(y);
                Ok(match profile {
                    TolProfile::Strict => Sample {
                        y: y.clone(),
                        f,
                        s: pc.s_closed(y)?,
                        e: pc.e_closed(y, CoefficientForm::Corrected)?.0,
                        h: pc.h_closed(y)?,
                    },
                    TolProfile::Fd => Sample {
                        y: y.clone(),
                        f,
                        s: pc.s_oracle(y)?,
                        e: pc.e_oracle(y)?,
                        h: angular_metric(&pc.g_oracle(y)?, y),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x: pc.x().to_vec(), n: pc.fixture.n, profile, samples })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    IsotropicS,
    WeakIsotropicS,
    IsotropicE,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropyFit {
    pub kind: FitKind,
    pub c: f64,
    pub eta: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub samples: usize,
}

impl IsotropyFit {
    fn new(kind: FitKind, c: f64, eta: Vec<f64>, residual: f64, tolerance: f64, samples: usize) -> Self {
        Self { kind, c, eta, residual, tolerance, verdict: residual <= tolerance, samples }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Residual scaled by `‖S‖ + ‖F‖`, so a vanishing S is not divided by zero.
fn relative(resid: &[f64], s: &[f64], f: &[f64]) -> f64 {
    let den = norm(s) + norm(f);
    if den > 0.0 {
        norm(resid) / den
    } else {
        0.0
    }
}

/// `S = (n+1) c F`.
pub fn test_isotropic_s(set: &SampleSet, tolerance: f64) -> Result<IsotropyFit> {
    let m = set.samples.len();
    if m < set.n + 2 {
        return Err(Error::InsufficientSamples { got: m, need: set.n + 2 });
    }
    let k = (set.n + 1) as f64;
    let basis: Vec<f64> = set.samples.iter().map(|p| k * p.f).collect();
    let s: Vec<f64> = set.samples.iter().map(|p| p.s).collect();
    let c = basis.iter().zip(&s).map(|(b, s)| b * s).sum::<f64>() / basis.iter().map(|b| b * b).sum::<f64>();
    let resid: Vec<f64> = s.iter().zip(&basis).map(|(s, b)| s - c * b).collect();
    let f: Vec<f64> = set.samples.iter().map(|p| p.f).collect();
    Ok(IsotropyFit::new(FitKind::IsotropicS, c, vec![0.0; set.n], relative(&resid, &s, &f), tolerance, m))
}

/// `S = (n+1) c F + η(y)`, joint in `(c, η)`.
pub fn test_weak_isotropic_s(set: &SampleSet, tolerance: f64) -> Result<IsotropyFit> {
    let m = set.samples.len();
    let n = set.n;
    if m < n + 2 {
        return Err(Error::InsufficientSamples { got: m, need: n + 2 });
    }
    let k = (n + 1) as f64;
    let design = DMatrix::from_fn(m, n + 1, |i, j| {
        let p = &set.samples[i];
        if j == 0 {
            k * p.f
        } else {
            p.y[j - 1]
        }
    });
    let rhs = DVector::from_iterator(m, set.samples.iter().map(|p| p.s));
    let svd = design.clone().svd(true, true);
    let hi = svd.singular_values.max();
    let lo = svd.singular_values.min();
    if !(lo > 1e-10 * hi) {
        return Err(Error::RankDeficient);
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::RankDeficient)?;
    let resid = &rhs - &design * &sol;
    let f: Vec<f64> = set.samples.iter().map(|p| p.f).collect();
    let residual = relative(resid.as_slice(), rhs.as_slice(), &f);
    Ok(IsotropyFit::new(FitKind::WeakIsotropicS, sol[0], sol.rows(1, n).iter().copied().collect(), residual, tolerance, m))
}

/// `E = ((n+1)/2) c F⁻¹ h`, fitted over all entries of all samples.
pub fn test_isotropic_e(set: &SampleSet, tolerance: f64) -> Result<IsotropyFit> {
    let m = set.samples.len();
    if m == 0 {
        return Err(Error::InsufficientSamples { got: 0, need: 1 });
    }
    let k = (set.n + 1) as f64 / 2.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for p in &set.samples {
        check_angular(&p.h)?;
        let basis = &p.h * (k / p.f);
        num += basis.dot(&p.e);
        den += basis.norm_squared();
    }
    let c = num / den;
    let (mut r2, mut e2, mut h2) = (0.0, 0.0, 0.0);
    for p in &set.samples {
        let basis = &p.h * (k / p.f);
        r2 += (&p.e - &basis * c).norm_squared();
        e2 += p.e.norm_squared();
        h2 += (&p.h / p.f).norm_squared();
    }
    let den = e2.sqrt() + h2.sqrt();
    let residual = if den > 0.0 { r2.sqrt() / den } else { 0.0 };
    Ok(IsotropyFit::new(FitKind::IsotropicE, c, vec![0.0; set.n], residual, tolerance, m))
}

/// `h` must be positive definite on the complement of `y`, i.e. have `n − 1`
/// positive eigenvalues.
fn check_angular(h: &DMatrix<f64>) -> Result<()> {
    let eig = h.clone().symmetric_eigen().eigenvalues;
    let top = eig.max();
    let positive = eig.iter().filter(|&&v| v > 1e-10 * top).count();
    if !(top > 0.0) || positive + 1 < h.nrows() {
        return Err(Error::DegenerateAngular);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::sampling::unit_alpha_directions;
    use crate::fixture::Fixture;

    fn set(name: &str, profile: TolProfile) -> SampleSet {
        let fx = Fixture::builtin(name).unwrap();
        let pc = PointCurvature::new(&fx, &fx.points[0]).unwrap();
        let dirs = unit_alpha_directions(&pc.geometry, 4 * fx.n, 1).unwrap();
        SampleSet::collect(&pc, &dirs, profile).unwrap()
    }

    #[test]
    fn parallel_beta_is_isotropic_with_zero_c() {
        let s = set("randers_parallel", TolProfile::Strict);
        let fit = test_isotropic_s(&s, 1e-8).unwrap();
        assert!(fit.verdict && fit.c == 0.0);
        let fit = test_isotropic_e(&s, 1e-8).unwrap();
        assert!(fit.verdict && fit.c == 0.0);
    }

    #[test]
    fn funk_is_isotropic_with_half() {
        for (profile, tol_s, tol_e) in [(TolProfile::Strict, 1e-8, 1e-8), (TolProfile::Fd, 1e-6, 1e-4)] {
            let s = set("funk", profile);
            let fs = test_isotropic_s(&s, tol_s).unwrap();
            assert!(fs.verdict && (fs.c - 0.5).abs() < 1e-3, "{fs:?}");
            let fe = test_isotropic_e(&s, tol_e).unwrap();
            assert!(fe.verdict && (fe.c - 0.5).abs() < 2e-3, "{fe:?}");
            let fw = test_weak_isotropic_s(&s, tol_s).unwrap();
            assert!(fw.verdict && (fw.c - fs.c).abs() < 1e-8 && norm(&fw.eta) < 1e-6, "{fw:?}");
        }
    }

    #[test]
    fn nonzero_sij_is_not_isotropic() {
        let s = set("nonzero_sij", TolProfile::Strict);
        let fit = test_isotropic_s(&s, 1e-8).unwrap();
        assert!(!fit.verdict && fit.residual > 1e-2, "{fit:?}");
        assert!(!test_isotropic_e(&s, 1e-8).unwrap().verdict);
    }

    #[test]
    fn shifted_volume_is_a_one_form() {
        let s = set("shifted_volume", TolProfile::Strict);
        let fit = test_weak_isotropic_s(&s, 1e-8).unwrap();
        assert!(fit.verdict && fit.c.abs() < 1e-8);
        assert!((fit.eta[0] + 0.7).abs() < 1e-8 && (fit.eta[1] - 0.4).abs() < 1e-8, "{fit:?}");
        assert!(!test_isotropic_s(&s, 1e-8).unwrap().verdict);
    }

    #[test]
    fn too_few_samples() {
        let mut s = set("funk", TolProfile::Strict);
        s.samples.truncate(3);
        assert!(matches!(test_isotropic_s(&s, 1e-8), Err(Error::InsufficientSamples { .. })));
    }
}
