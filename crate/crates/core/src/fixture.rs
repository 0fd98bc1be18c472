//! A fixture is one concrete (α, β)-metric: a Riemannian metric, a 1-form, a
//! φ-profile, and where to probe it.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    spd_inverse, ConstantForm, Euclidean, ExpConformal, FunkForm, FunkMetric, LinearForm, MetricField, OneFormField,
    PointGeometry,
};
use crate::scalar::{bh_ratio, PhiSpec};
use crate::tolerances::Tolerances;

#[derive(Clone)]
pub struct Fixture {
    pub name: String,
    pub n: usize,
    pub metric: Arc<dyn MetricField>,
    pub form: Arc<dyn OneFormField>,
    pub phi: PhiSpec,
    /// The volume form is `σ_BH · exp(w·x)` when set.
    pub volume_shift: Option<DVector<f64>>,
    pub points: Vec<Vec<f64>>,
    /// Directions per isotropy fit; at least `4n`.
    pub directions: usize,
    /// Points on each s-grid.
    pub grid: usize,
    pub tolerances: Tolerances,
}

impl fmt::Debug for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fixture")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("metric", &self.metric.describe())
            .field("form", &self.form.describe())
            .field("phi", &self.phi.label())
            .field("points", &self.points)
            .finish()
    }
}

impl Fixture {
    pub fn new(
        name: impl Into<String>,
        metric: Arc<dyn MetricField>,
        form: Arc<dyn OneFormField>,
        phi: PhiSpec,
        points: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = metric.dim();
        if n < 2 {
            return Err(Error::Dimension(format!("manifold dimension {n} < 2")));
        }
        if form.dim() != n {
            return Err(Error::Dimension(format!("metric has dimension {n}, 1-form {}", form.dim())));
        }
        let fixture = Self {
            name: name.into(),
            n,
            metric,
            form,
            phi,
            volume_shift: None,
            points,
            directions: 4 * n,
            grid: crate::scalar::PROFILE_GRID,
            tolerances: Tolerances::default(),
        };
        for x in &fixture.points {
            fixture.check_point(x)?;
        }
        Ok(fixture)
    }

    pub fn with_volume_shift(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.n {
            return Err(Error::Dimension(format!("volume shift has {} components, expected {}", w.len(), self.n)));
        }
        self.volume_shift = Some(DVector::from_vec(w));
        Ok(self)
    }

    /// Rejects points outside the chart, where `a` is not positive definite,
    /// or where `b` reaches the profile radius.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("point has {} coordinates, expected {}", x.len(), self.n)));
        }
        if !self.metric.contains(x) {
            return Err(Error::validation("probe.points", format!("{x:?} lies outside the domain of {}", self.metric.describe())));
        }
        let pg = PointGeometry::new(self.metric.as_ref(), self.form.as_ref(), x)?;
        if pg.b() >= self.phi.b0 {
            return Err(Error::OutOfDomain { s: pg.b(), b0: self.phi.b0 });
        }
        Ok(())
    }

    pub fn geometry(&self, x: &[f64]) -> Result<PointGeometry> {
        PointGeometry::new(self.metric.as_ref(), self.form.as_ref(), x)
    }

    /// `F(x, y) = α φ(β/α)`; NaN outside the domain.
    pub fn finsler(&self, x: &[f64], y: &[f64]) -> f64 {
        if !self.metric.contains(x) {
            return f64::NAN;
        }
        let yv = DVector::from_column_slice(y);
        let alpha = yv.dot(&(self.metric.metric(x) * &yv)).sqrt();
        if !(alpha > 0.0) {
            return f64::NAN;
        }
        let s = self.form.form(x).dot(&yv) / alpha;
        if !(s.abs() < self.phi.b0) {
            return f64::NAN;
        }
        alpha * self.phi.value(s)
    }

    /// `ln σ(x)` for the fixture's volume form, with the BH factor by quadrature.
    pub fn log_volume(&self, x: &[f64]) -> Result<f64> {
        let a = self.metric.metric(x);
        let b = self.form.form(x);
        let a_inv = spd_inverse(&a)?;
        let norm = b.dot(&(a_inv * &b)).sqrt();
        let t = bh_ratio(&self.phi, norm, self.n)?;
        let shift = self.volume_shift.as_ref().map_or(0.0, |w| w.iter().zip(x).map(|(w, x)| w * x).sum());
        Ok(0.5 * a.determinant().ln() + t.ln() + shift)
    }

    /// `w·y`, the contribution of the volume shift to `S` (with a minus sign).
    pub fn shift_along(&self, y: &DVector<f64>) -> f64 {
        self.volume_shift.as_ref().map_or(0.0, |w| w.dot(y))
    }

    pub fn builtin_names() -> &'static [&'static str] {
        BUILTINS
    }

    pub fn builtin(name: &str) -> Option<Fixture> {
        build(name).map(|f| f.expect("built-in fixtures are valid"))
    }

    pub fn catalog() -> Vec<Fixture> {
        BUILTINS.iter().map(|n| Self::builtin(n).expect("listed")).collect()
    }
}

const BUILTINS: &[&str] = &[
    "riemannian",
    "randers_parallel",
    "power1_parallel",
    "power2_parallel",
    "quadratic_parallel",
    "randers_type",
    "funk",
    "nonzero_sij",
    "shifted_volume",
    "linear_randers_n2",
    "linear_randers_n3",
    "linear_power1_n2",
    "linear_power1_n3",
    "linear_quadratic_n2",
    "linear_quadratic_n3",
    "conformal_power1",
];

fn linear(n: usize) -> LinearForm {
    // non-symmetric, so both r and s are nonzero
    let m = match n {
        2 => DMatrix::from_row_slice(2, 2, &[0.2, 0.5, -0.1, 0.3]),
        _ => DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.0, -0.1, 0.3, 0.2, 0.1, -0.3, 0.25]),
    };
    let offset = match n {
        2 => DVector::from_vec(vec![0.3, -0.2]),
        _ => DVector::from_vec(vec![0.3, -0.2, 0.1]),
    };
    LinearForm { m, offset }
}

fn linear_point(n: usize) -> Vec<f64> {
    match n {
        2 => vec![0.4, 0.3],
        _ => vec![0.4, 0.3, -0.2],
    }
}

fn build(name: &str) -> Option<Result<Fixture>> {
    let eu = |n| Arc::new(Euclidean { n }) as Arc<dyn MetricField>;
    let constant = |b: &[f64]| Arc::new(ConstantForm { b: DVector::from_column_slice(b) }) as Arc<dyn OneFormField>;
    let parallel = |name: &str, phi| Fixture::new(name, eu(2), constant(&[0.3, 0.2]), phi, vec![vec![0.1, -0.2]]);
    let lin = |name: &str, n: usize, phi| Fixture::new(name, eu(n), Arc::new(linear(n)), phi, vec![linear_point(n)]);
    let fixture = match name {
        "riemannian" => Fixture::new(
            name,
            Arc::new(ExpConformal { w: DVector::from_vec(vec![0.3, -0.1]) }),
            Arc::new(linear(2)),
            PhiSpec::riemannian(),
            vec![vec![0.2, 0.1]],
        ),
        "randers_parallel" => parallel(name, PhiSpec::randers()),
        "power1_parallel" => parallel(name, PhiSpec::power(1.0)),
        "power2_parallel" => parallel(name, PhiSpec::power(2.0)),
        "quadratic_parallel" => parallel(name, PhiSpec::quadratic()),
        "randers_type" => Fixture::new(
            name,
            eu(2),
            Arc::new(linear(2)),
            PhiSpec::randers_type(1.0, 0.5, 0.4).expect("valid parameters"),
            vec![linear_point(2)],
        ),
        "funk" => Fixture::new(name, Arc::new(FunkMetric { n: 2 }), Arc::new(FunkForm { n: 2 }), PhiSpec::randers(), vec![
            vec![0.3, 0.2],
        ]),
        "nonzero_sij" => Fixture::new(
            name,
            eu(2),
            Arc::new(LinearForm::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]))),
            PhiSpec::randers(),
            vec![vec![0.3, 0.7]],
        ),
        "shifted_volume" => Fixture::new(
            name,
            Arc::new(ExpConformal { w: DVector::from_vec(vec![0.2, 0.1]) }),
            constant(&[0.0, 0.0]),
            PhiSpec::riemannian(),
            vec![vec![0.1, 0.3]],
        )
        .and_then(|f| f.with_volume_shift(vec![0.7, -0.4])),
        "linear_randers_n2" => lin(name, 2, PhiSpec::randers()),
        "linear_randers_n3" => lin(name, 3, PhiSpec::randers()),
        "linear_power1_n2" => lin(name, 2, PhiSpec::power(1.0)),
        "linear_power1_n3" => lin(name, 3, PhiSpec::power(1.0)),
        "linear_quadratic_n2" => lin(name, 2, PhiSpec::quadratic()),
        "linear_quadratic_n3" => lin(name, 3, PhiSpec::quadratic()),
        "conformal_power1" => Fixture::new(
            name,
            Arc::new(ExpConformal { w: DVector::from_vec(vec![0.2, -0.3, 0.1]) }),
            Arc::new(linear(3)),
            PhiSpec::power(1.0),
            vec![linear_point(3)],
        ),
        _ => return None,
    };
    Some(fixture)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        let all = Fixture::catalog();
        assert_eq!(all.len(), BUILTINS.len());
        for f in &all {
            for x in &f.points {
                let pg = f.geometry(x).unwrap();
                assert!(pg.b() < f.phi.b0, "{}", f.name);
                let y = vec![1.0; f.n];
                assert!(f.finsler(x, &y) > 0.0, "{}", f.name);
            }
        }
        assert!(Fixture::builtin("nope").is_none());
    }

    #[test]
    fn finsler_is_alpha_phi() {
        let f = Fixture::builtin("nonzero_sij").unwrap();
        // α = 1, β = 0.7·y² with y = (0, 1)
        assert!((f.finsler(&[0.3, 0.7], &[0.0, 1.0]) - 1.3).abs() < 1e-15);
        assert!((f.finsler(&[0.3, 0.7], &[2.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn funk_ball_has_unit_b() {
        let f = Fixture::builtin("funk").unwrap();
        let pg = f.geometry(&[0.3, 0.2]).unwrap();
        assert!((pg.b2 - 0.13).abs() < 1e-14);
        assert!(f.check_point(&[0.9, 0.5]).is_err());
    }
}
