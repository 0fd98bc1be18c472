use nalgebra::DVector;
use proptest::prelude::*;

use abmetric::classifier::fits::{test_isotropic_s, test_weak_isotropic_s};
use abmetric::classifier::sample_set;
use abmetric::cli::format_float;
use abmetric::curvature::{CoefficientForm, PointCurvature};
use abmetric::tolerances::TolProfile;
use abmetric::{Fixture, Jet, PhiSpec, ScalarPack};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn jet() -> impl Strategy<Value = Jet> {
    prop::collection::vec(-2.0..2.0f64, 6).prop_map(|c| Jet::from_coeffs(0.1, &c).unwrap())
}

fn phi() -> impl Strategy<Value = PhiSpec> {
    prop_oneof![
        Just(PhiSpec::randers()),
        Just(PhiSpec::power(1.0)),
        Just(PhiSpec::power(2.0)),
        Just(PhiSpec::quadratic()),
        (0.5..2.0f64, -0.5..1.0f64, -0.5..0.5f64).prop_map(|(k1, k2, k3)| PhiSpec::randers_type(k1, k2, k3).unwrap()),
    ]
}

fn jets_close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| close(*x, *y, tol))
}

proptest! {
    #[test]
    fn jet_product_commutes_and_associates(a in jet(), b in jet(), c in jet()) {
        prop_assert!(jets_close(&(a * b), &(b * a), 1e-14));
        let left = (a * b) * c;
        let right = a * (b * c);
        prop_assert!(jets_close(&left, &right, 1e-12));
    }

    #[test]
    fn jet_division_round_trips(a in jet(), b in jet(), shift in 3.0..5.0f64) {
        // keep the divisor away from zero
        let b = b + shift;
        let q = a.checked_div(&b).unwrap();
        prop_assert!(jets_close(&(q * b), &a, 1e-10));
    }

    #[test]
    fn jet_exp_ln_round_trips(a in jet()) {
        let a = a.scale(0.2);
        prop_assert!(jets_close(&a.exp().ln().unwrap(), &a, 1e-10));
    }

    #[test]
    fn floats_survive_formatting(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn scalar_pack_relations(phi in phi(), t in -0.95..0.95f64, b in 0.05..0.45f64, n in 2usize..6) {
        let b = b.min(0.9 * phi.b0);
        let s = t * b;
        let p = ScalarPack::new(&phi, s, b * b, n).unwrap();
        let (q, q1) = (p.q.value(), p.q.derivative(1));
        let delta = p.delta.value();
        prop_assert!(close(delta, 1.0 + s * q + (b * b - s * s) * q1, 1e-12));
        prop_assert!(close(2.0 * delta * p.psi.value(), q1, 1e-12));
        prop_assert!(close(2.0 * delta * p.theta.value(), q - s * q1, 1e-12));
        prop_assert!(close(p.xi.value(), (b * b * q + s) * 2.0 * p.omega.value(), 1e-12));
        prop_assert!(close(p.upsilon.value(), p.branch_term.derivative(1), 1e-12));
    }

    #[test]
    fn curvature_homogeneity(idx in 0usize..16, dir in prop::collection::vec(-1.0..1.0f64, 3), l in 0.1..10.0f64) {
        let f = Fixture::catalog().swap_remove(idx % Fixture::builtin_names().len());
        let y = DVector::from_iterator(f.n, dir.iter().copied().chain(std::iter::repeat(0.3)).take(f.n));
        prop_assume!(y.norm() > 0.1);
        let pc = PointCurvature::new(&f, &f.points[0]).unwrap();
        let ly = &y * l;
        prop_assert!(close(pc.finsler(&ly), l * pc.finsler(&y), 1e-13));
        prop_assert!(close(pc.s_closed(&ly).unwrap(), l * pc.s_closed(&y).unwrap(), 1e-10));
        let (e, _) = pc.e_closed(&y, CoefficientForm::Corrected).unwrap();
        let (le, _) = pc.e_closed(&ly, CoefficientForm::Corrected).unwrap();
        let scale = e.norm() / l;
        prop_assert!((le - e / l).norm() <= 1e-10 * (1.0 + scale));
    }
}

#[test]
fn isotropic_s_implies_weakly_isotropic() {
    for f in Fixture::catalog() {
        let tol = f.tolerances.fit_s(TolProfile::Strict);
        for x in &f.points {
            let pc = PointCurvature::new(&f, x).unwrap();
            let set = sample_set(&pc, TolProfile::Strict, 0).unwrap();
            let iso = test_isotropic_s(&set, tol).unwrap();
            let Ok(weak) = test_weak_isotropic_s(&set, tol) else { continue };
            assert!(!iso.verdict || weak.verdict, "{}: isotropic but not weakly isotropic", f.name);
            assert!(weak.residual <= iso.residual + 1e-12, "{}: larger model fits worse", f.name);
        }
    }
}
