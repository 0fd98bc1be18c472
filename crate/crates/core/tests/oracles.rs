use abmetric::classifier::sampling::unit_alpha_directions;
use abmetric::curvature::{CoefficientForm, PointCurvature};
use abmetric::Fixture;

// The Funk metric on the unit ball has S = (n+1)/2 F exactly.
#[test]
fn funk_s_curvature_is_half_scaled_finsler() {
    let f = Fixture::builtin("funk").unwrap();
    let half = (f.n + 1) as f64 / 2.0;
    for x in &f.points {
        let pc = PointCurvature::new(&f, x).unwrap();
        for y in unit_alpha_directions(&pc.geometry, 8, 1).unwrap() {
            let want = half * pc.finsler(&y);
            assert!((pc.s_closed(&y).unwrap() - want).abs() < 1e-10 * (1.0 + want.abs()));
            assert!((pc.s_oracle(&y).unwrap() - want).abs() < 1e-6 * (1.0 + want.abs()));
        }
    }
}

// A parallel 1-form makes F Berwald, so S and E vanish for every φ.
#[test]
fn parallel_beta_has_vanishing_s_and_e() {
    for name in ["randers_parallel", "power1_parallel", "power2_parallel", "quadratic_parallel"] {
        let f = Fixture::builtin(name).unwrap();
        let pc = PointCurvature::new(&f, &f.points[0]).unwrap();
        for y in unit_alpha_directions(&pc.geometry, 6, 2).unwrap() {
            assert!(pc.s_closed(&y).unwrap().abs() < 1e-12, "{name}");
            assert!(pc.s_oracle(&y).unwrap().abs() < 1e-7, "{name}");
            let (e, _) = pc.e_closed(&y, CoefficientForm::Corrected).unwrap();
            assert!(e.abs().max() < 1e-12, "{name}");
            assert!(pc.e_oracle(&y).unwrap().abs().max() < 1e-5, "{name}");
        }
    }
}

// Closed-form spray against the oracle on every built-in fixture.
#[test]
fn spray_matches_oracle_everywhere() {
    for f in Fixture::catalog() {
        for x in &f.points {
            let pc = PointCurvature::new(&f, x).unwrap();
            for y in unit_alpha_directions(&pc.geometry, 4, 3).unwrap() {
                let g = pc.spray_closed(&y).unwrap();
                let o = pc.spray_oracle(&y).unwrap();
                assert!((&g - &o).norm() <= 1e-7 * (1.0 + o.norm()), "{}", f.name);
            }
        }
    }
}
