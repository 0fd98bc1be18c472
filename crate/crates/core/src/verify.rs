//! Closed form vs oracle comparisons and identity checks, collected as a flat
//! list so that every failure is reported, not just the first.

use nalgebra::DVector;
use serde::Serialize;

use crate::classifier::sampling::unit_alpha_directions;
use crate::curvature::{CoefficientForm, PointCurvature};
use crate::error::Result;
use crate::fixture::Fixture;
use crate::geometry::{adapted_frame, db_check, transform_special};

pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 3.0];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub fixture: String,
    pub point: usize,
    /// Absent for checks that do not depend on a direction.
    pub direction: Option<usize>,
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Sink<'a> {
    fixture: &'a str,
    point: usize,
    direction: Option<usize>,
    out: Vec<Check>,
}

impl Sink<'_> {
    fn push(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        self.out.push(Check {
            fixture: self.fixture.to_string(),
            point: self.point,
            direction: self.direction,
            name,
            residual,
            tolerance,
            // NaN residuals fail
            pass: residual <= tolerance,
        });
    }
}

/// Relative to `scale` with an absolute floor of one, so quantities that
/// vanish identically (E for a Randers metric with r = 0, say) are not
/// judged on roundoff.
fn rel_to(num: f64, scale: f64) -> f64 {
    num / (1.0 + scale)
}

/// Every check at every probe point of `fixture`, over `fixture.directions`
/// unit-α directions drawn with `seed`.
pub fn verify_fixture(fixture: &Fixture, seed: u64) -> Result<Vec<Check>> {
    let tol = &fixture.tolerances;
    let mut checks = Vec::new();
    for (ip, x) in fixture.points.iter().enumerate() {
        let pc = PointCurvature::new(fixture, x)?;
        let pg = &pc.geometry;
        let mut sink = Sink { fixture: &fixture.name, point: ip, direction: None, out: Vec::new() };
        let dirs = unit_alpha_directions(pg, fixture.directions, seed)?;
        let frame = if pg.b2 > 0.0 { Some(adapted_frame(pg)?) } else { None };
        if let Some(f) = &frame {
            sink.push("frame_orthonormality", f.orthonormality_residual, tol.frame);
            sink.push("frame_alignment", f.alignment_residual, tol.frame);
            let db = db_check(fixture.metric.as_ref(), fixture.form.as_ref(), x, dirs[0].as_slice(), 1e-4)?;
            sink.push("db_chain_rule", db, tol.db_check);
        }
        for (iy, y) in dirs.iter().enumerate() {
            sink.direction = Some(iy);
            direction_checks(&pc, y, frame.as_ref(), &mut sink)?;
        }
        checks.extend(sink.out);
    }
    Ok(checks)
}

fn direction_checks(
    pc: &PointCurvature,
    y: &DVector<f64>,
    frame: Option<&crate::geometry::AdaptedFrame>,
    sink: &mut Sink,
) -> Result<()> {
    let tol = &pc.fixture.tolerances;
    let pg = &pc.geometry;
    let bd = pg.beta_data(y)?;
    sink.push("beta_identities", bd.identity_residual(), tol.frame);
    if let Some(f) = frame {
        let d = pc.direction(y)?;
        if d.s * d.s < pg.b2 {
            let sd = transform_special(pg, &bd, f, y)?;
            sink.push("special_identities", sd.identity_residual, tol.reconstruction);
            sink.push("special_reconstruction", sd.reconstruction_residual, tol.reconstruction);
        }
    }

    let g_c = pc.spray_closed(y)?;
    let g_o = pc.spray_oracle(y)?;
    sink.push("spray_oracle", (&g_c - &g_o).norm() / (1.0 + g_o.norm()), tol.spray_rel);

    let s_c = pc.s_closed(y)?;
    let s_o = pc.s_oracle(y)?;
    sink.push("s_oracle", (s_c - s_o).abs() / (1.0 + s_o.abs()), tol.s_rel);
    sink.push("divergence_identity", pc.divergence_residual(y)?, tol.divergence_identity_abs);

    let (e_c, _) = pc.e_closed(y, CoefficientForm::Corrected)?;
    let e_o = pc.e_oracle(y)?;
    sink.push("e_oracle", (&e_c - &e_o).abs().max() / (1.0 + e_o.norm()), tol.e_rel);

    // E·y vanishes exactly in the closed form; the oracle carries FD noise
    sink.push("e_euler_closed", rel_to((&e_c * y).norm(), e_c.norm() * y.norm()), tol.angular_euler_rel);
    sink.push("e_euler_oracle", rel_to((&e_o * y).norm(), e_o.norm() * y.norm()), tol.euler_rel);
    let h = pc.h_closed(y)?;
    sink.push("h_euler", rel_to((&h * y).norm(), h.norm() * y.norm()), tol.angular_euler_rel);

    let mut hom_g = 0.0f64;
    let mut hom_s = 0.0f64;
    let mut hom_e = 0.0f64;
    for l in HOMOGENEITY_SCALES {
        let ly = y * l;
        hom_g = hom_g.max(rel_to((pc.spray_closed(&ly)? - &g_c * l.powi(2)).norm(), g_c.norm() * l.powi(2)));
        hom_s = hom_s.max(rel_to((pc.s_closed(&ly)? - s_c * l).abs(), (s_c * l).abs()));
        let (le, _) = pc.e_closed(&ly, CoefficientForm::Corrected)?;
        hom_e = hom_e.max(rel_to((le - &e_c / l).norm(), e_c.norm() / l));
    }
    sink.push("spray_homogeneity", hom_g, tol.homogeneity_rel);
    sink.push("s_homogeneity", hom_s, tol.homogeneity_rel);
    sink.push("e_homogeneity", hom_e, tol.homogeneity_rel);
    Ok(())
}
