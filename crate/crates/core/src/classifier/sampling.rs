//! Deterministic direction and point samples.
//!
//! Directions come from a Halton sequence with a seeded Cranley–Patterson
//! shift, pushed through the inverse normal CDF and normalized, so they are
//! spread evenly over the sphere and identical across runs for a given seed.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::geometry::PointGeometry;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let base = base as u64;
    let mut f = 1.0;
    let mut out = 0.0;
    while i > 0 {
        f /= base as f64;
        out += f * (i % base) as f64;
        i /= base;
    }
    out
}

/// `count` points on the Euclidean unit sphere in `R^n`.
pub fn sphere_points(n: usize, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    if n > PRIMES.len() {
        return Err(Error::Dimension(format!("direction sampling supports n ≤ {}", PRIMES.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let normal = Normal::standard();
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let v = DVector::from_iterator(
            n,
            (0..n).map(|k| {
                let u = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
            }),
        );
        i += 1;
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / norm);
        }
    }
    Ok(out)
}

/// At least `count` directions with `α(y) = 1`: the `±e_i` axes (rescaled)
/// followed by Halton directions mapped through `y = L⁻ᵀu`, `a = LLᵀ`.
pub fn unit_alpha_directions(pg: &PointGeometry, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let n = pg.x.len();
    let mut out = Vec::with_capacity(count.max(2 * n));
    for i in 0..n {
        let scale = pg.a[(i, i)].sqrt();
        for sign in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[i] = sign / scale;
            out.push(e);
        }
    }
    let chol = pg.a.clone().cholesky().ok_or(Error::SingularMetric)?;
    let l_t = chol.l().transpose();
    let extra = count.saturating_sub(out.len());
    for u in sphere_points(n, extra, seed)? {
        let y = l_t.solve_upper_triangular(&u).ok_or(Error::SingularMetric)?;
        out.push(y);
    }
    Ok(out)
}

/// `count` points `x` near the fixture's first probe point, each paired with
/// a direction `y`. Points that leave the domain are redrawn.
pub fn point_samples(fixture: &Fixture, count: usize, radius: f64, seed: u64) -> Result<Vec<(Vec<f64>, DVector<f64>)>> {
    let base = fixture.points.first().ok_or(Error::InsufficientSamples { got: 0, need: 1 })?;
    let n = fixture.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = sphere_points(n, count, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count {
            return Err(Error::InsufficientSamples { got: out.len(), need: count });
        }
        let x: Vec<f64> = base.iter().map(|c| c + radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if fixture.check_point(&x).is_err() {
            continue;
        }
        let scale = 0.5 + rng.random::<f64>();
        out.push((x, &dirs[out.len()] * scale));
    }
    Ok(out)
}
