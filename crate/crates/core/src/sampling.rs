//! Seeded random sampling used by the sampled diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vector;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the cube `[-radius, radius]^dim`.
pub fn uniform_cube(rng: &mut SampleRng, dim: usize, radius: f64) -> Vector {
    Vector::from_fn(dim, |_, _| rng.gen_range(-radius..=radius))
}

/// Standard normal coordinates (Box-Muller).
pub fn gaussian(rng: &mut SampleRng, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    })
}
