//! Seeded Gaussian noise.
//!
//! Samples come from ChaCha20 (`rand_chacha` 0.9, seeded with
//! `seed_from_u64`) through the `StandardNormal` ziggurat sampler of
//! `rand_distr` 0.5, drawn in row-major pixel order. The pair of crate
//! versions fixes the stream; changing either is a format break recorded
//! by `NOISE_GENERATOR` in every manifest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField};

pub const NOISE_GENERATOR: &str = "chacha20-seed_from_u64/standard-normal-ziggurat/v1";

/// I.i.d. `N(0, variance)` per pixel.
pub fn gen_gaussian_noise(grid: Grid2D, variance: f64, seed: u64) -> Result<ScalarField> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be a finite value >= 0, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(ScalarField::zeros(grid));
    }
    let sd = variance.sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let data = (0..grid.len())
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    ScalarField::new(grid, data)
}

/// Gaussian noise rescaled to the exact norm `‖w‖ = norm`.
pub fn noise_with_norm(grid: Grid2D, norm: f64, seed: u64) -> Result<ScalarField> {
    if !(norm >= 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise norm must be >= 0, got {norm}")));
    }
    if norm == 0.0 {
        return Ok(ScalarField::zeros(grid));
    }
    let w = gen_gaussian_noise(grid, 1.0, seed)?;
    Ok(w.scaled(norm / w.norm()))
}

/// `count` per-run seeds drawn from a master seed.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    (0..count).map(|_| rng.random()).collect()
}
