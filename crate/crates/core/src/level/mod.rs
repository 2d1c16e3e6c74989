//! Level sets of grid functions and the diagnostics built on them.
//!
//! Level sets follow the signed convention `U(t) = {u ≥ t}` for `t ≥ 0` and
//! `U(t) = {u ≤ t}` for `t < 0`. The boundary of a discrete set is its inner
//! boundary: set pixels with at least one 4-neighbor outside the set.

mod density;
mod distance;
mod identities;
mod report;

pub use density::{default_density_radii, density_profile, DensityProfile, DensityRow};
pub use distance::{edt_squared, hausdorff_distance, hausdorff_masks, EmptySide, Hausdorff};
pub use identities::{
    coarea_check, curvature_identity_check, isoperimetric_check, layer_cake_check,
    IdentityCheck, IsoperimetricCheck, ISOPERIMETRIC_SLACK,
};
pub use report::{convergence_report, log_log_slope, ConvergenceReport, ConvergenceRow, TrendSummary};

use crate::error::{ensure_same_grid, Result};
use crate::field::{BinaryMask, ScalarField};

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSet {
    t: f64,
    mask: BinaryMask,
    boundary: Vec<usize>,
}

impl LevelSet {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Row-major indices of the inner boundary pixels.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn boundary_mask(&self) -> BinaryMask {
        let mut bits = vec![false; self.mask.grid().len()];
        for &k in &self.boundary {
            bits[k] = true;
        }
        BinaryMask::new(*self.mask.grid(), bits).expect("same grid")
    }

    /// The zero level needs separate treatment and is excluded from trend
    /// summaries.
    pub fn is_zero_level(&self) -> bool {
        self.t == 0.0
    }
}

/// `{u ≥ t}` for `t ≥ 0`, `{u ≤ t}` for `t < 0`.
pub fn extract_level_set(u: &ScalarField, t: f64) -> LevelSet {
    if t == 0.0 {
        log::debug!("extracting the zero level set, which trend summaries skip");
    }
    let mask = if t >= 0.0 {
        BinaryMask::threshold(u, |v| v >= t)
    } else {
        BinaryMask::threshold(u, |v| v <= t)
    };
    let boundary = inner_boundary(&mask);
    LevelSet { t, mask, boundary }
}

/// Set pixels with a 4-neighbor on the grid that is not in the set.
pub fn inner_boundary(mask: &BinaryMask) -> Vec<usize> {
    let g = mask.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let b = mask.bits();
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !b[k] {
                continue;
            }
            let outside = (i > 0 && !b[k - 1])
                || (i + 1 < nx && !b[k + 1])
                || (j > 0 && !b[k - nx])
                || (j + 1 < ny && !b[k + nx]);
            if outside {
                out.push(k);
            }
        }
    }
    out
}

/// `h² · #(A Δ B)`.
pub fn symmetric_difference_area(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    ensure_same_grid(a.grid(), b.grid())?;
    Ok(a.symmetric_difference(b)?.area())
}
