//! Test-data constructors: disks, mollified disks and the "C" shape.
//!
//! All rasterizations sample pixel centers; there is no antialiasing.

use std::f64::consts::PI;

use super::{BinaryMask, Grid2D, ScalarField};
use crate::error::{Error, Result};

/// Pixels whose centers lie in the closed disk `|x - center| <= radius`.
pub fn rasterize_disk(grid: &Grid2D, center: [f64; 2], radius: f64) -> BinaryMask {
    let r2 = radius * radius;
    BinaryMask::from_fn(*grid, |x, y| {
        let (dx, dy) = (x - center[0], y - center[1]);
        radius >= 0.0 && dx * dx + dy * dy <= r2
    })
}

/// The indicator of `B(x0, a + mu)` convolved with a unit-mass bump of width `mu`.
///
/// The bump is `exp(-1 / (1 - |y/mu|^2))` on `|y| < mu`, sampled on the grid
/// lattice and normalized to unit discrete sum. The field is exactly 1 on
/// `B(x0, a)` and exactly 0 outside `B(x0, a + 2 mu)`.
pub fn mollified_disk(grid: &Grid2D, x0: [f64; 2], a: f64, mu: f64) -> Result<ScalarField> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mollified disk radius must be positive, got {a}"
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mollifier width must be positive, got {mu}"
        )));
    }
    let h = grid.h();
    let radius = a + mu;

    // Kernel rows: for row offset q, the admissible p are |p| <= p_max[q], and
    // prefix[q][m] = sum of the weights for p in [-p_max, -p_max + m).
    let q_max = (mu / h).ceil() as i64;
    let mut rows: Vec<(i64, i64, Vec<f64>)> = Vec::new();
    let mut total = 0.0;
    for q in -q_max..=q_max {
        let mut weights = Vec::new();
        let mut p_lo = None;
        for p in -q_max..=q_max {
            let s = ((p * p + q * q) as f64) * h * h / (mu * mu);
            if s < 1.0 {
                p_lo.get_or_insert(p);
                weights.push((-1.0 / (1.0 - s)).exp());
            }
        }
        let Some(p_lo) = p_lo else { continue };
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            prefix.push(acc);
        }
        total += acc;
        rows.push((q, p_lo, prefix));
    }

    let mut data = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let [x, y] = grid.position(i, j);
            let (cx, cy) = (x - x0[0], y - x0[1]);
            let dist = (cx * cx + cy * cy).sqrt();
            if dist <= a {
                data.push(1.0);
                continue;
            }
            if dist >= a + 2.0 * mu {
                data.push(0.0);
                continue;
            }
            let mut acc = 0.0;
            for (q, p_lo, prefix) in &rows {
                let ry = cy - *q as f64 * h;
                let rem = radius * radius - ry * ry;
                if rem < 0.0 {
                    continue;
                }
                let s = rem.sqrt();
                let n = (prefix.len() - 1) as i64;
                // p h in [cx - s, cx + s]
                let lo = (((cx - s) / h).ceil() as i64).max(*p_lo);
                let hi = (((cx + s) / h).floor() as i64).min(*p_lo + n - 1);
                if hi >= lo {
                    acc += prefix[(hi - p_lo + 1) as usize] - prefix[(lo - p_lo) as usize];
                }
            }
            data.push((acc / total).clamp(0.0, 1.0));
        }
    }
    ScalarField::new(*grid, data)
}

/// An annulus with an angular sector removed, opening towards `+x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CShape {
    pub center: [f64; 2],
    pub outer: f64,
    pub inner: f64,
    /// Full angle of the removed sector, radians.
    pub opening: f64,
}

impl CShape {
    pub fn new(outer: f64, inner: f64, opening: f64) -> Result<Self> {
        let c = Self {
            center: [0.0, 0.0],
            outer,
            inner,
            opening,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer > self.inner && self.inner >= 0.0 && self.outer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "C shape needs outer > inner >= 0, got outer={} inner={}",
                self.outer, self.inner
            )));
        }
        if !(self.opening > 0.0 && self.opening < 2.0 * PI) {
            return Err(Error::InvalidParameter(format!(
                "C opening angle must lie in (0, 2pi), got {}",
                self.opening
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        let r2 = dx * dx + dy * dy;
        if r2 > self.outer * self.outer || r2 < self.inner * self.inner {
            return false;
        }
        dy.atan2(dx).abs() >= 0.5 * self.opening
    }

    /// Continuum area of the shape.
    pub fn area(&self) -> f64 {
        0.5 * (2.0 * PI - self.opening) * (self.outer * self.outer - self.inner * self.inner)
    }
}

pub fn rasterize_c_shape(grid: &Grid2D, shape: &CShape) -> Result<BinaryMask> {
    shape.validate()?;
    Ok(BinaryMask::from_fn(*grid, |x, y| shape.contains(x, y)))
}
