//! Grids, scalar fields, binary masks and domain specifications.
//!
//! Every field lives on a [`Grid2D`]: `nx` columns by `ny` rows with isotropic
//! spacing `h`. Pixel `(i, j)` sits at physical position `origin + (i h, j h)`
//! and is stored at row-major index `j * nx + i`. All reductions run in
//! row-major order so results are bit-reproducible.

mod domain;
pub mod io;
mod shapes;

use std::fmt;

pub use domain::{DomainSpec, Regime};
pub use shapes::{mollified_disk, rasterize_c_shape, rasterize_disk, CShape};

use crate::error::{ensure_same_grid, Error, Result};

/// A uniform 2-D grid with isotropic spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid must have at least one pixel, got {nx}x{ny}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        Ok(Self { nx, ny, h, origin })
    }

    /// Square grid whose pixel centers tile `[-half_width, half_width]^2`,
    /// symmetric about the origin, extended by `pad` pixels on every side.
    pub fn centered_square(half_width: f64, h: f64, pad: usize) -> Result<Self> {
        if half_width.is_nan() || half_width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        let n = (2.0 * half_width / h).round().max(1.0) as usize + 2 * pad;
        let o = -((n - 1) as f64) * h / 2.0;
        Self::new(n, n, h, [o, o])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Area of one pixel, the weight of the discrete L² inner product.
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// Physical coordinates of the center of pixel `(i, j)`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    /// Fractional pixel coordinates of a physical point.
    #[inline]
    pub fn to_pixel(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.origin[0]) / self.h,
            (p[1] - self.origin[1]) / self.h,
        ]
    }

    /// Pixel containing the physical point, if it lies on the grid.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let [fx, fy] = self.to_pixel(p);
        let (i, j) = (fx.round(), fy.round());
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            None
        } else {
            Some((i as usize, j as usize))
        }
    }

    /// True for pixels on the outermost ring of the grid.
    #[inline]
    pub fn on_frame(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}

impl fmt::Display for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} h={} origin=({}, {})",
            self.nx, self.ny, self.h, self.origin[0], self.origin[1]
        )
    }
}

/// A real-valued grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field data has {} entries, grid {} needs {}",
                data.len(),
                grid,
                grid.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { grid, data }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        assert!(value.is_finite(), "constant field value must be finite");
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every pixel center.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let [x, y] = grid.position(i, j);
                data.push(f(x, y));
            }
        }
        Self::new(grid, data)
    }

    /// Characteristic function of a mask.
    pub fn indicator(mask: &BinaryMask) -> Self {
        Self {
            grid: *mask.grid(),
            data: mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable access to the raw samples. Callers must keep them finite.
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.grid.index(i, j)]
    }

    /// Discrete L² inner product `h² Σ u_k v_k`, accumulated in row-major order.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self.grid.cell_area() * dot(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        (self.grid.cell_area() * dot(&self.data, &self.data)).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.grid.cell_area() * self.data.iter().fold(0.0, |acc, v| acc + v.abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// `∫ u`, the weighted sum of all samples.
    pub fn integral(&self) -> f64 {
        self.grid.cell_area() * self.data.iter().fold(0.0, |acc, v| acc + v)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        Self::from_vec_unchecked(self.grid, self.data.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<ScalarField> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        Self::new(self.grid, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Zeroes every sample outside `mask`.
    pub fn masked(&self, mask: &BinaryMask) -> Result<ScalarField> {
        ensure_same_grid(&self.grid, mask.grid())?;
        let data = self
            .data
            .iter()
            .zip(mask.bits())
            .map(|(&v, &b)| if b { v } else { 0.0 })
            .collect();
        Ok(Self::from_vec_unchecked(self.grid, data))
    }

    /// Median of the samples selected by `mask`, `None` if the mask is empty.
    pub fn median_over(&self, mask: &BinaryMask) -> Option<f64> {
        let mut vals: Vec<f64> = self
            .data
            .iter()
            .zip(mask.bits())
            .filter_map(|(&v, &b)| b.then_some(v))
            .collect();
        if vals.is_empty() {
            return None;
        }
        vals.sort_by(f64::total_cmp);
        let n = vals.len();
        Some(if n % 2 == 1 {
            vals[n / 2]
        } else {
            0.5 * (vals[n / 2 - 1] + vals[n / 2])
        })
    }
}

/// Row-major dot product.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// A set of pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    grid: Grid2D,
    bits: Vec<bool>,
}

// Grid2D holds floats but masks compare by exact bit patterns only.
impl Eq for Grid2D {}

impl BinaryMask {
    pub fn new(grid: Grid2D, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "mask has {} bits, grid {} needs {}",
                bits.len(),
                grid,
                grid.len()
            )));
        }
        Ok(Self { grid, bits })
    }

    pub fn empty(grid: Grid2D) -> Self {
        Self {
            grid,
            bits: vec![false; grid.len()],
        }
    }

    pub fn full(grid: Grid2D) -> Self {
        Self {
            grid,
            bits: vec![true; grid.len()],
        }
    }

    /// Pixel `(i, j)` is set iff `pred` holds at its physical center.
    pub fn from_fn(grid: Grid2D, pred: impl Fn(f64, f64) -> bool) -> Self {
        let mut bits = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let [x, y] = grid.position(i, j);
                bits.push(pred(x, y));
            }
        }
        Self { grid, bits }
    }

    /// Pixels whose value satisfies `pred`.
    pub fn threshold(field: &ScalarField, pred: impl Fn(f64) -> bool) -> Self {
        Self {
            grid: *field.grid(),
            bits: field.data().iter().map(|&v| pred(v)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let k = self.grid.index(i, j);
        self.bits[k] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `h²` times the number of set pixels.
    pub fn area(&self) -> f64 {
        self.grid.cell_area() * self.count() as f64
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    fn combine(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn union(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a != b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// Row-major indices of the set pixels.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
            .collect()
    }

    /// Whether the set pixels form one 4-connected component.
    /// The empty mask is not connected.
    pub fn is_4_connected(&self) -> bool {
        let Some(start) = self.bits.iter().position(|&b| b) else {
            return false;
        };
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut seen = vec![false; self.bits.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut reached = 1usize;
        while let Some(k) = stack.pop() {
            let (i, j) = self.grid.coords(k);
            let mut visit = |n: usize| {
                if self.bits[n] && !seen[n] {
                    seen[n] = true;
                    reached += 1;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < nx {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - nx);
            }
            if j + 1 < ny {
                visit(k + nx);
            }
        }
        reached == self.count()
    }
}
