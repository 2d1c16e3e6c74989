use std::f64::consts::PI;

use super::{LinearOperator, LinearOperatorHandle, OperatorKind};
use crate::error::{Error, Result};
use crate::field::Grid2D;

/// Sampling of `Σ = S¹ × (0, 2)`.
///
/// Row `a` of a sinogram is the center `z_a = (cos θ_a, sin θ_a)` with
/// `θ_a = angle_offset + 2π a / n_angles`; column `b` is the radius
/// `t_b = (b + 1/2) · 2 / n_radii`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadonGeometry {
    pub n_angles: usize,
    pub n_radii: usize,
    pub angle_offset: f64,
}

impl RadonGeometry {
    pub fn center(&self, a: usize) -> [f64; 2] {
        let th = self.angle_offset + 2.0 * PI * a as f64 / self.n_angles as f64;
        [th.cos(), th.sin()]
    }

    pub fn radius(&self, b: usize) -> f64 {
        (b as f64 + 0.5) * 2.0 / self.n_radii as f64
    }

    /// Quadrature weight of one sample of `Σ`.
    pub fn cell_weight(&self) -> f64 {
        (2.0 * PI / self.n_angles as f64) * (2.0 / self.n_radii as f64)
    }

    /// Range grid: `n_radii` columns, `n_angles` rows, spacing chosen so
    /// that the cell area equals the quadrature weight.
    pub fn range_grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n_radii, self.n_angles, self.cell_weight().sqrt(), [0.0, 0.0])
    }
}

/// Circular Radon transform `(Ru)(z, t) = t ∫_{S¹} u(z + tω) dω`, discretized
/// by bilinear interpolation at `max(16, ⌈2πt/h⌉)` equispaced nodes per circle
/// and stored as a sparse matrix, so the adjoint is its exact transpose.
pub struct CircularRadon {
    domain: Grid2D,
    range: Grid2D,
    geometry: RadonGeometry,
    epsilon: f64,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CircularRadon {
    pub fn geometry(&self) -> &RadonGeometry {
        &self.geometry
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of stored matrix entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn build(domain: Grid2D, geometry: RadonGeometry, epsilon: f64) -> Result<Self> {
        let range = geometry.range_grid()?;
        let h = domain.h();
        let (nx, ny) = (domain.nx() as isize, domain.ny() as isize);
        let mut row_ptr = Vec::with_capacity(range.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut entries: Vec<(u32, f64)> = Vec::new();
        let node_tables: Vec<Vec<[f64; 2]>> = (0..geometry.n_radii)
            .map(|b| {
                let t = geometry.radius(b);
                let m = ((2.0 * PI * t / h).ceil() as usize).max(16);
                (0..m)
                    .map(|q| {
                        let phi = 2.0 * PI * q as f64 / m as f64;
                        [t * phi.cos(), t * phi.sin()]
                    })
                    .collect()
            })
            .collect();
        for a in 0..geometry.n_angles {
            let z = geometry.center(a);
            for (b, nodes) in node_tables.iter().enumerate() {
                let t = geometry.radius(b);
                let w = t * 2.0 * PI / nodes.len() as f64;
                entries.clear();
                for d in nodes {
                    let [fx, fy] = domain.to_pixel([z[0] + d[0], z[1] + d[1]]);
                    let (x0, y0) = (fx.floor(), fy.floor());
                    let (ax, ay) = (fx - x0, fy - y0);
                    let (i0, j0) = (x0 as isize, y0 as isize);
                    let corners = [
                        (i0, j0, (1.0 - ax) * (1.0 - ay)),
                        (i0 + 1, j0, ax * (1.0 - ay)),
                        (i0, j0 + 1, (1.0 - ax) * ay),
                        (i0 + 1, j0 + 1, ax * ay),
                    ];
                    for (i, j, c) in corners {
                        if c != 0.0 && i >= 0 && j >= 0 && i < nx && j < ny {
                            entries.push(((j * nx + i) as u32, w * c));
                        }
                    }
                }
                entries.sort_by_key(|e| e.0);
                let mut k = 0;
                while k < entries.len() {
                    let col = entries[k].0;
                    let mut acc = 0.0;
                    while k < entries.len() && entries[k].0 == col {
                        acc += entries[k].1;
                        k += 1;
                    }
                    cols.push(col);
                    vals.push(acc);
                }
                row_ptr.push(cols.len());
            }
        }
        Ok(Self {
            domain,
            range,
            geometry,
            epsilon,
            row_ptr,
            cols,
            vals,
        })
    }
}

impl LinearOperator for CircularRadon {
    fn domain_grid(&self) -> &Grid2D {
        &self.domain
    }
    fn range_grid(&self) -> &Grid2D {
        &self.range
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::CircularRadon {
            n_angles: self.geometry.n_angles,
            n_radii: self.geometry.n_radii,
            epsilon: self.epsilon,
        }
    }

    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for (c, v) in self.cols[lo..hi].iter().zip(&self.vals[lo..hi]) {
                acc += v * u[*c as usize];
            }
            *o = acc;
        }
    }

    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (r, &pr) in p.iter().enumerate() {
            if pr == 0.0 {
                continue;
            }
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            for (c, v) in self.cols[lo..hi].iter().zip(&self.vals[lo..hi]) {
                out[*c as usize] += v * pr;
            }
        }
        let ratio = self.range.cell_area() / self.domain.cell_area();
        out.iter_mut().for_each(|v| *v *= ratio);
    }
}

/// Circular Radon transform on `domain_grid`, which must cover `B(0, 1)`.
///
/// Inputs are expected to vanish outside `B(0, 1 − epsilon)`; this is not
/// enforced and samples beyond the grid read as zero.
pub fn make_circular_radon(
    domain_grid: Grid2D,
    n_angles: usize,
    n_radii: usize,
    epsilon: f64,
) -> Result<LinearOperatorHandle> {
    Ok(LinearOperatorHandle::new(build_radon(
        domain_grid,
        RadonGeometry {
            n_angles,
            n_radii,
            angle_offset: 0.0,
        },
        epsilon,
    )?))
}

pub(crate) fn build_radon(domain: Grid2D, geometry: RadonGeometry, epsilon: f64) -> Result<CircularRadon> {
    if geometry.n_angles == 0 || geometry.n_radii == 0 {
        return Err(Error::InvalidParameter(
            "circular Radon transform needs at least one angle and one radius".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !geometry.angle_offset.is_finite() {
        return Err(Error::InvalidParameter("angle offset must be finite".into()));
    }
    let h = domain.h();
    let o = domain.origin();
    let lo = [o[0] - 0.5 * h, o[1] - 0.5 * h];
    let hi = [
        o[0] + (domain.nx() as f64 - 0.5) * h,
        o[1] + (domain.ny() as f64 - 0.5) * h,
    ];
    let slack = 1e-9 * h;
    if lo[0] > -1.0 + slack || lo[1] > -1.0 + slack || hi[0] < 1.0 - slack || hi[1] < 1.0 - slack {
        return Err(Error::InvalidParameter(format!(
            "domain grid {domain} does not cover the unit disk"
        )));
    }
    if domain.len() > u32::MAX as usize {
        return Err(Error::InvalidParameter("domain grid too large".into()));
    }
    CircularRadon::build(domain, geometry, epsilon)
}
