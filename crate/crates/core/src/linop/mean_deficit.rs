use super::{LinearOperator, LinearOperatorHandle, OperatorKind};
use crate::error::{Error, Result};
use crate::field::Grid2D;

/// `Au(x) = u(x) − mean of u over the box x + [−η, η]²`, evaluated on the
/// grid shrunk by the box half-width so every box lies inside the domain.
#[derive(Clone, Debug)]
pub struct MeanDeficit {
    domain: Grid2D,
    range: Grid2D,
    eta: f64,
    half: usize,
}

impl MeanDeficit {
    /// Box half-width in pixels; the box holds `(2m + 1)²` pixels.
    pub fn half_width(&self) -> usize {
        self.half
    }

    /// Sums of `src` over the `(2m+1)²` box around every domain pixel, with
    /// zeros beyond the domain.
    fn box_sum(&self, src: &[f64], out: &mut [f64]) {
        let (nx, ny, m) = (self.domain.nx(), self.domain.ny(), self.half);
        let mut rows = vec![0.0; nx * ny];
        for j in 0..ny {
            let row = &src[j * nx..(j + 1) * nx];
            for i in 0..nx {
                let lo = i.saturating_sub(m);
                let hi = (i + m).min(nx - 1);
                rows[j * nx + i] = row[lo..=hi].iter().sum();
            }
        }
        for j in 0..ny {
            let lo = j.saturating_sub(m);
            let hi = (j + m).min(ny - 1);
            for i in 0..nx {
                let mut acc = 0.0;
                for jj in lo..=hi {
                    acc += rows[jj * nx + i];
                }
                out[j * nx + i] = acc;
            }
        }
    }
}

impl LinearOperator for MeanDeficit {
    fn domain_grid(&self) -> &Grid2D {
        &self.domain
    }
    fn range_grid(&self) -> &Grid2D {
        &self.range
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::MeanDeficit { eta: self.eta }
    }

    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let (nx, m) = (self.domain.nx(), self.half);
        let count = ((2 * m + 1) * (2 * m + 1)) as f64;
        let mut sums = vec![0.0; u.len()];
        self.box_sum(u, &mut sums);
        for jr in 0..self.range.ny() {
            for ir in 0..self.range.nx() {
                let k = (jr + m) * nx + ir + m;
                out[jr * self.range.nx() + ir] = u[k] - sums[k] / count;
            }
        }
    }

    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        let (nx, m) = (self.domain.nx(), self.half);
        let count = ((2 * m + 1) * (2 * m + 1)) as f64;
        let mut embedded = vec![0.0; out.len()];
        for jr in 0..self.range.ny() {
            for ir in 0..self.range.nx() {
                embedded[(jr + m) * nx + ir + m] = p[jr * self.range.nx() + ir];
            }
        }
        let mut sums = vec![0.0; out.len()];
        self.box_sum(&embedded, &mut sums);
        for k in 0..out.len() {
            out[k] = embedded[k] - sums[k] / count;
        }
    }
}

/// Mean-deficit operator with box half-width `eta` (rounded to whole pixels).
pub fn make_mean_deficit(grid: Grid2D, eta: f64) -> Result<LinearOperatorHandle> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean-deficit half-width must be positive, got {eta}"
        )));
    }
    let half = (eta / grid.h()).round() as usize;
    if half == 0 {
        return Err(Error::InvalidParameter(format!(
            "mean-deficit half-width {eta} is below half a pixel (h = {})",
            grid.h()
        )));
    }
    if 2 * half >= grid.nx().min(grid.ny()) {
        return Err(Error::InvalidParameter(format!(
            "mean-deficit half-width {eta} is not below half the domain width"
        )));
    }
    let o = grid.origin();
    let shift = half as f64 * grid.h();
    let range = Grid2D::new(
        grid.nx() - 2 * half,
        grid.ny() - 2 * half,
        grid.h(),
        [o[0] + shift, o[1] + shift],
    )?;
    Ok(LinearOperatorHandle::new(MeanDeficit {
        domain: grid,
        range,
        eta,
        half,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::linop::{adjoint_check, operator_norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn grid() -> Grid2D {
        Grid2D::centered_square(1.0, 1.0 / 32.0, 0).unwrap()
    }

    #[test]
    fn annihilates_constants_exactly() {
        let a = make_mean_deficit(grid(), 0.2).unwrap();
        let out = a.apply(&ScalarField::constant(grid(), 1.0)).unwrap();
        assert!(out.max_abs() <= 1e-12, "{}", out.max_abs());
    }

    #[test]
    fn range_is_shrunk_grid() {
        let a = make_mean_deficit(grid(), 0.25).unwrap();
        let m = 8;
        assert_eq!(a.range_grid().nx(), grid().nx() - 2 * m);
        let shift = a.range_grid().origin()[0] - grid().origin()[0];
        assert!((shift - 0.25).abs() < 1e-12);
    }

    #[test]
    fn box_mean_matches_brute_force() {
        let g = Grid2D::new(11, 9, 0.1, [0.0, 0.0]).unwrap();
        let a = make_mean_deficit(g, 0.2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let u = ScalarField::new(g, (0..99).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let au = a.apply(&u).unwrap();
        for jr in 0..5 {
            for ir in 0..7 {
                let (i, j) = (ir + 2, jr + 2);
                let mut s = 0.0;
                for dj in 0..5 {
                    for di in 0..5 {
                        s += u.get(i + di - 2, j + dj - 2);
                    }
                }
                let expect = u.get(i, j) - s / 25.0;
                assert!((au.get(ir, jr) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bounded_by_two_on_random_fields() {
        let a = make_mean_deficit(grid(), 0.15).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for _ in 0..100 {
            let data = (0..grid().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u = ScalarField::new(grid(), data).unwrap();
            assert!(a.apply(&u).unwrap().norm() <= 2.0 * u.norm());
        }
    }

    #[test]
    fn adjoint_and_norm() {
        let a = make_mean_deficit(grid(), 0.15).unwrap();
        assert!(adjoint_check(&a, 10, 5) <= 1e-10);
        // the top of the spectrum is nearly degenerate, so iterate long
        let n = operator_norm(&a, 1e-12, 20_000, 1);
        assert!(n.value <= 2.0);
        let nt = operator_norm(&a.transposed(), 1e-12, 20_000, 1);
        assert!((n.value - nt.value).abs() / n.value <= 1e-6);
    }

    #[test]
    fn rejects_oversized_window() {
        assert!(make_mean_deficit(grid(), 1.0).is_err());
        assert!(make_mean_deficit(grid(), 0.001).is_err());
        assert!(make_mean_deficit(grid(), -0.1).is_err());
    }
}
