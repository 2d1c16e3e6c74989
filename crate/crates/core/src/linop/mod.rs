//! Linear operators `A: L²(Ω) → L²(Σ)` with exact discrete adjoints.
//!
//! Inner products are weighted by the cell area of the respective grid, so
//! the adjoint of an operator whose matrix is `M` is `(h_Σ² / h_Ω²) Mᵀ`.

mod blur;
mod identity;
mod mean_deficit;
mod norm;
mod radon;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub use blur::{make_gaussian_blur, make_gaussian_blur_with, make_periodic_gaussian_blur, BlurBackend, GaussianBlur};
pub use identity::{make_identity, Identity};
pub use mean_deficit::{make_mean_deficit, MeanDeficit};
pub use norm::{operator_norm, power_iteration, OperatorNormEstimate};
pub use radon::{make_circular_radon, CircularRadon, RadonGeometry};

use crate::error::{ensure_same_grid, Result};
use crate::field::{dot, Grid2D, ScalarField};

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    Identity,
    GaussianBlur { sigma: f64, truncation: f64, periodic: bool },
    MeanDeficit { eta: f64 },
    CircularRadon { n_angles: usize, n_radii: usize, epsilon: f64 },
    Adjoint(Box<OperatorKind>),
    /// Any operator defined outside this crate.
    Custom(String),
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Identity => write!(f, "identity"),
            OperatorKind::GaussianBlur { sigma, truncation, periodic } => write!(
                f,
                "gaussian-blur(sigma={sigma}, truncation={truncation}{})",
                if *periodic { ", periodic" } else { "" }
            ),
            OperatorKind::MeanDeficit { eta } => write!(f, "mean-deficit(eta={eta})"),
            OperatorKind::CircularRadon { n_angles, n_radii, epsilon } => write!(
                f,
                "circular-radon(n_angles={n_angles}, n_radii={n_radii}, epsilon={epsilon})"
            ),
            OperatorKind::Adjoint(inner) => write!(f, "adjoint of {inner}"),
            OperatorKind::Custom(name) => write!(f, "{name}"),
        }
    }
}

/// A matrix-free linear map between two grids.
///
/// `apply_into` and `adjoint_into` overwrite `out` completely.
pub trait LinearOperator: Send + Sync {
    fn domain_grid(&self) -> &Grid2D;
    fn range_grid(&self) -> &Grid2D;
    fn kind(&self) -> OperatorKind;
    fn apply_into(&self, u: &[f64], out: &mut [f64]);
    fn adjoint_into(&self, p: &[f64], out: &mut [f64]);
}

/// Shared, immutable handle to an operator.
#[derive(Clone)]
pub struct LinearOperatorHandle(Arc<dyn LinearOperator>);

impl fmt::Debug for LinearOperatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperatorHandle")
            .field("kind", &self.kind())
            .field("domain", self.domain_grid())
            .field("range", self.range_grid())
            .finish()
    }
}

impl LinearOperatorHandle {
    pub fn new(op: impl LinearOperator + 'static) -> Self {
        Self(Arc::new(op))
    }

    pub fn domain_grid(&self) -> &Grid2D {
        self.0.domain_grid()
    }

    pub fn range_grid(&self) -> &Grid2D {
        self.0.range_grid()
    }

    pub fn kind(&self) -> OperatorKind {
        self.0.kind()
    }

    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        ensure_same_grid(u.grid(), self.domain_grid())?;
        let mut out = vec![0.0; self.range_grid().len()];
        self.0.apply_into(u.data(), &mut out);
        ScalarField::new(*self.range_grid(), out)
    }

    pub fn adjoint(&self, p: &ScalarField) -> Result<ScalarField> {
        ensure_same_grid(p.grid(), self.range_grid())?;
        let mut out = vec![0.0; self.domain_grid().len()];
        self.0.adjoint_into(p.data(), &mut out);
        ScalarField::new(*self.domain_grid(), out)
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.domain_grid().len());
        debug_assert_eq!(out.len(), self.range_grid().len());
        self.0.apply_into(u, out)
    }

    pub fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        debug_assert_eq!(p.len(), self.range_grid().len());
        debug_assert_eq!(out.len(), self.domain_grid().len());
        self.0.adjoint_into(p, out)
    }

    /// The operator `A*`, viewed as a map from the range grid to the domain grid.
    pub fn transposed(&self) -> Self {
        Self(Arc::new(Transposed(self.0.clone())))
    }
}

struct Transposed(Arc<dyn LinearOperator>);

impl LinearOperator for Transposed {
    fn domain_grid(&self) -> &Grid2D {
        self.0.range_grid()
    }
    fn range_grid(&self) -> &Grid2D {
        self.0.domain_grid()
    }
    fn kind(&self) -> OperatorKind {
        match self.0.kind() {
            OperatorKind::Adjoint(inner) => *inner,
            k => OperatorKind::Adjoint(Box::new(k)),
        }
    }
    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.0.adjoint_into(u, out)
    }
    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        self.0.apply_into(p, out)
    }
}

pub(crate) fn random_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Largest relative residual
/// `|⟨Au, p⟩ − ⟨u, A*p⟩| / (‖Au‖‖p‖ + ‖u‖‖A*p‖)` over seeded random pairs.
pub fn adjoint_check(op: &LinearOperatorHandle, n_trials: usize, seed: u64) -> f64 {
    let dg = *op.domain_grid();
    let rg = *op.range_grid();
    let (wd, wr) = (dg.cell_area(), rg.cell_area());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut au = vec![0.0; rg.len()];
    let mut atp = vec![0.0; dg.len()];
    let mut worst = 0.0f64;
    for _ in 0..n_trials {
        let u = random_vec(&mut rng, dg.len());
        let p = random_vec(&mut rng, rg.len());
        op.apply_into(&u, &mut au);
        op.adjoint_into(&p, &mut atp);
        let lhs = wr * dot(&au, &p);
        let rhs = wd * dot(&u, &atp);
        let scale = (wr * dot(&au, &au)).sqrt() * (wr * dot(&p, &p)).sqrt()
            + (wd * dot(&u, &u)).sqrt() * (wd * dot(&atp, &atp)).sqrt();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transposed_swaps_grids_and_roles() {
        let g = Grid2D::new(12, 12, 0.1, [0.0, 0.0]).unwrap();
        let a = make_mean_deficit(g, 0.2).unwrap();
        let at = a.transposed();
        assert_eq!(at.domain_grid(), a.range_grid());
        assert_eq!(at.range_grid(), a.domain_grid());
        assert!(adjoint_check(&at, 3, 1) <= 1e-12);
        assert_eq!(at.transposed().kind(), a.kind());
    }

    #[test]
    fn apply_rejects_wrong_grid() {
        let g = Grid2D::new(4, 4, 1.0, [0.0, 0.0]).unwrap();
        let other = Grid2D::new(5, 4, 1.0, [0.0, 0.0]).unwrap();
        let id = make_identity(g);
        assert!(id.apply(&ScalarField::zeros(other)).is_err());
        assert!(id.adjoint(&ScalarField::zeros(other)).is_err());
    }

    use proptest::prelude::*;

    /// Rectangular grids of 8 to 23 pixels a side.
    fn grid_strategy() -> impl Strategy<Value = Grid2D> {
        (8usize..24, 8usize..24, 0.02f64..0.5).prop_map(|(nx, ny, h)| Grid2D::new(nx, ny, h, [-1.0, 0.5]).unwrap())
    }

    /// Square grids covering `[-1, 1]²`, as the circular Radon transform needs.
    fn disk_grid_strategy() -> impl Strategy<Value = Grid2D> {
        (8usize..24, 0usize..3).prop_map(|(n, pad)| Grid2D::centered_square(1.0, 2.0 / n as f64, pad).unwrap())
    }

    fn operators(g: Grid2D, disk_grid: Grid2D, sigma_px: f64, window_px: f64) -> Vec<LinearOperatorHandle> {
        vec![
            make_identity(g),
            make_gaussian_blur(g, sigma_px * g.h(), 3.0).unwrap(),
            make_periodic_gaussian_blur(g, sigma_px * g.h(), 3.0).unwrap(),
            make_mean_deficit(g, window_px * g.h()).unwrap(),
            make_circular_radon(disk_grid, 16, 12, 0.05).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn built_operators_are_exact_transposes(
            g in grid_strategy(),
            dg in disk_grid_strategy(),
            sigma_px in 0.5f64..2.5,
            window_px in 1.0f64..3.0,
            seed in any::<u64>(),
        ) {
            for op in operators(g, dg, sigma_px, window_px) {
                let e = adjoint_check(&op, 3, seed);
                prop_assert!(e <= 1e-10, "{}: {e}", op.kind());
            }
        }

        #[test]
        fn norm_of_adjoint_matches(
            g in grid_strategy(),
            dg in disk_grid_strategy(),
            sigma_px in 0.5f64..2.5,
            window_px in 1.0f64..3.0,
            seed in any::<u64>(),
        ) {
            for op in operators(g, dg, sigma_px, window_px) {
                let a = operator_norm(&op, 1e-13, 20_000, 3).value;
                let b = operator_norm(&op.transposed(), 1e-13, 20_000, 4).value;
                // power iteration resolves a clustered top of the spectrum only slowly
                prop_assert!((a - b).abs() <= 1e-4 * a.max(b), "{}: {a} vs {b}", op.kind());
                // |Av|^2 = <A*Av, v> <= |A*(Av)| |v| for every v
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                let dg = *op.domain_grid();
                let v = ScalarField::new(dg, random_vec(&mut rng, dg.len())).unwrap();
                let av = op.apply(&v).unwrap();
                let back = op.adjoint(&av).unwrap();
                let (nv, nav) = (v.norm(), av.norm());
                prop_assert!(nav * nav <= back.norm() * nv * (1.0 + 1e-12), "{}", op.kind());
                prop_assert!(nav <= a.max(b) * nv * (1.0 + 1e-4), "{}", op.kind());
            }
        }

        #[test]
        fn radon_is_linear(g in disk_grid_strategy(), a in -3.0f64..3.0, b in 0.0f64..3.0, seed in any::<u64>()) {
            let op = make_circular_radon(g, 16, 12, 0.05).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let u = ScalarField::new(g, random_vec(&mut rng, g.len())).unwrap();
            let v = ScalarField::new(g, random_vec(&mut rng, g.len())).unwrap();
            let lhs = op.apply(&u.scaled(a).add(&v.scaled(b)).unwrap()).unwrap();
            let rhs = op.apply(&u).unwrap().scaled(a).add(&op.apply(&v).unwrap().scaled(b)).unwrap();
            let scale = (a.abs() + b) * (op.apply(&u).unwrap().norm() + op.apply(&v).unwrap().norm());
            prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn mean_deficit_annihilates_constants(g in grid_strategy(), window_px in 1.0f64..3.0, c in -1e3f64..1e3) {
            let op = make_mean_deficit(g, window_px * g.h()).unwrap();
            let out = op.apply(&ScalarField::constant(g, c)).unwrap();
            prop_assert!(out.max_abs() <= 1e-12 * c.abs());
        }
    }
}
