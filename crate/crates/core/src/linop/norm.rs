use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{random_vec, LinearOperatorHandle};
use crate::field::dot;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorNormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub rel_change: f64,
    pub converged: bool,
}

/// Power iteration for the largest eigenvalue of a symmetric positive
/// semidefinite map `m` acting on vectors of length `n`, whose inner product
/// is `weight` times the Euclidean one.
///
/// Returns the square root of the eigenvalue estimate, so with `m = A*A`
/// the result estimates `‖A‖`. The estimate never decreases between
/// iterations.
pub fn power_iteration(
    n: usize,
    weight: f64,
    mut m: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> OperatorNormEstimate {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut x = random_vec(&mut rng, n);
    let mut y = vec![0.0; n];
    let nrm = (weight * dot(&x, &x)).sqrt();
    if nrm == 0.0 {
        return OperatorNormEstimate {
            value: 0.0,
            iterations: 0,
            rel_change: 0.0,
            converged: true,
        };
    }
    x.iter_mut().for_each(|v| *v /= nrm);
    let mut lambda = 0.0f64;
    let mut rel_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        m(&x, &mut y);
        let rayleigh = weight * dot(&x, &y);
        let next = lambda.max(rayleigh);
        rel_change = if next > 0.0 {
            (next - lambda).abs() / next
        } else {
            0.0
        };
        lambda = next;
        let ny = (weight * dot(&y, &y)).sqrt();
        if ny == 0.0 {
            rel_change = 0.0;
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if rel_change < tol {
            break;
        }
    }
    let converged = rel_change < tol;
    if !converged {
        warn!("power iteration stopped after {iterations} iterations, relative change {rel_change:e}");
    }
    OperatorNormEstimate {
        value: lambda.sqrt(),
        iterations,
        rel_change,
        converged,
    }
}

/// Estimates `‖A‖` by power iteration on `A*A` from a seeded random start.
pub fn operator_norm(
    op: &LinearOperatorHandle,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> OperatorNormEstimate {
    let n = op.domain_grid().len();
    let mut tmp = vec![0.0; op.range_grid().len()];
    power_iteration(
        n,
        op.domain_grid().cell_area(),
        |x, y| {
            op.apply_into(x, &mut tmp);
            op.adjoint_into(&tmp, y);
        },
        tol,
        max_iter,
        seed,
    )
}
