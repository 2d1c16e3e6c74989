use super::{ProblemSpec, SolveResult};
use crate::error::{ensure_same_grid, Result};
use crate::field::ScalarField;

/// `F_α(u) = ½‖Au − f‖² + α TV(u)`.
pub fn primal_energy(problem: &ProblemSpec, u: &ScalarField) -> Result<f64> {
    let residual = problem.op().apply(u)?.sub(problem.f())?;
    let tv = problem.ctx().tv_value(u)?;
    Ok(0.5 * residual.norm().powi(2) + problem.alpha() * tv)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualSurrogate {
    /// `D_α(p) = ⟨f, p⟩ − (α/2)‖p‖²`.
    pub d_alpha: f64,
    /// `‖A* p − div z / α‖ / max(1, ‖A* p‖)` over the support of `u`.
    pub feasibility: f64,
    /// `F_α(u) − α D_α(p)`; nonnegative whenever `A* p ∈ ∂TV(0)`.
    pub gap: f64,
}

/// Dual value, feasibility violation and duality gap of a solve result.
pub fn dual_surrogate(problem: &ProblemSpec, result: &SolveResult) -> Result<DualSurrogate> {
    ensure_same_grid(result.p_alpha.grid(), problem.op().range_grid())?;
    let alpha = problem.alpha();
    let p = &result.p_alpha;
    let d_alpha = problem.f().inner(p)? - 0.5 * alpha * p.norm().powi(2);
    let support = problem.ctx().domain().support();
    let v = problem.op().adjoint(p)?.masked(support)?;
    let div_z = problem
        .ctx()
        .scheme_divergence(&result.z_final)?
        .masked(support)?;
    let diff = v.sub(&div_z.scaled(1.0 / alpha))?;
    let feasibility = diff.norm() / v.norm().max(1.0);
    let energy = primal_energy(problem, &result.u_alpha)?;
    Ok(DualSurrogate {
        d_alpha,
        feasibility,
        gap: energy - alpha * d_alpha,
    })
}
