//! Minimization of `F_α(u) = ½‖Au − f‖² + α TV(u)` and its dual quantities.

mod chambolle_pock;
mod energy;
mod param;
mod probe;

pub use chambolle_pock::{solve, solve_warm};
pub use energy::{dual_surrogate, primal_energy, DualSurrogate};
pub use param::{check_eta, default_alpha_floor, ParamChoice, ETA_DEFAULT, ETA_LIMIT};
pub use probe::{dual_convergence_probe, probe_from_results, DualProbe, ProbeRow};

use crate::error::{ensure_same_grid, Error, Result};
use crate::field::ScalarField;
use crate::linop::LinearOperatorHandle;
use crate::tv::{TvContext, VectorField2};

/// A TV-regularized least-squares problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    op: LinearOperatorHandle,
    f: ScalarField,
    alpha: f64,
    ctx: TvContext,
}

impl ProblemSpec {
    pub fn new(op: LinearOperatorHandle, f: ScalarField, alpha: f64, ctx: TvContext) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        ensure_same_grid(op.domain_grid(), ctx.grid())?;
        ensure_same_grid(f.grid(), op.range_grid())?;
        Ok(Self { op, f, alpha, ctx })
    }

    pub fn op(&self) -> &LinearOperatorHandle {
        &self.op
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ctx(&self) -> &TvContext {
        &self.ctx
    }

    /// Same operator, data and regime with another regularization parameter.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.op.clone(), self.f.clone(), alpha, self.ctx.clone())
    }

    /// Same operator, parameter and regime with other data.
    pub fn with_data(&self, f: ScalarField) -> Result<Self> {
        Self::new(self.op.clone(), f, self.alpha, self.ctx.clone())
    }

    /// `F_α(0) = ½‖f‖²`.
    pub fn energy_at_zero(&self) -> f64 {
        0.5 * self.f.norm().powi(2)
    }
}

/// Default `τ / (0.99 / L)`; primal steps a third of the symmetric choice.
pub const DEFAULT_STEP_RATIO: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// `τ = σ = 0.99 / L`, `L² = ‖A‖² + ‖D‖²`.
    Auto,
    /// `τ = 0.99 r / L`, `σ = 0.99 / (r L)`.
    Ratio(f64),
    Fixed { tau: f64, sigma: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub max_iter: usize,
    pub steps: StepRule,
    /// Stop once the combined iterate residual falls below this value.
    pub tol_residual: f64,
    pub check_every: usize,
    /// Seed of the power iteration for `‖A‖`.
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            steps: StepRule::Ratio(DEFAULT_STEP_RATIO),
            tol_residual: 1e-6,
            check_every: 50,
            seed: 0,
        }
    }
}

impl SolveConfig {
    /// Certified stopping tolerance `1e-8 (1 + ‖f‖)`.
    pub fn certified(f: &ScalarField) -> Self {
        Self {
            tol_residual: 1e-8 * (1.0 + f.norm()),
            ..Self::default()
        }
    }

    /// Figure-reproduction tolerance `1e-6 (1 + ‖f‖)`.
    pub fn figure(f: &ScalarField) -> Self {
        Self {
            tol_residual: 1e-6 * (1.0 + f.norm()),
            ..Self::default()
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_residual = tol;
        self
    }

    pub fn with_check_every(mut self, every: usize) -> Self {
        self.check_every = every;
        self
    }
}

/// Diagnostics recorded every `check_every` iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub iter: usize,
    pub energy: f64,
    /// `D_α(p) = ⟨f, p⟩ − (α/2)‖p‖²` at `p = (f − A u)/α`.
    pub dual: f64,
    /// `F_α(u) − α D_α(p)`.
    pub gap: f64,
    pub feasibility: f64,
    pub residual: f64,
}

/// Steps actually used by a solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub tau: f64,
    pub sigma: f64,
    /// Estimate of `‖A‖` (with a 1% safety margin).
    pub opnorm: f64,
    /// Upper bound of `‖D‖` used for the step sizes.
    pub diff_norm: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub alpha: f64,
    pub u_alpha: ScalarField,
    /// `(f − A u_α) / α` on the range grid.
    pub p_alpha: ScalarField,
    /// `A* p_α`, restricted to the support of the unknown.
    pub v_alpha: ScalarField,
    /// TV dual field with `|z| ≤ α` and `A* p_α ≈ div z / α`.
    pub z_final: VectorField2,
    pub history: Vec<HistoryRecord>,
    pub iterations: usize,
    pub converged: bool,
    pub steps: StepInfo,
    /// Whether the recorded energies never rose by more than `1e-10 F_α(0)`.
    pub energy_monotone: bool,
    /// Set when `‖u_k‖` kept growing, a sign of a non-coercive problem.
    pub noncoercive_warning: bool,
}

impl SolveResult {
    pub fn final_record(&self) -> Option<&HistoryRecord> {
        self.history.last()
    }
}

/// CSV of a solve history: `iter,F_alpha,D_alpha,gap,feasibility_violation,residual`.
pub fn history_csv(history: &[HistoryRecord]) -> String {
    use crate::field::io::fmt_f64;
    let mut out = String::from("iter,F_alpha,D_alpha,gap,feasibility_violation,residual\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iter,
            fmt_f64(r.energy),
            fmt_f64(r.dual),
            fmt_f64(r.gap),
            fmt_f64(r.feasibility),
            fmt_f64(r.residual)
        ));
    }
    out
}

#[cfg(test)]
mod tests;
