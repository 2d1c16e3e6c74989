use log::{debug, warn};

use super::{HistoryRecord, ProblemSpec, SolveConfig, SolveResult, StepInfo, StepRule};
use crate::error::{ensure_same_grid, Error, Result};
use crate::field::{dot, ScalarField};
use crate::linop::{operator_norm, OperatorKind};
use crate::tv::{project_dual_ball, project_in_place, Scheme, VectorField2};

/// Squared upper bound of the difference operator norm.
fn diff_norm_sq_bound(scheme: Scheme, h: f64) -> f64 {
    match scheme {
        Scheme::Forward => 8.0 / (h * h),
        Scheme::Upwind => 16.0 / (h * h),
    }
}

/// Consecutive rising checks above `10 F_α(0)` that abort a solve.
const DIVERGENCE_STRIKES: usize = 3;

/// Solves from `u = 0`, `z = 0`.
pub fn solve(problem: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    solve_warm(problem, cfg, None, None)
}

/// Solves from the given primal and TV-dual starting points.
///
/// The primal-dual iteration runs on the stacked map `u ↦ (A u, D u)`, `D`
/// the difference operator of the context's scheme. With `p = (f − A u)/α`
/// and `z = −y` (`y` the dual iterate of the difference block), the
/// optimality system reads `A* p = div z / α` on the support of `u`.
/// For `A = Id` the fidelity enters through its proximal map in the primal
/// step instead, so only the difference block is dualized.
pub fn solve_warm(
    problem: &ProblemSpec,
    cfg: &SolveConfig,
    u0: Option<&ScalarField>,
    z0: Option<&VectorField2>,
) -> Result<SolveResult> {
    if cfg.check_every == 0 {
        return Err(Error::InvalidParameter("check_every must be positive".into()));
    }
    let op = problem.op();
    let ctx = problem.ctx();
    let grid = *ctx.grid();
    let h = grid.h();
    let n = grid.len();
    let m = op.range_grid().len();
    let (wd, wr) = (grid.cell_area(), op.range_grid().cell_area());
    let alpha = problem.alpha();
    let f = problem.f().data();
    let nc = ctx.scheme().n_components();
    let support: Vec<f64> = ctx
        .domain()
        .support()
        .bits()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();

    let a_norm = {
        let est = operator_norm(op, 1e-6, 1000, cfg.seed);
        if est.value > 0.0 {
            est.value * 1.01
        } else {
            1.0
        }
    };
    let implicit = op.kind() == OperatorKind::Identity;
    let d_norm = diff_norm_sq_bound(ctx.scheme(), h).sqrt();
    let l2 = if implicit {
        d_norm * d_norm
    } else {
        a_norm * a_norm + d_norm * d_norm
    };
    let l = l2.sqrt();
    let (tau, sigma) = match cfg.steps {
        StepRule::Auto => (0.99 / l, 0.99 / l),
        StepRule::Ratio(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!("step ratio must be positive, got {r}")));
            }
            (0.99 * r / l, 0.99 / (r * l))
        }
        StepRule::Fixed { tau, sigma } => {
            if !(tau > 0.0 && sigma > 0.0) || tau * sigma * l2 > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "step sizes tau={tau}, sigma={sigma} violate tau*sigma*L^2 <= 1 (L^2 = {l2:e})"
                )));
            }
            (tau, sigma)
        }
    };
    debug!("solve: alpha={alpha} tau={tau:e} sigma={sigma:e} |A|~{a_norm:e}");

    let mut u = vec![0.0; n];
    if let Some(u0) = u0 {
        ensure_same_grid(u0.grid(), &grid)?;
        for ((ui, &v), &w) in u.iter_mut().zip(u0.data()).zip(&support) {
            *ui = v * w;
        }
    }
    let mut y = vec![vec![0.0; n]; nc];
    if let Some(z0) = z0 {
        ensure_same_grid(z0.grid(), &grid)?;
        if z0.scheme() != ctx.scheme() {
            return Err(Error::InvalidParameter("warm-start dual has the wrong layout".into()));
        }
        let z = project_dual_ball(z0, alpha);
        for (yc, zc) in y.iter_mut().zip(z.components()) {
            for (yi, zi) in yc.iter_mut().zip(zc) {
                *yi = -zi;
            }
        }
        if ctx.scheme() == Scheme::Upwind {
            project_in_place(&mut y, alpha, Scheme::Upwind);
        }
    }
    let mut au = vec![0.0; m];
    op.apply_into(&u, &mut au);
    let mut q: Vec<f64> = au.iter().zip(f).map(|(a, b)| a - b).collect();
    let mut ubar = u.clone();
    let mut u_old = vec![0.0; n];
    let mut q_old = vec![0.0; m];
    let mut y_old = vec![vec![0.0; n]; nc];
    let mut du = vec![vec![0.0; n]; nc];
    let mut atq = vec![0.0; n];
    let mut divy = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; m];

    let f0 = problem.energy_at_zero();
    let mut history = Vec::new();
    let mut u_norms: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut strikes = 0;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        iterations = k;
        let check = k % cfg.check_every == 0 || k == cfg.max_iter;
        if check {
            q_old.copy_from_slice(&q);
            for (yo, yc) in y_old.iter_mut().zip(&y) {
                yo.copy_from_slice(yc);
            }
        }
        // dual steps
        if !implicit {
            op.apply_into(&ubar, &mut au);
            for ((qi, &ai), &fi) in q.iter_mut().zip(&au).zip(f) {
                *qi = (*qi + sigma * (ai - fi)) / (1.0 + sigma);
            }
        }
        ctx.diff_into(&ubar, &mut du);
        for (yc, dc) in y.iter_mut().zip(&du) {
            for (yi, di) in yc.iter_mut().zip(dc) {
                *yi += sigma * di;
            }
        }
        project_in_place(&mut y, alpha, ctx.scheme());
        // primal step
        ctx.div_into(&y, &mut divy);
        u_old.copy_from_slice(&u);
        if implicit {
            let c = 1.0 / (1.0 + tau);
            for i in 0..n {
                let un = support[i] * c * (u[i] + tau * (divy[i] + f[i]));
                ubar[i] = 2.0 * un - u[i];
                u[i] = un;
            }
        } else {
            op.adjoint_into(&q, &mut atq);
            for i in 0..n {
                let un = support[i] * (u[i] - tau * (atq[i] - divy[i]));
                ubar[i] = 2.0 * un - u[i];
                u[i] = un;
            }
        }

        if !check {
            continue;
        }
        let du_norm = {
            let d: f64 = u.iter().zip(&u_old).map(|(a, b)| (a - b) * (a - b)).sum();
            (wd * d).sqrt()
        };
        let dq_norm = {
            let d: f64 = q.iter().zip(&q_old).map(|(a, b)| (a - b) * (a - b)).sum();
            (wr * d).sqrt()
        };
        let dy_norm = {
            let d: f64 = y
                .iter()
                .zip(&y_old)
                .map(|(a, b)| a.iter().zip(b).map(|(x, z)| (x - z) * (x - z)).sum::<f64>())
                .sum();
            (wd * d).sqrt()
        };
        let residual = du_norm / tau + dq_norm / sigma + dy_norm / sigma;
        let rec = diagnostics(problem, &u, &divy, &support, &mut au, &mut p, &mut v, &mut du);
        let rec = HistoryRecord {
            iter: k,
            residual,
            ..rec
        };
        history.push(rec);
        u_norms.push((wd * dot(&u, &u)).sqrt());
        // energies overshoot transiently; divergence needs the iterate
        // residual to grow as well
        let above = f0 > 0.0 && rec.energy > 10.0 * f0;
        let rising = history.len() >= 2 && rec.residual > history[history.len() - 2].residual;
        strikes = if above && rising { strikes + 1 } else { 0 };
        if !rec.energy.is_finite() || strikes >= DIVERGENCE_STRIKES {
            return Err(Error::Divergence {
                iteration: k,
                energy: rec.energy,
                reference: f0,
            });
        }
        if residual <= cfg.tol_residual {
            converged = true;
            break;
        }
    }

    let energy_monotone = history
        .windows(2)
        .all(|w| w[1].energy <= w[0].energy + 1e-10 * f0);
    let noncoercive_warning = !converged
        && u_norms.len() >= 5
        && u_norms[u_norms.len() - 5..].windows(2).all(|w| w[1] > w[0]);
    if noncoercive_warning {
        warn!("‖u_k‖ grew monotonically over the last checks; the problem may not be coercive");
    }
    if !converged {
        debug!("solver stopped at max_iter = {} without meeting the tolerance", cfg.max_iter);
    }

    // final dual quantities from the returned primal iterate
    op.apply_into(&u, &mut au);
    for ((pi, &fi), &ai) in p.iter_mut().zip(f).zip(&au) {
        *pi = (fi - ai) / alpha;
    }
    op.adjoint_into(&p, &mut v);
    for (vi, &w) in v.iter_mut().zip(&support) {
        *vi *= w;
    }
    let z_comps: Vec<Vec<f64>> = y
        .iter()
        .map(|c| c.iter().map(|&yi| -yi).collect())
        .collect();
    let z_final = VectorField2::from_components(grid, ctx.scheme(), z_comps)?;
    Ok(SolveResult {
        alpha,
        u_alpha: ScalarField::new(grid, u)?,
        p_alpha: ScalarField::new(*op.range_grid(), p)?,
        v_alpha: ScalarField::new(grid, v)?,
        z_final,
        history,
        iterations,
        converged,
        steps: StepInfo {
            tau,
            sigma,
            diff_norm: d_norm,
            opnorm: a_norm,
        },
        energy_monotone,
        noncoercive_warning,
    })
}

/// Energy, dual value, gap and feasibility at the primal iterate `u`, with
/// `div z = −div y` supplied as `divy`.
#[allow(clippy::too_many_arguments)]
fn diagnostics(
    problem: &ProblemSpec,
    u: &[f64],
    divy: &[f64],
    support: &[f64],
    au: &mut [f64],
    p: &mut [f64],
    v: &mut [f64],
    scratch: &mut [Vec<f64>],
) -> HistoryRecord {
    let op = problem.op();
    let alpha = problem.alpha();
    let f = problem.f().data();
    let wd = problem.ctx().grid().cell_area();
    let wr = op.range_grid().cell_area();
    op.apply_into(u, au);
    let mut res2 = 0.0;
    for ((pi, &fi), &ai) in p.iter_mut().zip(f).zip(au.iter()) {
        let r = fi - ai;
        res2 += r * r;
        *pi = r / alpha;
    }
    let tv = problem.ctx().tv_of(u, scratch);
    let energy = 0.5 * wr * res2 + alpha * tv;
    let dual = wr * dot(f, p) - 0.5 * alpha * wr * dot(p, p);
    op.adjoint_into(p, v);
    let mut diff2 = 0.0;
    let mut v2 = 0.0;
    for i in 0..u.len() {
        if support[i] == 0.0 {
            continue;
        }
        let divz_over_alpha = -divy[i] / alpha;
        diff2 += (v[i] - divz_over_alpha).powi(2);
        v2 += v[i] * v[i];
    }
    let feasibility = (wd * diff2).sqrt() / (wd * v2).sqrt().max(1.0);
    HistoryRecord {
        iter: 0,
        energy,
        dual,
        gap: energy - alpha * dual,
        feasibility,
        residual: 0.0,
    }
}
