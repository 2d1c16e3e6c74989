use super::{solve_warm, ProblemSpec, SolveConfig, SolveResult};
use crate::error::{ensure_same_grid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    pub alpha: f64,
    pub p_norm: f64,
    /// `‖p_α − p_α'‖` against the previous (larger) α.
    pub diff_prev: Option<f64>,
}

/// Trajectory of `‖p_α‖` over a decreasing α sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct DualProbe {
    pub rows: Vec<ProbeRow>,
    /// `Some(true)` when over the last half of the sweep every step grows
    /// `‖p_α‖` by at most 5%; `None` for a single α.
    pub bounded: Option<bool>,
}

impl DualProbe {
    pub fn to_csv(&self) -> String {
        use crate::field::io::fmt_f64;
        let mut out = String::from("alpha,p_norm,diff_prev\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(r.alpha),
                fmt_f64(r.p_norm),
                r.diff_prev.map(fmt_f64).unwrap_or_default()
            ));
        }
        out
    }
}

/// Builds the probe table from solves ordered by decreasing α.
pub fn probe_from_results(results: &[SolveResult]) -> Result<DualProbe> {
    let mut rows = Vec::with_capacity(results.len());
    for (k, r) in results.iter().enumerate() {
        let diff_prev = if k == 0 {
            None
        } else {
            let prev = &results[k - 1];
            if r.alpha >= prev.alpha {
                return Err(Error::InvalidParameter(
                    "probe expects strictly decreasing alpha".into(),
                ));
            }
            ensure_same_grid(prev.p_alpha.grid(), r.p_alpha.grid())?;
            Some(r.p_alpha.sub(&prev.p_alpha)?.norm())
        };
        rows.push(ProbeRow {
            alpha: r.alpha,
            p_norm: r.p_alpha.norm(),
            diff_prev,
        });
    }
    let n = rows.len();
    let bounded = (n >= 2).then(|| {
        let start = n.div_ceil(2).max(1);
        (start..n).all(|k| rows[k].p_norm <= 1.05 * rows[k - 1].p_norm)
    });
    Ok(DualProbe { rows, bounded })
}

/// Solves every problem (warm-starting each from the previous solution) and
/// tabulates the dual trajectory.
pub fn dual_convergence_probe(problems: &[ProblemSpec], cfg: &SolveConfig) -> Result<(DualProbe, Vec<SolveResult>)> {
    if let Some(first) = problems.first() {
        for p in &problems[1..] {
            if p.op().kind() != first.op().kind()
                || p.f() != first.f()
                || p.ctx().regime() != first.ctx().regime()
            {
                return Err(Error::InvalidParameter(
                    "probe problems must share operator, data and regime".into(),
                ));
            }
        }
    }
    let mut results: Vec<SolveResult> = Vec::with_capacity(problems.len());
    for p in problems {
        let r = match results.last() {
            Some(prev) => solve_warm(p, cfg, Some(&prev.u_alpha), Some(&prev.z_final))?,
            None => solve_warm(p, cfg, None, None)?,
        };
        results.push(r);
    }
    Ok((probe_from_results(&results)?, results))
}
