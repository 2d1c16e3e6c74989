use super::{extract_level_set, hausdorff_distance, symmetric_difference_area};
use crate::error::{ensure_same_grid, Result};
use crate::field::io::fmt_f64;
use crate::field::ScalarField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub alpha: f64,
    pub t: f64,
    /// `d_H(∂U_n(t), ∂U†(t))`; infinite when either boundary is empty.
    pub hausdorff: f64,
    pub sym_diff: f64,
    pub empty_boundary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendSummary {
    pub t: f64,
    /// Least-squares slope of `log d_H` against `log α` over rows with a
    /// finite, positive distance; `None` with fewer than two such rows.
    pub slope: Option<f64>,
    pub hausdorff_strictly_decreasing: bool,
    pub sym_diff_strictly_decreasing: bool,
    pub final_hausdorff: f64,
    pub final_sym_diff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// One entry per nonzero threshold.
    pub trends: Vec<TrendSummary>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,alpha,t,hausdorff,sym_diff_area,empty_boundary\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                fmt_f64(r.alpha),
                fmt_f64(r.t),
                fmt_f64(r.hausdorff),
                fmt_f64(r.sym_diff),
                r.empty_boundary as u8
            ));
        }
        out
    }

    pub fn trends_csv(&self) -> String {
        let mut out = String::from(
            "t,loglog_slope,hausdorff_decreasing,sym_diff_decreasing,final_hausdorff,final_sym_diff\n",
        );
        for s in &self.trends {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(s.t),
                s.slope.map(fmt_f64).unwrap_or_default(),
                s.hausdorff_strictly_decreasing as u8,
                s.sym_diff_strictly_decreasing as u8,
                fmt_f64(s.final_hausdorff),
                fmt_f64(s.final_sym_diff)
            ));
        }
        out
    }

    pub fn trend(&self, t: f64) -> Option<&TrendSummary> {
        self.trends.iter().find(|s| s.t == t)
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Level-set distances of a sequence of reconstructions `(α_n, u_n)` to the
/// reference `u†`, for every threshold.
pub fn convergence_report<'a>(
    runs: impl IntoIterator<Item = (f64, &'a ScalarField)>,
    reference: &ScalarField,
    thresholds: &[f64],
) -> Result<ConvergenceReport> {
    let refs: Vec<_> = thresholds.iter().map(|&t| extract_level_set(reference, t)).collect();
    let mut rows = Vec::new();
    for (n, (alpha, u)) in runs.into_iter().enumerate() {
        ensure_same_grid(u.grid(), reference.grid())?;
        for (ti, &t) in thresholds.iter().enumerate() {
            let level = extract_level_set(u, t);
            let d = hausdorff_distance(&level, &refs[ti])?;
            if let Some(why) = d.explanation() {
                log::warn!("n = {n}, t = {t}: {why}");
            }
            rows.push(ConvergenceRow {
                n,
                alpha,
                t,
                hausdorff: d.value,
                sym_diff: symmetric_difference_area(level.mask(), refs[ti].mask())?,
                empty_boundary: !d.is_finite(),
            });
        }
    }
    let trends = thresholds
        .iter()
        .filter(|&&t| t != 0.0)
        .map(|&t| {
            let sel: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.t == t).collect();
            let alphas: Vec<f64> = sel.iter().map(|r| r.alpha).collect();
            let dh: Vec<f64> = sel.iter().map(|r| r.hausdorff).collect();
            let sd: Vec<f64> = sel.iter().map(|r| r.sym_diff).collect();
            TrendSummary {
                t,
                slope: log_log_slope(&alphas, &dh),
                hausdorff_strictly_decreasing: strictly_decreasing(&dh),
                sym_diff_strictly_decreasing: strictly_decreasing(&sd),
                final_hausdorff: dh.last().copied().unwrap_or(f64::NAN),
                final_sym_diff: sd.last().copied().unwrap_or(f64::NAN),
            }
        })
        .collect();
    Ok(ConvergenceReport { rows, trends })
}
