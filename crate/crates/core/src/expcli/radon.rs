use std::f64::consts::PI;

use super::config::ExperimentConfig;
use super::manifest::OutputSink;
use super::noise::{derive_seeds, noise_with_norm};
use super::{check_thresholds, config_error, record_trends, write_field, write_levels, write_solve};
use crate::error::{Error, Result};
use crate::field::io::{fmt_f64, sinogram_to_csv};
use crate::field::{mollified_disk, rasterize_disk, DomainSpec, Grid2D, Regime, ScalarField};
use crate::level::{convergence_report, extract_level_set, hausdorff_distance};
use crate::linop::{make_circular_radon, operator_norm, RadonGeometry};
use crate::solver::{check_eta, default_alpha_floor, dual_convergence_probe, solve_warm, ParamChoice, ProblemSpec, SolveResult};
use crate::tv::TvContext;

#[derive(Clone, Debug, PartialEq)]
pub struct RadonParams {
    pub n: usize,
    pub n_angles: usize,
    pub n_radii: usize,
    pub epsilon: f64,
    pub center: [f64; 2],
    pub radius: f64,
    pub mu: f64,
    pub deltas: Vec<f64>,
    pub eta: f64,
    pub thresholds: Vec<f64>,
}

impl RadonParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let p = Self {
            n: cfg.usize("n")?,
            n_angles: cfg.usize("n_angles")?,
            n_radii: cfg.usize("n_radii")?,
            epsilon: cfg.f64("radon_epsilon")?,
            center: cfg.point("phantom_center")?,
            radius: cfg.positive("phantom_radius")?,
            mu: cfg.positive("phantom_mu")?,
            deltas: cfg.list("deltas")?,
            eta: cfg.positive("eta")?,
            thresholds: cfg.list("thresholds")?,
        };
        if p.n < 8 || p.n_angles < 4 || p.n_radii < 4 {
            return Err(config_error("`n`, `n_angles` and `n_radii` are too small"));
        }
        if !(0.0..1.0).contains(&p.epsilon) {
            return Err(config_error("`radon_epsilon` must lie in [0, 1)"));
        }
        let reach = (p.center[0].powi(2) + p.center[1].powi(2)).sqrt() + p.radius + 2.0 * p.mu;
        if reach > 1.0 - p.epsilon {
            return Err(config_error(format!(
                "the phantom reaches radius {reach}, beyond 1 - radon_epsilon"
            )));
        }
        if p.deltas.iter().any(|&d| d < 0.0) || p.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(config_error("`deltas` must be nonnegative and strictly decreasing"));
        }
        check_eta(p.eta, Regime::Dirichlet, None).map_err(|e| config_error(e.to_string()))?;
        check_thresholds(&p.thresholds)?;
        Ok(p)
    }

    /// `n` pixels across `[-1, 1]` plus a one-pixel frame.
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::centered_square(1.0, 2.0 / self.n as f64, 1)
    }

    pub fn geometry(&self) -> RadonGeometry {
        RadonGeometry {
            n_angles: self.n_angles,
            n_radii: self.n_radii,
            angle_offset: 0.0,
        }
    }
}

/// Row-wise argmax of a sinogram against the radius `|z_a − x0|` of the
/// circle through the phantom center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinogramCheck {
    /// Largest `|argmax − predicted|` in radial bins.
    pub max_bin_error: f64,
    pub rows_within: usize,
    pub rows: usize,
}

impl SinogramCheck {
    pub fn passes(&self, bins: f64) -> bool {
        self.max_bin_error <= bins
    }
}

pub fn sinogram_argmax_check(sino: &ScalarField, geometry: &RadonGeometry, x0: [f64; 2], bins: f64) -> Result<SinogramCheck> {
    let g = sino.grid();
    if g.nx() != geometry.n_radii || g.ny() != geometry.n_angles {
        return Err(Error::InvalidParameter("sinogram does not match the geometry".into()));
    }
    let bin = 2.0 / geometry.n_radii as f64;
    let mut worst = 0.0f64;
    let mut within = 0;
    for a in 0..geometry.n_angles {
        let row = &sino.data()[a * g.nx()..(a + 1) * g.nx()];
        let (arg, _) = row
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (b, &v)| if v > best.1 { (b, v) } else { best });
        let z = geometry.center(a);
        let t = ((z[0] - x0[0]).powi(2) + (z[1] - x0[1]).powi(2)).sqrt();
        let err = (arg as f64 - (t / bin - 0.5)).abs();
        worst = worst.max(err);
        if err <= bins {
            within += 1;
        }
    }
    Ok(SinogramCheck {
        max_bin_error: worst,
        rows_within: within,
        rows: geometry.n_angles,
    })
}

/// Circular-Radon inversion of the mollified disk on `B(0, 1)` with
/// homogeneous Dirichlet conditions, `α` chosen by the parameter rule for
/// each noise norm, followed by the noiseless dual probe.
pub fn run_radon(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<()> {
    let p = RadonParams::from_config(cfg)?;
    let grid = p.grid()?;
    let h = grid.h();
    let truth = mollified_disk(&grid, p.center, p.radius, p.mu)?;
    let op = make_circular_radon(grid, p.n_angles, p.n_radii, p.epsilon)?;
    let solver_seed = cfg.u64("solver_seed")?;
    let r_norm = operator_norm(&op, 1e-8, 1000, solver_seed).value;
    sink.opnorm("R", r_norm);
    sink.stat("radon_norm_within_bound", r_norm <= 2.0 * PI * 1.05);
    let omega = rasterize_disk(&grid, [0.0, 0.0], 1.0);
    let ctx = TvContext::forward(DomainSpec::dirichlet(omega)?);
    let clean = op.apply(&truth)?;
    write_field(sink, "u_true", &truth)?;
    write_levels(sink, "u_true", &truth, &p.thresholds)?;
    sink.write("sinogram.csv", &sinogram_to_csv(&clean, 0.0))?;
    let check = sinogram_argmax_check(&clean, &p.geometry(), p.center, 2.0)?;
    sink.stat_f64("sinogram.max_bin_error", check.max_bin_error);
    sink.stat("sinogram.rows_within_2_bins", check.rows_within);
    sink.stat("sinogram.argmax_ok", check.passes(2.0));

    let floor = default_alpha_floor(clean.norm(), ctx.tv_value(&truth)?);
    let alphas: Vec<f64> = p
        .deltas
        .iter()
        .map(|&d| ParamChoice::new(d, r_norm, p.eta, Regime::Dirichlet, None, floor).map(|pc| pc.choose_alpha()))
        .collect::<Result<_>>()?;
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_error(format!(
            "the schedule gives non-decreasing alphas {alphas:?}; the smallest delta must exceed the floor"
        )));
    }
    let seeds = derive_seeds(cfg.u64("seed")?, p.deltas.len());
    let mut table = String::from("k,delta,alpha\n");
    let mut results: Vec<SolveResult> = Vec::new();
    for (k, ((&delta, &alpha), &seed)) in p.deltas.iter().zip(&alphas).zip(&seeds).enumerate() {
        sink.seed(format!("noise.{k}"), seed);
        table.push_str(&format!("{k},{},{}\n", fmt_f64(delta), fmt_f64(alpha)));
        let f = clean.add(&noise_with_norm(*op.range_grid(), delta, seed)?)?;
        let problem = ProblemSpec::new(op.clone(), f.clone(), alpha, ctx.clone())?;
        let prev = results.last();
        let res = solve_warm(&problem, &cfg.solve_config(&f)?, prev.map(|r| &r.u_alpha), prev.map(|r| &r.z_final))?;
        let stem = format!("u_{k}");
        write_solve(sink, &stem, &res)?;
        write_levels(sink, &stem, &res.u_alpha, &p.thresholds)?;
        results.push(res);
    }
    sink.write("schedule.csv", &table)?;
    let report = convergence_report(results.iter().map(|r| (r.alpha, &r.u_alpha)), &truth, &p.thresholds)?;
    sink.write("convergence.csv", &report.to_csv())?;
    sink.write("trends.csv", &report.trends_csv())?;
    record_trends(sink, &report);

    let base = ProblemSpec::new(op.clone(), clean.clone(), alphas[0], ctx.clone())?;
    let problems: Vec<ProblemSpec> = alphas.iter().map(|&a| base.with_alpha(a)).collect::<Result<_>>()?;
    let (probe, probe_runs) = dual_convergence_probe(&problems, &cfg.solve_config(&clean)?)?;
    sink.write("dual_probe.csv", &probe.to_csv())?;
    if let Some(b) = probe.bounded {
        sink.stat("probe.bounded", b);
    }
    let last = probe_runs.last().expect("nonempty schedule");
    write_solve(sink, "u_noiseless", last)?;
    let reference = extract_level_set(&truth, 0.5);
    let d = hausdorff_distance(&extract_level_set(&last.u_alpha, 0.5), &reference)?;
    sink.stat_f64("noiseless.hausdorff_t0.5", d.value);
    sink.stat_f64("noiseless.hausdorff_t0.5_over_h", d.value / h);
    sink.stat_f64("h", h);
    Ok(())
}
