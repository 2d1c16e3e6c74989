use super::config::ExperimentConfig;
use super::manifest::OutputSink;
use super::noise::{derive_seeds, gen_gaussian_noise};
use super::{check_thresholds, config_error, record_trends, write_field, write_levels, write_solve};
use crate::error::Result;
use crate::field::{rasterize_disk, BinaryMask, DomainSpec, Grid2D, ScalarField};
use crate::level::convergence_report;
use crate::linop::{make_gaussian_blur, operator_norm};
use crate::solver::{solve_warm, ProblemSpec, SolveResult};
use crate::tv::TvContext;

#[derive(Clone, Debug, PartialEq)]
pub struct DeblurParams {
    pub n: usize,
    pub h: f64,
    pub alphas: Vec<f64>,
    pub noise_variance_factor: f64,
    pub disk_radius: f64,
    pub blur_sigma: f64,
    pub blur_truncation: f64,
    pub thresholds: Vec<f64>,
}

impl DeblurParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let p = Self {
            n: cfg.usize("n")?,
            h: cfg.positive("h")?,
            alphas: cfg.list("alphas")?,
            noise_variance_factor: cfg.f64("noise_variance_factor")?,
            disk_radius: cfg.positive("disk_radius")?,
            blur_sigma: cfg.positive("blur_sigma")?,
            blur_truncation: cfg.positive("blur_truncation")?,
            thresholds: cfg.list("thresholds")?,
        };
        if p.n < 8 {
            return Err(config_error("`n` must be at least 8"));
        }
        if p.alphas.iter().any(|&a| a.is_nan() || a <= 0.0) {
            return Err(config_error("every entry of `alphas` must be positive"));
        }
        if p.noise_variance_factor < 0.0 {
            return Err(config_error("`noise_variance_factor` must be >= 0"));
        }
        if p.disk_radius >= 0.5 * (p.n as f64 - 2.0) * p.h {
            return Err(config_error("`disk_radius` must leave the disk inside the rectangle"));
        }
        check_thresholds(&p.thresholds)?;
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::centered_square(0.5 * self.n as f64 * self.h, self.h, 0)
    }
}

/// Blurred disk with noise of variance `factor · α` per pixel, solved with
/// homogeneous Dirichlet conditions on the rectangle inside a one-pixel
/// frame, for every `α` of the schedule.
pub fn run_deblur(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<()> {
    let p = DeblurParams::from_config(cfg)?;
    let grid = p.grid()?;
    let truth = ScalarField::indicator(&rasterize_disk(&grid, [0.0, 0.0], p.disk_radius));
    let omega = interior(grid);
    let ctx = TvContext::forward(DomainSpec::dirichlet(omega)?);
    let op = make_gaussian_blur(grid, p.blur_sigma, p.blur_truncation)?;
    let solver_seed = cfg.u64("solver_seed")?;
    sink.opnorm("A", operator_norm(&op, 1e-8, 1000, solver_seed).value);
    let clean = op.apply(&truth)?;
    write_field(sink, "u_true", &truth)?;
    write_levels(sink, "u_true", &truth, &p.thresholds)?;

    let seeds = derive_seeds(cfg.u64("seed")?, p.alphas.len());
    let mut results: Vec<SolveResult> = Vec::new();
    for (k, (&alpha, &seed)) in p.alphas.iter().zip(&seeds).enumerate() {
        sink.seed(format!("noise.{k}"), seed);
        let w = gen_gaussian_noise(grid, p.noise_variance_factor * alpha, seed)?;
        let f = clean.add(&w)?;
        let problem = ProblemSpec::new(op.clone(), f.clone(), alpha, ctx.clone())?;
        let solve_cfg = cfg.solve_config(&f)?;
        let prev = results.last();
        let res = solve_warm(
            &problem,
            &solve_cfg,
            prev.map(|r| &r.u_alpha),
            prev.map(|r| &r.z_final),
        )?;
        let stem = format!("u_{k}");
        write_field(sink, &format!("f_{k}"), &f)?;
        write_solve(sink, &stem, &res)?;
        write_levels(sink, &stem, &res.u_alpha, &p.thresholds)?;
        sink.stat_f64(format!("{stem}.l1_error"), res.u_alpha.sub(&truth)?.norm_l1());
        results.push(res);
    }

    let report = convergence_report(results.iter().map(|r| (r.alpha, &r.u_alpha)), &truth, &p.thresholds)?;
    sink.write("convergence.csv", &report.to_csv())?;
    sink.write("trends.csv", &report.trends_csv())?;
    record_trends(sink, &report);
    Ok(())
}

/// Grid minus its outermost pixel ring.
pub(crate) fn interior(grid: Grid2D) -> BinaryMask {
    let mut m = BinaryMask::full(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            if grid.on_frame(i, j) {
                m.set(i, j, false);
            }
        }
    }
    m
}

