use super::config::ExperimentConfig;
use super::manifest::OutputSink;
use super::noise::{derive_seeds, noise_with_norm};
use super::{check_thresholds, config_error, record_trends, write_field, write_levels, write_solve};
use crate::error::Result;
use crate::field::io::fmt_f64;
use crate::field::{rasterize_disk, DomainSpec, Grid2D, Regime, ScalarField};
use crate::level::{
    convergence_report, curvature_identity_check, default_density_radii, density_profile, extract_level_set,
};
use crate::linop::{make_identity, operator_norm};
use crate::solver::{check_eta, solve_warm, ParamChoice, ProblemSpec, SolveResult};
use crate::tv::TvContext;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepParams {
    pub h: f64,
    pub half_width: f64,
    pub disk_radius: f64,
    pub regime: Regime,
    pub c_omega: Option<f64>,
    pub eta: f64,
    pub alpha0: f64,
    pub alpha_factor: f64,
    pub levels: usize,
    pub level_t: f64,
    pub thresholds: Vec<f64>,
}

impl SweepParams {
    /// Rejects an inadmissible `η` for the regime.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let p = Self {
            h: cfg.positive("h")?,
            half_width: cfg.positive("half_width")?,
            disk_radius: cfg.positive("disk_radius")?,
            regime: cfg.regime()?,
            c_omega: cfg.opt_f64("c_omega")?,
            eta: cfg.positive("eta")?,
            alpha0: cfg.positive("alpha0")?,
            alpha_factor: cfg.positive("alpha_factor")?,
            levels: cfg.usize("levels")?,
            level_t: cfg.f64("level_t")?,
            thresholds: cfg.list("thresholds")?,
        };
        check_eta(p.eta, p.regime, p.c_omega).map_err(|e| config_error(e.to_string()))?;
        if p.levels == 0 {
            return Err(config_error("`levels` must be positive"));
        }
        if p.alpha_factor >= 1.0 {
            return Err(config_error("`alpha_factor` must be below 1"));
        }
        if p.disk_radius >= p.half_width - 2.0 * p.h {
            return Err(config_error("`disk_radius` must stay inside the grid"));
        }
        if p.level_t == 0.0 {
            return Err(config_error("`level_t` must be nonzero"));
        }
        check_thresholds(&p.thresholds)?;
        Ok(p)
    }

    pub fn alphas(&self) -> Vec<f64> {
        (0..self.levels)
            .map(|n| self.alpha0 * self.alpha_factor.powi(n as i32))
            .collect()
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::centered_square(self.half_width, self.h, 1)
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let g = self.grid()?;
        let ball = || rasterize_disk(&g, [0.0, 0.0], self.half_width);
        match self.regime {
            Regime::FullSpace => DomainSpec::full_space(g, 1),
            Regime::Dirichlet => DomainSpec::dirichlet(ball()),
            Regime::Neumann => DomainSpec::neumann(ball()),
        }
    }
}

/// Disk denoising along the ladder `α_n = alpha0 · factor^n` with noise of
/// norm `‖w_n‖ = α_n η / ‖A*‖`, so every rung meets the parameter rule with
/// equality.
pub fn run_convergence_sweep(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<()> {
    let p = SweepParams::from_config(cfg)?;
    let grid = p.grid()?;
    let h = grid.h();
    let truth = ScalarField::indicator(&rasterize_disk(&grid, [0.0, 0.0], p.disk_radius));
    let ctx = TvContext::forward(p.domain()?);
    let op = make_identity(grid);
    let adj_norm = operator_norm(&op.transposed(), 1e-10, 100, cfg.u64("solver_seed")?).value;
    sink.opnorm("A_adjoint", adj_norm);
    let rule = ParamChoice::new(0.0, adj_norm, p.eta, p.regime, p.c_omega, p.alpha0)?;
    sink.stat("rule.regime", p.regime);
    sink.stat_f64("rule.eta", p.eta);
    write_field(sink, "u_true", &truth)?;
    write_levels(sink, "u_true", &truth, &p.thresholds)?;

    let alphas = p.alphas();
    let seeds = derive_seeds(cfg.u64("seed")?, alphas.len());
    let mut results: Vec<SolveResult> = Vec::new();
    for (n, (&alpha, &seed)) in alphas.iter().zip(&seeds).enumerate() {
        sink.seed(format!("noise.{n}"), seed);
        let w = noise_with_norm(grid, rule.noise_norm_for(alpha), seed)?;
        debug_assert!(rule.admits(alpha, w.norm()));
        let f = truth.add(&w)?;
        let problem = ProblemSpec::new(op.clone(), f.clone(), alpha, ctx.clone())?;
        let prev = results.last();
        let res = solve_warm(&problem, &cfg.solve_config(&f)?, prev.map(|r| &r.u_alpha), prev.map(|r| &r.z_final))?;
        let stem = format!("u_{n}");
        write_solve(sink, &stem, &res)?;
        sink.stat_f64(format!("{stem}.noise_norm"), w.norm());
        write_levels(sink, &stem, &res.u_alpha, &p.thresholds)?;
        results.push(res);
    }

    let report = convergence_report(results.iter().map(|r| (r.alpha, &r.u_alpha)), &truth, &p.thresholds)?;
    sink.write("convergence.csv", &report.to_csv())?;
    sink.write("trends.csv", &report.trends_csv())?;
    record_trends(sink, &report);
    sink.stat_f64("h", h);

    let radii = default_density_radii(h, p.disk_radius);
    let mut density = String::from("n,alpha,t,r,min_inner_ratio,min_outer_ratio\n");
    let mut curvature = String::from("n,alpha,t,perimeter,flux,rel_err\n");
    let mut min_ratio = f64::INFINITY;
    for (n, r) in results.iter().enumerate() {
        let level = extract_level_set(&r.u_alpha, p.level_t);
        if level.boundary().is_empty() || radii.is_empty() {
            sink.stat(format!("density.{n}"), "skipped: empty level set");
        } else {
            let prof = density_profile(&level, &radii)?;
            for row in &prof.rows {
                density.push_str(&format!(
                    "{n},{},{},{},{},{}\n",
                    fmt_f64(r.alpha),
                    fmt_f64(p.level_t),
                    fmt_f64(row.r),
                    fmt_f64(row.min_inner),
                    fmt_f64(row.min_outer)
                ));
                min_ratio = min_ratio.min(row.min_inner.min(row.min_outer));
            }
        }
        let c = curvature_identity_check(&ctx, r, p.level_t)?;
        curvature.push_str(&format!(
            "{n},{},{},{},{},{}\n",
            fmt_f64(r.alpha),
            fmt_f64(p.level_t),
            fmt_f64(c.lhs),
            fmt_f64(c.rhs),
            fmt_f64(c.rel_err)
        ));
        sink.stat_f64(format!("curvature.{n}.rel_err"), c.rel_err);
    }
    sink.write("density.csv", &density)?;
    sink.write("curvature.csv", &curvature)?;
    if min_ratio.is_finite() {
        sink.stat_f64("density.min_ratio", min_ratio);
    }
    Ok(())
}
