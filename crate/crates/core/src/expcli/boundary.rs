use super::config::ExperimentConfig;
use super::deblur::interior;
use super::manifest::OutputSink;
use super::{config_error, write_field, write_solve};
use crate::error::Result;
use crate::field::io::fmt_f64;
use crate::field::{rasterize_c_shape, rasterize_disk, CShape, DomainSpec, Grid2D, ScalarField};
use crate::linop::make_identity;
use crate::solver::{solve, ProblemSpec, SolveResult};
use crate::tv::TvContext;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryParams {
    pub h: f64,
    pub half_width: f64,
    pub alpha: f64,
    pub c: CShape,
    pub convex_radius: f64,
    pub hug: CShape,
}

/// Run labels: FullSpace, convex Dirichlet, nonconvex Dirichlet, Neumann
/// rectangle.
pub const BOUNDARY_RUNS: [&str; 4] = ["a", "b", "c", "d"];

impl BoundaryParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let deg = |k: &str| cfg.f64(k).map(f64::to_radians);
        let shape = |o: &str, i: &str, a: &str| -> Result<CShape> {
            CShape::new(cfg.f64(o)?, cfg.f64(i)?, deg(a)?).map_err(|e| config_error(e.to_string()))
        };
        let p = Self {
            h: cfg.positive("h")?,
            half_width: cfg.positive("half_width")?,
            alpha: cfg.positive("alpha")?,
            c: shape("c_outer", "c_inner", "c_opening_deg")?,
            convex_radius: cfg.positive("convex_radius")?,
            hug: shape("hug_outer", "hug_inner", "hug_opening_deg")?,
        };
        if p.half_width < 4.0 * p.h {
            return Err(config_error("`half_width` must span at least 4 pixels"));
        }
        if p.convex_radius > p.half_width || p.hug.outer > p.half_width {
            return Err(config_error("both Dirichlet domains must fit inside [-half_width, half_width]^2"));
        }
        if !(p.hug.outer >= p.c.outer && p.hug.inner <= p.c.inner && p.hug.opening <= p.c.opening) {
            return Err(config_error("the nonconvex domain must contain the C"));
        }
        if p.convex_radius < p.c.outer {
            return Err(config_error("`convex_radius` must cover the C"));
        }
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::centered_square(self.half_width, self.h, 1)
    }

    /// The four domains in [`BOUNDARY_RUNS`] order.
    pub fn domains(&self) -> Result<Vec<DomainSpec>> {
        let g = self.grid()?;
        Ok(vec![
            DomainSpec::full_space(g, 1)?,
            DomainSpec::dirichlet(rasterize_disk(&g, [0.0, 0.0], self.convex_radius))?,
            DomainSpec::dirichlet(rasterize_c_shape(&g, &self.hug)?)?,
            DomainSpec::neumann(interior(g))?,
        ])
    }
}

/// Denoising of the indicator of a C on the four domains, with pairwise L¹
/// distances of the reconstructions.
pub fn run_denoise_boundary(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<()> {
    let p = BoundaryParams::from_config(cfg)?;
    let grid = p.grid()?;
    let c_mask = rasterize_c_shape(&grid, &p.c)?;
    let f = ScalarField::indicator(&c_mask);
    write_field(sink, "f", &f)?;
    let solve_cfg = cfg.solve_config(&f)?;
    sink.stat_f64("tol_residual", solve_cfg.tol_residual);
    sink.opnorm("A", 1.0);

    let mut results: Vec<SolveResult> = Vec::new();
    for (label, domain) in BOUNDARY_RUNS.iter().zip(p.domains()?) {
        if !c_mask.is_subset_of(domain.support())? {
            return Err(config_error(format!("domain ({label}) does not contain the support of the data")));
        }
        let problem = ProblemSpec::new(make_identity(grid), f.clone(), p.alpha, TvContext::forward(domain))?;
        let res = solve(&problem, &solve_cfg)?;
        write_solve(sink, &format!("u_{label}"), &res)?;
        results.push(res);
    }

    let mut table = String::from("left,right,l1_distance\n");
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let d = results[i].u_alpha.sub(&results[j].u_alpha)?.norm_l1();
            let (a, b) = (BOUNDARY_RUNS[i], BOUNDARY_RUNS[j]);
            table.push_str(&format!("{a},{b},{}\n", fmt_f64(d)));
            sink.stat_f64(format!("l1.{a}_{b}"), d);
        }
    }
    sink.write("distances.csv", &table)?;
    if sink.emit_plots() {
        let j = grid.ny() / 2;
        let mut profile = String::from("x,f,u_a,u_b,u_c,u_d\n");
        for i in 0..grid.nx() {
            profile.push_str(&fmt_f64(grid.position(i, j)[0]));
            for v in std::iter::once(&f).chain(results.iter().map(|r| &r.u_alpha)) {
                profile.push(',');
                profile.push_str(&fmt_f64(v.get(i, j)));
            }
            profile.push('\n');
        }
        sink.plot("profile_mid_row.csv", &profile)?;
    }
    // the pocket of the C: inside the inner radius and outside the opening
    let pocket = crate::field::BinaryMask::from_fn(grid, |x, y| {
        let r = (x * x + y * y).sqrt();
        r < 0.8 * p.c.inner && y.atan2(x).abs() >= 0.5 * p.c.opening
    });
    if !pocket.is_empty() {
        for (label, r) in BOUNDARY_RUNS.iter().zip(&results) {
            if let Some(m) = r.u_alpha.median_over(&pocket) {
                sink.stat_f64(format!("pocket_median.{label}"), m);
            }
        }
    }
    Ok(())
}
