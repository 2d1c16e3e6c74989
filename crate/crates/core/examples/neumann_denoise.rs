//! Neumann denoising of `1_{B(0,1)}` on `B(0,2)`. The minimizer is piecewise
//! constant; mass conservation and the perimeter of the unit circle give
//! `1 − 2α` inside and `2α/3` outside.
//!
//! `cargo run --release --example neumann_denoise -- [1/h] [iterations]`

use tvls::field::{rasterize_disk, DomainSpec, Grid2D, ScalarField};
use tvls::linop::make_identity;
use tvls::solver::{dual_surrogate, solve, ProblemSpec, SolveConfig};
use tvls::tv::TvContext;

fn main() -> tvls::Result<()> {
    let mut args = std::env::args().skip(1);
    let inv_h: f64 = args.next().map_or(Ok(32.0), |s| s.parse()).expect("1/h");
    let iters: usize = args.next().map_or(Ok(10_000), |s| s.parse()).expect("iterations");
    let alpha = 0.3;

    let g = Grid2D::centered_square(2.0, 1.0 / inv_h, 1)?;
    let omega = rasterize_disk(&g, [0.0, 0.0], 2.0);
    let f = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 1.0));
    let ctx = TvContext::forward(DomainSpec::neumann(omega)?);
    let p = ProblemSpec::new(make_identity(g), f, alpha, ctx)?;
    let r = solve(&p, &SolveConfig::certified(p.f()).with_max_iter(iters))?;

    let inner = rasterize_disk(&g, [0.0, 0.0], 0.7);
    let annulus = rasterize_disk(&g, [0.0, 0.0], 1.8).difference(&rasterize_disk(&g, [0.0, 0.0], 1.3))?;
    let c_in = r.u_alpha.median_over(&inner).unwrap_or(f64::NAN);
    let c_out = r.u_alpha.median_over(&annulus).unwrap_or(f64::NAN);
    println!("grid {}x{}, {} iterations, converged {}", g.nx(), g.ny(), r.iterations, r.converged);
    println!("inside  {c_in:.4}  (continuum {:.4})", 1.0 - 2.0 * alpha);
    println!("outside {c_out:.4}  (continuum {:.4})", 2.0 * alpha / 3.0);
    let d = dual_surrogate(&p, &r)?;
    println!("gap / F(0) = {:.2e}", d.gap / p.energy_at_zero());
    if let Some(rec) = r.final_record() {
        println!("feasibility {:.2e}, residual {:.2e}", rec.feasibility, rec.residual);
    }
    Ok(())
}
