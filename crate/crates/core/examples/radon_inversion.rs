//! Circular-Radon inversion of the mollified disk on `B(0,1)` with α from
//! the parameter rule, and the sinogram written as CSV.
//!
//! `cargo run --release --example radon_inversion -- [out.csv]`

use std::path::PathBuf;

use tvls::expcli::noise_with_norm;
use tvls::field::io::{sinogram_to_csv, write_text};
use tvls::field::{mollified_disk, rasterize_disk, DomainSpec, Grid2D, Regime};
use tvls::level::{extract_level_set, hausdorff_distance};
use tvls::linop::{make_circular_radon, operator_norm};
use tvls::solver::{default_alpha_floor, solve, ParamChoice, ProblemSpec, SolveConfig, ETA_DEFAULT};
use tvls::tv::TvContext;

fn main() -> tvls::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let g = Grid2D::centered_square(1.0, 2.0 / 64.0, 1)?;
    let truth = mollified_disk(&g, [0.2, 0.0], 0.1, 0.3)?;
    let op = make_circular_radon(g, 90, 50, 0.05)?;
    let norm = operator_norm(&op, 1e-8, 500, 0).value;
    println!("|R| = {norm:.4} (2 pi = {:.4})", 2.0 * std::f64::consts::PI);

    let clean = op.apply(&truth)?;
    if let Some(path) = &out {
        write_text(path, &sinogram_to_csv(&clean, 0.0))?;
        println!("sinogram written to {}", path.display());
    }
    let ctx = TvContext::forward(DomainSpec::dirichlet(rasterize_disk(&g, [0.0, 0.0], 1.0))?);
    let floor = default_alpha_floor(clean.norm(), ctx.tv_value(&truth)?);
    let reference = extract_level_set(&truth, 0.5);
    for (k, delta) in [0.1, 0.02].into_iter().enumerate() {
        let alpha = ParamChoice::new(delta, norm, ETA_DEFAULT, Regime::Dirichlet, None, floor)?.choose_alpha();
        let f = clean.add(&noise_with_norm(*op.range_grid(), delta, k as u64)?)?;
        let p = ProblemSpec::new(op.clone(), f, alpha, ctx.clone())?;
        let r = solve(&p, &SolveConfig::figure(p.f()).with_max_iter(1500))?;
        let d = hausdorff_distance(&extract_level_set(&r.u_alpha, 0.5), &reference)?;
        println!("delta {delta:<5} alpha {alpha:.3e}  d_H(t=0.5) = {:.3} ({} iterations)", d.value, r.iterations);
    }
    Ok(())
}
