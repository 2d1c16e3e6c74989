//! Deblurring a disk along a decreasing α schedule with noise variance
//! proportional to α, warm-starting each solve from the previous one.
//!
//! `cargo run --release --example deblur`

use tvls::expcli::gen_gaussian_noise;
use tvls::field::{rasterize_disk, BinaryMask, DomainSpec, Grid2D, ScalarField};
use tvls::level::{extract_level_set, hausdorff_distance, symmetric_difference_area};
use tvls::linop::make_gaussian_blur;
use tvls::solver::{solve_warm, ProblemSpec, SolveConfig, SolveResult};
use tvls::tv::TvContext;

fn main() -> tvls::Result<()> {
    let g = Grid2D::centered_square(48.0, 1.0, 0)?;
    let truth = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 24.0));
    let blur = make_gaussian_blur(g, 3.0, 4.0)?;
    let clean = blur.apply(&truth)?;
    let interior = BinaryMask::from_index_fn(g, |i, j| !g.on_frame(i, j));
    let ctx = TvContext::forward(DomainSpec::dirichlet(interior)?);
    let reference = extract_level_set(&truth, 0.5);

    let mut prev: Option<SolveResult> = None;
    println!("{:>8} {:>10} {:>10} {:>8} {:>6}", "alpha", "L1 error", "sym diff", "d_H", "iters");
    for (k, alpha) in [1.0, 0.25, 0.0625, 0.015625].into_iter().enumerate() {
        let f = clean.add(&gen_gaussian_noise(g, 0.1 * alpha, 11 + k as u64)?)?;
        let p = ProblemSpec::new(blur.clone(), f, alpha, ctx.clone())?;
        let cfg = SolveConfig::figure(p.f()).with_max_iter(2000);
        let r = solve_warm(&p, &cfg, prev.as_ref().map(|r| &r.u_alpha), prev.as_ref().map(|r| &r.z_final))?;
        let level = extract_level_set(&r.u_alpha, 0.5);
        println!(
            "{alpha:>8} {:>10.2} {:>10.1} {:>8.2} {:>6}",
            r.u_alpha.sub(&truth)?.norm_l1(),
            symmetric_difference_area(level.mask(), reference.mask())?,
            hausdorff_distance(&level, &reference)?.value,
            r.iterations
        );
        prev = Some(r);
    }
    Ok(())
}
