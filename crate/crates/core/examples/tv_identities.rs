//! Discrete TV in the three boundary regimes: exact `div = −∇ᵀ`, perimeters
//! of rasterized disks, coarea and layer-cake sums.
//!
//! `cargo run --release --example tv_identities`

use std::f64::consts::PI;

use tvls::field::{mollified_disk, rasterize_disk, DomainSpec, Grid2D, ScalarField};
use tvls::level::{coarea_check, layer_cake_check};
use tvls::tv::TvContext;

fn main() -> tvls::Result<()> {
    let g = Grid2D::centered_square(1.0, 1.0 / 64.0, 1)?;
    let omega = rasterize_disk(&g, [0.0, 0.0], 0.9);
    let contexts = [
        TvContext::forward(DomainSpec::full_space(g, 1)?),
        TvContext::forward(DomainSpec::dirichlet(omega.clone())?),
        TvContext::forward(DomainSpec::neumann(omega)?),
    ];
    let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos() + x * y)?;
    for ctx in &contexts {
        let du = ctx.gradient(&u)?;
        let pairing = du.inner(&du)? + u.inner(&ctx.divergence(&du)?)?;
        println!(
            "{:<10} TV(u) = {:.6}   <Du,Du> + <u,div Du> = {pairing:.1e}",
            ctx.regime().to_string(),
            ctx.tv_value(&u)?
        );
    }

    // The isotropic perimeter of a pixelated disk stays above 2πr as h → 0.
    println!("\n{:>6} {:>10} {:>10}", "1/h", "Per/2πr", "r");
    for n in [32.0, 64.0, 128.0, 256.0] {
        let g = Grid2D::centered_square(1.0, 1.0 / n, 2)?;
        let ctx = TvContext::forward(DomainSpec::full_space(g, 1)?);
        let r = 0.6;
        let per = ctx.perimeter(&rasterize_disk(&g, [0.0, 0.0], r))?;
        println!("{n:>6} {:>10.4} {r:>10}", per / (2.0 * PI * r));
    }

    let ctx = &contexts[0];
    let bump = mollified_disk(&g, [0.2, 0.0], 0.1, 0.3)?;
    let co = coarea_check(ctx, &bump, 512)?;
    let lc = layer_cake_check(&bump, 512)?;
    println!("\ncoarea:     TV = {:.5}, level sum = {:.5}, rel err {:.4}", co.lhs, co.rhs, co.rel_err);
    println!("layer cake: int = {:.5}, level sum = {:.5}, rel err {:.1e}", lc.lhs, lc.rhs, lc.rel_err);
    Ok(())
}
