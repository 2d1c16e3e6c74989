//! Adjoint certification and norm estimates for the built-in operators.
//!
//! `cargo run --release --example operators`

use tvls::field::Grid2D;
use tvls::linop::{
    adjoint_check, make_circular_radon, make_gaussian_blur, make_identity, make_mean_deficit, operator_norm,
};

fn main() -> tvls::Result<()> {
    let g = Grid2D::centered_square(1.0, 2.0 / 64.0, 0)?;
    let ops = [
        ("identity", make_identity(g)),
        ("gaussian blur", make_gaussian_blur(g, 3.0 * g.h(), 4.0)?),
        ("mean deficit", make_mean_deficit(g, 0.25)?),
        ("circular radon", make_circular_radon(g, 180, 100, 0.05)?),
    ];
    println!("{:<16} {:>12} {:>10} {:>8}", "operator", "adjoint err", "norm", "iters");
    for (name, op) in &ops {
        let err = adjoint_check(op, 20, 7);
        let norm = operator_norm(op, 1e-8, 500, 7);
        println!("{name:<16} {err:>12.2e} {:>10.5} {:>8}", norm.value, norm.iterations);
    }
    Ok(())
}
