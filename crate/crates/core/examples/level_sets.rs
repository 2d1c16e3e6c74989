//! Level sets of a smooth bump: boundaries, Hausdorff distance to a disk,
//! symmetric differences and density ratios.
//!
//! `cargo run --release --example level_sets`

use tvls::field::{mollified_disk, rasterize_disk, Grid2D, ScalarField};
use tvls::level::{density_profile, extract_level_set, hausdorff_distance, symmetric_difference_area};

fn main() -> tvls::Result<()> {
    let g = Grid2D::centered_square(1.0, 1.0 / 128.0, 1)?;
    let u = mollified_disk(&g, [0.0, 0.0], 0.3, 0.2)?;
    let radii = [4.0 * g.h(), 8.0 * g.h(), 16.0 * g.h()];
    println!("{:>6} {:>8} {:>10} {:>10} {:>10}", "t", "|∂U|", "d_H/h", "sym diff", "min ratio");
    for t in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let level = extract_level_set(&u, t);
        // radius of the matching disk for this bump profile
        let area = level.mask().area();
        let disk = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], (area / std::f64::consts::PI).sqrt()));
        let reference = extract_level_set(&disk, 0.5);
        let d = hausdorff_distance(&level, &reference)?;
        let sd = symmetric_difference_area(level.mask(), reference.mask())?;
        let prof = density_profile(&level, &radii)?;
        let ratio = prof.rows.iter().map(|r| r.min_inner.min(r.min_outer)).fold(1.0, f64::min);
        println!(
            "{t:>6} {:>8} {:>10.2} {sd:>10.2e} {ratio:>10.3}",
            level.boundary().len(),
            d.value / g.h()
        );
    }
    let sub = extract_level_set(&u.scaled(-1.0), -0.5);
    println!("\n{{-u <= -0.5}} has {} pixels, same as {{u >= 0.5}}: {}", sub.mask().count(), extract_level_set(&u, 0.5).mask().count());
    Ok(())
}
