use super::LevelSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityRow {
    pub r: f64,
    /// `min_x |B(x,r) ∩ U| / |B(x,r)|` over boundary pixels `x`.
    pub min_inner: f64,
    /// Same with the complement of `U`.
    pub min_outer: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub t: f64,
    pub n_boundary: usize,
    pub rows: Vec<DensityRow>,
}

impl DensityProfile {
    pub fn to_csv(&self) -> String {
        use crate::field::io::fmt_f64;
        let mut out = String::from("t,r,min_inner_ratio,min_outer_ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(self.t),
                fmt_f64(row.r),
                fmt_f64(row.min_inner),
                fmt_f64(row.min_outer)
            ));
        }
        out
    }
}

/// `{4h, 8h, 16h}`, dropping radii above `r0 = inradius / 10`.
pub fn default_density_radii(h: f64, inradius: f64) -> Vec<f64> {
    [4.0, 8.0, 16.0]
        .iter()
        .map(|m| m * h)
        .filter(|&r| r <= inradius / 10.0)
        .collect()
}

/// Minimum volume fractions of `U` and its complement in rasterized balls
/// centered at the boundary pixels. Pixels beyond the grid count as outside
/// `U`.
pub fn density_profile(level: &LevelSet, radii: &[f64]) -> Result<DensityProfile> {
    let mask = level.mask();
    let g = mask.grid();
    let h = g.h();
    if level.boundary().is_empty() {
        return Err(Error::InvalidParameter(format!(
            "level set t = {} has an empty boundary",
            level.t()
        )));
    }
    let (nx, ny) = (g.nx(), g.ny());
    // per-row prefix counts, prefix[j * (nx + 1) + i] = #{i' < i in row j}
    let mut prefix = vec![0u32; ny * (nx + 1)];
    for j in 0..ny {
        let row = &mask.bits()[j * nx..(j + 1) * nx];
        let p = &mut prefix[j * (nx + 1)..(j + 1) * (nx + 1)];
        for i in 0..nx {
            p[i + 1] = p[i] + row[i] as u32;
        }
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if r.is_nan() || r < 2.0 * h {
            return Err(Error::InvalidParameter(format!(
                "density radius {r} is below 2h = {}",
                2.0 * h
            )));
        }
        let rp = r / h;
        let reach = (rp + 1e-9).floor() as isize;
        let spans: Vec<(isize, isize)> = (-reach..=reach)
            .map(|dj| {
                let w = ((rp * rp - (dj * dj) as f64).max(0.0).sqrt() + 1e-9).floor() as isize;
                (dj, w)
            })
            .collect();
        let ball: u64 = spans.iter().map(|&(_, w)| (2 * w + 1) as u64).sum();
        let mut min_in = f64::INFINITY;
        let mut min_out = f64::INFINITY;
        for &k in level.boundary() {
            let (i, j) = g.coords(k);
            let (i, j) = (i as isize, j as isize);
            let mut inside = 0u64;
            for &(dj, w) in &spans {
                let jj = j + dj;
                if jj < 0 || jj >= ny as isize {
                    continue;
                }
                let lo = (i - w).max(0) as usize;
                let hi = ((i + w + 1).min(nx as isize)).max(0) as usize;
                if hi > lo {
                    let p = &prefix[jj as usize * (nx + 1)..];
                    inside += (p[hi] - p[lo]) as u64;
                }
            }
            let frac = inside as f64 / ball as f64;
            min_in = min_in.min(frac);
            min_out = min_out.min(1.0 - frac);
        }
        rows.push(DensityRow {
            r,
            min_inner: min_in,
            min_outer: min_out,
        });
    }
    Ok(DensityProfile {
        t: level.t(),
        n_boundary: level.boundary().len(),
        rows,
    })
}
