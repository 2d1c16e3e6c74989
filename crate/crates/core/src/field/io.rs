//! Plain-text field formats.
//!
//! CSV: one line per grid row (row `j = 0` first), comma separated, every
//! value printed with 17 significant digits so a write/read cycle is
//! bit-exact. A leading `# tvls ...` comment records the grid.
//!
//! PGM: ASCII `P2` with maxval 65535. The comment line
//! `# tvls h=.. origin=x,y scale=a offset=b` maps a gray level `g` back to
//! the value `a g + b`. Masks are written with maxval 255 as 0/255.

use std::fs;
use std::path::Path;

use super::{BinaryMask, Grid2D, ScalarField};
use crate::error::{Error, Result};

const PGM_MAXVAL: u32 = 65535;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
}

fn grid_header(g: &Grid2D) -> String {
    format!(
        "# tvls nx={} ny={} h={} origin={},{}",
        g.nx(),
        g.ny(),
        fmt_f64(g.h()),
        fmt_f64(g.origin()[0]),
        fmt_f64(g.origin()[1])
    )
}

/// Parses `key=value` tokens of a `# tvls ...` comment line.
fn header_fields(line: &str) -> Option<Vec<(&str, &str)>> {
    let rest = line.strip_prefix('#')?.trim_start().strip_prefix("tvls")?;
    Some(
        rest.split_whitespace()
            .filter_map(|tok| tok.split_once('='))
            .collect(),
    )
}

fn lookup<'a>(fields: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse(format!("header is missing `{key}`")))
}

fn parse_pair(s: &str) -> Result<[f64; 2]> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected `x,y`, got `{s}`")))?;
    Ok([parse_f64(a)?, parse_f64(b)?])
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|e| Error::Parse(format!("bad integer `{s}`: {e}")))
}

/// CSV text for a field, with extra comment lines placed after the grid header.
pub fn field_to_csv(field: &ScalarField, extra_comments: &[String]) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(g.len() * 25 + 128);
    out.push_str(&grid_header(g));
    out.push('\n');
    for c in extra_comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    for row in field.data().chunks(g.nx()) {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Numeric rows of a CSV text; `#` lines and blank lines are skipped.
pub fn csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(parse_f64).collect())
        .collect()
}

/// Reads a field written by [`field_to_csv`].
pub fn field_from_csv(text: &str) -> Result<ScalarField> {
    let header = text
        .lines()
        .find_map(header_fields)
        .ok_or_else(|| Error::Parse("CSV lacks a `# tvls` grid header".into()))?;
    let nx = parse_usize(lookup(&header, "nx")?)?;
    let ny = parse_usize(lookup(&header, "ny")?)?;
    let h = parse_f64(lookup(&header, "h")?)?;
    let origin = parse_pair(lookup(&header, "origin")?)?;
    let grid = Grid2D::new(nx, ny, h, origin)?;
    field_from_csv_on(text, grid)
}

/// Reads CSV values onto a known grid, ignoring any header.
pub fn field_from_csv_on(text: &str, grid: Grid2D) -> Result<ScalarField> {
    let rows = csv_rows(text)?;
    if rows.len() != grid.ny() || rows.iter().any(|r| r.len() != grid.nx()) {
        return Err(Error::Parse(format!(
            "CSV shape does not match grid {grid}"
        )));
    }
    ScalarField::new(grid, rows.concat())
}

/// Sinogram CSV: rows are angles, columns radii.
pub fn sinogram_to_csv(field: &ScalarField, angle_offset: f64) -> String {
    let g = field.grid();
    field_to_csv(
        field,
        &[format!(
            "n_angles={},n_radii={},angle_offset={}",
            g.ny(),
            g.nx(),
            fmt_f64(angle_offset)
        )],
    )
}

/// P2 graymap of a field with the affine value map in the header.
pub fn field_to_pgm(field: &ScalarField) -> String {
    let g = field.grid();
    let (lo, hi) = (field.min(), field.max());
    let (scale, offset) = if hi > lo {
        ((hi - lo) / PGM_MAXVAL as f64, lo)
    } else {
        (1.0, lo)
    };
    let mut out = String::with_capacity(g.len() * 6 + 128);
    out.push_str("P2\n");
    out.push_str(&format!(
        "# tvls h={} origin={},{} scale={} offset={}\n",
        fmt_f64(g.h()),
        fmt_f64(g.origin()[0]),
        fmt_f64(g.origin()[1]),
        fmt_f64(scale),
        fmt_f64(offset)
    ));
    out.push_str(&format!("{} {}\n{}\n", g.nx(), g.ny(), PGM_MAXVAL));
    for row in field.data().chunks(g.nx()) {
        let line: Vec<String> = row
            .iter()
            .map(|&v| {
                let q = ((v - offset) / scale).round().clamp(0.0, PGM_MAXVAL as f64);
                (q as u32).to_string()
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// P2 graymap of a mask, 0 outside and 255 inside.
pub fn mask_to_pgm(mask: &BinaryMask) -> String {
    let g = mask.grid();
    let mut out = String::with_capacity(g.len() * 4 + 128);
    out.push_str("P2\n");
    out.push_str(&format!(
        "# tvls h={} origin={},{} scale=1 offset=0\n",
        fmt_f64(g.h()),
        fmt_f64(g.origin()[0]),
        fmt_f64(g.origin()[1])
    ));
    out.push_str(&format!("{} {}\n255\n", g.nx(), g.ny()));
    for row in mask.bits().chunks(g.nx()) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "255" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a P2 graymap. With a `# tvls` comment the gray levels are mapped
/// back through the recorded scale/offset and the grid geometry is restored;
/// otherwise `h = 1`, origin 0 and raw gray levels are returned.
pub fn field_from_pgm(text: &str) -> Result<ScalarField> {
    let mut header = None;
    let mut tokens = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('#') {
            if header.is_none() {
                header = header_fields(t);
            }
            continue;
        }
        tokens.extend(t.split_whitespace());
    }
    let mut it = tokens.into_iter();
    if it.next() != Some("P2") {
        return Err(Error::Parse("not a P2 graymap".into()));
    }
    let mut next = |what: &str| {
        it.next()
            .ok_or_else(|| Error::Parse(format!("graymap truncated before {what}")))
    };
    let nx = parse_usize(next("width")?)?;
    let ny = parse_usize(next("height")?)?;
    let maxval = parse_usize(next("maxval")?)?;
    let (mut h, mut origin, mut scale, mut offset) = (1.0, [0.0, 0.0], 1.0, 0.0);
    if let Some(fields) = header {
        h = parse_f64(lookup(&fields, "h")?)?;
        origin = parse_pair(lookup(&fields, "origin")?)?;
        scale = parse_f64(lookup(&fields, "scale")?)?;
        offset = parse_f64(lookup(&fields, "offset")?)?;
    }
    let grid = Grid2D::new(nx, ny, h, origin)?;
    let mut data = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let g = parse_usize(next("pixel data")?)?;
        if g > maxval {
            return Err(Error::Parse(format!("gray level {g} exceeds maxval {maxval}")));
        }
        data.push(scale * g as f64 + offset);
    }
    ScalarField::new(grid, data)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_field(seed: u64) -> ScalarField {
        let g = Grid2D::new(7, 5, 0.1, [-0.3, 0.25]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data = (0..g.len())
            .map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-30..30)))
            .collect();
        ScalarField::new(g, data).unwrap()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let f = random_field(5);
        let back = field_from_csv(&field_to_csv(&f, &[])).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in f.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn sinogram_header_names_dimensions() {
        let g = Grid2D::new(4, 3, 0.5, [0.0, 0.0]).unwrap();
        let text = sinogram_to_csv(&ScalarField::zeros(g), 0.0);
        assert!(text.contains("n_angles=3,n_radii=4"));
        assert_eq!(field_from_csv(&text).unwrap().data().len(), 12);
    }

    #[test]
    fn csv_shape_mismatch_is_rejected() {
        let g = Grid2D::new(2, 2, 1.0, [0.0, 0.0]).unwrap();
        assert!(field_from_csv_on("1,2\n3\n", g).is_err());
    }

    #[test]
    fn pgm_round_trip_within_quantization() {
        let f = random_field(9).map(|v| v.clamp(-1.0, 1.0)).unwrap();
        let back = field_from_pgm(&field_to_pgm(&f)).unwrap();
        assert_eq!(back.grid(), f.grid());
        let step = (f.max() - f.min()) / 65535.0;
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.5 * step + 1e-15);
        }
    }

    #[test]
    fn constant_field_pgm() {
        let g = Grid2D::new(3, 2, 1.0, [0.0, 0.0]).unwrap();
        let f = ScalarField::constant(g, 0.25);
        let back = field_from_pgm(&field_to_pgm(&f)).unwrap();
        assert!(back.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn mask_pgm_uses_0_and_255() {
        let g = Grid2D::new(2, 1, 1.0, [0.0, 0.0]).unwrap();
        let mut m = BinaryMask::empty(g);
        m.set(1, 0, true);
        let text = mask_to_pgm(&m);
        assert!(text.ends_with("0 255\n"));
    }
}
