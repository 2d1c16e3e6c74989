use crate::error::{ensure_same_grid, Result};
use crate::field::BinaryMask;

/// Which argument of a Hausdorff query was empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmptySide {
    Left,
    Right,
    Both,
}

/// A Hausdorff distance in physical units. Empty inputs give `value = ∞`
/// and record which side was empty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hausdorff {
    pub value: f64,
    pub empty: Option<EmptySide>,
}

impl Hausdorff {
    pub fn is_finite(&self) -> bool {
        self.empty.is_none()
    }

    pub fn explanation(&self) -> Option<&'static str> {
        self.empty.map(|side| match side {
            EmptySide::Left => "first set is empty; the distance to an empty set is infinite",
            EmptySide::Right => "second set is empty; the distance to an empty set is infinite",
            EmptySide::Both => "both sets are empty; the distance is undefined",
        })
    }
}

const INF: f64 = 1e20;

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas). `f` holds `0` at features and `INF` elsewhere on entry.
fn dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let meet = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = meet(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = meet(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = q as f64 - p as f64;
        *dq = dx * dx + f[p];
    }
}

/// Exact squared Euclidean distance (in pixels²) from every pixel to the
/// nearest set pixel of `mask`. Entries are `≥ 1e20` when the mask is empty.
pub fn edt_squared(mask: &BinaryMask) -> Vec<f64> {
    let g = mask.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let n = nx.max(ny);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut out: Vec<f64> = mask.bits().iter().map(|&b| if b { 0.0 } else { INF }).collect();
    // columns
    for i in 0..nx {
        for j in 0..ny {
            f[j] = out[j * nx + i];
        }
        dt_1d(&f[..ny], &mut d[..ny], &mut v[..ny], &mut z[..ny + 1]);
        for j in 0..ny {
            out[j * nx + i] = d[j];
        }
    }
    // rows
    for j in 0..ny {
        let row = &mut out[j * nx..(j + 1) * nx];
        f[..nx].copy_from_slice(row);
        dt_1d(&f[..nx], &mut d[..nx], &mut v[..nx], &mut z[..nx + 1]);
        row.copy_from_slice(&d[..nx]);
    }
    out
}

/// `sup_{x ∈ a} d(x, b)` in pixels, from the transform of `b`.
fn directed(a: &BinaryMask, edt_b: &[f64]) -> f64 {
    a.bits()
        .iter()
        .zip(edt_b)
        .filter(|(&x, _)| x)
        .map(|(_, &d)| d)
        .fold(0.0, f64::max)
        .sqrt()
}

/// Hausdorff distance between two pixel sets, treating pixels as their
/// centers.
pub fn hausdorff_masks(a: &BinaryMask, b: &BinaryMask) -> Result<Hausdorff> {
    ensure_same_grid(a.grid(), b.grid())?;
    let empty = match (a.is_empty(), b.is_empty()) {
        (false, false) => None,
        (true, false) => Some(EmptySide::Left),
        (false, true) => Some(EmptySide::Right),
        (true, true) => Some(EmptySide::Both),
    };
    if empty.is_some() {
        return Ok(Hausdorff {
            value: f64::INFINITY,
            empty,
        });
    }
    let h = a.grid().h();
    let da = directed(a, &edt_squared(b));
    let db = directed(b, &edt_squared(a));
    Ok(Hausdorff {
        value: h * da.max(db),
        empty: None,
    })
}

/// Hausdorff distance between the inner boundaries of two level sets.
pub fn hausdorff_distance(a: &super::LevelSet, b: &super::LevelSet) -> Result<Hausdorff> {
    hausdorff_masks(&a.boundary_mask(), &b.boundary_mask())
}
