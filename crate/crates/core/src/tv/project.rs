use super::{Scheme, VectorField2};

/// Pointwise projection onto the ball of the given radius. For the upwind
/// layout the dual set is additionally restricted to nonnegative components.
///
/// The result has magnitude at most `radius` at every pixel, so projecting
/// twice changes nothing.
pub fn project_dual_ball(z: &VectorField2, radius: f64) -> VectorField2 {
    let mut out = z.clone();
    let scheme = out.scheme();
    project_in_place(out.components_mut(), radius, scheme);
    out
}

pub(crate) fn project_in_place(comps: &mut [Vec<f64>], radius: f64, scheme: Scheme) {
    let n = comps[0].len();
    match scheme {
        Scheme::Forward => {
            let (a, b) = comps.split_at_mut(1);
            let (zx, zy) = (&mut a[0], &mut b[0]);
            for k in 0..n {
                let mut m2 = zx[k] * zx[k] + zy[k] * zy[k];
                while m2 > radius * radius {
                    let f = shrink_factor(radius, m2.sqrt());
                    zx[k] *= f;
                    zy[k] *= f;
                    m2 = zx[k] * zx[k] + zy[k] * zy[k];
                }
            }
        }
        Scheme::Upwind => {
            for k in 0..n {
                let mut m2 = 0.0;
                for c in comps.iter_mut() {
                    c[k] = c[k].max(0.0);
                    m2 += c[k] * c[k];
                }
                while m2 > radius * radius {
                    let f = shrink_factor(radius, m2.sqrt());
                    m2 = 0.0;
                    for c in comps.iter_mut() {
                        c[k] *= f;
                        m2 += c[k] * c[k];
                    }
                }
            }
        }
    }
}

/// `radius / norm`, nudged below one when rounding would make it exactly one.
#[inline]
fn shrink_factor(radius: f64, norm: f64) -> f64 {
    let f = radius / norm;
    if f < 1.0 {
        f
    } else {
        1.0 - f64::EPSILON
    }
}
