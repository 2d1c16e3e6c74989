use super::extract_level_set;
use crate::error::{ensure_same_grid, Error, Result};
use crate::field::{BinaryMask, ScalarField};
use crate::solver::SolveResult;
use crate::tv::TvContext;

/// Two sides of an identity and their relative mismatch
/// `|lhs − rhs| / max(|lhs|, |rhs|)` (0 when both vanish).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel_err = if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / scale
        };
        Self { lhs, rhs, rel_err }
    }
}

fn check_thresholds(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one threshold".into()));
    }
    Ok(())
}

/// `TV(u)` against the midpoint rule for `∫ Per({u > t}) dt` over `n`
/// uniform thresholds spanning `[min u, max u]`.
pub fn coarea_check(ctx: &TvContext, u: &ScalarField, n_thresholds: usize) -> Result<IdentityCheck> {
    check_thresholds(n_thresholds)?;
    ensure_same_grid(u.grid(), ctx.grid())?;
    let (lo, hi) = (u.min(), u.max());
    if hi == lo {
        return Ok(IdentityCheck::new(0.0, 0.0));
    }
    let lhs = ctx.tv_value(u)?;
    let dt = (hi - lo) / n_thresholds as f64;
    let mut rhs = 0.0;
    for i in 0..n_thresholds {
        let t = lo + (i as f64 + 0.5) * dt;
        rhs += ctx.perimeter(&BinaryMask::threshold(u, |v| v > t))?;
    }
    Ok(IdentityCheck::new(lhs, rhs * dt))
}

/// `∫ u` against the midpoint rule for `∫_0^max |{u > t}| dt`.
pub fn layer_cake_check(u: &ScalarField, n_thresholds: usize) -> Result<IdentityCheck> {
    check_thresholds(n_thresholds)?;
    if u.min() < 0.0 {
        return Err(Error::InvalidParameter(
            "layer-cake check needs a nonnegative field".into(),
        ));
    }
    let hi = u.max();
    if hi == 0.0 {
        return Ok(IdentityCheck::new(0.0, 0.0));
    }
    let dt = hi / n_thresholds as f64;
    let mut rhs = 0.0;
    for i in 0..n_thresholds {
        let t = (i as f64 + 0.5) * dt;
        rhs += BinaryMask::threshold(u, |v| v > t).area();
    }
    Ok(IdentityCheck::new(u.integral(), rhs * dt))
}

/// `Per(U(t))` against `sgn(t) ∫_{U(t)} v_α` for a solve result.
pub fn curvature_identity_check(ctx: &TvContext, result: &SolveResult, t: f64) -> Result<IdentityCheck> {
    if t == 0.0 {
        return Err(Error::InvalidParameter(
            "the curvature identity needs a nonzero level".into(),
        ));
    }
    ensure_same_grid(result.u_alpha.grid(), ctx.grid())?;
    let level = extract_level_set(&result.u_alpha, t);
    if level.mask().is_empty() {
        return Ok(IdentityCheck::new(0.0, 0.0));
    }
    let per = ctx.perimeter(level.mask())?;
    let flux = t.signum() * result.v_alpha.masked(level.mask())?.integral();
    Ok(IdentityCheck::new(per, flux))
}

/// Discretization allowance on top of the continuum bound `4π|E| ≤ Per(E)²`.
pub const ISOPERIMETRIC_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoperimetricCheck {
    pub area: f64,
    pub perimeter: f64,
    /// `4π |E| / Per(E)²`.
    pub ratio: f64,
    pub within_bound: bool,
}

pub fn isoperimetric_check(ctx: &TvContext, e: &BinaryMask) -> Result<IsoperimetricCheck> {
    if e.is_empty() {
        return Err(Error::InvalidParameter("isoperimetric check needs a nonempty set".into()));
    }
    let area = e.area();
    let perimeter = ctx.perimeter(e)?;
    let ratio = 4.0 * std::f64::consts::PI * area / (perimeter * perimeter);
    Ok(IsoperimetricCheck {
        area,
        perimeter,
        ratio,
        within_bound: ratio <= 1.0 + ISOPERIMETRIC_SLACK,
    })
}
