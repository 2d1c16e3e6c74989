use crate::error::{Error, Result};
use crate::field::Regime;

/// Upper limit `2√π` for `η` in the FullSpace and Dirichlet regimes.
pub const ETA_LIMIT: f64 = 3.544_907_701_811_031_8;

/// Default `η = √π`, half the admissible limit.
pub const ETA_DEFAULT: f64 = 1.772_453_850_905_515_9;

/// Parameter-choice rule `‖w‖ ‖A*‖ / α ≤ η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamChoice {
    delta: f64,
    opnorm_adj: f64,
    eta: f64,
    regime: Regime,
    c_omega: Option<f64>,
    alpha_floor: f64,
}

impl ParamChoice {
    /// `delta` is the noise norm `‖w‖`, `opnorm_adj` the norm `‖A*‖`.
    /// Neumann problems need the Sobolev–Poincaré constant `c_omega` and
    /// admit `η < 1 / c_omega`; the other regimes admit `η < 2√π`.
    pub fn new(
        delta: f64,
        opnorm_adj: f64,
        eta: f64,
        regime: Regime,
        c_omega: Option<f64>,
        alpha_floor: f64,
    ) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise level must be >= 0, got {delta}")));
        }
        if !(opnorm_adj > 0.0 && opnorm_adj.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "operator norm must be positive, got {opnorm_adj}"
            )));
        }
        if !(alpha_floor > 0.0 && alpha_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha floor must be positive, got {alpha_floor}"
            )));
        }
        check_eta(eta, regime, c_omega)?;
        Ok(Self {
            delta,
            opnorm_adj,
            eta,
            regime,
            c_omega,
            alpha_floor,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn opnorm_adj(&self) -> f64 {
        self.opnorm_adj
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn c_omega(&self) -> Option<f64> {
        self.c_omega
    }

    /// `α = δ ‖A*‖ / η`, or the floor when there is no noise.
    pub fn choose_alpha(&self) -> f64 {
        if self.delta == 0.0 {
            self.alpha_floor
        } else {
            self.delta * self.opnorm_adj / self.eta
        }
    }

    /// Noise norm that meets the rule with equality at `alpha`.
    pub fn noise_norm_for(&self, alpha: f64) -> f64 {
        alpha * self.eta / self.opnorm_adj
    }

    /// Whether `(alpha, noise_norm)` satisfies `‖w‖ ‖A*‖ / α ≤ η`
    /// (with a relative slack of `1e-12` for rounding).
    pub fn admits(&self, alpha: f64, noise_norm: f64) -> bool {
        alpha > 0.0 && noise_norm * self.opnorm_adj / alpha <= self.eta * (1.0 + 1e-12)
    }
}

/// Validates `η` for a regime.
pub fn check_eta(eta: f64, regime: Regime, c_omega: Option<f64>) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    match regime {
        Regime::FullSpace | Regime::Dirichlet => {
            if eta >= ETA_LIMIT {
                return Err(Error::InvalidParameter(format!(
                    "eta = {eta} violates eta < 2 sqrt(pi) = {ETA_LIMIT} for the {regime} regime"
                )));
            }
        }
        Regime::Neumann => {
            let c = c_omega.ok_or_else(|| {
                Error::InvalidParameter("the neumann regime needs an explicit c_omega".into())
            })?;
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("c_omega must be positive, got {c}")));
            }
            if eta >= 1.0 / c {
                return Err(Error::InvalidParameter(format!(
                    "eta = {eta} violates eta < 1 / c_omega = {}",
                    1.0 / c
                )));
            }
        }
    }
    Ok(())
}

/// Noiseless floor `1e-4 ‖f‖ / tv_scale`.
pub fn default_alpha_floor(f_norm: f64, tv_scale: f64) -> f64 {
    1e-4 * f_norm / tv_scale
}
