use std::fmt;
use std::str::FromStr;

use super::{BinaryMask, Grid2D};
use crate::error::{Error, Result};

/// Boundary regime of a total-variation problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// The whole plane, realized on a grid padded with zeros.
    FullSpace,
    /// Functions extended by zero outside `omega`; jumps across the boundary count.
    Dirichlet,
    /// Variation measured inside `omega` only.
    Neumann,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::FullSpace => "fullspace",
            Regime::Dirichlet => "dirichlet",
            Regime::Neumann => "neumann",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fullspace" | "full-space" | "full" => Ok(Regime::FullSpace),
            "dirichlet" => Ok(Regime::Dirichlet),
            "neumann" => Ok(Regime::Neumann),
            other => Err(Error::Parse(format!("unknown regime `{other}`"))),
        }
    }
}

/// Where the unknown lives and how its boundary is treated.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    regime: Regime,
    omega: BinaryMask,
    pad: usize,
    support: BinaryMask,
}

impl DomainSpec {
    /// The plane, discretized by `grid`. `pad` records how many zero pixels
    /// surround the data of interest.
    ///
    /// Unknowns on the outermost pixel ring are held at zero, so every jump
    /// of an admissible field is seen by forward differences.
    pub fn full_space(grid: Grid2D, pad: usize) -> Result<Self> {
        if grid.nx() < 3 || grid.ny() < 3 {
            return Err(Error::InvalidDomain(
                "full-space grid needs at least 3x3 pixels".into(),
            ));
        }
        let support = BinaryMask::from_index_fn(grid, |i, j| !grid.on_frame(i, j));
        Ok(Self {
            regime: Regime::FullSpace,
            omega: BinaryMask::full(grid),
            pad,
            support,
        })
    }

    /// Homogeneous Dirichlet problem on `omega`. The mask must be nonempty,
    /// 4-connected and must not touch the outermost pixel ring.
    pub fn dirichlet(omega: BinaryMask) -> Result<Self> {
        Self::check_bounded(&omega)?;
        let g = *omega.grid();
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                if g.on_frame(i, j) && omega.get(i, j) {
                    return Err(Error::InvalidDomain(format!(
                        "dirichlet domain touches the grid border at ({i}, {j}); leave a one-pixel exterior frame"
                    )));
                }
            }
        }
        Ok(Self {
            regime: Regime::Dirichlet,
            support: omega.clone(),
            omega,
            pad: 0,
        })
    }

    /// Neumann problem on `omega` (nonempty, 4-connected).
    pub fn neumann(omega: BinaryMask) -> Result<Self> {
        Self::check_bounded(&omega)?;
        Ok(Self {
            regime: Regime::Neumann,
            support: omega.clone(),
            omega,
            pad: 0,
        })
    }

    fn check_bounded(omega: &BinaryMask) -> Result<()> {
        if omega.is_empty() {
            return Err(Error::InvalidDomain("domain mask is empty".into()));
        }
        if !omega.is_4_connected() {
            return Err(Error::InvalidDomain(
                "domain mask is not 4-connected".into(),
            ));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn omega(&self) -> &BinaryMask {
        &self.omega
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn grid(&self) -> &Grid2D {
        self.omega.grid()
    }

    /// Pixels where the unknown may be nonzero.
    pub fn support(&self) -> &BinaryMask {
        &self.support
    }
}

impl BinaryMask {
    /// Mask from a predicate on pixel indices `(i, j)`.
    pub fn from_index_fn(grid: Grid2D, pred: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                bits.push(pred(i, j));
            }
        }
        BinaryMask::new(grid, bits).expect("length matches grid")
    }
}
