//! Discrete total variation.
//!
//! The certified scheme uses forward differences and the isotropic norm,
//! `TV(u) = h² Σ_k |(∇u)_k|`, with `div = −∇ᵀ` exactly. How the boundary is
//! treated depends on the regime:
//!
//! * FullSpace and Dirichlet: `u` is multiplied by the domain mask and
//!   extended by zero (also beyond the grid), so jumps across `∂Ω` count.
//! * Neumann: an edge contributes only if both endpoints lie in `Ω`.
//!
//! The upwind scheme uses the four one-sided differences `(u_k − u_nb)/h`
//! and measures `|(·)₊|`; it is offered for figure reproduction only.

mod project;

use std::fmt;
use std::str::FromStr;

pub use project::project_dual_ball;
pub(crate) use project::project_in_place;

use crate::error::{ensure_same_grid, Error, Result};
use crate::field::{dot, BinaryMask, DomainSpec, Grid2D, Regime, ScalarField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    #[default]
    Forward,
    Upwind,
}

impl Scheme {
    pub fn n_components(&self) -> usize {
        match self {
            Scheme::Forward => 2,
            Scheme::Upwind => 4,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Forward => "forward",
            Scheme::Upwind => "upwind",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forward" => Ok(Scheme::Forward),
            "upwind" => Ok(Scheme::Upwind),
            other => Err(Error::Parse(format!("unknown TV scheme `{other}`"))),
        }
    }
}

/// Neighbor offsets of the difference components, per scheme.
const FORWARD_DIRS: [(isize, isize); 2] = [(1, 0), (0, 1)];
const UPWIND_DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Edge-based vector field. With the forward layout, component 0 is the
/// x-difference and component 1 the y-difference stored at the lower pixel
/// of each edge. With the upwind layout the four components are the
/// one-sided differences towards `+x, −x, +y, −y`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2 {
    grid: Grid2D,
    scheme: Scheme,
    comps: Vec<Vec<f64>>,
}

impl VectorField2 {
    pub fn zeros(grid: Grid2D, scheme: Scheme) -> Self {
        Self {
            grid,
            scheme,
            comps: vec![vec![0.0; grid.len()]; scheme.n_components()],
        }
    }

    /// Forward-layout field from its two components.
    pub fn new(grid: Grid2D, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        Self::from_components(grid, Scheme::Forward, vec![dx, dy])
    }

    pub fn from_components(grid: Grid2D, scheme: Scheme, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != scheme.n_components() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter(format!(
                "{scheme} vector field on {grid} needs {} components of length {}",
                scheme.n_components(),
                grid.len()
            )));
        }
        for c in &comps {
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { grid, scheme, comps })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.comps
    }

    pub fn dx(&self) -> &[f64] {
        &self.comps[0]
    }

    pub fn dy(&self) -> &[f64] {
        &self.comps[1]
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|k| self.comps.iter().map(|c| c[k] * c[k]).sum::<f64>().sqrt())
            .collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    /// `h² Σ_k ⟨z_k, w_k⟩`.
    pub fn inner(&self, other: &VectorField2) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        if self.scheme != other.scheme {
            return Err(Error::InvalidParameter("vector field layouts differ".into()));
        }
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| dot(a, b))
            .sum();
        Ok(self.grid.cell_area() * s)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            scheme: self.scheme,
            comps: self
                .comps
                .iter()
                .map(|v| v.iter().map(|x| c * x).collect())
                .collect(),
        }
    }
}

/// Boundary regime plus difference scheme.
#[derive(Clone, Debug)]
pub struct TvContext {
    domain: DomainSpec,
    scheme: Scheme,
    /// 1 where `u` is kept, 0 where it is forced to zero before differencing.
    node: Vec<f64>,
    /// Per component, 1 where the edge to the neighbor counts.
    edges: Vec<Vec<f64>>,
    dirs: &'static [(isize, isize)],
}

impl TvContext {
    pub fn new(domain: DomainSpec, scheme: Scheme) -> Self {
        let grid = *domain.grid();
        let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
        let omega = domain.omega().bits();
        let dirs: &'static [(isize, isize)] = match scheme {
            Scheme::Forward => &FORWARD_DIRS,
            Scheme::Upwind => &UPWIND_DIRS,
        };
        let neumann = domain.regime() == Regime::Neumann;
        let node = if neumann {
            vec![1.0; grid.len()]
        } else {
            omega.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
        };
        let edges = dirs
            .iter()
            .map(|&(di, dj)| {
                (0..grid.len())
                    .map(|k| {
                        if !neumann {
                            return 1.0;
                        }
                        let (i, j) = grid.coords(k);
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        let inside = ni >= 0 && nj >= 0 && ni < nx && nj < ny;
                        if inside && omega[k] && omega[(nj * nx + ni) as usize] {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            domain,
            scheme,
            node,
            edges,
            dirs,
        }
    }

    pub fn forward(domain: DomainSpec) -> Self {
        Self::new(domain, Scheme::Forward)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn grid(&self) -> &Grid2D {
        self.domain.grid()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn regime(&self) -> Regime {
        self.domain.regime()
    }

    /// Writes the scheme's difference components of `u` into `out`.
    pub(crate) fn diff_into(&self, u: &[f64], out: &mut [Vec<f64>]) {
        let g = self.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let inv_h = 1.0 / g.h();
        // upwind components are u_k − u_nb, forward ones u_nb − u_k
        let c0 = match self.scheme {
            Scheme::Forward => inv_h,
            Scheme::Upwind => -inv_h,
        };
        for (c, &(di, dj)) in self.dirs.iter().enumerate() {
            let (lo, hi) = col_range(di, nx);
            for j in 0..ny {
                let r = j * nx..(j + 1) * nx;
                let (ur, mr, er) = (&u[r.clone()], &self.node[r.clone()], &self.edges[c][r.clone()]);
                let o = &mut out[c][r];
                let nj = j as isize + dj;
                if nj < 0 || nj as usize >= ny {
                    for (((o, &e), &m), &v) in o.iter_mut().zip(er).zip(mr).zip(ur) {
                        *o = -c0 * e * m * v;
                    }
                    continue;
                }
                let nr = nj as usize * nx..(nj as usize + 1) * nx;
                let (un, mn) = (&u[nr.clone()], &self.node[nr]);
                let s = (lo as isize + di) as usize..(hi as isize + di) as usize;
                for ((((o, &e), &m), &v), (&vn, &mnb)) in o[lo..hi]
                    .iter_mut()
                    .zip(&er[lo..hi])
                    .zip(&mr[lo..hi])
                    .zip(&ur[lo..hi])
                    .zip(un[s.clone()].iter().zip(&mn[s]))
                {
                    *o = c0 * e * (mnb * vn - m * v);
                }
                for i in (0..lo).chain(hi..nx) {
                    o[i] = -c0 * er[i] * mr[i] * ur[i];
                }
            }
        }
    }

    /// `out = −Dᵀ z`, the negative transpose of [`Self::diff_into`].
    pub(crate) fn div_into(&self, z: &[Vec<f64>], out: &mut [f64]) {
        let g = self.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let inv_h = 1.0 / g.h();
        let c0 = match self.scheme {
            Scheme::Forward => inv_h,
            Scheme::Upwind => -inv_h,
        };
        out.fill(0.0);
        let mut flux = vec![0.0; nx];
        for (c, &(di, dj)) in self.dirs.iter().enumerate() {
            let (lo, hi) = col_range(di, nx);
            for j in 0..ny {
                let r = j * nx..(j + 1) * nx;
                for ((f, &e), &zv) in flux.iter_mut().zip(&self.edges[c][r.clone()]).zip(&z[c][r.clone()]) {
                    *f = c0 * e * zv;
                }
                for (o, &f) in out[r].iter_mut().zip(&flux) {
                    *o += f;
                }
                let nj = j as isize + dj;
                if nj < 0 || nj as usize >= ny {
                    continue;
                }
                let base = nj as usize * nx;
                let s = base + (lo as isize + di) as usize..base + (hi as isize + di) as usize;
                for (o, &f) in out[s].iter_mut().zip(&flux[lo..hi]) {
                    *o -= f;
                }
            }
        }
        for (o, m) in out.iter_mut().zip(&self.node) {
            *o *= m;
        }
    }

    /// Forward-difference gradient (the certified pair, regardless of scheme).
    pub fn gradient(&self, u: &ScalarField) -> Result<VectorField2> {
        ensure_same_grid(u.grid(), self.grid())?;
        let ctx = self.as_forward();
        let mut out = VectorField2::zeros(*self.grid(), Scheme::Forward);
        ctx.diff_into(u.data(), &mut out.comps);
        Ok(out)
    }

    /// `div = −∇ᵀ` for the forward-difference gradient.
    pub fn divergence(&self, z: &VectorField2) -> Result<ScalarField> {
        ensure_same_grid(z.grid(), self.grid())?;
        if z.scheme() != Scheme::Forward {
            return Err(Error::InvalidParameter(
                "divergence expects a forward-layout vector field".into(),
            ));
        }
        let ctx = self.as_forward();
        let mut out = vec![0.0; self.grid().len()];
        ctx.div_into(&z.comps, &mut out);
        ScalarField::new(*self.grid(), out)
    }

    /// Differences in this context's own scheme.
    pub fn scheme_differences(&self, u: &ScalarField) -> Result<VectorField2> {
        ensure_same_grid(u.grid(), self.grid())?;
        let mut out = VectorField2::zeros(*self.grid(), self.scheme);
        self.diff_into(u.data(), &mut out.comps);
        Ok(out)
    }

    /// Negative transpose of [`Self::scheme_differences`].
    pub fn scheme_divergence(&self, z: &VectorField2) -> Result<ScalarField> {
        ensure_same_grid(z.grid(), self.grid())?;
        if z.scheme() != self.scheme {
            return Err(Error::InvalidParameter("vector field layout does not match scheme".into()));
        }
        let mut out = vec![0.0; self.grid().len()];
        self.div_into(&z.comps, &mut out);
        ScalarField::new(*self.grid(), out)
    }

    fn as_forward(&self) -> std::borrow::Cow<'_, TvContext> {
        match self.scheme {
            Scheme::Forward => std::borrow::Cow::Borrowed(self),
            Scheme::Upwind => std::borrow::Cow::Owned(TvContext::forward(self.domain.clone())),
        }
    }

    /// Discrete TV of a raw sample vector, in this context's scheme.
    pub(crate) fn tv_of(&self, u: &[f64], scratch: &mut [Vec<f64>]) -> f64 {
        self.diff_into(u, scratch);
        let n = u.len();
        let mut acc = 0.0;
        match self.scheme {
            Scheme::Forward => {
                let (a, b) = (&scratch[0], &scratch[1]);
                for k in 0..n {
                    acc += (a[k] * a[k] + b[k] * b[k]).sqrt();
                }
            }
            Scheme::Upwind => {
                for k in 0..n {
                    let s: f64 = scratch.iter().map(|c| c[k].max(0.0).powi(2)).sum();
                    acc += s.sqrt();
                }
            }
        }
        self.grid().cell_area() * acc
    }

    /// `TV(u) = h² Σ_k |(∇u)_k|` (upwind: the positive parts only).
    pub fn tv_value(&self, u: &ScalarField) -> Result<f64> {
        ensure_same_grid(u.grid(), self.grid())?;
        let mut scratch = vec![vec![0.0; u.data().len()]; self.scheme.n_components()];
        Ok(self.tv_of(u.data(), &mut scratch))
    }

    /// `Per(E) = TV(1_E)`.
    pub fn perimeter(&self, e: &BinaryMask) -> Result<f64> {
        self.tv_value(&ScalarField::indicator(e))
    }
}

/// Columns `i` whose neighbor `i + di` lies on the grid.
fn col_range(di: isize, nx: usize) -> (usize, usize) {
    match di {
        1 => (0, nx - 1),
        -1 => (1, nx),
        _ => (0, nx),
    }
}
