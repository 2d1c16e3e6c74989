use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{LinearOperator, LinearOperatorHandle, OperatorKind};
use crate::error::{Error, Result};
use crate::field::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BlurBackend {
    /// Separable direct summation.
    #[default]
    Direct,
    /// Separable convolution through zero-padded FFTs.
    Fft,
}

struct FftAxis {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex<f64>>,
}

/// Convolution with a truncated, sampled, unit-sum Gaussian.
///
/// The kernel is separable and symmetric, so the operator is self-adjoint.
pub struct GaussianBlur {
    grid: Grid2D,
    sigma: f64,
    truncation: f64,
    periodic: bool,
    taps: Vec<f64>,
    fft: Option<(FftAxis, FftAxis)>,
}

impl GaussianBlur {
    /// One-dimensional weights `g_{-K} .. g_K`, summing to one.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    fn radius(&self) -> usize {
        self.taps.len() / 2
    }

    /// 1-D discrete frequency response of the taps on `n` periodic samples.
    pub fn frequency_response(&self, n: usize) -> Vec<f64> {
        let k = self.radius() as isize;
        (0..n)
            .map(|xi| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, w) in self.taps.iter().enumerate() {
                    let off = t as isize - k;
                    let ph = -2.0 * std::f64::consts::PI * (off as f64) * (xi as f64) / n as f64;
                    re += w * ph.cos();
                    im += w * ph.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    fn conv_line_direct(&self, src: &[f64], dst: &mut [f64]) {
        let n = src.len() as isize;
        let k = self.radius() as isize;
        for (i, d) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (t, w) in self.taps.iter().enumerate() {
                let mut s = i as isize + t as isize - k;
                if self.periodic {
                    s = s.rem_euclid(n);
                } else if s < 0 || s >= n {
                    continue;
                }
                acc += w * src[s as usize];
            }
            *d = acc;
        }
    }

    fn conv_line_fft(&self, axis: &FftAxis, src: &[f64], dst: &mut [f64], buf: &mut [Complex<f64>]) {
        let k = self.radius();
        buf.fill(Complex::new(0.0, 0.0));
        for (b, &s) in buf.iter_mut().zip(src) {
            b.re = s;
        }
        axis.forward.process(buf);
        for (b, s) in buf.iter_mut().zip(&axis.spectrum) {
            *b *= s;
        }
        axis.inverse.process(buf);
        let scale = 1.0 / axis.len as f64;
        // the kernel spectrum is built from taps starting at offset 0, so the
        // centered result is shifted by the kernel radius
        for (i, d) in dst.iter_mut().enumerate() {
            *d = buf[i + k].re * scale;
        }
    }

    fn blur(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut tmp = vec![0.0; nx * ny];
        let mut col = vec![0.0; ny];
        let mut col_out = vec![0.0; ny];
        match &self.fft {
            None => {
                for j in 0..ny {
                    self.conv_line_direct(&u[j * nx..(j + 1) * nx], &mut tmp[j * nx..(j + 1) * nx]);
                }
                for i in 0..nx {
                    for j in 0..ny {
                        col[j] = tmp[j * nx + i];
                    }
                    self.conv_line_direct(&col, &mut col_out);
                    for j in 0..ny {
                        out[j * nx + i] = col_out[j];
                    }
                }
            }
            Some((ax, ay)) => {
                let mut buf = vec![Complex::new(0.0, 0.0); ax.len.max(ay.len)];
                for j in 0..ny {
                    self.conv_line_fft(
                        ax,
                        &u[j * nx..(j + 1) * nx],
                        &mut tmp[j * nx..(j + 1) * nx],
                        &mut buf[..ax.len],
                    );
                }
                for i in 0..nx {
                    for j in 0..ny {
                        col[j] = tmp[j * nx + i];
                    }
                    self.conv_line_fft(ay, &col, &mut col_out, &mut buf[..ay.len]);
                    for j in 0..ny {
                        out[j * nx + i] = col_out[j];
                    }
                }
            }
        }
    }
}

impl LinearOperator for GaussianBlur {
    fn domain_grid(&self) -> &Grid2D {
        &self.grid
    }
    fn range_grid(&self) -> &Grid2D {
        &self.grid
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::GaussianBlur {
            sigma: self.sigma,
            truncation: self.truncation,
            periodic: self.periodic,
        }
    }
    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.blur(u, out)
    }
    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        self.blur(p, out)
    }
}

fn gaussian_taps(h: f64, sigma: f64, truncation: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    if !(truncation > 0.0 && truncation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "blur truncation must be positive, got {truncation}"
        )));
    }
    let k = (truncation * sigma / h).ceil() as isize;
    let raw: Vec<f64> = (-k..=k)
        .map(|t| {
            let x = t as f64 * h;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

fn fft_axis(planner: &mut FftPlanner<f64>, n: usize, taps: &[f64]) -> FftAxis {
    let k = taps.len() / 2;
    let len = (n + 2 * k).next_power_of_two();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut spectrum = vec![Complex::new(0.0, 0.0); len];
    for (s, &w) in spectrum.iter_mut().zip(taps) {
        s.re = w;
    }
    forward.process(&mut spectrum);
    FftAxis {
        len,
        forward,
        inverse,
        spectrum,
    }
}

/// Zero-padded Gaussian blur with standard deviation `sigma` (physical
/// units), truncated at `truncation * sigma`.
pub fn make_gaussian_blur(grid: Grid2D, sigma: f64, truncation: f64) -> Result<LinearOperatorHandle> {
    make_gaussian_blur_with(grid, sigma, truncation, BlurBackend::Direct)
}

pub fn make_gaussian_blur_with(
    grid: Grid2D,
    sigma: f64,
    truncation: f64,
    backend: BlurBackend,
) -> Result<LinearOperatorHandle> {
    Ok(LinearOperatorHandle::new(build(grid, sigma, truncation, backend, false)?))
}

/// Circular variant on the torus of the grid; its norm is the largest
/// modulus of the kernel's discrete frequency response.
pub fn make_periodic_gaussian_blur(grid: Grid2D, sigma: f64, truncation: f64) -> Result<LinearOperatorHandle> {
    Ok(LinearOperatorHandle::new(build(
        grid,
        sigma,
        truncation,
        BlurBackend::Direct,
        true,
    )?))
}

pub(crate) fn build(
    grid: Grid2D,
    sigma: f64,
    truncation: f64,
    backend: BlurBackend,
    periodic: bool,
) -> Result<GaussianBlur> {
    let taps = gaussian_taps(grid.h(), sigma, truncation)?;
    let fft = match backend {
        BlurBackend::Direct => None,
        BlurBackend::Fft => {
            let mut planner = FftPlanner::new();
            let ax = fft_axis(&mut planner, grid.nx(), &taps);
            let ay = fft_axis(&mut planner, grid.ny(), &taps);
            Some((ax, ay))
        }
    };
    Ok(GaussianBlur {
        grid,
        sigma,
        truncation,
        periodic,
        taps,
        fft,
    })
}
