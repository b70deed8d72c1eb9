//! Fourier layer: per-profile coefficients of data and kernel, and the
//! kernel's degree of ill-posedness.
//!
//! Coefficients follow `<e_m, row>` with `e_m(t) = exp(i 2 pi m t)`,
//! approximated by `(1/N) sum_i row(t_i) conj(e_m(t_i))`, i.e. an FFT scaled
//! by `1/N`. Frequencies live in `[-N/2, N/2)` and are stored in FFT order.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Maps a storage index to its signed frequency.
#[inline]
pub fn freq_of_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Maps a signed frequency in `[-N/2, N/2)` to its storage index.
#[inline]
pub fn index_of_freq(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Cached forward/inverse FFT plans for one length.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Fourier coefficients of a real row, scaled by `1/N`.
    pub fn coeffs_real(&self, row: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = row.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    /// In-place forward transform scaled by `1/N`.
    pub fn coeffs_in_place(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Evaluates `sum_m c_m e_m(t_i)` on the grid, in place.
    pub fn synthesize_in_place(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }
}

/// Noisy grid observations `y(u_l, t_i)`, one row per profile.
///
/// Spatial dimensions are kept separately so that `r >= 2` grids flatten the
/// profile index row-major over `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationGrid {
    samples: Vec<f64>,
    dims: Vec<usize>,
    n: usize,
    sigma: f64,
}

impl ObservationGrid {
    /// A two-dimensional grid with `m` profiles of `n` time samples.
    pub fn new(m: usize, n: usize, sigma: f64, samples: Vec<f64>) -> Result<Self> {
        Self::with_dims(vec![m], n, sigma, samples)
    }

    /// A grid with spatial shape `dims` (profiles flattened row-major).
    pub fn with_dims(dims: Vec<usize>, n: usize, sigma: f64, samples: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::config("spectra", "every spatial dimension must be >= 1"));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::config(
                "spectra",
                format!("N = {n} must be a power of two >= 2"),
            ));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::config("spectra", format!("sigma = {sigma} must be finite and >= 0")));
        }
        let m: usize = dims.iter().product();
        if samples.len() != m * n {
            return Err(Error::config(
                "spectra",
                format!("expected {} samples, got {}", m * n, samples.len()),
            ));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(
                "spectra",
                format!("non-finite sample at profile {}, index {}", pos / n, pos % n),
            ));
        }
        Ok(ObservationGrid {
            samples,
            dims,
            n,
            sigma,
        })
    }

    /// Total number of profiles `M` (product of spatial dimensions).
    pub fn m(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.samples[l * self.n..(l + 1) * self.n]
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Grid coordinate `u_l = l / M` (single spatial axis).
    pub fn u(&self, l: usize) -> f64 {
        l as f64 / self.m() as f64
    }

    /// Grid coordinate `t_i = i / N`.
    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

/// Per-profile Fourier coefficients, frequencies in `[-N/2, N/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpectrum {
    coeffs: Vec<Complex64>,
    m: usize,
    n: usize,
}

impl ProfileSpectrum {
    /// Wraps coefficients stored profile-major in FFT order.
    pub fn from_fft_order(m: usize, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != m * n {
            return Err(Error::index(
                "spectra",
                format!("expected {} coefficients, got {}", m * n, coeffs.len()),
            ));
        }
        Ok(ProfileSpectrum { coeffs, m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of frequency `freq` for profile `l`.
    pub fn get(&self, l: usize, freq: i64) -> Complex64 {
        self.coeffs[l * self.n + index_of_freq(freq, self.n)]
    }

    /// Row `l` in FFT order.
    pub fn row(&self, l: usize) -> &[Complex64] {
        &self.coeffs[l * self.n..(l + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Evaluates every row back on the time grid (complex values).
    pub fn to_samples_complex(&self) -> Vec<Complex64> {
        let fourier = Fourier::new(self.n);
        let mut out = self.coeffs.clone();
        for row in out.chunks_mut(self.n) {
            fourier.synthesize_in_place(row);
        }
        out
    }

    /// Real part of [`to_samples_complex`](Self::to_samples_complex).
    pub fn to_samples(&self) -> Vec<f64> {
        self.to_samples_complex().iter().map(|c| c.re).collect()
    }
}

/// Computes per-profile Fourier coefficients of the grid.
pub fn fourier_coeffs(grid: &ObservationGrid) -> ProfileSpectrum {
    fourier_coeffs_with(grid, Execution::default())
}

pub fn fourier_coeffs_with(grid: &ObservationGrid, exec: Execution) -> ProfileSpectrum {
    let n = grid.n();
    let fourier = Fourier::new(n);
    let mut coeffs: Vec<Complex64> = grid
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    exec::for_each_chunk_mut(exec, &mut coeffs, n, |_, row| fourier.coeffs_in_place(row));
    ProfileSpectrum {
        coeffs,
        m: grid.m(),
        n,
    }
}

/// How grid samples of the kernel act on the signal.
///
/// `Riemann` treats the samples as a continuous kernel integrated with weight
/// `1/N`; `Sum` treats them as a discrete filter, `h_i = sum_s g_{i-s} f_s`,
/// so the transfer function is `N` times the Fourier coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionScale {
    Riemann,
    #[default]
    Sum,
}

impl ConvolutionScale {
    pub fn gain(self, n: usize) -> f64 {
        match self {
            ConvolutionScale::Riemann => 1.0,
            ConvolutionScale::Sum => n as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConvolutionScale::Riemann => "riemann",
            ConvolutionScale::Sum => "sum",
        }
    }
}

impl std::str::FromStr for ConvolutionScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "riemann" => Ok(ConvolutionScale::Riemann),
            "sum" => Ok(ConvolutionScale::Sum),
            other => Err(Error::config(
                "spectra",
                format!("unknown convolution scale '{other}' (expected riemann|sum)"),
            )),
        }
    }
}

/// Functional Fourier coefficients `g_m(u_l)` of the known kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpectrum {
    g: Vec<Complex64>,
    m: usize,
    n: usize,
    scale: ConvolutionScale,
    /// Degree of ill-posedness; 0 until estimated or supplied.
    pub nu: f64,
    /// Empirical lower bound of `|G_m|^2 |m|^{2 nu}` over the fit range.
    pub c1: f64,
    /// Empirical upper bound of `|G_m|^2 |m|^{2 nu}` over the fit range.
    pub c2: f64,
}

/// Default frequency range `[N/16, N/4]` for estimating nu.
pub fn default_nu_range(n: usize) -> (i64, i64) {
    ((n / 16).max(1) as i64, (n / 4) as i64)
}

/// Computes the kernel spectrum from samples (M rows of N values).
///
/// Zero coefficients are not rejected here; the estimator checks the bands
/// it actually uses (see [`KernelSpectrum::require_nonzero`]).
pub fn kernel_spectrum(
    samples: &[f64],
    m: usize,
    n: usize,
    scale: ConvolutionScale,
) -> Result<KernelSpectrum> {
    let grid = ObservationGrid::new(m, n, 0.0, samples.to_vec())?;
    let spec = fourier_coeffs(&grid);
    KernelSpectrum::from_coefficients(m, n, spec.coeffs, scale)
}

impl KernelSpectrum {
    /// Builds a kernel spectrum directly from coefficients in FFT order.
    pub fn from_coefficients(
        m: usize,
        n: usize,
        g: Vec<Complex64>,
        scale: ConvolutionScale,
    ) -> Result<Self> {
        if g.len() != m * n {
            return Err(Error::index(
                "spectra",
                format!("expected {} kernel coefficients, got {}", m * n, g.len()),
            ));
        }
        if g.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::config("spectra", "kernel coefficients must be finite"));
        }
        Ok(KernelSpectrum {
            g,
            m,
            n,
            scale,
            nu: 0.0,
            c1: 0.0,
            c2: 0.0,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> ConvolutionScale {
        self.scale
    }

    /// Fourier coefficient `g_m(u_l)` (no convolution gain).
    pub fn coeff(&self, l: usize, freq: i64) -> Complex64 {
        self.g[l * self.n + index_of_freq(freq, self.n)]
    }

    /// Transfer function `h_m = G_m f_m`, including the convolution gain.
    pub fn transfer(&self, l: usize, freq: i64) -> Complex64 {
        self.coeff(l, freq) * self.scale.gain(self.n)
    }

    /// Transfer row `l` in FFT order.
    pub fn transfer_row(&self, l: usize) -> Vec<Complex64> {
        let gain = self.scale.gain(self.n);
        self.g[l * self.n..(l + 1) * self.n]
            .iter()
            .map(|c| c * gain)
            .collect()
    }

    /// Fails with `IllPosedKernel` if any `|g_m(u_l)|` vanishes for `|m| <= max_freq`.
    ///
    /// "Vanishes" means below `1e-12` times the largest coefficient of that profile.
    pub fn require_nonzero(&self, max_freq: i64) -> Result<()> {
        for l in 0..self.m {
            let row = &self.g[l * self.n..(l + 1) * self.n];
            let peak = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let floor = peak * 1e-12;
            for freq in -max_freq..=max_freq {
                if self.coeff(l, freq).norm() <= floor {
                    return Err(Error::IllPosedKernel {
                        profile: l,
                        frequency: freq,
                    });
                }
            }
        }
        Ok(())
    }

    /// Supplies nu and refreshes the `(c1, c2)` diagnostics over `range`.
    pub fn set_nu(&mut self, nu: f64, range: (i64, i64)) {
        self.nu = nu;
        let (c1, c2) = self.bounds(nu, range);
        self.c1 = c1;
        self.c2 = c2;
    }

    fn bounds(&self, nu: f64, (lo, hi): (i64, i64)) -> (f64, f64) {
        let mut c1 = f64::INFINITY;
        let mut c2 = 0.0f64;
        for l in 0..self.m {
            for freq in lo..=hi {
                for f in [freq, -freq] {
                    let v = self.transfer(l, f).norm_sqr() * (f.unsigned_abs() as f64).powf(2.0 * nu);
                    c1 = c1.min(v);
                    c2 = c2.max(v);
                }
            }
        }
        (c1, c2)
    }
}

/// Estimates nu as minus the least-squares slope of `log mean_l |g_m(u_l)|`
/// against `log |m|` over `range = (lo, hi)` (positive frequencies, inclusive).
///
/// Also refreshes `ks.nu`, `ks.c1` and `ks.c2`.
pub fn estimate_nu(ks: &mut KernelSpectrum, range: (i64, i64)) -> Result<f64> {
    let (lo, hi) = range;
    let lo = lo.max(1);
    let nyq = (ks.n / 2) as i64;
    if hi >= nyq {
        return Err(Error::config(
            "spectra",
            format!("nu range upper end {hi} must be below N/2 = {nyq}"),
        ));
    }
    let count = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
    const MIN_FREQS: usize = 8;
    if count < MIN_FREQS {
        return Err(Error::InsufficientRange {
            needed: MIN_FREQS,
            got: count,
        });
    }
    let mut xs = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    for freq in lo..=hi {
        let mean = (0..ks.m).map(|l| ks.coeff(l, freq).norm()).sum::<f64>() / ks.m as f64;
        if mean <= 0.0 {
            return Err(Error::IllPosedKernel {
                profile: 0,
                frequency: freq,
            });
        }
        xs.push((freq as f64).ln());
        ys.push(mean.ln());
    }
    let nu = -least_squares_slope(&xs, &ys);
    ks.set_nu(nu, (lo, hi));
    Ok(nu)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
