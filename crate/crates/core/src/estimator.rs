//! Hyperbolic wavelet coefficient estimation, hard thresholding and
//! reconstruction, plus the per-profile baseline.
//!
//! Along `t` the data spectrum is divided by the kernel spectrum and expanded
//! in periodized Meyer wavelets; along `u` the resulting coefficient columns
//! go through a periodized Daubechies DWT. Both directions use a dyadic
//! layout: a block of `2^J` positions where `[0, 2^{m0})` is the scaling block
//! and `[2^j, 2^{j+1})` is level `j`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::meyer::MeyerBasis;
use crate::spatial::{dyadic_log, SpatialBasis};
use crate::spectra::{
    default_nu_range, estimate_nu, fourier_coeffs_with, index_of_freq, Fourier, KernelSpectrum,
    ObservationGrid,
};

/// Functional (joint) or per-profile estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Functional,
    Separate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Functional => "functional",
            Mode::Separate => "separate",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "functional" => Ok(Mode::Functional),
            "separate" => Ok(Mode::Separate),
            other => Err(Error::config(
                "estimator",
                format!("unknown mode '{other}' (expected functional|separate)"),
            )),
        }
    }
}

/// User-facing estimator settings. `None` means "derive from the data".
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Threshold constant; `None` uses `4 (2 pi / 3)^nu / sqrt(c1)`, `0` disables thresholding.
    pub c_beta: Option<f64>,
    /// Degree of ill-posedness; `None` estimates it from the kernel.
    pub nu: Option<f64>,
    /// Frequency range for estimating nu and the `(c1, c2)` diagnostics.
    pub nu_range: Option<(i64, i64)>,
    pub m0: u32,
    pub m0_spatial: u32,
    pub vanishing_moments: usize,
    /// Cutoff `J` along `t`; `None` picks it from the noise level.
    pub j_cutoff: Option<u32>,
    /// Cutoff `J'` along every spatial axis; `None` picks it from the noise level.
    pub j_spatial: Option<u32>,
    pub mode: Mode,
    pub execution: Execution,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            c_beta: None,
            nu: None,
            nu_range: None,
            m0: 3,
            m0_spatial: 3,
            vanishing_moments: 6,
            j_cutoff: None,
            j_spatial: None,
            mode: Mode::Functional,
            execution: Execution::default(),
        }
    }
}

/// Raw and grid-clamped resolution cutoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionLimits {
    /// `floor(log2(eps^{-2/(2 nu + 1)}))`, infinite when `eps = 0`.
    pub raw_j: f64,
    /// `floor(log2(eps^{-2}))`, infinite when `eps = 0`.
    pub raw_j_spatial: f64,
    pub j: u32,
    pub j_spatial: u32,
    /// Set when `eps >= 1`; the cutoffs then fall back to the coarsest levels.
    pub degenerate: bool,
}

/// Computes the cutoffs `J`, `J'` for noise level `eps`, clamped to
/// `[m0, j_max]` and `[m0', jp_max]`.
pub fn resolution_limits(
    eps: f64,
    nu: f64,
    (m0, j_max): (u32, u32),
    (m0p, jp_max): (u32, u32),
) -> Result<ResolutionLimits> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::config("estimator", format!("noise level eps = {eps} must be finite and >= 0")));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::config("estimator", format!("nu = {nu} must be finite and >= 0")));
    }
    if eps == 0.0 {
        return Ok(ResolutionLimits {
            raw_j: f64::INFINITY,
            raw_j_spatial: f64::INFINITY,
            j: j_max.max(m0),
            j_spatial: jp_max.max(m0p),
            degenerate: false,
        });
    }
    let log_inv = -2.0 * eps.log2();
    // nudge so that exact dyadic inputs are not lost to rounding
    let raw_j = (log_inv / (2.0 * nu + 1.0) + 1e-9).floor();
    let raw_jp = (log_inv + 1e-9).floor();
    let degenerate = eps >= 1.0;
    let clamp = |raw: f64, lo: u32, hi: u32| -> u32 {
        if degenerate {
            lo
        } else {
            raw.clamp(lo as f64, hi.max(lo) as f64) as u32
        }
    };
    Ok(ResolutionLimits {
        raw_j,
        raw_j_spatial: raw_jp,
        j: clamp(raw_j, m0, j_max),
        j_spatial: clamp(raw_jp, m0p, jp_max),
        degenerate,
    })
}

/// `lambda_j = c_beta sqrt(ln(1/eps)) 2^{j nu} eps`.
pub fn threshold_value(j: i32, c_beta: f64, nu: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    c_beta * (1.0 / eps).ln().max(0.0).sqrt() * (j as f64 * nu).exp2() * eps
}

/// Per-profile threshold `lambda_j = c_beta 2^{j nu} sigma sqrt(ln N / N)`.
pub fn separate_threshold_value(j: i32, c_beta: f64, nu: f64, sigma: f64, n: usize) -> f64 {
    let n = n as f64;
    c_beta * (j as f64 * nu).exp2() * sigma * (n.ln() / n).sqrt()
}

/// Threshold constant used when none is supplied.
pub fn default_c_beta(nu: f64, c1: f64) -> f64 {
    4.0 * (2.0 * PI / 3.0).powf(nu) / c1.sqrt()
}

/// Smallest `c_beta` covered by the theoretical risk bound (diagnostic only).
pub fn theoretical_c_beta(nu: f64, c1: f64) -> f64 {
    (80.0 / c1).sqrt() * (2.0 * PI / 3.0).powf(nu)
}

/// Fully resolved estimator parameters for one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub mode: Mode,
    pub dims: Vec<usize>,
    pub n: usize,
    pub sigma: f64,
    /// Effective noise level: `sigma / sqrt(MN)` or `sigma / sqrt(N)` per profile.
    pub epsilon: f64,
    pub nu: f64,
    pub nu_range: (i64, i64),
    pub c1: f64,
    pub c2: f64,
    pub c_beta: f64,
    pub c_beta_theory: f64,
    pub m0: u32,
    pub m0_spatial: u32,
    pub vanishing_moments: usize,
    pub limits: ResolutionLimits,
    /// Cutoff along `t`.
    pub j_cutoff: u32,
    /// Cutoff per spatial axis (empty in separate mode).
    pub j_spatial: Vec<u32>,
    pub execution: Execution,
}

impl Plan {
    /// Resolves `cfg` against a grid shape and kernel, filling in nu, `c1`, `c2`.
    pub fn resolve(
        cfg: &EstimatorConfig,
        dims: &[usize],
        n: usize,
        sigma: f64,
        ks: &mut KernelSpectrum,
    ) -> Result<Plan> {
        let m: usize = dims.iter().product();
        if ks.m() != m || ks.n() != n {
            return Err(Error::config(
                "estimator",
                format!(
                    "kernel is {}x{} but data are {}x{}",
                    ks.m(),
                    ks.n(),
                    m,
                    n
                ),
            ));
        }
        let nu_range = cfg.nu_range.unwrap_or_else(|| default_nu_range(n));
        let nu = match cfg.nu {
            Some(nu) => {
                if !(nu >= 0.0 && nu.is_finite()) {
                    return Err(Error::config("estimator", format!("nu = {nu} must be finite and >= 0")));
                }
                ks.set_nu(nu, nu_range);
                nu
            }
            None => estimate_nu(ks, nu_range)?,
        };
        let (c1, c2) = (ks.c1, ks.c2);
        let c_beta = match cfg.c_beta {
            Some(c) if c >= 0.0 && c.is_finite() => c,
            Some(c) => {
                return Err(Error::config("estimator", format!("c_beta = {c} must be finite and >= 0")))
            }
            None => {
                if c1 == 0.0 {
                    ks.require_nonzero(nu_range.1)?;
                }
                if !(c1 > 0.0 && c1.is_finite()) {
                    return Err(Error::config(
                        "estimator",
                        format!("cannot derive c_beta: empirical c1 = {c1} over {nu_range:?}"),
                    ));
                }
                default_c_beta(nu, c1)
            }
        };
        let meyer_max = crate::meyer::finest_level(n)
            .map(|j| j + 1)
            .filter(|&j| j > cfg.m0)
            .ok_or(Error::LevelTooFine {
                level: cfg.m0,
                max_frequency: (1i64 << (cfg.m0 + 1)) / 3,
                n,
            })?;
        let (epsilon, jp_max) = match cfg.mode {
            Mode::Functional => {
                let logs: Vec<u32> = dims
                    .iter()
                    .map(|&d| {
                        dyadic_log(d).ok_or_else(|| {
                            Error::config("estimator", format!("spatial size {d} is not a power of two"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if let Some(&small) = logs.iter().find(|&&l| l < cfg.m0_spatial) {
                    return Err(Error::config(
                        "estimator",
                        format!(
                            "spatial size 2^{small} is below 2^m0' = {}",
                            1usize << cfg.m0_spatial
                        ),
                    ));
                }
                (sigma / ((m * n) as f64).sqrt(), logs)
            }
            Mode::Separate => (sigma / (n as f64).sqrt(), Vec::new()),
        };
        let jp_cap = jp_max.iter().copied().max().unwrap_or(cfg.m0_spatial);
        let limits = resolution_limits(
            epsilon,
            nu,
            (cfg.m0, meyer_max),
            (cfg.m0_spatial, jp_cap),
        )?;
        let j_cutoff = match cfg.j_cutoff {
            Some(j) if j < cfg.m0 => {
                return Err(Error::LevelTooCoarse {
                    level: j,
                    coarsest: cfg.m0,
                })
            }
            Some(j) if j > meyer_max => {
                return Err(Error::LevelTooFine {
                    level: j - 1,
                    max_frequency: crate::meyer::band_top(j - 1),
                    n,
                })
            }
            Some(j) => j,
            None => limits.j,
        };
        let mut j_spatial = Vec::with_capacity(jp_max.len());
        for &cap in &jp_max {
            let jp = match cfg.j_spatial {
                Some(jp) if jp < cfg.m0_spatial => {
                    return Err(Error::LevelTooCoarse {
                        level: jp,
                        coarsest: cfg.m0_spatial,
                    })
                }
                Some(jp) => jp.min(cap),
                None => limits.j_spatial.min(cap),
            };
            j_spatial.push(jp);
        }
        Ok(Plan {
            mode: cfg.mode,
            dims: dims.to_vec(),
            n,
            sigma,
            epsilon,
            nu,
            nu_range,
            c1,
            c2,
            c_beta,
            c_beta_theory: theoretical_c_beta(nu, c1),
            m0: cfg.m0,
            m0_spatial: cfg.m0_spatial,
            vanishing_moments: cfg.vanishing_moments,
            limits,
            j_cutoff,
            j_spatial,
            execution: cfg.execution,
        })
    }

    pub fn m(&self) -> usize {
        self.dims.iter().product()
    }

    /// Threshold for `t`-level `j` under this plan's mode.
    pub fn threshold(&self, j: i32) -> f64 {
        match self.mode {
            Mode::Functional => threshold_value(j, self.c_beta, self.nu, self.epsilon),
            Mode::Separate => separate_threshold_value(j, self.c_beta, self.nu, self.sigma, self.n),
        }
    }

    /// Key/value echo of every resolved parameter.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("mode".to_string(), self.mode.name().to_string()),
            ("dims".to_string(), join(&self.dims)),
            ("n".to_string(), self.n.to_string()),
            ("sigma".to_string(), self.sigma.to_string()),
            ("epsilon".to_string(), self.epsilon.to_string()),
            ("nu".to_string(), self.nu.to_string()),
            ("nu_range".to_string(), format!("{},{}", self.nu_range.0, self.nu_range.1)),
            ("c1".to_string(), self.c1.to_string()),
            ("c2".to_string(), self.c2.to_string()),
            ("c_beta".to_string(), self.c_beta.to_string()),
            ("c_beta_theory".to_string(), self.c_beta_theory.to_string()),
            ("m0".to_string(), self.m0.to_string()),
            ("m0_spatial".to_string(), self.m0_spatial.to_string()),
            ("vanishing_moments".to_string(), self.vanishing_moments.to_string()),
            ("raw_j".to_string(), self.limits.raw_j.to_string()),
            ("raw_j_spatial".to_string(), self.limits.raw_j_spatial.to_string()),
            ("j_cutoff".to_string(), self.j_cutoff.to_string()),
            ("j_spatial".to_string(), join(&self.j_spatial)),
            ("degenerate_noise".to_string(), self.limits.degenerate.to_string()),
        ];
        v.retain(|(_, val)| !val.is_empty());
        v
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Splits a dyadic-layout position into `(level label, shift)`.
pub fn position_label(pos: usize, m0: u32) -> (i32, usize) {
    if pos < 1 << m0 {
        (m0 as i32 - 1, pos)
    } else {
        let j = usize::BITS - 1 - pos.leading_zeros();
        (j as i32, pos - (1 << j))
    }
}

/// Hyperbolic wavelet coefficients `beta_{j,k,j',k'}` with keep flags.
///
/// Stored row-major as `rows x 2^J`: one row per spatial position (functional
/// mode, flattened over the truncated spatial shape) or per profile (separate
/// mode), one column per `t` position in the dyadic layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCoeffs {
    mode: Mode,
    m0: u32,
    m0_spatial: u32,
    j_cutoff: u32,
    spatial_shape: Vec<usize>,
    rows: usize,
    values: Vec<Complex64>,
    kept: Vec<bool>,
}

/// Spatial index of a coefficient row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowIndex {
    /// Per-axis `(j', k')` labels.
    Spatial(Vec<(i32, usize)>),
    /// Profile number in separate mode.
    Profile(usize),
}

impl HyperCoeffs {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn j_cutoff(&self) -> u32 {
        self.j_cutoff
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn m0_spatial(&self) -> u32 {
        self.m0_spatial
    }

    /// Truncated spatial shape (`2^{J'_a}` per axis); empty in separate mode.
    pub fn spatial_shape(&self) -> &[usize] {
        &self.spatial_shape
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of `t` positions (`2^J`).
    pub fn cols(&self) -> usize {
        1 << self.j_cutoff
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `t` label of a flat index.
    pub fn t_label(&self, idx: usize) -> (i32, usize) {
        position_label(idx % self.cols(), self.m0)
    }

    /// Spatial label of a flat index.
    pub fn row_index(&self, idx: usize) -> RowIndex {
        let row = idx / self.cols();
        match self.mode {
            Mode::Separate => RowIndex::Profile(row),
            Mode::Functional => {
                let mut rem = row;
                let mut out = vec![(0, 0); self.spatial_shape.len()];
                for (a, &d) in self.spatial_shape.iter().enumerate().rev() {
                    out[a] = position_label(rem % d, self.m0_spatial);
                    rem /= d;
                }
                RowIndex::Spatial(out)
            }
        }
    }

    /// True if the entry sits on a scaling block in `t` or in any spatial axis.
    pub fn is_scaling(&self, idx: usize) -> bool {
        if self.t_label(idx).0 < self.m0 as i32 {
            return true;
        }
        match self.row_index(idx) {
            RowIndex::Spatial(labels) => labels.iter().any(|&(j, _)| j < self.m0_spatial as i32),
            RowIndex::Profile(_) => false,
        }
    }

    /// Flat index of `beta_{j,k,row}` (`jprime`/`kprime` per axis in functional mode).
    pub fn index_of(&self, j: i32, k: usize, row: &RowIndex) -> Option<usize> {
        let col = label_position(j, k, self.m0, self.j_cutoff)?;
        let r = match (row, self.mode) {
            (RowIndex::Profile(l), Mode::Separate) if *l < self.rows => *l,
            (RowIndex::Spatial(labels), Mode::Functional)
                if labels.len() == self.spatial_shape.len() =>
            {
                let mut r = 0;
                for (&(jp, kp), &d) in labels.iter().zip(&self.spatial_shape) {
                    let p = label_position(jp, kp, self.m0_spatial, dyadic_log(d)?)?;
                    r = r * d + p;
                }
                r
            }
            _ => return None,
        };
        Some(r * self.cols() + col)
    }

    pub fn get(&self, j: i32, k: usize, row: &RowIndex) -> Option<Complex64> {
        self.index_of(j, k, row).map(|i| self.values[i])
    }

    /// Writes the coefficients as CSV `j,k,jprime,kprime,re,im,kept`.
    ///
    /// Multi-axis spatial labels are joined with `:`; in separate mode
    /// `jprime = -1` and `kprime` is the profile number.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j,k,jprime,kprime,re,im,kept")?;
        for idx in 0..self.values.len() {
            let (j, k) = self.t_label(idx);
            let (jp, kp) = match self.row_index(idx) {
                RowIndex::Profile(l) => ("-1".to_string(), l.to_string()),
                RowIndex::Spatial(labels) => (
                    labels.iter().map(|l| l.0.to_string()).collect::<Vec<_>>().join(":"),
                    labels.iter().map(|l| l.1.to_string()).collect::<Vec<_>>().join(":"),
                ),
            };
            let v = self.values[idx];
            writeln!(
                w,
                "{j},{k},{jp},{kp},{:e},{:e},{}",
                v.re,
                v.im,
                u8::from(self.kept[idx])
            )?;
        }
        Ok(())
    }
}

fn label_position(j: i32, k: usize, m0: u32, cutoff: u32) -> Option<usize> {
    if j == m0 as i32 - 1 {
        (k < 1 << m0).then_some(k)
    } else if j >= m0 as i32 && (j as u32) < cutoff {
        (k < 1 << j).then_some((1 << j) + k)
    } else {
        None
    }
}

/// Meyer analysis of one deconvolved spectrum row into a `2^J` dyadic row.
fn analyze_row(meyer: &MeyerBasis, q: &[Complex64], cutoff: u32) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(1 << cutoff);
    for block in meyer.analyze_t(q, cutoff)? {
        out.extend(block);
    }
    Ok(out)
}

fn split_row(meyer: &MeyerBasis, row: &[Complex64], cutoff: u32) -> Vec<Vec<Complex64>> {
    meyer
        .blocks(cutoff)
        .into_iter()
        .scan(0usize, |start, b| {
            let len = meyer.block_len(b);
            let s = *start;
            *start += len;
            Some(row[s..s + len].to_vec())
        })
        .collect()
}

/// Deconvolved spectrum of profile `l`: `y_m / h_m` on the band, zero elsewhere.
fn deconvolved_row(y: &[Complex64], ks: &KernelSpectrum, l: usize, band: i64) -> Vec<Complex64> {
    let n = y.len();
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    for f in -band..=band {
        let i = index_of_freq(f, n);
        q[i] = y[i] / ks.transfer(l, f);
    }
    q
}

/// Pre-threshold coefficients `beta~` for `grid` under `plan`.
pub fn estimate_coeffs(grid: &ObservationGrid, ks: &KernelSpectrum, plan: &Plan) -> Result<HyperCoeffs> {
    let (m, n) = (grid.m(), grid.n());
    if plan.n != n || plan.m() != m || grid.dims() != plan.dims.as_slice() {
        return Err(Error::config("estimator", "plan was resolved for a different grid shape"));
    }
    let meyer = MeyerBasis::new(plan.m0, n)?;
    let cutoff = plan.j_cutoff;
    let band = meyer.covered_band(cutoff);
    ks.require_nonzero(band)?;
    let spec = fourier_coeffs_with(grid, plan.execution);
    let cols = 1usize << cutoff;
    let rows = exec::try_map_indexed(plan.execution, m, |l| {
        analyze_row(&meyer, &deconvolved_row(spec.row(l), ks, l, band), cutoff)
    })?;
    let mut values: Vec<Complex64> = rows.into_iter().flatten().collect();
    match plan.mode {
        Mode::Separate => Ok(HyperCoeffs {
            mode: Mode::Separate,
            m0: plan.m0,
            m0_spatial: plan.m0_spatial,
            j_cutoff: cutoff,
            spatial_shape: Vec::new(),
            rows: m,
            kept: vec![true; values.len()],
            values,
        }),
        Mode::Functional => {
            let spatial = SpatialBasis::new(plan.vanishing_moments, plan.m0_spatial)?;
            spatial.tensor_forward(&mut values, &plan.dims, cols, plan.execution)?;
            let scale = 1.0 / (m as f64).sqrt();
            let shape: Vec<usize> = plan.j_spatial.iter().map(|&j| 1usize << j).collect();
            let kept_rows: usize = shape.iter().product();
            let mut out = Vec::with_capacity(kept_rows * cols);
            for r in 0..kept_rows {
                let src = remap_row(r, &shape, &plan.dims);
                out.extend(values[src * cols..(src + 1) * cols].iter().map(|v| v * scale));
            }
            Ok(HyperCoeffs {
                mode: Mode::Functional,
                m0: plan.m0,
                m0_spatial: plan.m0_spatial,
                j_cutoff: cutoff,
                spatial_shape: shape,
                rows: kept_rows,
                kept: vec![true; out.len()],
                values: out,
            })
        }
    }
}

/// Flat index in `full` of the flat index `r` in the truncated shape `sub`.
fn remap_row(r: usize, sub: &[usize], full: &[usize]) -> usize {
    let mut rem = r;
    let mut coords = vec![0; sub.len()];
    for a in (0..sub.len()).rev() {
        coords[a] = rem % sub[a];
        rem /= sub[a];
    }
    coords.iter().zip(full).fold(0, |acc, (&c, &d)| acc * d + c)
}

/// Hard thresholding: keep an entry iff `|beta~| > lambda_j`.
///
/// Entries on a scaling block (in `t` or in any spatial axis) are always kept;
/// `c_beta = 0` keeps everything.
pub fn hard_threshold(coeffs: &HyperCoeffs, plan: &Plan) -> HyperCoeffs {
    let mut out = coeffs.clone();
    if plan.c_beta == 0.0 {
        out.kept.iter_mut().for_each(|k| *k = true);
        return out;
    }
    let lambdas: Vec<f64> = (0..coeffs.cols())
        .map(|p| plan.threshold(position_label(p, coeffs.m0).0))
        .collect();
    for idx in 0..out.values.len() {
        let keep = coeffs.is_scaling(idx) || coeffs.values[idx].norm() > lambdas[idx % coeffs.cols()];
        out.kept[idx] = keep;
        if !keep {
            out.values[idx] = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// Estimate `f^(u_l, t_i)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub values: Vec<f64>,
    pub dims: Vec<usize>,
    pub n: usize,
    pub coeffs: HyperCoeffs,
    pub plan: Plan,
}

impl Reconstruction {
    pub fn m(&self) -> usize {
        self.dims.iter().product()
    }

    /// The estimate as a grid (sigma recorded as 0).
    pub fn to_grid(&self) -> Result<ObservationGrid> {
        ObservationGrid::with_dims(self.dims.clone(), self.n, 0.0, self.values.clone())
    }
}

/// Imaginary parts larger than this signal broken conjugate symmetry.
const IMAG_RESIDUE_LIMIT: f64 = 1e-6;

/// Rebuilds grid values from (thresholded) coefficients.
pub fn reconstruct(coeffs: &HyperCoeffs, plan: &Plan) -> Result<Reconstruction> {
    let (m, n) = (plan.m(), plan.n);
    let meyer = MeyerBasis::new(plan.m0, n)?;
    let cutoff = coeffs.j_cutoff;
    let cols = coeffs.cols();
    let dense = match coeffs.mode {
        Mode::Separate => {
            if coeffs.rows != m {
                return Err(Error::index("estimator", "coefficient rows do not match the grid"));
            }
            coeffs.values.clone()
        }
        Mode::Functional => {
            if coeffs.spatial_shape.len() != plan.dims.len()
                || coeffs.spatial_shape.iter().zip(&plan.dims).any(|(s, d)| s > d)
            {
                return Err(Error::index("estimator", "coefficient shape exceeds the grid"));
            }
            let mut dense = vec![Complex64::new(0.0, 0.0); m * cols];
            let scale = (m as f64).sqrt();
            for r in 0..coeffs.rows {
                let dst = remap_row(r, &coeffs.spatial_shape, &plan.dims);
                for c in 0..cols {
                    dense[dst * cols + c] = coeffs.values[r * cols + c] * scale;
                }
            }
            let spatial = SpatialBasis::new(plan.vanishing_moments, plan.m0_spatial)?;
            spatial.tensor_inverse(&mut dense, &plan.dims, cols, plan.execution)?;
            dense
        }
    };
    let fourier = Fourier::new(n);
    let rows = exec::try_map_indexed(plan.execution, m, |l| -> Result<Vec<f64>> {
        let blocks = split_row(&meyer, &dense[l * cols..(l + 1) * cols], cutoff);
        let mut spec = meyer.synthesize_t(&blocks, cutoff)?;
        fourier.synthesize_in_place(&mut spec);
        let worst = spec.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if worst.is_nan() || worst > IMAG_RESIDUE_LIMIT {
            return Err(Error::numerical(
                "estimator",
                format!("imaginary residue {worst:e} in profile {l}"),
            ));
        }
        Ok(spec.iter().map(|c| c.re).collect())
    })?;
    Ok(Reconstruction {
        values: rows.into_iter().flatten().collect(),
        dims: plan.dims.clone(),
        n,
        coeffs: coeffs.clone(),
        plan: plan.clone(),
    })
}

/// Full pipeline: resolve, estimate, threshold, reconstruct.
pub fn deconvolve(
    grid: &ObservationGrid,
    ks: &KernelSpectrum,
    cfg: &EstimatorConfig,
) -> Result<Reconstruction> {
    let mut ks = ks.clone();
    let plan = Plan::resolve(cfg, grid.dims(), grid.n(), grid.sigma(), &mut ks)?;
    deconvolve_with_plan(grid, &ks, &plan)
}

/// Pipeline with an already resolved plan.
pub fn deconvolve_with_plan(
    grid: &ObservationGrid,
    ks: &KernelSpectrum,
    plan: &Plan,
) -> Result<Reconstruction> {
    let raw = estimate_coeffs(grid, ks, plan)?;
    let kept = hard_threshold(&raw, plan);
    reconstruct(&kept, plan)
}
