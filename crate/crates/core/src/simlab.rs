//! Simulation laboratory: test functions, the built-in kernel, data synthesis
//! and MISE benchmarking.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimator::{deconvolve_with_plan, EstimatorConfig, Mode, Plan};
use crate::exec::{self, Execution};
use crate::spectra::{kernel_spectrum, ConvolutionScale, Fourier, KernelSpectrum, ObservationGrid};

/// How `|t|` in the kernel is read on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelShape {
    /// Distance to the nearest integer, `min(t, 1 - t)`.
    #[default]
    Circular,
    /// `t` itself, a one-sided exponential on the period.
    OneSided,
}

impl KernelShape {
    pub fn name(self) -> &'static str {
        match self {
            KernelShape::Circular => "circular",
            KernelShape::OneSided => "one-sided",
        }
    }
}

impl std::str::FromStr for KernelShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circular" => Ok(KernelShape::Circular),
            "one-sided" | "onesided" => Ok(KernelShape::OneSided),
            other => Err(Error::config(
                "simlab",
                format!("unknown kernel shape '{other}' (expected circular|one-sided)"),
            )),
        }
    }
}

/// `0.5 exp(-|t| (1 + (u - 0.5)^2))` with `|t|` the circular distance.
pub fn blur_kernel(u: f64, t: f64) -> f64 {
    blur_kernel_shaped(u, t, KernelShape::Circular)
}

pub fn blur_kernel_shaped(u: f64, t: f64, shape: KernelShape) -> f64 {
    let frac = t.rem_euclid(1.0);
    let dist = match shape {
        KernelShape::Circular => frac.min(1.0 - frac),
        KernelShape::OneSided => frac,
    };
    0.5 * (-dist * (1.0 + (u - 0.5) * (u - 0.5))).exp()
}

/// Kernel samples on the `M x N` grid, row-major.
pub fn kernel_samples(m: usize, n: usize, shape: KernelShape) -> Vec<f64> {
    let mut out = Vec::with_capacity(m * n);
    for l in 0..m {
        let u = l as f64 / m as f64;
        out.extend((0..n).map(|i| blur_kernel_shaped(u, i as f64 / n as f64, shape)));
    }
    out
}

/// Standard test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    Blip,
    Bumps,
    Quadratic,
}

const BUMP_POS: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BUMP_HGT: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMP_WTH: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [TestFunction::Blip, TestFunction::Bumps, TestFunction::Quadratic];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Blip => "blip",
            TestFunction::Bumps => "bumps",
            TestFunction::Quadratic => "quadratic",
        }
    }

    /// Unnormalized value at `t`.
    pub fn raw(self, t: f64) -> f64 {
        match self {
            TestFunction::Blip => {
                if t <= 0.8 {
                    0.32 + 0.6 * t + 0.3 * (-100.0 * (t - 0.3).powi(2)).exp()
                } else {
                    -0.28 + 0.6 * t + 0.3 * (-100.0 * (t - 1.3).powi(2)).exp()
                }
            }
            TestFunction::Bumps => BUMP_POS
                .iter()
                .zip(&BUMP_HGT)
                .zip(&BUMP_WTH)
                .map(|((&p, &h), &w)| h * (1.0 + ((t - p) / w).abs()).powi(-4))
                .sum(),
            TestFunction::Quadratic => (t - 0.5).powi(2),
        }
    }

    /// Samples at `x_i = i / len`, scaled to unit Riemann `L^2` norm.
    pub fn samples(self, len: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..len).map(|i| self.raw(i as f64 / len as f64)).collect();
        let norm = (raw.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
        raw.into_iter().map(|v| v / norm).collect()
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blip" => Ok(TestFunction::Blip),
            "bumps" => Ok(TestFunction::Bumps),
            "quadratic" => Ok(TestFunction::Quadratic),
            other => Err(Error::config(
                "simlab",
                format!("unknown test function '{other}' (expected blip|bumps|quadratic)"),
            )),
        }
    }
}

/// Kernel used by a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SimKernel {
    Builtin(KernelShape),
    /// User samples, `M x N` row-major.
    Samples(Vec<f64>),
}

impl Default for SimKernel {
    fn default() -> Self {
        SimKernel::Builtin(KernelShape::Circular)
    }
}

/// One simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m: usize,
    pub n: usize,
    pub sigma: f64,
    /// Factor along `u`.
    pub f1: TestFunction,
    /// Factor along `t`.
    pub f2: TestFunction,
    pub runs: usize,
    pub seed: u64,
    pub kernel: SimKernel,
    pub scale: ConvolutionScale,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            m: 256,
            n: 512,
            sigma: 0.5,
            f1: TestFunction::Quadratic,
            f2: TestFunction::Blip,
            runs: 100,
            seed: 1,
            kernel: SimKernel::default(),
            scale: ConvolutionScale::default(),
            execution: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("simlab", "runs must be >= 1"));
        }
        for (name, v) in [("M", self.m), ("N", self.n)] {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::config("simlab", format!("{name} = {v} must be a power of two")));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("simlab", format!("sigma = {} must be finite and >= 0", self.sigma)));
        }
        Ok(())
    }

    /// Kernel spectrum for this design.
    pub fn kernel_spectrum(&self) -> Result<KernelSpectrum> {
        match &self.kernel {
            SimKernel::Builtin(shape) => {
                kernel_spectrum(&kernel_samples(self.m, self.n, *shape), self.m, self.n, self.scale)
            }
            SimKernel::Samples(s) => kernel_spectrum(s, self.m, self.n, self.scale),
        }
    }

    /// Noiseless `f(u_l, t_i) = f1(u_l) f2(t_i)`, row-major.
    pub fn truth(&self) -> Vec<f64> {
        product_grid(&self.f1.samples(self.m), &self.f2.samples(self.n))
    }
}

/// Outer product `a(u_l) b(t_i)`, row-major.
pub fn product_grid(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Circular convolution of every row of `f` with the kernel, computed spectrally.
pub fn convolve(f: &[f64], ks: &KernelSpectrum) -> Result<Vec<f64>> {
    let (m, n) = (ks.m(), ks.n());
    if f.len() != m * n {
        return Err(Error::index(
            "simlab",
            format!("signal has {} samples, kernel grid has {}", f.len(), m * n),
        ));
    }
    let fourier = Fourier::new(n);
    let mut out = Vec::with_capacity(m * n);
    for l in 0..m {
        let mut spec = fourier.coeffs_real(&f[l * n..(l + 1) * n]);
        for (c, h) in spec.iter_mut().zip(ks.transfer_row(l)) {
            *c *= h;
        }
        fourier.synthesize_in_place(&mut spec);
        out.extend(spec.iter().map(|c: &Complex64| c.re));
    }
    Ok(out)
}

/// Random stream for one replicate.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// `y = g * f + sigma z` on the grid with noise from `rng`.
pub fn synthesize_data(
    f: &[f64],
    ks: &KernelSpectrum,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ObservationGrid> {
    let mut y = convolve(f, ks)?;
    if sigma > 0.0 {
        for v in y.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += sigma * z;
        }
    }
    ObservationGrid::new(ks.m(), ks.n(), sigma, y)
}

/// One simulated dataset and the function behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub grid: ObservationGrid,
    pub truth: Vec<f64>,
}

/// Synthesizes replicate `replicate` of `cfg`.
pub fn simulate(cfg: &SimConfig, ks: &KernelSpectrum, replicate: usize) -> Result<SimData> {
    cfg.validate()?;
    let truth = cfg.truth();
    let grid = synthesize_data(&truth, ks, cfg.sigma, &mut replicate_rng(cfg.seed, replicate))?;
    Ok(SimData { grid, truth })
}

/// Mean squared difference over the grid.
pub fn mise(estimate: &[f64], truth: &[f64]) -> f64 {
    estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / truth.len() as f64
}

/// MISE summary across replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MiseResult {
    pub mode: Mode,
    pub mean_mise: f64,
    /// Sample standard deviation across replicates (0 for a single run).
    pub std_mise: f64,
    pub per_run: Vec<f64>,
    pub plan: Plan,
}

impl MiseResult {
    fn from_runs(mode: Mode, per_run: Vec<f64>, plan: Plan) -> Self {
        let n = per_run.len() as f64;
        let mean = per_run.iter().sum::<f64>() / n;
        let var = if per_run.len() > 1 {
            per_run.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MiseResult {
            mode,
            mean_mise: mean,
            std_mise: var.sqrt(),
            per_run,
            plan,
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_mise / (self.per_run.len() as f64).sqrt()
    }
}

/// Runs every replicate once and scores each requested mode on the same data.
///
/// Replicates are spread over `cfg.execution`; each replicate's estimator runs
/// sequentially. Results do not depend on the number of workers.
pub fn run_mise(cfg: &SimConfig, est: &EstimatorConfig, modes: &[Mode]) -> Result<Vec<MiseResult>> {
    cfg.validate()?;
    let base = cfg.kernel_spectrum()?;
    let mut plans = Vec::with_capacity(modes.len());
    let mut kernels = Vec::with_capacity(modes.len());
    for &mode in modes {
        let mut ks = base.clone();
        let inner = EstimatorConfig {
            mode,
            execution: Execution::Sequential,
            ..est.clone()
        };
        plans.push(Plan::resolve(&inner, &[cfg.m], cfg.n, cfg.sigma, &mut ks)?);
        kernels.push(ks);
    }
    let truth = cfg.truth();
    let scores = exec::try_map_indexed(cfg.execution, cfg.runs, |r| -> Result<Vec<f64>> {
        let grid = synthesize_data(&truth, &base, cfg.sigma, &mut replicate_rng(cfg.seed, r))
            .map_err(|e| replicate_error(r, e))?;
        plans
            .iter()
            .zip(&kernels)
            .map(|(plan, ks)| {
                deconvolve_with_plan(&grid, ks, plan)
                    .map(|rec| mise(&rec.values, &truth))
                    .map_err(|e| replicate_error(r, e))
            })
            .collect()
    })?;
    Ok(modes
        .iter()
        .zip(plans)
        .enumerate()
        .map(|(i, (&mode, plan))| MiseResult::from_runs(mode, scores.iter().map(|s| s[i]).collect(), plan))
        .collect())
}

fn replicate_error(r: usize, e: Error) -> Error {
    Error::numerical("simlab", format!("replicate {r}: {e}"))
}

/// The six `(f1, f2)` pairs of the benchmark table, in table order.
pub const TABLE1_PAIRS: [(TestFunction, TestFunction); 6] = [
    (TestFunction::Quadratic, TestFunction::Blip),
    (TestFunction::Quadratic, TestFunction::Bumps),
    (TestFunction::Blip, TestFunction::Blip),
    (TestFunction::Blip, TestFunction::Bumps),
    (TestFunction::Bumps, TestFunction::Blip),
    (TestFunction::Bumps, TestFunction::Bumps),
];
pub const TABLE1_M: [usize; 2] = [128, 256];
pub const TABLE1_SIGMA: [f64; 2] = [0.5, 1.0];
pub const TABLE1_N: usize = 512;

/// One cell of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Cell {
    pub f1: TestFunction,
    pub f2: TestFunction,
    pub m: usize,
    pub sigma: f64,
    pub mode: Mode,
    pub mean_mise: f64,
    pub sd_mise: f64,
    pub runs: usize,
    pub seed: u64,
}

/// Settings shared by every table cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub runs: usize,
    pub seed: u64,
    pub kernel: KernelShape,
    pub scale: ConvolutionScale,
    pub estimator: EstimatorConfig,
    pub execution: Execution,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            runs: 100,
            seed: 1,
            kernel: KernelShape::default(),
            scale: ConvolutionScale::default(),
            estimator: EstimatorConfig::default(),
            execution: Execution::default(),
        }
    }
}

/// Runs all 6 pairs x 2 sizes x 2 noise levels x 2 modes (48 cells).
pub fn table1(cfg: &Table1Config) -> Result<Vec<Table1Cell>> {
    let mut cells = Vec::with_capacity(48);
    for &(f1, f2) in &TABLE1_PAIRS {
        for &m in &TABLE1_M {
            for &sigma in &TABLE1_SIGMA {
                let sim = SimConfig {
                    m,
                    n: TABLE1_N,
                    sigma,
                    f1,
                    f2,
                    runs: cfg.runs,
                    seed: cfg.seed,
                    kernel: SimKernel::Builtin(cfg.kernel),
                    scale: cfg.scale,
                    execution: cfg.execution,
                };
                for res in run_mise(&sim, &cfg.estimator, &[Mode::Functional, Mode::Separate])? {
                    cells.push(Table1Cell {
                        f1,
                        f2,
                        m,
                        sigma,
                        mode: res.mode,
                        mean_mise: res.mean_mise,
                        sd_mise: res.std_mise,
                        runs: cfg.runs,
                        seed: cfg.seed,
                    });
                }
            }
        }
    }
    Ok(cells)
}

pub fn write_table1_csv<W: Write>(cells: &[Table1Cell], mut w: W) -> Result<()> {
    writeln!(w, "f1,f2,M,sigma,mode,mean_mise,sd_mise,runs,seed")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            c.f1.name(),
            c.f2.name(),
            c.m,
            c.sigma,
            c.mode.name(),
            c.mean_mise,
            c.sd_mise,
            c.runs,
            c.seed
        )?;
    }
    Ok(())
}

/// Mean MISE of one mode in a table.
pub fn table1_lookup(
    cells: &[Table1Cell],
    (f1, f2): (TestFunction, TestFunction),
    m: usize,
    sigma: f64,
    mode: Mode,
) -> Option<f64> {
    cells
        .iter()
        .find(|c| c.f1 == f1 && c.f2 == f2 && c.m == m && c.sigma == sigma && c.mode == mode)
        .map(|c| c.mean_mise)
}

/// Counts configurations whose winner matches the expected pattern:
/// functional wins at the larger `M`, separate at the smaller.
pub fn table1_orderings(cells: &[Table1Cell]) -> (usize, usize) {
    let mut matched = 0;
    let mut total = 0;
    for &pair in &TABLE1_PAIRS {
        for &m in &TABLE1_M {
            for &sigma in &TABLE1_SIGMA {
                let f = table1_lookup(cells, pair, m, sigma, Mode::Functional);
                let s = table1_lookup(cells, pair, m, sigma, Mode::Separate);
                if let (Some(f), Some(s)) = (f, s) {
                    total += 1;
                    let functional_wins = f < s;
                    if functional_wins == (m == TABLE1_M[1]) {
                        matched += 1;
                    }
                }
            }
        }
    }
    (matched, total)
}

/// One point of a MISE-versus-sample-size sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub m: usize,
    pub mn: usize,
    pub mean_mise: f64,
}

/// Functional-mode MISE for each `M` in `ms`, everything else from `cfg`.
pub fn mise_sweep(cfg: &SimConfig, est: &EstimatorConfig, ms: &[usize]) -> Result<Vec<SweepPoint>> {
    ms.iter()
        .map(|&m| {
            let sim = SimConfig { m, ..cfg.clone() };
            let r = run_mise(&sim, est, &[Mode::Functional])?;
            Ok(SweepPoint {
                m,
                mn: m * cfg.n,
                mean_mise: r[0].mean_mise,
            })
        })
        .collect()
}

/// Least-squares slope of `log mean_mise` against `log MN`.
pub fn loglog_slope(points: &[SweepPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.mn as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_mise.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Two-column `MN mean_mise` text for plotting.
pub fn write_sweep<W: Write>(points: &[SweepPoint], mut w: W) -> Result<()> {
    writeln!(w, "# MN mean_mise")?;
    for p in points {
        writeln!(w, "{} {}", p.mn, p.mean_mise)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_values() {
        assert_eq!(blur_kernel(0.5, 0.0), 0.5);
        assert_eq!(blur_kernel(0.0, 0.0), 0.5);
        assert_abs_diff_eq!(blur_kernel(0.0, 0.2), 0.5 * (-1.25f64 * 0.2).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(blur_kernel(0.3, 0.1), blur_kernel(0.3, 0.9), epsilon = 1e-15);
        assert!(blur_kernel_shaped(0.3, 0.9, KernelShape::OneSided) < blur_kernel(0.3, 0.9));
    }

    #[test]
    fn quadratic_scale() {
        assert_eq!(TestFunction::Quadratic.samples(512)[256], 0.0);
        // continuous normalization constant is sqrt(80)
        let s = TestFunction::Quadratic.samples(4096);
        assert_abs_diff_eq!(s[0] / 0.25, 80f64.sqrt(), epsilon = 1e-3);
    }

    #[test]
    fn parse_names() {
        for f in TestFunction::ALL {
            assert_eq!(f.name().parse::<TestFunction>().unwrap(), f);
        }
        assert!(matches!("doppler".parse::<TestFunction>(), Err(Error::Config { .. })));
        assert_eq!("one-sided".parse::<KernelShape>().unwrap(), KernelShape::OneSided);
    }

    #[test]
    fn validation() {
        let bad = SimConfig {
            runs: 0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            m: 100,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
