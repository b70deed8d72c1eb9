//! Periodized band-limited Meyer wavelets, evaluated in the Fourier domain.
//!
//! `psi_{j,k,m} = 2^{-j/2} psihat(2 pi m / 2^j) exp(-i 2 pi m k / 2^j)` where
//! `psihat` is the degree-3 Meyer wavelet transform. Analysis and synthesis
//! along `t` fold each level's band modulo `2^j` and finish with a length-`2^j`
//! DFT, so a level costs `O(|W_j| + 2^j log 2^j)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spectra::index_of_freq;

/// Values below this are treated as outside the support.
const SUPPORT_TOL: f64 = 1e-14;

/// Degree-3 auxiliary polynomial `x^4 (35 - 84x + 70x^2 - 20x^3)`, clamped to `[0, 1]`.
pub fn aux_poly(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x)
    }
}

/// Fourier transform of the Meyer scaling function (real, even).
pub fn scaling_hat(omega: f64) -> f64 {
    let a = omega.abs();
    if a <= 2.0 * PI / 3.0 {
        1.0
    } else if a < 4.0 * PI / 3.0 {
        (FRAC_PI_2 * aux_poly(3.0 * a / (2.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

/// Fourier transform of the Meyer wavelet, including its `exp(-i omega / 2)` phase.
pub fn wavelet_hat(omega: f64) -> Complex64 {
    let a = omega.abs();
    let mag = if a <= 2.0 * PI / 3.0 || a >= 8.0 * PI / 3.0 {
        0.0
    } else if a <= 4.0 * PI / 3.0 {
        (FRAC_PI_2 * aux_poly(3.0 * a / (2.0 * PI) - 1.0)).sin()
    } else {
        (FRAC_PI_2 * aux_poly(3.0 * a / (4.0 * PI) - 1.0)).cos()
    };
    Complex64::from_polar(mag, -omega / 2.0)
}

/// One block of the `t`-direction expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TBlock {
    /// Scaling functions at the coarsest level `m0`, labelled `m0 - 1`.
    Scaling,
    /// Wavelets at level `j >= m0`.
    Wavelet(u32),
}

struct LevelTable {
    level: u32,
    /// Nonzero `(frequency, value at k = 0)` pairs.
    entries: Vec<(i64, Complex64)>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Periodized Meyer basis on a grid of `N` time samples.
///
/// Immutable after construction; the per-level tables cover every level
/// whose band fits below `N/2`.
pub struct MeyerBasis {
    m0: u32,
    n: usize,
    scaling: LevelTable,
    wavelets: Vec<LevelTable>,
}

impl std::fmt::Debug for MeyerBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeyerBasis")
            .field("m0", &self.m0)
            .field("n", &self.n)
            .field("max_level", &self.max_level())
            .finish()
    }
}

/// Largest `|m|` touched by wavelet level `j`.
pub fn band_top(j: u32) -> i64 {
    (1i64 << (j + 2)) / 3
}

/// Smallest `|m|` touched by wavelet level `j`.
pub fn band_bottom(j: u32) -> i64 {
    ((1i64 << j) + 2) / 3
}

/// Largest wavelet level whose band fits strictly inside `[-N/2, N/2)`.
pub fn finest_level(n: usize) -> Option<u32> {
    let half = (n / 2) as i64;
    (0..62u32).take_while(|&j| band_top(j) < half).last()
}

fn wavelet_coeff_k0(j: u32, freq: i64) -> Complex64 {
    let scale = (-(j as f64) / 2.0).exp2();
    wavelet_hat(2.0 * PI * freq as f64 / (1u64 << j) as f64) * scale
}

fn scaling_coeff_k0(j: u32, freq: i64) -> Complex64 {
    let scale = (-(j as f64) / 2.0).exp2();
    Complex64::new(scaling_hat(2.0 * PI * freq as f64 / (1u64 << j) as f64) * scale, 0.0)
}

fn modulation(freq: i64, k: usize, level: u32) -> Complex64 {
    let p = 1i64 << level;
    let phase = -2.0 * PI * ((freq * k as i64).rem_euclid(p)) as f64 / p as f64;
    Complex64::from_polar(1.0, phase)
}

impl MeyerBasis {
    /// Builds the basis with coarsest level `m0` on `n` samples.
    pub fn new(m0: u32, n: usize) -> Result<Self> {
        if m0 < 3 {
            return Err(Error::config("meyer", format!("m0 = {m0} must be >= 3")));
        }
        if !n.is_power_of_two() {
            return Err(Error::config("meyer", format!("N = {n} must be a power of two")));
        }
        let scaling_top = (1i64 << (m0 + 1)) / 3;
        if scaling_top >= (n / 2) as i64 {
            return Err(Error::LevelTooFine {
                level: m0,
                max_frequency: scaling_top,
                n,
            });
        }
        let mut planner = FftPlanner::new();
        let mut table = |level: u32, value: &dyn Fn(i64) -> Complex64, top: i64| {
            let entries = (-top..=top)
                .map(|f| (f, value(f)))
                .filter(|(_, v)| v.norm() > SUPPORT_TOL)
                .collect();
            let p = 1usize << level;
            LevelTable {
                level,
                entries,
                fwd: planner.plan_fft_forward(p),
                inv: planner.plan_fft_inverse(p),
            }
        };
        let scaling = table(m0, &|f| scaling_coeff_k0(m0, f), scaling_top);
        let max = finest_level(n).unwrap_or(0);
        let wavelets = (m0..=max)
            .map(|j| table(j, &|f| wavelet_coeff_k0(j, f), band_top(j)))
            .collect();
        Ok(MeyerBasis {
            m0,
            n,
            scaling,
            wavelets,
        })
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Finest wavelet level available on this grid (`m0 - 1` if none).
    pub fn max_level(&self) -> u32 {
        self.m0 + self.wavelets.len() as u32 - 1
    }

    /// Largest admissible cutoff `J` (levels `m0..J` exclusive).
    pub fn max_cutoff(&self) -> u32 {
        self.max_level() + 1
    }

    /// Blocks making up the expansion for cutoff `J`: scaling then `m0..J`.
    pub fn blocks(&self, cutoff: u32) -> Vec<TBlock> {
        std::iter::once(TBlock::Scaling)
            .chain((self.m0..cutoff.max(self.m0)).map(TBlock::Wavelet))
            .collect()
    }

    /// Number of coefficients in a block.
    pub fn block_len(&self, block: TBlock) -> usize {
        match block {
            TBlock::Scaling => 1 << self.m0,
            TBlock::Wavelet(j) => 1 << j,
        }
    }

    /// Level label: `m0 - 1` for the scaling block.
    pub fn block_label(&self, block: TBlock) -> i32 {
        match block {
            TBlock::Scaling => self.m0 as i32 - 1,
            TBlock::Wavelet(j) => j as i32,
        }
    }

    /// Highest `|m|` touched by the expansion with cutoff `J`.
    pub fn covered_band(&self, cutoff: u32) -> i64 {
        (1i64 << (cutoff.max(self.m0) + 1)) / 3
    }

    /// Frequencies reproduced exactly by the expansion with cutoff `J`.
    pub fn exact_band(&self, cutoff: u32) -> i64 {
        (1i64 << cutoff.max(self.m0)) / 3
    }

    fn check_level(&self, j: u32) -> Result<&LevelTable> {
        if j < self.m0 {
            return Err(Error::LevelTooCoarse {
                level: j,
                coarsest: self.m0,
            });
        }
        self.wavelets
            .get((j - self.m0) as usize)
            .ok_or(Error::LevelTooFine {
                level: j,
                max_frequency: band_top(j),
                n: self.n,
            })
    }

    fn table(&self, block: TBlock) -> Result<&LevelTable> {
        match block {
            TBlock::Scaling => Ok(&self.scaling),
            TBlock::Wavelet(j) => self.check_level(j),
        }
    }

    /// Support set `W_j = { m : psi_{j,0,m} != 0 }`, ascending.
    pub fn support_set(&self, j: u32) -> Result<Vec<i64>> {
        if j < self.m0 {
            return Err(Error::LevelTooCoarse {
                level: j,
                coarsest: self.m0,
            });
        }
        match self.check_level(j) {
            Ok(t) => Ok(t.entries.iter().map(|&(f, _)| f).collect()),
            // Levels beyond the grid are still well defined.
            Err(_) => Ok((-band_top(j)..=band_top(j))
                .filter(|&f| wavelet_coeff_k0(j, f).norm() > SUPPORT_TOL)
                .collect()),
        }
    }

    /// Fourier coefficient `psi_{j,k,m}` of the periodized wavelet.
    pub fn psi_fourier(&self, j: u32, k: usize, freq: i64) -> Result<Complex64> {
        if j < self.m0 {
            return Err(Error::LevelTooCoarse {
                level: j,
                coarsest: self.m0,
            });
        }
        if j >= 63 || k >= (1usize << j) {
            return Err(Error::index("meyer", format!("shift k = {k} out of range for level {j}")));
        }
        Ok(wavelet_coeff_k0(j, freq) * modulation(freq, k, j))
    }

    /// Fourier coefficient of the coarsest scaling function `phi_{m0,k}`.
    pub fn phi_fourier(&self, k: usize, freq: i64) -> Result<Complex64> {
        if k >= (1usize << self.m0) {
            return Err(Error::index("meyer", format!("shift k = {k} out of range for scaling level")));
        }
        Ok(scaling_coeff_k0(self.m0, freq) * modulation(freq, k, self.m0))
    }

    /// Basis element coefficient for any block.
    pub fn block_fourier(&self, block: TBlock, k: usize, freq: i64) -> Result<Complex64> {
        match block {
            TBlock::Scaling => self.phi_fourier(k, freq),
            TBlock::Wavelet(j) => self.psi_fourier(j, k, freq),
        }
    }

    /// Analyzes one block: `b_k = sum_m row(m) conj(psi_{j,k,m})`.
    pub fn analyze_block(&self, row: &[Complex64], block: TBlock) -> Result<Vec<Complex64>> {
        self.check_row(row)?;
        let table = self.table(block)?;
        let p = 1usize << table.level;
        let mut acc = vec![Complex64::new(0.0, 0.0); p];
        for &(f, v) in &table.entries {
            acc[f.rem_euclid(p as i64) as usize] += row[index_of_freq(f, self.n)] * v.conj();
        }
        // sum_r acc_r exp(+i 2 pi r k / p)
        table.inv.process(&mut acc);
        Ok(acc)
    }

    /// Adds `sum_k b_k psi_{j,k,m}` into `row` for one block.
    pub fn synthesize_block_into(
        &self,
        coeffs: &[Complex64],
        block: TBlock,
        row: &mut [Complex64],
    ) -> Result<()> {
        self.check_row(row)?;
        let table = self.table(block)?;
        let p = 1usize << table.level;
        if coeffs.len() != p {
            return Err(Error::index(
                "meyer",
                format!("block {block:?} expects {p} coefficients, got {}", coeffs.len()),
            ));
        }
        let mut buf = coeffs.to_vec();
        // sum_k b_k exp(-i 2 pi r k / p)
        table.fwd.process(&mut buf);
        for &(f, v) in &table.entries {
            row[index_of_freq(f, self.n)] += v * buf[f.rem_euclid(p as i64) as usize];
        }
        Ok(())
    }

    /// Wavelet analysis of a spectrum row over blocks `[m0 - 1, J)`.
    pub fn analyze_t(&self, row: &[Complex64], cutoff: u32) -> Result<Vec<Vec<Complex64>>> {
        self.check_cutoff(cutoff)?;
        self.blocks(cutoff)
            .into_iter()
            .map(|b| self.analyze_block(row, b))
            .collect()
    }

    /// Inverse of [`analyze_t`](Self::analyze_t): rebuilds a spectrum row of length `N`.
    pub fn synthesize_t(&self, coeffs: &[Vec<Complex64>], cutoff: u32) -> Result<Vec<Complex64>> {
        self.check_cutoff(cutoff)?;
        let blocks = self.blocks(cutoff);
        if coeffs.len() != blocks.len() {
            return Err(Error::index(
                "meyer",
                format!("expected {} coefficient blocks, got {}", blocks.len(), coeffs.len()),
            ));
        }
        let mut row = vec![Complex64::new(0.0, 0.0); self.n];
        for (b, c) in blocks.into_iter().zip(coeffs) {
            self.synthesize_block_into(c, b, &mut row)?;
        }
        Ok(row)
    }

    fn check_cutoff(&self, cutoff: u32) -> Result<()> {
        if cutoff > self.max_cutoff() {
            return Err(Error::LevelTooFine {
                level: cutoff - 1,
                max_frequency: band_top(cutoff - 1),
                n: self.n,
            });
        }
        Ok(())
    }

    fn check_row(&self, row: &[Complex64]) -> Result<()> {
        if row.len() != self.n {
            return Err(Error::index(
                "meyer",
                format!("spectrum row has length {}, expected {}", row.len(), self.n),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zero_row(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); n]
    }

    #[test]
    fn aux_poly_is_a_smooth_step() {
        assert_eq!(aux_poly(-0.5), 0.0);
        assert_eq!(aux_poly(1.5), 1.0);
        assert_abs_diff_eq!(aux_poly(0.5), 0.5, epsilon = 1e-15);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert_abs_diff_eq!(aux_poly(x) + aux_poly(1.0 - x), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn level_three_band() {
        let b = MeyerBasis::new(3, 64).unwrap();
        let w = b.support_set(3).unwrap();
        assert!(w.iter().all(|&m| (3..=10).contains(&m.abs())));
        assert!(!w.contains(&0));
        assert_eq!(w.len(), 16);
    }

    #[test]
    fn spectral_hole_is_empty() {
        let b = MeyerBasis::new(3, 1024).unwrap();
        for j in 3..=8u32 {
            let m = (1i64 << j) / 4;
            assert_eq!(b.psi_fourier(j, 1, m).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn errors() {
        let b = MeyerBasis::new(3, 64).unwrap();
        assert_eq!(
            b.support_set(2),
            Err(Error::LevelTooCoarse {
                level: 2,
                coarsest: 3
            })
        );
        assert!(matches!(b.psi_fourier(4, 16, 3), Err(Error::Index { .. })));
        assert!(matches!(
            b.analyze_t(&zero_row(64), 6),
            Err(Error::LevelTooFine { level: 5, .. })
        ));
        assert!(MeyerBasis::new(2, 64).is_err());
        assert!(MeyerBasis::new(3, 8).is_err());
        assert!(matches!(
            b.synthesize_t(&[vec![Complex64::new(0.0, 0.0); 8]], 4),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn finest_level_fits_nyquist() {
        assert_eq!(finest_level(512), Some(7));
        assert_eq!(band_top(7), 170);
        let b = MeyerBasis::new(3, 512).unwrap();
        assert_eq!(b.max_cutoff(), 8);
    }

    #[test]
    fn basis_image_and_orthonormality() {
        let n = 64;
        let b = MeyerBasis::new(3, n).unwrap();
        let (j0, k0) = (4u32, 5usize);
        let mut row = zero_row(n);
        for (i, c) in row.iter_mut().enumerate() {
            *c = b.psi_fourier(j0, k0, crate::spectra::freq_of_index(i, n)).unwrap();
        }
        let coeffs = b.analyze_t(&row, 5).unwrap();
        for (bi, block) in b.blocks(5).into_iter().enumerate() {
            for (k, c) in coeffs[bi].iter().enumerate() {
                let expect = if block == TBlock::Wavelet(j0) && k == k0 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c.re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-12);
            }
        }
        // single coefficient synthesizes back to the basis element
        let mut single: Vec<Vec<Complex64>> =
            b.blocks(5).iter().map(|&bl| zero_row(b.block_len(bl))).collect();
        single[2][k0] = Complex64::new(1.0, 0.0);
        let img = b.synthesize_t(&single, 5).unwrap();
        for (a, e) in img.iter().zip(&row) {
            assert_abs_diff_eq!((a - e).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_row_gives_zero_coefficients() {
        let b = MeyerBasis::new(3, 128).unwrap();
        let c = b.analyze_t(&zero_row(128), 6).unwrap();
        assert!(c.iter().flatten().all(|v| v.norm() == 0.0));
    }
}
