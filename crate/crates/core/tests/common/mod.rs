#![allow(dead_code)]

use fdeconv::meyer::MeyerBasis;
use fdeconv::simlab::{kernel_samples, KernelShape};
use fdeconv::spatial::SpatialBasis;
use fdeconv::spectra::{freq_of_index, kernel_spectrum, ConvolutionScale, Fourier, KernelSpectrum};

/// Samples of the periodized Meyer wavelet `psi_{j,k}` at `t_i = i / n`.
pub fn meyer_atom(n: usize, j: u32, k: usize) -> Vec<f64> {
    let b = MeyerBasis::new(3, n).unwrap();
    let mut spec: Vec<_> = (0..n)
        .map(|i| b.psi_fourier(j, k, freq_of_index(i, n)).unwrap())
        .collect();
    Fourier::new(n).synthesize_in_place(&mut spec);
    assert!(spec.iter().all(|c| c.im.abs() < 1e-12));
    spec.iter().map(|c| c.re).collect()
}

/// Samples of the spatial wavelet `eta_{j',k'}` at `u_l = l / m` (unit `L^2` norm).
pub fn spatial_atom(m: usize, jp: u32, kp: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[(1 << jp) + kp] = 1.0;
    let s = (m as f64).sqrt();
    SpatialBasis::default()
        .inverse(&v)
        .unwrap()
        .into_iter()
        .map(|x| x * s)
        .collect()
}

pub fn builtin_kernel(m: usize, n: usize) -> KernelSpectrum {
    kernel_spectrum(&kernel_samples(m, n, KernelShape::Circular), m, n, ConvolutionScale::Sum).unwrap()
}

pub fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub mod rate_draws {
    use fdeconv::rates::{exponent_2d, exponent_min_form, BesovBall, Index, RateScalar};
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent three-term minimum, written out in `f64`.
    pub fn min_form(s1: f64, s2: f64, nu: f64, inv_p: f64) -> f64 {
        let s1p = s1 + 0.5 - inv_p.max(0.5);
        let a = 2.0 * s2 / (2.0 * s2 + 1.0);
        let b = 2.0 * s1 / (2.0 * s1 + 2.0 * nu + 1.0);
        let c = 2.0 * s1p / (2.0 * s1p + 2.0 * nu);
        a.min(b).min(c)
    }

    /// Draws admissible rational balls on a coarse lattice, so boundary
    /// cases come up often, and counts disagreements between the case
    /// formula and both minimum forms.
    pub fn rational_discrepancies(draws: usize, seed: u64) -> (usize, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        let mut on_boundary = 0;
        for _ in 0..draws {
            let p = match rng.random_range(0..5) {
                0 => Index::Finite(Rational64::from_integer(1)),
                1 => Index::Finite(Rational64::new(3, 2)),
                2 => Index::Finite(Rational64::from_integer(2)),
                3 => Index::Finite(Rational64::from_integer(rng.random_range(3..9))),
                _ => Index::Infinite,
            };
            let floor = Rational64::new(1, 2).max(p.reciprocal());
            let smooth = |rng: &mut ChaCha8Rng| floor + Rational64::new(rng.random_range(0..40), 4);
            let s1 = smooth(&mut rng);
            let s2 = smooth(&mut rng);
            let nu = Rational64::new(rng.random_range(0..13), 4);
            let ball = BesovBall::new(s1, vec![s2], p.clone(), Index::Infinite, 1.0).unwrap();
            let rep = exponent_2d(&ball, &nu).unwrap();
            if rep.dense_boundary || rep.sparse_boundary {
                on_boundary += 1;
            }
            let direct = min_form(s1.to_f64(), s2.to_f64(), nu.to_f64(), p.reciprocal().to_f64());
            if rep.d != exponent_min_form(&ball, &nu) || (rep.d.to_f64() - direct).abs() > 1e-14 {
                bad += 1;
            }
        }
        (bad, on_boundary)
    }

    pub fn float_discrepancies(draws: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..draws {
            let p = if rng.random_bool(0.2) {
                Index::Infinite
            } else {
                Index::Finite(rng.random_range(1.0..6.0))
            };
            let floor = 0.5f64.max(p.reciprocal());
            let s1 = floor + rng.random_range(0.0..8.0);
            let s2 = floor + rng.random_range(0.0..8.0);
            let nu = rng.random_range(0.0..4.0);
            let inv_p = p.reciprocal();
            let ball = BesovBall::new(s1, vec![s2], p, Index::Finite(2.0), 1.0).unwrap();
            let rep = exponent_2d(&ball, &nu).unwrap();
            if (rep.d - min_form(s1, s2, nu, inv_p)).abs() > 1e-14 || rep.d != exponent_min_form(&ball, &nu) {
                bad += 1;
            }
        }
        bad
    }
}
