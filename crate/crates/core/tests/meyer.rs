use std::f64::consts::PI;

use fdeconv::meyer::{band_bottom, band_top, MeyerBasis, TBlock};
use fdeconv::simlab::TestFunction;
use fdeconv::spectra::{freq_of_index, Fourier};
use fdeconv::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Independent transcription of the Meyer window for the oracles below.
fn nu3(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    35.0 * x.powi(4) - 84.0 * x.powi(5) + 70.0 * x.powi(6) - 20.0 * x.powi(7)
}

fn psi_abs(w: f64) -> f64 {
    let a = w.abs();
    if a <= 2.0 * PI / 3.0 || a >= 8.0 * PI / 3.0 {
        0.0
    } else if a <= 4.0 * PI / 3.0 {
        (PI / 2.0 * nu3(3.0 * a / (2.0 * PI) - 1.0)).sin()
    } else {
        (PI / 2.0 * nu3(3.0 * a / (4.0 * PI) - 1.0)).cos()
    }
}

fn phi_abs(w: f64) -> f64 {
    let a = w.abs();
    if a <= 2.0 * PI / 3.0 {
        1.0
    } else if a < 4.0 * PI / 3.0 {
        (PI / 2.0 * nu3(3.0 * a / (2.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

#[test]
fn basis_invariants_by_enumeration() {
    let n = 1024;
    let b = MeyerBasis::new(3, n).unwrap();
    let half = (n / 2) as i64;
    for j in 3..=8u32 {
        let bound = (-(j as f64) / 2.0).exp2();
        let p = 1usize << j;
        for k in [0, 1, p / 3, p - 1] {
            let mut energy = 0.0;
            for m in -half..half {
                let v = b.psi_fourier(j, k, m).unwrap();
                let v0 = b.psi_fourier(j, 0, m).unwrap();
                assert!(v.norm() <= bound * (1.0 + 1e-15), "j={j} m={m}");
                assert!((v.norm() - v0.norm()).abs() < 1e-15);
                let expected = v0 * Complex64::from_polar(1.0, -2.0 * PI * (m * k as i64) as f64 / p as f64);
                assert!((v - expected).norm() < 1e-13);
                if v.norm() > 0.0 {
                    assert!(m.abs() >= band_bottom(j) && m.abs() <= band_top(j));
                }
                energy += v.norm_sqr();
            }
            assert!((energy - 1.0).abs() < 1e-10, "j={j} k={k} energy={energy}");
        }
    }
}

#[test]
fn band_edges() {
    assert_eq!((band_bottom(3), band_top(3)), (3, 10));
    for j in 0..20u32 {
        assert_eq!(band_bottom(j), ((1i64 << j) as f64 / 3.0).ceil() as i64);
        assert_eq!(band_top(j), ((1i64 << (j + 2)) as f64 / 3.0).floor() as i64);
    }
}

#[test]
fn continuous_wavelet_has_unit_energy() {
    // Simpson's rule on (1/2pi) int |psihat|^2 over the positive band, doubled
    let (a, c) = (2.0 * PI / 3.0, 8.0 * PI / 3.0);
    let steps = 200_000;
    let h = (c - a) / steps as f64;
    let mut s = psi_abs(a).powi(2) + psi_abs(c).powi(2);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * psi_abs(a + i as f64 * h).powi(2);
    }
    let integral = 2.0 * s * h / 3.0 / (2.0 * PI);
    assert!((integral - 1.0).abs() < 1e-10);
    let b = MeyerBasis::new(3, 256).unwrap();
    let discrete: f64 = (-128..128).map(|m| b.psi_fourier(5, 0, m).unwrap().norm_sqr()).sum();
    assert!((discrete - integral).abs() < 1e-10);
    for m in -128..128 {
        let v = b.psi_fourier(5, 3, m).unwrap().norm();
        assert!((v - psi_abs(2.0 * PI * m as f64 / 32.0) / 32f64.sqrt()).abs() < 1e-14);
    }
}

#[test]
fn support_sets() {
    let b = MeyerBasis::new(3, 4096).unwrap();
    for j in 3..=10u32 {
        let w = b.support_set(j).unwrap();
        assert!(!w.contains(&0));
        assert!(w.len() <= 2 * ((1 << (j + 1)) + 1));
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        for &m in &w {
            assert!(m.abs() >= band_bottom(j) && m.abs() <= band_top(j));
        }
        let oracle: Vec<i64> = (-2048..2048i64)
            .filter(|&m| psi_abs(2.0 * PI * m as f64 / (1u64 << j) as f64) > 1e-14)
            .collect();
        assert_eq!(w, oracle, "j = {j}");
        if j + 2 <= 10 {
            let far = b.support_set(j + 2).unwrap();
            assert!(w.iter().all(|m| !far.contains(m)));
        }
    }
    assert_eq!(
        b.support_set(2),
        Err(Error::LevelTooCoarse { level: 2, coarsest: 3 })
    );
}

#[test]
fn gram_matrix_is_identity() {
    let n = 128;
    let b = MeyerBasis::new(3, n).unwrap();
    let cutoff = 6;
    let mut elems: Vec<Vec<Complex64>> = Vec::new();
    for block in b.blocks(cutoff) {
        for k in 0..b.block_len(block) {
            elems.push(
                (0..n)
                    .map(|i| b.block_fourier(block, k, freq_of_index(i, n)).unwrap())
                    .collect(),
            );
        }
    }
    assert_eq!(elems.len(), 1 << cutoff);
    for (a, ea) in elems.iter().enumerate() {
        for (c, ec) in elems.iter().enumerate().skip(a) {
            let dot: Complex64 = ea.iter().zip(ec).map(|(x, y)| x * y.conj()).sum();
            let expect = if a == c { 1.0 } else { 0.0 };
            assert!((dot - expect).norm() < 1e-12, "({a}, {c}) -> {dot}");
        }
    }
}

// Projection onto the level-J scaling space: with A_r = sum_{m = r mod 2^J} phihat_m x_m,
// the coefficient energy is sum_r |A_r|^2 and the image is phihat_m A_{m mod 2^J}.
fn aliased_sums(row: &[Complex64], cutoff: u32) -> Vec<Complex64> {
    let n = row.len();
    let p = 1usize << cutoff;
    let mut acc = vec![Complex64::new(0.0, 0.0); p];
    for (i, x) in row.iter().enumerate() {
        let m = freq_of_index(i, n);
        acc[m.rem_euclid(p as i64) as usize] += x * phi_abs(2.0 * PI * m as f64 / p as f64);
    }
    acc
}

#[test]
fn blip_energy_matches_projection() {
    let n = 512;
    let b = MeyerBasis::new(3, n).unwrap();
    let row = Fourier::new(n).coeffs_real(&TestFunction::Blip.samples(n));
    for cutoff in 3..=b.max_cutoff() {
        let coeffs = b.analyze_t(&row, cutoff).unwrap();
        let energy: f64 = coeffs.iter().flatten().map(|c| c.norm_sqr()).sum();
        let sums = aliased_sums(&row, cutoff);
        let oracle: f64 = sums.iter().map(|c| c.norm_sqr()).sum();
        assert!((energy - oracle).abs() < 1e-8, "J={cutoff}: {energy} vs {oracle}");
        let back = b.synthesize_t(&coeffs, cutoff).unwrap();
        let p = 1i64 << cutoff;
        for (i, got) in back.iter().enumerate() {
            let m = freq_of_index(i, n);
            let expect = sums[m.rem_euclid(p) as usize] * phi_abs(2.0 * PI * m as f64 / p as f64);
            assert!((got - expect).norm() < 1e-12);
        }
    }
}

#[test]
fn white_noise_round_trip_on_exact_band() {
    let n = 256;
    let b = MeyerBasis::new(3, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let row: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    for cutoff in 3..=b.max_cutoff() {
        let back = b.synthesize_t(&b.analyze_t(&row, cutoff).unwrap(), cutoff).unwrap();
        let exact = b.exact_band(cutoff);
        for i in 0..n {
            if freq_of_index(i, n).abs() <= exact {
                assert!((back[i] - row[i]).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn too_fine_names_the_level() {
    let b = MeyerBasis::new(3, 64).unwrap();
    let row = vec![Complex64::new(0.0, 0.0); 64];
    match b.analyze_t(&row, 7) {
        Err(Error::LevelTooFine { level, .. }) => assert_eq!(level, 6),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        b.analyze_block(&row, TBlock::Wavelet(5)),
        Err(Error::LevelTooFine { level: 5, .. })
    ));
    assert!(matches!(b.analyze_t(&row[..32], 4), Err(Error::Index { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn band_limited_round_trip_and_isometry(
        log_n in 4u32..10,
        seed in any::<u64>(),
        cut in 0u32..8,
    ) {
        let n = 1usize << log_n;
        let b = MeyerBasis::new(3, n).unwrap();
        let cutoff = 3 + cut % (b.max_cutoff() - 2);
        let exact = b.exact_band(cutoff);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let row: Vec<Complex64> = (0..n)
            .map(|i| {
                if freq_of_index(i, n).abs() <= exact {
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let coeffs = b.analyze_t(&row, cutoff).unwrap();
        let e_in: f64 = row.iter().map(|c| c.norm_sqr()).sum();
        let e_out: f64 = coeffs.iter().flatten().map(|c| c.norm_sqr()).sum();
        prop_assert!((e_in - e_out).abs() <= 1e-9 * e_in.max(1e-300));
        let back = b.synthesize_t(&coeffs, cutoff).unwrap();
        for (x, y) in back.iter().zip(&row) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }
}
