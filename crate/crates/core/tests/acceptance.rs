//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Set `FDECONV_ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

mod common;

use std::time::Instant;

use common::{builtin_kernel, meyer_atom, outer, spatial_atom};
use fdeconv::estimator::{estimate_coeffs, EstimatorConfig, Mode, Plan, RowIndex};
use fdeconv::meyer::{band_bottom, band_top, MeyerBasis};
use fdeconv::rates::{exponent_2d, BesovBall, Index};
use fdeconv::simlab::*;
use fdeconv::spatial::SpatialBasis;
use fdeconv::ObservationGrid;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn table1_at(runs: usize) -> Vec<Table1Cell> {
    table1(&Table1Config { runs, seed: 2024, ..Default::default() }).expect("table run")
}

fn criterion_1(cells: &[Table1Cell]) -> Outcome {
    let (matched, total) = table1_orderings(cells);
    let mut misses = Vec::new();
    for &pair in &TABLE1_PAIRS {
        for &m in &TABLE1_M {
            for &sigma in &TABLE1_SIGMA {
                let f = table1_lookup(cells, pair, m, sigma, Mode::Functional).unwrap();
                let s = table1_lookup(cells, pair, m, sigma, Mode::Separate).unwrap();
                if (f < s) != (m == 256) {
                    misses.push(format!("{}/{} M={m} s={sigma} F={f:.4} S={s:.4}", pair.0.name(), pair.1.name()));
                }
            }
        }
    }
    let mut detail = format!("{matched}/{} orderings match (need {})", total, 24);
    if !misses.is_empty() {
        detail += &format!("; mismatches: {}", misses.join(", "));
    }
    outcome(matched == 24 && total == 24, detail)
}

fn criterion_2() -> Outcome {
    let cfg = SimConfig {
        m: 256,
        n: 512,
        sigma: 0.5,
        f1: TestFunction::Quadratic,
        f2: TestFunction::Blip,
        runs: 100,
        seed: 2024,
        ..Default::default()
    };
    let r = run_mise(&cfg, &EstimatorConfig::default(), &[Mode::Functional, Mode::Separate]).expect("mise");
    let (f, s) = (r[0].mean_mise, r[1].mean_mise);
    let within = |v: f64, target: f64| (v - target).abs() <= 0.35 * target;
    outcome(
        within(f, 0.0363) && within(s, 0.0452),
        format!(
            "functional {f:.5} (sd {:.5}, target 0.0363 +-35%), separate {s:.5} (sd {:.5}, target 0.0452 +-35%)",
            r[0].std_mise, r[1].std_mise
        ),
    )
}

fn criterion_3(cells: &[Table1Cell]) -> Outcome {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut inside = 0;
    let mut total = 0;
    for &pair in &TABLE1_PAIRS {
        for &m in &TABLE1_M {
            for mode in [Mode::Functional, Mode::Separate] {
                let a = table1_lookup(cells, pair, m, 0.5, mode).unwrap();
                let b = table1_lookup(cells, pair, m, 1.0, mode).unwrap();
                let ratio = b / a;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                total += 1;
                if (3.2..=4.6).contains(&ratio) {
                    inside += 1;
                }
            }
        }
    }
    outcome(
        inside == total,
        format!("{inside}/{total} ratios in [3.2, 4.6]; observed range [{lo:.3}, {hi:.3}]"),
    )
}

fn level_variances(sigma: f64, seed: u64, reps: usize) -> (Vec<f64>, f64) {
    let (m, n) = (64, 256);
    let ks = builtin_kernel(m, n);
    let cfg = EstimatorConfig { j_cutoff: Some(6), c_beta: Some(0.0), ..Default::default() };
    let mut kk = ks.clone();
    let plan = Plan::resolve(&cfg, &[m], n, sigma, &mut kk).unwrap();
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for r in 0..reps {
        let grid = synthesize_data(&vec![0.0; m * n], &ks, sigma, &mut replicate_rng(seed, r)).unwrap();
        let c = estimate_coeffs(&grid, &kk, &plan).unwrap();
        for (i, v) in c.values().iter().enumerate() {
            let j = c.t_label(i).0;
            if (3..=5).contains(&j) {
                sums[(j - 3) as usize] += v.norm_sqr();
                counts[(j - 3) as usize] += 1;
            }
        }
    }
    let mn = (m * n) as f64;
    let stats = (0..3)
        .map(|i| sums[i] / counts[i] as f64 * mn * 2f64.powf(-2.0 * (i as f64 + 3.0) * plan.nu))
        .collect();
    let raw = sums.iter().sum::<f64>() / counts.iter().sum::<usize>() as f64;
    (stats, raw)
}

fn criterion_4() -> Outcome {
    let (stats, v1) = level_variances(0.5, 7, 200);
    let (_, v2) = level_variances(1.0, 8, 200);
    let spread = stats.iter().cloned().fold(0.0, f64::max) / stats.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = v2 / v1;
    outcome(
        spread < 4.0 && (ratio - 4.0).abs() <= 0.8,
        format!(
            "Var*MN*2^(-2j nu) for j=3,4,5: [{:.4e}, {:.4e}, {:.4e}], spread {spread:.3} (< 4); variance ratio on doubling sigma {ratio:.3} (4 +- 0.8)",
            stats[0], stats[1], stats[2]
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_t = 0.0f64;
    for n in [256usize, 512, 1024] {
        let b = MeyerBasis::new(3, n).unwrap();
        for cutoff in 3..=b.max_cutoff() {
            let coeffs: Vec<Vec<Complex64>> = b
                .blocks(cutoff)
                .into_iter()
                .map(|blk| {
                    (0..b.block_len(blk))
                        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let row = b.synthesize_t(&coeffs, cutoff).unwrap();
            let back = b.analyze_t(&row, cutoff).unwrap();
            for (a, c) in coeffs.iter().flatten().zip(back.iter().flatten()) {
                worst_t = worst_t.max((a - c).norm());
            }
        }
    }
    let mut worst_u = 0.0f64;
    for moments in [1, 4, 6, 10] {
        let basis = SpatialBasis::new(moments, 3).unwrap();
        for len in [32usize, 256, 1024] {
            let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let back = basis.inverse(&basis.forward(&v).unwrap()).unwrap();
            worst_u = v.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(worst_u, f64::max);
        }
    }
    let big = MeyerBasis::new(3, 2048).unwrap();
    let mut energy_err = 0.0f64;
    let mut bound_ok = true;
    let mut support_ok = true;
    for j in 3..=8u32 {
        let cap = 2f64.powf(-(j as f64) / 2.0) * (1.0 + 1e-12);
        for k in [0usize, 1, (1 << j) - 1] {
            let mut e = 0.0;
            for f in -1024..1024i64 {
                let v = big.psi_fourier(j, k, f).unwrap();
                e += v.norm_sqr();
                bound_ok &= v.norm() <= cap;
                if v.norm() > 1e-15 {
                    let a = f.abs();
                    support_ok &= a >= band_bottom(j) && a <= band_top(j);
                }
            }
            energy_err = energy_err.max((e - 1.0).abs());
        }
        let w = big.support_set(j).unwrap();
        let ceil = ((1i64 << j) + 2) / 3;
        support_ok &= w.iter().all(|f| (ceil..=band_top(j)).contains(&f.abs()));
    }
    outcome(
        worst_t < 1e-10 && worst_u < 1e-10 && energy_err < 1e-10 && bound_ok && support_ok,
        format!(
            "meyer round trip {worst_t:.2e}, DWT round trip {worst_u:.2e}, max |sum|psi|^2 - 1| {energy_err:.2e}, |psi| <= 2^(-j/2): {bound_ok}, support in +-[ceil(2^j/3), floor(2^(j+2)/3)]: {support_ok}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let (m, n) = (256, 256);
    let f = outer(&spatial_atom(m, 4, 3), &meyer_atom(n, 4, 2));
    let ks = builtin_kernel(m, n);
    let y = convolve(&f, &ks).unwrap();
    let grid = ObservationGrid::new(m, n, 0.0, y).unwrap();
    let mut kk = ks.clone();
    let plan = Plan::resolve(&EstimatorConfig::default(), &[m], n, 0.0, &mut kk).unwrap();
    let c = estimate_coeffs(&grid, &kk, &plan).unwrap();
    let target = c.index_of(4, 2, &RowIndex::Spatial(vec![(4, 3)])).unwrap();
    let v = c.values()[target];
    let others = c
        .values()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    outcome(
        (v - 1.0).norm() <= 0.02 && others < 0.02,
        format!("target {:.6}{:+.1e}i, largest other {others:.2e}", v.re, v.im),
    )
}

fn criterion_7() -> Outcome {
    let (bad_q, boundary) = common::rate_draws::rational_discrepancies(10_000, 77);
    let bad_f = common::rate_draws::float_discrepancies(10_000, 78);
    let q = |a, b| Rational64::new(a, b);
    let ex = |s1, p: i64, nu| {
        let b = BesovBall::new(s1, vec![q(1, 1)], Index::Finite(q(p, 1)), Index::Finite(q(2, 1)), 1.0).unwrap();
        exponent_2d(&b, &nu).unwrap().d
    };
    let examples = [ex(q(4, 1), 2, q(1, 1)), ex(q(2, 1), 2, q(1, 1)), ex(q(6, 5), 1, q(2, 1))];
    let exact = examples == [q(2, 3), q(4, 7), q(7, 27)];
    outcome(
        bad_q == 0 && bad_f == 0 && exact,
        format!(
            "discrepancies: {bad_q}/10000 rational ({boundary} on a boundary), {bad_f}/10000 float; examples {} {} {}",
            examples[0], examples[1], examples[2]
        ),
    )
}

fn criterion_8() -> Outcome {
    let cfg = SimConfig { runs: 25, seed: 2024, ..Default::default() };
    let pts = mise_sweep(&cfg, &EstimatorConfig::default(), &[64, 128, 256]).unwrap();
    let slope = loglog_slope(&pts);
    let monotone = pts.windows(2).all(|w| w[1].mean_mise < w[0].mean_mise);
    let listing: Vec<String> = pts.iter().map(|p| format!("M={} {:.5}", p.m, p.mean_mise)).collect();
    outcome(
        slope < 0.0 && monotone,
        format!("slope {slope:.4}, monotone {monotone}; {}", listing.join(", ")),
    )
}

fn main() {
    let strict = std::env::var("FDECONV_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let start = Instant::now();
    let cells = table1_at(25);
    let table_time = start.elapsed();
    let results = [
        (1, criterion_1(&cells)),
        (2, criterion_2()),
        (3, criterion_3(&cells)),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
    ];
    let mut passed = 0;
    for (id, o) in &results {
        println!("criterion {id}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        passed += usize::from(o.pass);
    }
    println!(
        "acceptance: {passed}/{} criteria passed (table run {:.1}s, total {:.1}s)",
        results.len(),
        table_time.as_secs_f64(),
        start.elapsed().as_secs_f64()
    );
    if strict && passed != results.len() {
        std::process::exit(1);
    }
}
