//! Minimax-rate exponents over Besov balls of mixed smoothness, the
//! mixed-smoothness sequence norm, and the functional-versus-separate verdict.
//!
//! Exponent arithmetic is generic over [`RateScalar`]: `f64` compares
//! boundary equalities with a `1e-12` tolerance, `Rational64` compares them
//! exactly.

use std::fmt::Display;
use std::ops::{Add, Div, Mul, Sub};

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::estimator::{HyperCoeffs, RowIndex};

/// Number type for exponent arithmetic.
pub trait RateScalar:
    Clone
    + PartialOrd
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn ratio(num: i64, den: i64) -> Self;
    /// Equality used for boundary detection.
    fn same(&self, other: &Self) -> bool;
    fn to_f64(&self) -> f64;
}

impl RateScalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn same(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * self.abs().max(other.abs()).max(1.0)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl RateScalar for Rational64 {
    fn ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }

    fn same(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

fn int<T: RateScalar>(v: i64) -> T {
    T::ratio(v, 1)
}

fn strictly_greater<T: RateScalar>(a: &T, b: &T) -> bool {
    a > b && !a.same(b)
}

fn min_of<T: RateScalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Parses `"2"`, `"-1.25"` or `"3/4"` as an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::config("rates", format!("'{s}' is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let w: i64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
    let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = w
        .checked_mul(den)
        .and_then(|x| x.checked_add(f))
        .ok_or_else(bad)?;
    Ok(Rational64::new(if neg { -num } else { num }, den))
}

/// A summability index `p` or `q` in `[1, inf]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Index<T> {
    Finite(T),
    Infinite,
}

impl<T: RateScalar> Index<T> {
    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(&self) -> T {
        match self {
            Index::Finite(p) => int::<T>(1) / p.clone(),
            Index::Infinite => int(0),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Index::Finite(p) => p.to_f64(),
            Index::Infinite => f64::INFINITY,
        }
    }
}

/// Mixed-smoothness Besov ball `B^{s1, s2}_{p,q}(A)`.
///
/// `s1` is the smoothness along `t`, `s2` one value per spatial axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BesovBall<T> {
    pub s1: T,
    pub s2: Vec<T>,
    pub p: Index<T>,
    pub q: Index<T>,
    pub radius: f64,
}

impl<T: RateScalar> BesovBall<T> {
    pub fn new(s1: T, s2: Vec<T>, p: Index<T>, q: Index<T>, radius: f64) -> Result<Self> {
        if s2.is_empty() {
            return Err(Error::config("rates", "need at least one spatial smoothness s2"));
        }
        for (name, idx) in [("p", &p), ("q", &q)] {
            if let Index::Finite(v) = idx {
                if *v < int(1) {
                    return Err(Error::config("rates", format!("{name} = {v} must be >= 1")));
                }
            }
        }
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::config("rates", format!("radius A = {radius} must be > 0")));
        }
        Ok(BesovBall { s1, s2, p, q, radius })
    }

    /// Number of spatial axes `r`.
    pub fn r(&self) -> usize {
        self.s2.len()
    }

    /// `1/p'` with `p' = min(p, 2)`.
    pub fn inv_p_prime(&self) -> T {
        let half = T::ratio(1, 2);
        let inv = self.p.reciprocal();
        if inv > half {
            inv
        } else {
            half
        }
    }

    /// `s' = s + 1/2 - 1/p'`.
    pub fn s_prime(&self, s: &T) -> T {
        s.clone() + T::ratio(1, 2) - self.inv_p_prime()
    }

    /// `s* = s + 1/2 - 1/p`.
    pub fn s_star(&self, s: &T) -> T {
        s.clone() + T::ratio(1, 2) - self.p.reciprocal()
    }

    /// `(s_{2,0}, l0)`: the smallest spatial smoothness and its first position.
    pub fn s2_min(&self) -> (T, usize) {
        let mut best = 0;
        for l in 1..self.s2.len() {
            if self.s2[l] < self.s2[best] {
                best = l;
            }
        }
        (self.s2[best].clone(), best)
    }

    /// Whether `min(s1, s_{2,0}) >= max(1/p, 1/2)`.
    pub fn in_rate_regime(&self) -> bool {
        let lo = min_of(self.s1.clone(), self.s2_min().0);
        let inv = self.p.reciprocal();
        let half = T::ratio(1, 2);
        let need = if inv > half { inv } else { half };
        lo > need || lo.same(&need)
    }
}

/// Which term of the minimum is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `s1 > s2 (2 nu + 1)`: the spatial rate `2 s2 / (2 s2 + 1)`.
    DenseSpatial,
    /// Middle case: `2 s1 / (2 s1 + 2 nu + 1)`.
    DenseTime,
    /// `s1 < (1/p - 1/2)(2 nu + 1)`: `2 s1' / (2 s1' + 2 nu)`.
    Sparse,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::DenseSpatial => "DenseSpatial",
            Regime::DenseTime => "DenseTime",
            Regime::Sparse => "Sparse",
        }
    }
}

/// Outcome of comparing joint and per-profile estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    FunctionalBetter,
    SeparateBetter,
    Boundary,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::FunctionalBetter => "FunctionalBetter",
            Verdict::SeparateBetter => "SeparateBetter",
            Verdict::Boundary => "Boundary",
        }
    }
}

/// Rate exponents for one ball.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport<T> {
    /// Polynomial exponent `d` (or `D`).
    pub d: T,
    /// Power of the extra logarithmic factor `d1` (or `D1`).
    pub d1: u32,
    pub regime: Regime,
    /// `s1 = s2 (2 nu + 1)`.
    pub dense_boundary: bool,
    /// `s1 = (2 nu + 1)(1/p - 1/2)`.
    pub sparse_boundary: bool,
    /// Spatial axes other than `l0` tied with the minimum smoothness.
    pub ties: u32,
    /// Set when the ball lies outside `min(s1, s_{2,0}) >= max(1/p, 1/2)`.
    pub regime_warning: Option<String>,
}

/// The three candidate exponents `(dense spatial, dense time, sparse)` using `s_{2,0}`.
pub fn candidate_exponents<T: RateScalar>(ball: &BesovBall<T>, nu: &T) -> [T; 3] {
    let one = int::<T>(1);
    let two = int::<T>(2);
    let (s2, _) = ball.s2_min();
    let s1 = ball.s1.clone();
    let s1p = ball.s_prime(&ball.s1);
    let a = two.clone() * s2.clone() / (two.clone() * s2 + one.clone());
    let b = two.clone() * s1.clone() / (two.clone() * s1 + two.clone() * nu.clone() + one.clone());
    let den = two.clone() * s1p.clone() + two.clone() * nu.clone();
    // s1' = nu = 0 only happens outside the rate regime; the nu = 0 branch is 1 for every s1' > 0
    let c = if den.same(&int(0)) { one } else { two * s1p / den };
    [a, b, c]
}

/// `d = min(...)` of the three candidates.
pub fn exponent_min_form<T: RateScalar>(ball: &BesovBall<T>, nu: &T) -> T {
    let [a, b, c] = candidate_exponents(ball, nu);
    min_of(min_of(a, b), c)
}

fn check_nu<T: RateScalar>(nu: &T) -> Result<()> {
    if *nu < int(0) {
        return Err(Error::config("rates", format!("nu = {nu} must be >= 0")));
    }
    Ok(())
}

/// Exponents `D`, `D1` for `r >= 1` spatial axes (case form).
pub fn exponent_multi<T: RateScalar>(ball: &BesovBall<T>, nu: &T) -> Result<RateReport<T>> {
    check_nu(nu)?;
    let one = int::<T>(1);
    let two = int::<T>(2);
    let (s20, l0) = ball.s2_min();
    let k = two * nu.clone() + one;
    let dense_edge = s20.clone() * k.clone();
    let sparse_edge = k * (ball.p.reciprocal() - T::ratio(1, 2));
    let [a, b, c] = candidate_exponents(ball, nu);
    let s1 = &ball.s1;
    let (d, regime) = if strictly_greater(s1, &dense_edge) {
        (a, Regime::DenseSpatial)
    } else if strictly_greater(&sparse_edge, s1) {
        (c, Regime::Sparse)
    } else {
        (b, Regime::DenseTime)
    };
    let dense_boundary = s1.same(&dense_edge);
    let sparse_boundary = s1.same(&sparse_edge);
    let ties = ball
        .s2
        .iter()
        .enumerate()
        .filter(|&(l, s)| l != l0 && s.same(&s20))
        .count() as u32;
    let regime_warning = (!ball.in_rate_regime()).then(|| {
        "min(s1, s2) < max(1/p, 1/2): outside the range where the rate is established".to_string()
    });
    Ok(RateReport {
        d,
        d1: u32::from(dense_boundary) + u32::from(sparse_boundary) + ties,
        regime,
        dense_boundary,
        sparse_boundary,
        ties,
        regime_warning,
    })
}

/// Exponents `d`, `d1` for one spatial axis.
pub fn exponent_2d<T: RateScalar>(ball: &BesovBall<T>, nu: &T) -> Result<RateReport<T>> {
    if ball.r() != 1 {
        return Err(Error::config(
            "rates",
            format!("two-dimensional exponent needs one s2 value, got {}", ball.r()),
        ));
    }
    exponent_multi(ball, nu)
}

/// Verdict and surrogate `M N^{-(s1 - s2(2nu+1)) / (s2 (2 s1 + 2 nu + 1))}`.
///
/// The surrogate is `None` when `s1 <= s2 (2 nu + 1)`.
pub fn compare_strategies(s1: f64, s2: f64, nu: f64, m: f64, n: f64) -> (Verdict, Option<f64>) {
    let edge = s2 * (2.0 * nu + 1.0);
    if !strictly_greater(&s1, &edge) {
        return (Verdict::FunctionalBetter, None);
    }
    let expo = (s1 - edge) / (s2 * (2.0 * s1 + 2.0 * nu + 1.0));
    let surrogate = m * n.powf(-expo);
    let verdict = if (surrogate - 1.0).abs() <= 1e-9 {
        Verdict::Boundary
    } else if surrogate < 1.0 {
        Verdict::SeparateBetter
    } else {
        Verdict::FunctionalBetter
    };
    (verdict, Some(surrogate))
}

/// Mixed-smoothness sequence norm of `coeffs`.
///
/// Blocks are indexed by the `t` level `j` and the spatial levels `j'`; the
/// block weight is `2^{j s1* + sum_a j'_a s2*_a}`. `p` or `q` infinite means a
/// supremum. Rows of a per-profile array carry no spatial weight.
pub fn besov_norm(coeffs: &HyperCoeffs, s1: f64, s2: &[f64], p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::config("rates", format!("p = {p}, q = {q} must be >= 1")));
    }
    let s1_star = s1 + 0.5 - 1.0 / p;
    let s2_star: Vec<f64> = s2.iter().map(|s| s + 0.5 - 1.0 / p).collect();
    let mut blocks: std::collections::BTreeMap<(i32, Vec<i32>), (f64, f64)> = Default::default();
    for (idx, v) in coeffs.values().iter().enumerate() {
        let (j, _) = coeffs.t_label(idx);
        let jp: Vec<i32> = match coeffs.row_index(idx) {
            RowIndex::Spatial(labels) => labels.iter().map(|l| l.0).collect(),
            RowIndex::Profile(_) => Vec::new(),
        };
        if !jp.is_empty() && jp.len() != s2_star.len() {
            return Err(Error::config(
                "rates",
                format!("coefficients have {} spatial axes, got {} s2 values", jp.len(), s2.len()),
            ));
        }
        let weight = j as f64 * s1_star + jp.iter().zip(&s2_star).map(|(&a, s)| a as f64 * s).sum::<f64>();
        let entry = blocks.entry((j, jp)).or_insert((weight, 0.0));
        let a = v.norm();
        if p.is_infinite() {
            entry.1 = entry.1.max(a);
        } else {
            entry.1 += a.powf(p);
        }
    }
    let mut total = 0.0f64;
    for (_, (weight, acc)) in blocks {
        let inner = if p.is_infinite() { acc } else { acc.powf(1.0 / p) };
        let term = weight.exp2() * inner;
        if q.is_infinite() {
            total = total.max(term);
        } else {
            total += term.powf(q);
        }
    }
    Ok(if q.is_infinite() { total } else { total.powf(1.0 / q) })
}
