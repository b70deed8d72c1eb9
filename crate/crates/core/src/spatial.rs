//! Periodized Daubechies DWT along the spatial axes.
//!
//! Coefficients use the Mallat layout: for a vector of length `2^L` and
//! coarsest level `m0'`, positions `[0, 2^{m0'})` hold scaling coefficients
//! and `[2^j, 2^{j+1})` hold details at level `j` for `m0' <= j < L`.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Scalars the transform can act on.
pub trait Sample: Copy + Zero + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync {}

impl Sample for f64 {}
impl Sample for Complex64 {}

/// Periodized orthonormal Daubechies wavelet basis on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialBasis {
    moments: usize,
    m0: u32,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Default for SpatialBasis {
    fn default() -> Self {
        SpatialBasis::new(6, 3).expect("db6 is tabulated")
    }
}

/// A block in the Mallat layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UBlock {
    Scaling,
    Detail(u32),
}

/// Returns `log2(len)` if `len` is a power of two.
pub fn dyadic_log(len: usize) -> Option<u32> {
    len.is_power_of_two().then(|| len.trailing_zeros())
}

impl SpatialBasis {
    /// Extremal-phase Daubechies filter with `moments` vanishing moments (1..=10).
    pub fn new(moments: usize, m0: u32) -> Result<Self> {
        let lo: Vec<f64> = match moments {
            1 => DB1.to_vec(),
            2 => DB2.to_vec(),
            3 => DB3.to_vec(),
            4 => DB4.to_vec(),
            5 => DB5.to_vec(),
            6 => DB6.to_vec(),
            7 => DB7.to_vec(),
            8 => DB8.to_vec(),
            9 => DB9.to_vec(),
            10 => DB10.to_vec(),
            _ => {
                return Err(Error::config(
                    "spatial_dwt",
                    format!("vanishing moments = {moments} not tabulated (1..=10)"),
                ))
            }
        };
        let len = lo.len();
        let hi = (0..len)
            .map(|k| if k % 2 == 0 { lo[len - 1 - k] } else { -lo[len - 1 - k] })
            .collect();
        Ok(SpatialBasis { moments, m0, lo, hi })
    }

    pub fn vanishing_moments(&self) -> usize {
        self.moments
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn low_pass(&self) -> &[f64] {
        &self.lo
    }

    pub fn high_pass(&self) -> &[f64] {
        &self.hi
    }

    fn levels(&self, len: usize) -> Result<u32> {
        let l = dyadic_log(len).ok_or_else(|| {
            Error::config("spatial_dwt", format!("length {len} is not a power of two"))
        })?;
        if l < self.m0 {
            return Err(Error::config(
                "spatial_dwt",
                format!("length {len} is shorter than 2^m0' = {}", 1usize << self.m0),
            ));
        }
        Ok(l)
    }

    /// Blocks for a vector of length `2^l` truncated at `cutoff` (details `m0'..cutoff`).
    pub fn blocks(&self, cutoff: u32) -> Vec<UBlock> {
        std::iter::once(UBlock::Scaling)
            .chain((self.m0..cutoff.max(self.m0)).map(UBlock::Detail))
            .collect()
    }

    /// Positions of a block in the Mallat layout.
    pub fn block_range(&self, block: UBlock) -> std::ops::Range<usize> {
        match block {
            UBlock::Scaling => 0..1 << self.m0,
            UBlock::Detail(j) => 1 << j..2 << j,
        }
    }

    /// Level label: `m0' - 1` for the scaling block.
    pub fn block_label(&self, block: UBlock) -> i32 {
        match block {
            UBlock::Scaling => self.m0 as i32 - 1,
            UBlock::Detail(j) => j as i32,
        }
    }

    /// Forward DWT into the Mallat layout.
    pub fn forward<T: Sample>(&self, v: &[T]) -> Result<Vec<T>> {
        let levels = self.levels(v.len())?;
        let mut out = v.to_vec();
        let mut scratch = vec![T::zero(); v.len()];
        for l in (self.m0..levels).rev() {
            self.step_forward(&mut out[..2 << l], &mut scratch);
        }
        Ok(out)
    }

    /// Inverse of [`forward`](Self::forward).
    pub fn inverse<T: Sample>(&self, c: &[T]) -> Result<Vec<T>> {
        let levels = self.levels(c.len())?;
        let mut out = c.to_vec();
        let mut scratch = vec![T::zero(); c.len()];
        for l in self.m0..levels {
            self.step_inverse(&mut out[..2 << l], &mut scratch);
        }
        Ok(out)
    }

    fn step_forward<T: Sample>(&self, a: &mut [T], scratch: &mut [T]) {
        let n = a.len();
        let half = n / 2;
        for i in 0..half {
            let mut s = T::zero();
            let mut d = T::zero();
            for (k, (&h, &g)) in self.lo.iter().zip(&self.hi).enumerate() {
                let x = a[(2 * i + k) % n];
                s = s + x * h;
                d = d + x * g;
            }
            scratch[i] = s;
            scratch[half + i] = d;
        }
        a.copy_from_slice(&scratch[..n]);
    }

    fn step_inverse<T: Sample>(&self, a: &mut [T], scratch: &mut [T]) {
        let n = a.len();
        let half = n / 2;
        scratch[..n].iter_mut().for_each(|x| *x = T::zero());
        for i in 0..half {
            let s = a[i];
            let d = a[half + i];
            for (k, (&h, &g)) in self.lo.iter().zip(&self.hi).enumerate() {
                let p = (2 * i + k) % n;
                scratch[p] = scratch[p] + s * h + d * g;
            }
        }
        a.copy_from_slice(&scratch[..n]);
    }

    /// Separable forward transform of a row-major array with shape `dims`,
    /// applied to `stride`-interleaved columns (one independent array per column).
    ///
    /// `data` holds `prod(dims) * stride` values; element `(idx, c)` lives at
    /// `flat(idx) * stride + c`.
    pub fn tensor_forward<T: Sample>(
        &self,
        data: &mut [T],
        dims: &[usize],
        stride: usize,
        exec: Execution,
    ) -> Result<()> {
        self.tensor_apply(data, dims, stride, exec, true)
    }

    /// Inverse of [`tensor_forward`](Self::tensor_forward).
    pub fn tensor_inverse<T: Sample>(
        &self,
        data: &mut [T],
        dims: &[usize],
        stride: usize,
        exec: Execution,
    ) -> Result<()> {
        self.tensor_apply(data, dims, stride, exec, false)
    }

    fn tensor_apply<T: Sample>(
        &self,
        data: &mut [T],
        dims: &[usize],
        stride: usize,
        exec: Execution,
        forward: bool,
    ) -> Result<()> {
        let total: usize = dims.iter().product();
        if data.len() != total * stride {
            return Err(Error::index(
                "spatial_dwt",
                format!("array has {} values, shape needs {}", data.len(), total * stride),
            ));
        }
        for &d in dims {
            self.levels(d)?;
        }
        for axis in 0..dims.len() {
            let len = dims[axis];
            if len == 1 {
                continue;
            }
            let inner: usize = dims[axis + 1..].iter().product::<usize>() * stride;
            let outer: usize = dims[..axis].iter().product();
            let fibers = outer * inner;
            let src: &[T] = data;
            let results = exec::try_map_indexed(exec, fibers, |f| {
                let (o, c) = (f / inner, f % inner);
                let base = o * len * inner + c;
                let fiber: Vec<T> = (0..len).map(|i| src[base + i * inner]).collect();
                if forward {
                    self.forward(&fiber)
                } else {
                    self.inverse(&fiber)
                }
            })?;
            for (f, fiber) in results.into_iter().enumerate() {
                let (o, c) = (f / inner, f % inner);
                let base = o * len * inner + c;
                for (i, v) in fiber.into_iter().enumerate() {
                    data[base + i * inner] = v;
                }
            }
        }
        Ok(())
    }
}

#[allow(clippy::excessive_precision, clippy::approx_constant)]
mod tables {
pub(super) const DB1: [f64; 2] = [
    0.707106781186547524401,
    0.707106781186547524401,
];

pub(super) const DB2: [f64; 4] = [
    0.482962913144534143375,
    0.836516303737807905575,
    0.224143868042013381026,
    -0.129409522551260381174,
];

pub(super) const DB3: [f64; 6] = [
    0.332670552950082615999,
    0.806891509311092576494,
    0.459877502118491570095,
    -0.135011020010254588696,
    -0.0854412738820266616928,
    0.0352262918857095366027,
];

pub(super) const DB4: [f64; 8] = [
    0.230377813308896500863,
    0.71484657055291564709,
    0.630880767929858907882,
    -0.0279837694168598542114,
    -0.18703481171909308408,
    0.0308413818355607636272,
    0.0328830116668851997354,
    -0.0105974017850690321049,
];

pub(super) const DB5: [f64; 10] = [
    0.160102397974192914481,
    0.60382926979718967054,
    0.724308528437772927728,
    0.138428145901320731505,
    -0.242294887066382031863,
    -0.0322448695846383746485,
    0.0775714938400457135231,
    -0.00624149021279827427419,
    -0.0125807519990819994685,
    0.003335725285473771278,
];

pub(super) const DB6: [f64; 12] = [
    0.111540743350109463621,
    0.494623890398453085677,
    0.751133908021095350679,
    0.315250351709197629086,
    -0.226264693965439820076,
    -0.129766867567261935562,
    0.0975016055873230491023,
    0.0275228655303057286255,
    -0.0315820393174860295651,
    0.000553842201161496139252,
    0.00477725751094551063964,
    -0.00107730108530847956485,
];

pub(super) const DB7: [f64; 14] = [
    0.07785205408500917902,
    0.396539319481917306539,
    0.729132090846235119917,
    0.469782287405193122472,
    -0.143906003928564975405,
    -0.224036184993874982638,
    0.0713092192668302647509,
    0.0806126091510830719129,
    -0.0380299369350144135796,
    -0.0165745416306668806541,
    0.012550998556099840613,
    0.000429577972921366521132,
    -0.00180164070404749091527,
    0.000353713799974520248446,
];

pub(super) const DB8: [f64; 16] = [
    0.054415842243104009955,
    0.312871590914299970659,
    0.675630736297289806808,
    0.585354683654206712771,
    -0.0158291052563493056674,
    -0.284015542961546926516,
    0.000472484573913282770361,
    0.128747426620478458857,
    -0.0173693010018075461696,
    -0.0440882539307947515068,
    0.0139810279173982816487,
    0.00874609404740577671638,
    -0.00487035299345157431042,
    -0.000391740373376947046298,
    0.00067544940645056936637,
    -0.000117476784124769533731,
];

pub(super) const DB9: [f64; 18] = [
    0.0380779473638783465887,
    0.243834674612590353732,
    0.604823123690111111903,
    0.657288078051300538078,
    0.133197385825007576191,
    -0.293273783279174908806,
    -0.0968407832229764605135,
    0.148540749338106380135,
    0.0307256814793333792123,
    -0.0676328290613299736756,
    0.000250947114831451957587,
    0.0223616621236790972054,
    -0.00472320475775139727793,
    -0.0042815036824634298345,
    0.00184764688305622647662,
    0.000230385763523195967205,
    -0.000251963188942710136975,
    0.0000393473203162715994807,
];

pub(super) const DB10: [f64; 20] = [
    0.0266700579005555535866,
    0.188176800077691489021,
    0.527201188931725586482,
    0.688459039453603565742,
    0.281172343660577460749,
    -0.249846424327315379416,
    -0.195946274377377043504,
    0.127369340335793260083,
    0.0930573646035723511604,
    -0.0713941471663970871453,
    -0.0294575368218758128583,
    0.0332126740593410017398,
    0.00360655356695616965542,
    -0.0107331754833305750443,
    0.00139535174705290116579,
    0.00199240529518505611716,
    -0.000685856694959711626561,
    -0.000116466855129285450951,
    0.0000935886703200695913341,
    -0.0000132642028945212448124,
];
}
use tables::*;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn filter_conditions() {
        for moments in 1..=10 {
            let b = SpatialBasis::new(moments, 3).unwrap();
            let h = b.low_pass();
            assert_abs_diff_eq!(h.iter().sum::<f64>(), 2f64.sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(h.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
            for shift in 1..h.len() / 2 {
                let s: f64 = (0..h.len() - 2 * shift).map(|k| h[k] * h[k + 2 * shift]).sum();
                assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
            }
            // high-pass annihilates polynomials up to degree moments - 1
            for p in 0..moments as i32 {
                let s: f64 = b
                    .high_pass()
                    .iter()
                    .enumerate()
                    .map(|(k, g)| g * (k as f64).powi(p))
                    .sum();
                let scale = (h.len() as f64).powi(p);
                assert!(s.abs() < 1e-9 * scale.max(1.0), "db{moments} moment {p}: {s}");
            }
        }
    }

    #[test]
    fn constant_has_no_details() {
        let b = SpatialBasis::default();
        let c = b.forward(&[2.5; 64]).unwrap();
        for v in &c[8..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        for v in &c[..8] {
            assert_abs_diff_eq!(*v, 2.5 * 8f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        let b = SpatialBasis::default();
        assert!(matches!(b.forward(&[0.0; 12]), Err(Error::Config { .. })));
        assert!(matches!(b.forward(&[0.0; 4]), Err(Error::Config { .. })));
        assert!(SpatialBasis::new(11, 3).is_err());
        assert_eq!(b.forward(&[1.0; 8]).unwrap(), vec![1.0; 8]);
    }

    #[test]
    fn complex_matches_real_parts() {
        let b = SpatialBasis::default();
        let re: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin()).collect();
        let im: Vec<f64> = (0..32).map(|i| (i as f64 * 0.11).cos()).collect();
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let cz = b.forward(&z).unwrap();
        let cr = b.forward(&re).unwrap();
        let ci = b.forward(&im).unwrap();
        for i in 0..32 {
            assert_abs_diff_eq!(cz[i].re, cr[i], epsilon = 1e-14);
            assert_abs_diff_eq!(cz[i].im, ci[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn tensor_on_one_axis_is_plain_forward() {
        let b = SpatialBasis::default();
        let v: Vec<f64> = (0..16).map(|i| (i * i % 7) as f64).collect();
        let mut t = v.clone();
        b.tensor_forward(&mut t, &[16], 1, Execution::Sequential).unwrap();
        assert_eq!(t, b.forward(&v).unwrap());
    }

    #[test]
    fn tensor_with_stride_transforms_each_column() {
        let b = SpatialBasis::default();
        let cols = 3;
        let v: Vec<f64> = (0..16 * cols).map(|i| ((i * 31) % 11) as f64).collect();
        let mut t = v.clone();
        b.tensor_forward(&mut t, &[16], cols, Execution::Parallel).unwrap();
        for c in 0..cols {
            let col: Vec<f64> = (0..16).map(|i| v[i * cols + c]).collect();
            let fc = b.forward(&col).unwrap();
            for i in 0..16 {
                assert_eq!(t[i * cols + c], fc[i]);
            }
        }
        b.tensor_inverse(&mut t, &[16], cols, Execution::Parallel).unwrap();
        for (a, e) in t.iter().zip(&v) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-12);
        }
    }
}
