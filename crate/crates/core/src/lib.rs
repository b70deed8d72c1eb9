//! Functional deconvolution with hyperbolic wavelets.
//!
//! The data are noisy circular convolutions `y(u_l, t_i)` of an unknown
//! periodic function `f(u, t)` with a known kernel `g(u, t)`, one convolution
//! per profile `u_l`. The estimator works in the Fourier domain along `t`
//! (band-limited Meyer wavelets) and with a periodized Daubechies basis along
//! `u`, keeping coefficients that survive a level-dependent hard threshold.

pub mod error;
pub mod estimator;
pub mod exec;
pub mod grid_io;
pub mod meyer;
pub mod rates;
pub mod simlab;
pub mod spatial;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::Execution;
pub use meyer::MeyerBasis;
pub use spatial::SpatialBasis;
pub use spectra::{
    estimate_nu, fourier_coeffs, kernel_spectrum, ConvolutionScale, KernelSpectrum,
    ObservationGrid, ProfileSpectrum,
};
pub use estimator::{deconvolve, EstimatorConfig, HyperCoeffs, Mode, Plan, Reconstruction};
