//! Spectral Fisher-information pipeline for arbitrary probes.
//!
//! Single-interferometer outcome probabilities are trigonometric
//! polynomials of degree N in the phase. [`fourier`] extracts their
//! coefficients, [`kernel`] averages over the shared phase noise and
//! [`joint`] assembles the two-interferometer table. [`fisher`] then
//! evaluates F(theta) and whole curves analytically; [`brute`] is an
//! independent quadrature oracle and [`pure`] covers noiseless probes.

pub mod brute;
pub mod cache;
pub mod fisher;
pub mod fourier;
pub mod joint;
pub mod kernel;
pub mod maximize;
pub mod powerlaw;
pub mod pure;

pub use brute::{bruteforce_joint_probability, fisher_bruteforce, fisher_bruteforce_pair};
pub use cache::{load_or_build, CacheKey};
pub use fisher::{fisher_curve, fisher_from_fourier};
pub use fourier::{single_probability_fourier, single_probability_fourier_with, ConditionalProbabilityFourier, Interferometer};
pub use joint::{joint_fourier, JointFourierTable};
pub use kernel::{noise_kernel, KernelPart, NoiseKernelMatrices};
pub use maximize::{grid_points, maximize_fisher, FisherCurve, MaximizeOptions};
pub use powerlaw::{fit_power_law, PowerLawFit};
pub use pure::PureProbeFisher;

pub use crate::optimize::FisherResult;

use crate::error::Result;
use crate::noise::NoiseDistribution;
use crate::spin::SpinState;

/// Builds the joint table of two probes under a total phase noise.
pub fn build_table(
    probe1: &SpinState,
    probe2: &SpinState,
    interferometer: Interferometer,
    noise_total: &NoiseDistribution,
) -> Result<JointFourierTable> {
    let f1 = single_probability_fourier(probe1, interferometer)?;
    let f2 = if probe2 == probe1 {
        f1.clone()
    } else {
        single_probability_fourier(probe2, interferometer)?
    };
    let kernel = noise_kernel(noise_total, probe1.n_particles())?;
    joint_fourier(&f1, &f2, &kernel)
}
