//! Phase-estimation sensitivity of differential two-interferometer schemes.
//!
//! Two interferometers share a common random phase; the signal phase enters
//! only the first one. The crate computes the classical Fisher information of
//! number measurements and the quantum Fisher information of the effective
//! (noise-averaged) state for collective-spin probes of `N` particles:
//!
//! * [`spin`]: Jz-basis conventions, rotations and diagonal evolutions.
//! * [`states`]: NOON, coherent, twin-Fock, adiabatic and twisted probes.
//! * [`noise`]: phase-noise densities and their trigonometric moments.
//! * [`noon`]: closed-form results for product-NOON probes.
//! * [`engine`]: the spectral Fisher pipeline for arbitrary probes.
//! * [`dfs`]: effective density matrices, fixed-M blocks and QFI.
//! * [`experiment`]: sweeps behind the `diffint` command-line tool.

pub mod dfs;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod noon;
pub mod optimize;
pub mod quadrature;
pub mod special;
pub mod spin;
pub mod states;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64;
