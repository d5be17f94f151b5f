//! C interface to the diffint library.
//!
//! Objects cross the boundary as opaque heap handles created by
//! `*_new`-style constructors and released with the matching `*_free`.
//! Every fallible call returns a [`DiffintStatus`]; on failure a message is
//! kept per thread and can be read with [`diffint_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diffint::dfs::{decoherence_kernel, effective_density_matrix, probe_in_generator_basis, qfi_exact, DensityMatrix};
use diffint::engine::{build_table, maximize_fisher, FisherCurve, Interferometer, JointFourierTable, MaximizeOptions};
use diffint::error::Error;
use diffint::noise::{NoiseDistribution, NoisePair};
use diffint::noon::noon_fisher_optimal;
use diffint::spin::SpinState;
use diffint::states::{adiabatic_ground_state, coherent_x_state, diabatic_state, noon_state, twin_fock_state, JointState};
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffintStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotNormalized = 3,
    DimensionMismatch = 4,
    Numerical = 5,
    DimensionGuard = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

/// Interferometer selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffintInterferometer {
    MachZehnderY = 0,
    BeamSplitterZ = 1,
}

impl From<DiffintInterferometer> for Interferometer {
    fn from(i: DiffintInterferometer) -> Self {
        match i {
            DiffintInterferometer::MachZehnderY => Interferometer::MachZehnderY,
            DiffintInterferometer::BeamSplitterZ => Interferometer::BeamSplitterZ,
        }
    }
}

/// A normalized single-interferometer probe.
pub struct DiffintState(SpinState);

/// A phase-noise density on [-pi, pi].
pub struct DiffintNoise(NoiseDistribution);

/// Joint outcome table of two probes under a shared total noise.
pub struct DiffintTable(JointFourierTable);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> DiffintStatus {
    match e {
        Error::OddParticleNumber(_) | Error::InvalidArgument(_) => DiffintStatus::InvalidArgument,
        Error::NotNormalized(_) => DiffintStatus::NotNormalized,
        Error::DimensionMismatch(_) => DiffintStatus::DimensionMismatch,
        Error::DimensionGuard { .. } => DiffintStatus::DimensionGuard,
        Error::Io(_) => DiffintStatus::Io,
        Error::Parse(_) => DiffintStatus::Parse,
        _ => DiffintStatus::Numerical,
    }
}

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> DiffintStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DiffintStatus::Ok
        }
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument".into());
            DiffintStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DiffintStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null);
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(value)))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn diffint_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

// ---- probes ----

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_twin_fock(n: usize, out: *mut *mut DiffintState) -> DiffintStatus {
    guard(|| put_handle(out, DiffintState(twin_fock_state(n)?)))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_coherent(n: usize, out: *mut *mut DiffintState) -> DiffintStatus {
    guard(|| put_handle(out, DiffintState(coherent_x_state(n)?)))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_noon(n: usize, out: *mut *mut DiffintState) -> DiffintStatus {
    guard(|| put_handle(out, DiffintState(noon_state(n)?)))
}

/// Ground state of the two-mode Hamiltonian at interaction strength `lambda`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_adiabatic(n: usize, lambda: f64, out: *mut *mut DiffintState) -> DiffintStatus {
    guard(|| put_handle(out, DiffintState(adiabatic_ground_state(n, lambda)?)))
}

/// One-axis-twisted state at dimensionless time `tau`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_diabatic(n: usize, tau: f64, out: *mut *mut DiffintState) -> DiffintStatus {
    guard(|| put_handle(out, DiffintState(diabatic_state(n, tau)?)))
}

/// Probe from N + 1 Jz-basis amplitudes, ascending in eigenvalue. The
/// amplitudes must already be normalized.
///
/// # Safety
/// `re` and `im` must point to `n + 1` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_from_amplitudes(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut DiffintState,
) -> DiffintStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(Failure::Null);
        }
        let d = n.checked_add(1).ok_or(Error::InvalidArgument("N too large".into()))?;
        let re = std::slice::from_raw_parts(re, d);
        let im = std::slice::from_raw_parts(im, d);
        let amps = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        put_handle(out, DiffintState(SpinState::new(n, amps)?))
    })
}

/// # Safety
/// `state` must be null or a handle from a `diffint_state_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_free(state: *mut DiffintState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of particles, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_particles(state: *const DiffintState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_particles())
}

/// Copies the N + 1 amplitudes into `re` and `im`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn diffint_state_amplitudes(
    state: *const DiffintState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> DiffintStatus {
    guard(|| {
        let s = deref(state)?;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null);
        }
        if len < s.0.dim() {
            return Err(Error::DimensionMismatch(format!("buffer of {len} for {} amplitudes", s.0.dim())).into());
        }
        for (i, a) in s.0.amplitudes().iter().enumerate() {
            *re.add(i) = a.re;
            *im.add(i) = a.im;
        }
        Ok(())
    })
}

// ---- noise ----

/// Noise from a token: `delta`, `flat`, a von Mises width, or
/// `multi:M:sigma:seed`.
///
/// # Safety
/// `token` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn diffint_noise_from_token(token: *const c_char, out: *mut *mut DiffintNoise) -> DiffintStatus {
    guard(|| {
        if token.is_null() {
            return Err(Failure::Null);
        }
        let s = CStr::from_ptr(token)
            .to_str()
            .map_err(|_| Error::Parse("token is not UTF-8".into()))?;
        put_handle(out, DiffintNoise(NoiseDistribution::from_token(s)?))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_noise_von_mises(sigma: f64, out: *mut *mut DiffintNoise) -> DiffintStatus {
    guard(|| put_handle(out, DiffintNoise(NoiseDistribution::von_mises(sigma)?)))
}

/// # Safety
/// `noise` must be null or a handle from a `diffint_noise_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn diffint_noise_free(noise: *mut DiffintNoise) {
    if !noise.is_null() {
        drop(Box::from_raw(noise));
    }
}

// ---- joint tables ----

/// Builds the joint outcome table of `probe1` (carrying theta) and
/// `probe2` under a shared total noise; the relative noise is a point mass.
///
/// # Safety
/// All pointers must be valid handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn diffint_table_build(
    probe1: *const DiffintState,
    probe2: *const DiffintState,
    interferometer: DiffintInterferometer,
    noise_total: *const DiffintNoise,
    out: *mut *mut DiffintTable,
) -> DiffintStatus {
    guard(|| {
        let (p1, p2, noise) = (deref(probe1)?, deref(probe2)?, deref(noise_total)?);
        put_handle(out, DiffintTable(build_table(&p1.0, &p2.0, interferometer.into(), &noise.0)?))
    })
}

/// # Safety
/// `table` must be null or a handle from [`diffint_table_build`].
#[no_mangle]
pub unsafe extern "C" fn diffint_table_free(table: *mut DiffintTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// P(mu1, mu2 | theta); outcomes are indexed 0..=N.
///
/// # Safety
/// `table` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_table_probability(
    table: *const DiffintTable,
    mu1: usize,
    mu2: usize,
    theta: f64,
    out: *mut f64,
) -> DiffintStatus {
    guard(|| {
        let t = deref(table)?;
        let (d1, d2) = t.0.outcomes();
        if mu1 >= d1 || mu2 >= d2 {
            return Err(Error::InvalidArgument(format!("outcome ({mu1}, {mu2}) outside {d1} x {d2}")).into());
        }
        put(out, t.0.probability(mu1, mu2, theta))
    })
}

/// Fisher information F(theta).
///
/// # Safety
/// `table` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_table_fisher(table: *const DiffintTable, theta: f64, out: *mut f64) -> DiffintStatus {
    guard(|| {
        let t = deref(table)?;
        put(out, t.0.fisher_at(theta)?)
    })
}

/// Maximizes F over theta in [0, 2 pi) on a `points` grid refined to
/// `tolerance` (fraction of the period).
///
/// # Safety
/// `table` must be a valid handle; `theta` and `fisher` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn diffint_table_maximize(
    table: *const DiffintTable,
    points: usize,
    tolerance: f64,
    theta: *mut f64,
    fisher: *mut f64,
) -> DiffintStatus {
    guard(|| {
        let t = deref(table)?;
        if theta.is_null() || fisher.is_null() {
            return Err(Failure::Null);
        }
        let r = maximize_fisher(&t.0, 2.0 * std::f64::consts::PI, MaximizeOptions { points, tolerance })?;
        put(theta, r.theta)?;
        put(fisher, r.fisher)
    })
}

// ---- closed forms and QFI ----

/// Optimal theta and Fisher information of the NOON pair under the given
/// total and relative noises.
///
/// # Safety
/// Noise handles must be valid; `theta` and `fisher` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn diffint_noon_fisher(
    n: usize,
    noise_total: *const DiffintNoise,
    noise_relative: *const DiffintNoise,
    theta: *mut f64,
    fisher: *mut f64,
) -> DiffintStatus {
    guard(|| {
        let pair = NoisePair::new(deref(noise_total)?.0.clone(), deref(noise_relative)?.0.clone());
        let r = noon_fisher_optimal(n, &pair)?;
        put(theta, r.theta)?;
        put(fisher, r.fisher)
    })
}

/// Quantum Fisher information of the noise-averaged product of two copies
/// of `probe`. Limited to small N.
///
/// # Safety
/// Handles must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diffint_effective_qfi(
    probe: *const DiffintState,
    interferometer: DiffintInterferometer,
    noise_total: *const DiffintNoise,
    noise_relative: *const DiffintNoise,
    out: *mut f64,
) -> DiffintStatus {
    guard(|| {
        let p = deref(probe)?;
        let pair = NoisePair::new(deref(noise_total)?.0.clone(), deref(noise_relative)?.0.clone());
        let g = probe_in_generator_basis(&p.0, interferometer.into())?;
        let rho = DensityMatrix::from_pure(&JointState::product(&g, &g));
        let kernel = decoherence_kernel(&pair, p.0.n_particles(), p.0.n_particles())?;
        put(out, qfi_exact(&effective_density_matrix(&rho, &kernel)?)?)
    })
}
