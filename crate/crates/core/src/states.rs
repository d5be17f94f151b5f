//! Probe-state constructors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_even, Error, Result};
use crate::optimize::grid_then_golden;
use crate::special::binomial_weights;
use crate::spin::{Axis, SpinOperators, SpinState};
use crate::tridiag::SymTridiagonal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// (|N/2> + |-N/2>) / sqrt(2).
pub fn noon_state(n: usize) -> Result<SpinState> {
    check_even(n)?;
    let mut amps = vec![ZERO; n + 1];
    amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[n] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    SpinState::new(n, amps)
}

/// Spin coherent state along +x.
pub fn coherent_x_state(n: usize) -> Result<SpinState> {
    check_even(n)?;
    let amps = binomial_weights(n)
        .into_iter()
        .map(|w| Complex64::new(w.sqrt(), 0.0))
        .collect();
    SpinState::normalized(n, amps)
}

/// |0>_z.
pub fn twin_fock_state(n: usize) -> Result<SpinState> {
    SpinState::basis(n, 0)
}

/// Ground state of (Lambda/N) Jz^2 - Jx.
///
/// The Hamiltonian commutes with the parity n -> -n and has nonpositive
/// off-diagonal entries, so the ground state is unique, even and can be taken
/// with positive amplitudes. It is solved in the even sector spanned by |0>
/// and (|k> + |-k>)/sqrt(2), k = 1..N/2.
pub fn adiabatic_ground_state(n: usize, lambda: f64) -> Result<SpinState> {
    check_even(n)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("Lambda must be finite and >= 0, got {lambda}")));
    }
    let half = n / 2;
    let j = half as f64;
    let t = |k: usize| 0.5 * (j * (j + 1.0) - (k * (k + 1)) as f64).sqrt();
    let diag: Vec<f64> = (0..=half).map(|k| lambda / n as f64 * (k * k) as f64).collect();
    let off: Vec<f64> = (0..half)
        .map(|k| if k == 0 { -2f64.sqrt() * t(0) } else { -t(k) })
        .collect();
    let h = SymTridiagonal::new(diag, off)?;
    let (_, v) = h.lowest_eigenpair()?;
    let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
    let mut amps = vec![ZERO; n + 1];
    amps[half] = Complex64::new(sign * v[0], 0.0);
    for k in 1..=half {
        let a = Complex64::new(sign * v[k] * FRAC_1_SQRT_2, 0.0);
        amps[half + k] = a;
        amps[half - k] = a;
    }
    SpinState::normalized(n, amps)
}

/// Preparation knobs for the Josephson-Hamiltonian probes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PreparationConfig {
    pub lambda: f64,
    pub tau: f64,
    pub delta: f64,
    pub rotation_axis: Axis,
}

impl Default for PreparationConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            tau: 0.0,
            delta: 0.0,
            rotation_axis: Axis::X,
        }
    }
}

impl PreparationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("Lambda must be >= 0, got {}", self.lambda)));
        }
        check_tau(self.tau)?;
        if !self.delta.is_finite() {
            return Err(Error::InvalidArgument("delta must be finite".into()));
        }
        Ok(())
    }

    /// e^{i delta J_axis} e^{-i tau Jz^2} |N/2>_x with the stored delta.
    pub fn twisted_state(&self, n: usize) -> Result<SpinState> {
        self.validate()?;
        twisted_state(n, self.tau, self.delta, self.rotation_axis)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=PI).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau must lie in [0, pi], got {tau}")));
    }
    Ok(())
}

/// e^{i delta J_axis} e^{-i tau Jz^2} |N/2>_x for explicit delta.
pub fn twisted_state(n: usize, tau: f64, delta: f64, axis: Axis) -> Result<SpinState> {
    let ops = SpinOperators::new(n)?;
    let twisted = coherent_x_state(n)?.apply_one_axis_twist(tau);
    ops.rotate(&twisted, axis, -delta)
}

/// Which axes the diabatic rotation may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisChoice {
    X,
    Y,
    Z,
    /// Optimize about x and about z, keep the better one.
    Best,
}

impl std::str::FromStr for AxisChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "best" => Ok(AxisChoice::Best),
            other => Ok(match other.parse::<Axis>()? {
                Axis::X => AxisChoice::X,
                Axis::Y => AxisChoice::Y,
                Axis::Z => AxisChoice::Z,
            }),
        }
    }
}

/// Search settings for the diabatic rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiabaticOptions {
    pub axis: AxisChoice,
    pub grid_points: usize,
    pub tolerance: f64,
    pub theta_points: usize,
}

impl Default for DiabaticOptions {
    fn default() -> Self {
        Self {
            axis: AxisChoice::Best,
            grid_points: 720,
            tolerance: 1e-6,
            theta_points: 512,
        }
    }
}

/// A diabatic probe together with the chosen rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiabaticState {
    pub state: SpinState,
    pub tau: f64,
    pub delta: f64,
    pub axis: Axis,
    /// Noiseless single-interferometer FI reached at the chosen delta.
    pub fisher: f64,
}

/// Twisted coherent state rotated to maximize the noiseless FI, default options.
pub fn diabatic_state(n: usize, tau: f64) -> Result<SpinState> {
    Ok(diabatic_state_with(n, tau, &DiabaticOptions::default())?.state)
}

pub fn diabatic_state_with(n: usize, tau: f64, opts: &DiabaticOptions) -> Result<DiabaticState> {
    check_even(n)?;
    check_tau(tau)?;
    if opts.grid_points < 2 || opts.theta_points < 4 || !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("diabatic search needs >= 2 grid points and tolerance > 0".into()));
    }
    let ops = Arc::new(SpinOperators::new(n)?);
    let twisted = coherent_x_state(n)?.apply_one_axis_twist(tau);
    let scan = NoiselessScan::new(ops.clone(), opts.theta_points);
    let axes: &[Axis] = match opts.axis {
        AxisChoice::X => &[Axis::X],
        AxisChoice::Y => &[Axis::Y],
        AxisChoice::Z => &[Axis::Z],
        AxisChoice::Best => &[Axis::X, Axis::Z],
    };
    let mut best: Option<(f64, f64, Axis)> = None;
    for &axis in axes {
        let rotor = DeltaRotor::new(&ops, axis, twisted.amplitudes());
        let (delta, fisher, _) = grid_then_golden(
            |d| Ok(scan.max_fisher_from_y(&rotor.y_coordinates(d))),
            0.0,
            PI,
            opts.grid_points,
            opts.tolerance,
        )?;
        if best.map_or(true, |b| fisher > b.1 + 1e-9 * fisher.abs().max(1.0)) {
            best = Some((delta, fisher, axis));
        }
    }
    let (delta, fisher, axis) = best.expect("at least one axis");
    let state = ops.rotate(&twisted, axis, -delta)?;
    Ok(DiabaticState {
        state,
        tau,
        delta,
        axis,
        fisher,
    })
}

// Produces W_y^dagger e^{i delta J_axis} psi in O(N^2) per delta.
struct DeltaRotor {
    d: usize,
    /// Starting vector in the axis eigenbasis (x, y) or Jz basis (z).
    start: Vec<Complex64>,
    /// Maps the starting coordinates (after phases) to Jy-eigenbasis coordinates.
    map: Vec<Complex64>,
    half: i64,
}

impl DeltaRotor {
    fn new(ops: &SpinOperators, axis: Axis, psi: &[Complex64]) -> Self {
        let d = ops.dim();
        let start = ops.to_eigenbasis(axis, psi);
        // map = W_y^dagger W_axis, column by column.
        let mut map = vec![ZERO; d * d];
        let mut e = vec![ZERO; d];
        for col in 0..d {
            e.iter_mut().for_each(|x| *x = ZERO);
            e[col] = Complex64::new(1.0, 0.0);
            let v = ops.from_eigenbasis(axis, &e);
            let y = ops.to_eigenbasis(Axis::Y, &v);
            for (row, val) in y.into_iter().enumerate() {
                map[row * d + col] = val;
            }
        }
        Self {
            d,
            start,
            map,
            half: (d / 2) as i64,
        }
    }

    fn y_coordinates(&self, delta: f64) -> Vec<Complex64> {
        let phased: Vec<Complex64> = self
            .start
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, delta * (k as i64 - self.half) as f64))
            .collect();
        (0..self.d)
            .map(|r| {
                self.map[r * self.d..(r + 1) * self.d]
                    .iter()
                    .zip(&phased)
                    .map(|(m, p)| m * p)
                    .sum()
            })
            .collect()
    }
}

/// Noiseless FI of a single y-rotation interferometer on a uniform theta grid.
///
/// For coordinates c = W_y^dagger psi the outcome amplitudes are
/// sum_m V[mu, m] c_m e^{-i theta m} up to a phase per outcome, which a
/// folded FFT evaluates on the whole grid at once.
pub(crate) struct NoiselessScan {
    ops: Arc<SpinOperators>,
    fft: Arc<dyn Fft<f64>>,
    points: usize,
}

impl NoiselessScan {
    pub(crate) fn new(ops: Arc<SpinOperators>, points: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(points);
        Self { ops, fft, points }
    }

    /// FI(theta_j) for theta_j = 2 pi j / points.
    pub(crate) fn curve_from_y(&self, c: &[Complex64]) -> Vec<f64> {
        let d = self.ops.dim();
        let half = (d / 2) as i64;
        let m_pts = self.points;
        let mut fisher = vec![0.0; m_pts];
        let mut amp = vec![ZERO; m_pts];
        let mut deriv = vec![ZERO; m_pts];
        let mut scratch = vec![ZERO; self.fft.get_inplace_scratch_len()];
        for mu in 0..d {
            amp.iter_mut().for_each(|x| *x = ZERO);
            deriv.iter_mut().for_each(|x| *x = ZERO);
            let mut any = false;
            for (k, ck) in c.iter().enumerate() {
                let v = self.ops.eigenbasis_entry(Axis::X, mu, k).re;
                if v == 0.0 || *ck == ZERO {
                    continue;
                }
                any = true;
                let m = k as i64 - half;
                let slot = m.rem_euclid(m_pts as i64) as usize;
                let g = ck * v;
                amp[slot] += g;
                deriv[slot] += g * Complex64::new(0.0, -(m as f64));
            }
            if !any {
                continue;
            }
            self.fft.process_with_scratch(&mut amp, &mut scratch);
            self.fft.process_with_scratch(&mut deriv, &mut scratch);
            for j in 0..m_pts {
                let p = amp[j].norm_sqr();
                let dp = 2.0 * (amp[j].conj() * deriv[j]).re;
                fisher[j] += if p > 1e-14 {
                    dp * dp / p
                } else {
                    // Double zero: P'^2/P -> 2 P'' = 4 |amp'|^2.
                    4.0 * deriv[j].norm_sqr()
                };
            }
        }
        fisher
    }

    pub(crate) fn max_fisher_from_y(&self, c: &[Complex64]) -> f64 {
        self.curve_from_y(c).into_iter().fold(0.0, f64::max)
    }
}

/// Pure state with amplitudes drawn uniformly from the unit square, then
/// normalized. Deterministic in `seed`.
pub fn random_state(n: usize, seed: u64) -> Result<SpinState> {
    use rand::{Rng, SeedableRng};
    check_even(n)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..=n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpinState::normalized(n, amps)
}

/// Two-interferometer pure state over (n1, n2).
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub n1: usize,
    pub n2: usize,
    /// Row-major over (n1 index, n2 index).
    pub amplitudes: Vec<Complex64>,
}

impl JointState {
    pub fn new(n1: usize, n2: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_even(n1)?;
        check_even(n2)?;
        if amplitudes.len() != (n1 + 1) * (n2 + 1) {
            return Err(Error::DimensionMismatch(format!(
                "joint state needs {} amplitudes, got {}",
                (n1 + 1) * (n2 + 1),
                amplitudes.len()
            )));
        }
        let norm = crate::spin::norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n1, n2, amplitudes })
    }

    pub fn product(a: &SpinState, b: &SpinState) -> Self {
        let amplitudes = a
            .amplitudes()
            .iter()
            .flat_map(|x| b.amplitudes().iter().map(move |y| x * y))
            .collect();
        Self {
            n1: a.n_particles(),
            n2: b.n_particles(),
            amplitudes,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitude of |n1, n2>.
    pub fn amplitude(&self, n1: i64, n2: i64) -> Complex64 {
        let i1 = (n1 + (self.n1 / 2) as i64) as usize;
        let i2 = (n2 + (self.n2 / 2) as i64) as usize;
        self.amplitudes[i1 * (self.n2 + 1) + i2]
    }
}

/// Which common phase the optimal joint state is immune to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntangledVariant {
    /// Relative noise is a point mass: state lives in n1 + n2 = 0.
    RelativeDelta,
    /// Total noise is a point mass: state lives in n1 - n2 = 0.
    TotalDelta,
}

pub fn optimal_entangled_state(n: usize, variant: EntangledVariant) -> Result<JointState> {
    check_even(n)?;
    let d = n + 1;
    let mut amps = vec![ZERO; d * d];
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match variant {
        EntangledVariant::RelativeDelta => {
            amps[n * d] = s;
            amps[n] = s;
        }
        EntangledVariant::TotalDelta => {
            amps[n * d + n] = s;
            amps[0] = s;
        }
    }
    JointState::new(n, n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::spin_matrix;
    use nalgebra::DMatrix;

    fn re(v: &SpinState) -> Vec<f64> {
        v.amplitudes().iter().map(|a| a.re).collect()
    }

    #[test]
    fn noon_basics() {
        let s = noon_state(2).unwrap();
        assert_eq!(re(&s), vec![FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
        let s = noon_state(10).unwrap();
        assert!((s.jz_moment(2) - 25.0).abs() < 1e-12);
        assert!(noon_state(3).is_err());
    }

    #[test]
    fn coherent_state_is_rotated_top_state() {
        let s = coherent_x_state(2).unwrap();
        let want = [0.5, FRAC_1_SQRT_2, 0.5];
        for (a, b) in re(&s).iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let ops = SpinOperators::new(12).unwrap();
        let rotated = ops.rotate(&SpinState::basis(12, 6).unwrap(), Axis::Y, PI / 2.0).unwrap();
        assert!((rotated.fidelity(&coherent_x_state(12).unwrap()) - 1.0).abs() < 1e-12);
        let jx = spin_matrix(12, Axis::X).unwrap();
        assert!((coherent_x_state(12).unwrap().expectation(&jx).re - 6.0).abs() < 1e-10);
    }

    #[test]
    fn twin_fock_is_middle_basis_vector() {
        let s = twin_fock_state(4).unwrap();
        assert_eq!(re(&s), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.jz_moment(1), 0.0);
    }

    #[test]
    fn ground_state_limits() {
        for n in [2, 10, 100] {
            let g = adiabatic_ground_state(n, 0.0).unwrap();
            let c = coherent_x_state(n).unwrap();
            for (a, b) in g.amplitudes().iter().zip(c.amplitudes()) {
                assert!((a - b).norm() < 1e-8);
            }
            let fock = adiabatic_ground_state(n, 1e6 * (n * n) as f64).unwrap();
            assert!(fock.fidelity(&twin_fock_state(n).unwrap()) > 1.0 - 1e-6);
        }
    }

    #[test]
    fn ground_state_matches_dense_eigensolver() {
        let n = 2;
        let lambda = 2.0;
        let jx = spin_matrix(n, Axis::X).unwrap();
        let h = DMatrix::from_fn(3, 3, |r, c| {
            let z = if r == c { lambda / n as f64 * ((r as f64 - 1.0).powi(2)) } else { 0.0 };
            z - jx[r * 3 + c].re
        });
        let eig = h.symmetric_eigen();
        let k = (0..3)
            .min_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
            .unwrap();
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if v[1] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let g = adiabatic_ground_state(n, lambda).unwrap();
        for (a, b) in re(&g).iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_is_even_real_and_continuous() {
        let n = 40;
        for lambda in [0.3, 4.0, 40.0, 4000.0] {
            let g = adiabatic_ground_state(n, lambda).unwrap();
            for k in 0..=n / 2 {
                let a = g.amplitude(k as i64);
                let b = g.amplitude(-(k as i64));
                assert!((a - b).norm() < 1e-10 && a.im == 0.0);
            }
            let h = adiabatic_ground_state(n, lambda * (1.0 + 1e-6)).unwrap();
            assert!(g.fidelity(&h) > 1.0 - 1e-6);
        }
        assert!(adiabatic_ground_state(4, -1.0).is_err());
    }

    #[test]
    fn twisted_state_is_composition_of_primitives() {
        let n = 4;
        let tau = 0.3;
        let delta = 0.77;
        let s = twisted_state(n, tau, delta, Axis::X).unwrap();
        // Oracle: binomial amplitudes, elementwise phases, dense rotation.
        let w = binomial_weights(n);
        let amps: Vec<Complex64> = (0..=n)
            .map(|i| {
                let m = i as f64 - 2.0;
                Complex64::from_polar(w[i].sqrt(), -tau * m * m)
            })
            .collect();
        let r = crate::spin::rotation(n, Axis::X, -delta).unwrap();
        let want = r.apply(&SpinState::new(n, amps).unwrap()).unwrap();
        assert!((s.fidelity(&want) - 1.0).abs() < 1e-13);
        for (a, b) in s.amplitudes().iter().zip(want.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn noiseless_scan_reference_values() {
        let n = 20;
        let ops = Arc::new(SpinOperators::new(n).unwrap());
        let scan = NoiselessScan::new(ops.clone(), 256);
        let fock = ops.to_eigenbasis(Axis::Y, twin_fock_state(n).unwrap().amplitudes());
        let curve = scan.curve_from_y(&fock);
        assert!((curve[0] - (n * n / 2 + n) as f64).abs() < 1e-8);
        let coh = ops.to_eigenbasis(Axis::Y, coherent_x_state(n).unwrap().amplitudes());
        for f in scan.curve_from_y(&coh) {
            assert!((f - n as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn diabatic_dominates_unrotated() {
        let n = 10;
        let opts = DiabaticOptions {
            grid_points: 90,
            ..Default::default()
        };
        let d = diabatic_state_with(n, 0.0, &opts).unwrap();
        assert!((d.fisher - n as f64).abs() < 1e-8);
        let d = diabatic_state_with(n, 0.25, &opts).unwrap();
        let ops = Arc::new(SpinOperators::new(n).unwrap());
        let scan = NoiselessScan::new(ops.clone(), opts.theta_points);
        let unrotated = coherent_x_state(n).unwrap().apply_one_axis_twist(0.25);
        let f0 = scan.max_fisher_from_y(&ops.to_eigenbasis(Axis::Y, unrotated.amplitudes()));
        assert!(d.fisher >= f0 - 1e-9);
        assert!((d.state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_pi_twist_gives_cat() {
        let n = 20;
        let opts = DiabaticOptions {
            grid_points: 180,
            ..Default::default()
        };
        let d = diabatic_state_with(n, PI / 2.0, &opts).unwrap();
        assert!((d.fisher - (n * n) as f64).abs() < 1e-6 * (n * n) as f64, "F = {}", d.fisher);
        assert_eq!(d.axis, Axis::Z);
    }

    #[test]
    fn optimal_entangled_states() {
        let s = optimal_entangled_state(4, EntangledVariant::RelativeDelta).unwrap();
        assert!((s.amplitude(2, -2).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(-2, 2).re - FRAC_1_SQRT_2).abs() < 1e-15);
        let t = optimal_entangled_state(4, EntangledVariant::TotalDelta).unwrap();
        assert!((t.amplitude(2, 2).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.amplitude(-2, -2).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(optimal_entangled_state(5, EntangledVariant::TotalDelta).is_err());
    }
}
