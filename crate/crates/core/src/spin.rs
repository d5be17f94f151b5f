//! Collective-spin linear algebra for N-particle two-mode states.
//!
//! Everything is expressed in the Jz eigenbasis ordered by ascending
//! eigenvalue, n = -N/2, ..., N/2; index `i` holds `n = i - N/2`. Rotations
//! about x and y go through the eigenvectors of the real symmetric
//! tridiagonal Jx matrix, whose eigenvalues are exactly the integers
//! -N/2..N/2. Jy shares those eigenvectors up to the diagonal phase
//! e^{-i pi Jz / 2}.

use num_complex::Complex64;

use crate::error::{check_even, Error, Result};
use crate::tridiag::SymTridiagonal;

const NORM_TOL: f64 = 1e-12;
const FLUSH: f64 = 1e-300;

/// Rotation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis '{other}'"))),
        }
    }
}

/// Pure state of N particles in the Jz eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    n_particles: usize,
    amplitudes: Vec<Complex64>,
}

impl SpinState {
    /// Wraps unit-norm amplitudes; rejects odd N, wrong length or norm.
    pub fn new(n_particles: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_even(n_particles)?;
        if amplitudes.len() != n_particles + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes for N = {n_particles}, got {}",
                n_particles + 1,
                amplitudes.len()
            )));
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            n_particles,
            amplitudes,
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_particles: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        for a in amplitudes.iter_mut() {
            *a *= scale;
        }
        Self::new(n_particles, amplitudes)
    }

    /// The Jz eigenstate |n>.
    pub fn basis(n_particles: usize, n: i64) -> Result<Self> {
        check_even(n_particles)?;
        let j = (n_particles / 2) as i64;
        if n.abs() > j {
            return Err(Error::InvalidArgument(format!("|{n}| exceeds N/2 = {j}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n_particles + 1];
        amps[(n + j) as usize] = Complex64::new(1.0, 0.0);
        Self::new(n_particles, amps)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Amplitude of |n>, n in -N/2..=N/2.
    pub fn amplitude(&self, n: i64) -> Complex64 {
        self.amplitudes[(n + self.half()) as usize]
    }

    fn half(&self) -> i64 {
        (self.n_particles / 2) as i64
    }

    /// Eigenvalue n of the basis vector at `index`.
    pub fn eigenvalue_at(&self, index: usize) -> i64 {
        index as i64 - self.half()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn inner(&self, other: &SpinState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &SpinState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// <Jz^p> for p = 1, 2.
    pub fn jz_moment(&self, power: i32) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * (self.eigenvalue_at(i) as f64).powi(power))
            .sum()
    }

    /// <psi| J |psi> for a dense operator given row-major.
    pub fn expectation(&self, op: &[Complex64]) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            let row: Complex64 = (0..d).map(|c| op[r * d + c] * self.amplitudes[c]).sum();
            acc += self.amplitudes[r].conj() * row;
        }
        acc
    }

    /// Multiplies the amplitude of |n> by e^{-i phi n}.
    pub fn apply_phase_z(&self, phi: f64) -> SpinState {
        self.map_diagonal(|n| -phi * n as f64)
    }

    /// One-axis twisting e^{-i tau Jz^2}.
    pub fn apply_one_axis_twist(&self, tau: f64) -> SpinState {
        self.map_diagonal(|n| -tau * (n * n) as f64)
    }

    fn map_diagonal<F: Fn(i64) -> f64>(&self, phase: F) -> SpinState {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::from_polar(1.0, phase(self.eigenvalue_at(i))))
            .collect();
        SpinState {
            n_particles: self.n_particles,
            amplitudes,
        }
    }
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Dense e^{-i angle J_axis} in the Jz basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    pub n_particles: usize,
    pub axis: Axis,
    pub angle: f64,
    /// Row-major (N+1) x (N+1) entries.
    pub entries: Vec<Complex64>,
}

impl RotationMatrix {
    pub fn dim(&self) -> usize {
        self.n_particles + 1
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn apply(&self, state: &SpinState) -> Result<SpinState> {
        if state.n_particles() != self.n_particles {
            return Err(Error::DimensionMismatch("rotation and state sizes differ".into()));
        }
        let d = self.dim();
        let amps = (0..d)
            .map(|r| (0..d).map(|c| self.get(r, c) * state.amplitudes()[c]).sum())
            .collect();
        Ok(SpinState {
            n_particles: self.n_particles,
            amplitudes: amps,
        })
    }

    /// Matrix product self * other.
    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        let d = self.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.get(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * other.get(k, c);
                }
            }
        }
        RotationMatrix {
            n_particles: self.n_particles,
            axis: self.axis,
            angle: self.angle + other.angle,
            entries,
        }
    }
}

/// Eigen-decomposition of the collective spin operators for one N.
///
/// Building it costs O(N^2); every rotation applied to a vector afterwards is
/// O(N^2) as well. The instance is immutable and can be shared across threads.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    n_particles: usize,
    /// Row-major (N+1)^2 real eigenvectors of Jx; column `k` belongs to the
    /// eigenvalue m = k - N/2.
    jx_vectors: Vec<f64>,
}

impl SpinOperators {
    pub fn new(n_particles: usize) -> Result<Self> {
        check_even(n_particles)?;
        let d = n_particles + 1;
        let j = n_particles as f64 / 2.0;
        let off: Vec<f64> = (0..n_particles)
            .map(|i| {
                let n = i as f64 - j;
                0.5 * (j * (j + 1.0) - n * (n + 1.0)).sqrt()
            })
            .collect();
        let jx = SymTridiagonal::new(vec![0.0; d], off)?;
        let mut jx_vectors = vec![0.0; d * d];
        for k in 0..d {
            let m = k as f64 - j;
            let v = jx.eigenvector(m)?;
            for (i, x) in v.into_iter().enumerate() {
                jx_vectors[i * d + k] = if x.abs() < FLUSH { 0.0 } else { x };
            }
        }
        Ok(Self {
            n_particles,
            jx_vectors,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.n_particles + 1
    }

    fn half(&self) -> i64 {
        (self.n_particles / 2) as i64
    }

    /// Entry (row, col) of the unitary whose columns are the eigenvectors of
    /// J_axis, ordered by ascending eigenvalue.
    pub fn eigenbasis_entry(&self, axis: Axis, row: usize, col: usize) -> Complex64 {
        let d = self.dim();
        match axis {
            Axis::Z => {
                if row == col {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Axis::X => Complex64::new(self.jx_vectors[row * d + col], 0.0),
            Axis::Y => self.z_quarter_phase(row) * self.jx_vectors[row * d + col],
        }
    }

    // e^{-i pi n / 2} for the basis index `row`.
    fn z_quarter_phase(&self, row: usize) -> Complex64 {
        let n = row as i64 - self.half();
        match n.rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    }

    /// Dense eigenbasis matrix of J_axis (row-major).
    pub fn eigenbasis(&self, axis: Axis) -> Vec<Complex64> {
        let d = self.dim();
        let mut w = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                w[r * d + c] = self.eigenbasis_entry(axis, r, c);
            }
        }
        w
    }

    /// Coordinates of `v` in the J_axis eigenbasis, W^dagger v.
    pub fn to_eigenbasis(&self, axis: Axis, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        match axis {
            Axis::Z => v.to_vec(),
            Axis::X | Axis::Y => {
                let u: Vec<Complex64> = if axis == Axis::Y {
                    v.iter()
                        .enumerate()
                        .map(|(i, a)| self.z_quarter_phase(i).conj() * a)
                        .collect()
                } else {
                    v.to_vec()
                };
                let mut out = vec![Complex64::new(0.0, 0.0); d];
                for (i, ui) in u.iter().enumerate() {
                    if *ui == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let row = &self.jx_vectors[i * d..(i + 1) * d];
                    for (o, x) in out.iter_mut().zip(row) {
                        *o += ui * x;
                    }
                }
                out
            }
        }
    }

    /// Inverse of [`Self::to_eigenbasis`], W c.
    pub fn from_eigenbasis(&self, axis: Axis, c: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        match axis {
            Axis::Z => c.to_vec(),
            Axis::X | Axis::Y => (0..d)
                .map(|i| {
                    let row = &self.jx_vectors[i * d..(i + 1) * d];
                    let s: Complex64 = row.iter().zip(c).map(|(x, a)| a * x).sum();
                    if axis == Axis::Y {
                        self.z_quarter_phase(i) * s
                    } else {
                        s
                    }
                })
                .collect(),
        }
    }

    /// e^{-i angle J_axis} applied to a vector, O(N^2).
    pub fn rotate_vec(&self, axis: Axis, angle: f64, v: &[Complex64]) -> Vec<Complex64> {
        let half = self.half();
        match axis {
            Axis::Z => v
                .iter()
                .enumerate()
                .map(|(i, a)| a * Complex64::from_polar(1.0, -angle * (i as i64 - half) as f64))
                .collect(),
            Axis::X | Axis::Y => {
                let mut c = self.to_eigenbasis(axis, v);
                for (k, ck) in c.iter_mut().enumerate() {
                    *ck *= Complex64::from_polar(1.0, -angle * (k as i64 - half) as f64);
                }
                self.from_eigenbasis(axis, &c)
            }
        }
    }

    pub fn rotate(&self, state: &SpinState, axis: Axis, angle: f64) -> Result<SpinState> {
        if state.n_particles() != self.n_particles {
            return Err(Error::DimensionMismatch("operator and state sizes differ".into()));
        }
        Ok(SpinState {
            n_particles: self.n_particles,
            amplitudes: self.rotate_vec(axis, angle, state.amplitudes()),
        })
    }

    /// Dense rotation matrix, O(N^3).
    pub fn rotation(&self, axis: Axis, angle: f64) -> RotationMatrix {
        let d = self.dim();
        let half = self.half();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        match axis {
            Axis::Z => {
                for i in 0..d {
                    entries[i * d + i] = Complex64::from_polar(1.0, -angle * (i as i64 - half) as f64);
                }
            }
            Axis::X | Axis::Y => {
                let phases: Vec<Complex64> = (0..d)
                    .map(|k| Complex64::from_polar(1.0, -angle * (k as i64 - half) as f64))
                    .collect();
                for r in 0..d {
                    let vr = &self.jx_vectors[r * d..(r + 1) * d];
                    let weighted: Vec<Complex64> = vr.iter().zip(&phases).map(|(x, p)| p * x).collect();
                    for c in 0..d {
                        let vc = &self.jx_vectors[c * d..(c + 1) * d];
                        let mut s: Complex64 = weighted.iter().zip(vc).map(|(w, x)| w * x).sum();
                        if axis == Axis::Y {
                            s *= self.z_quarter_phase(r) * self.z_quarter_phase(c).conj();
                        }
                        if s.norm_sqr() < FLUSH * FLUSH {
                            s = Complex64::new(0.0, 0.0);
                        }
                        entries[r * d + c] = s;
                    }
                }
            }
        }
        RotationMatrix {
            n_particles: self.n_particles,
            axis,
            angle,
            entries,
        }
    }
}

/// Dense e^{-i angle J_axis} for an even particle number.
pub fn rotation(n_particles: usize, axis: Axis, angle: f64) -> Result<RotationMatrix> {
    if !angle.is_finite() {
        return Err(Error::InvalidArgument("rotation angle must be finite".into()));
    }
    Ok(SpinOperators::new(n_particles)?.rotation(axis, angle))
}

/// Explicit row-major matrix of J_axis in the Jz basis.
pub fn spin_matrix(n_particles: usize, axis: Axis) -> Result<Vec<Complex64>> {
    check_even(n_particles)?;
    let d = n_particles + 1;
    let j = n_particles as f64 / 2.0;
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        let n = i as f64 - j;
        match axis {
            Axis::Z => m[i * d + i] = Complex64::new(n, 0.0),
            Axis::X | Axis::Y => {
                if i + 1 < d {
                    // <n+1| J+ |n>
                    let c = (j * (j + 1.0) - n * (n + 1.0)).sqrt();
                    let (up, down) = if axis == Axis::X {
                        (Complex64::new(0.5 * c, 0.0), Complex64::new(0.5 * c, 0.0))
                    } else {
                        (Complex64::new(0.0, -0.5 * c), Complex64::new(0.0, 0.5 * c))
                    };
                    m[(i + 1) * d + i] = up;
                    m[i * d + i + 1] = down;
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    // Taylor-series matrix exponential with scaling and squaring, used as an
    // independent oracle for e^{-i angle J}.
    fn expm_oracle(gen: &[Complex64], d: usize, angle: f64) -> Vec<Complex64> {
        let squarings = 10;
        let scale = angle / (1u64 << squarings) as f64;
        let a: Vec<Complex64> = gen.iter().map(|g| g * Complex64::new(0.0, -scale)).collect();
        let mut result = vec![Complex64::new(0.0, 0.0); d * d];
        let mut term = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            result[i * d + i] = c(1.0);
            term[i * d + i] = c(1.0);
        }
        let mul = |x: &[Complex64], y: &[Complex64]| {
            let mut z = vec![Complex64::new(0.0, 0.0); d * d];
            for r in 0..d {
                for k in 0..d {
                    for col in 0..d {
                        z[r * d + col] += x[r * d + k] * y[k * d + col];
                    }
                }
            }
            z
        };
        for k in 1..30 {
            term = mul(&term, &a).into_iter().map(|t| t / k as f64).collect();
            for (r, t) in result.iter_mut().zip(&term) {
                *r += t;
            }
        }
        for _ in 0..squarings {
            result = mul(&result, &result);
        }
        result
    }

    #[test]
    fn rejects_odd_particle_numbers() {
        assert!(matches!(rotation(3, Axis::X, 0.1), Err(Error::OddParticleNumber(3))));
        assert!(SpinOperators::new(0).is_err());
        assert!(SpinState::new(5, vec![c(1.0); 6]).is_err());
    }

    #[test]
    fn zero_angle_is_identity() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let r = rotation(6, axis, 0.0).unwrap();
            for i in 0..7 {
                for j in 0..7 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((r.get(i, j) - c(want)).norm() < 1e-14, "{axis:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn y_rotation_matches_matrix_exponential() {
        let jy = spin_matrix(2, Axis::Y).unwrap();
        let want = expm_oracle(&jy, 3, PI / 2.0);
        let got = rotation(2, Axis::Y, PI / 2.0).unwrap();
        for (g, w) in got.entries.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
        // The same check on a larger system and the other axes.
        for axis in [Axis::X, Axis::Y] {
            let gen = spin_matrix(8, axis).unwrap();
            let want = expm_oracle(&gen, 9, 0.83);
            let got = rotation(8, axis, 0.83).unwrap();
            for (g, w) in got.entries.iter().zip(&want) {
                assert!((g - w).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn eigenbases_diagonalize_spin_matrices() {
        let n = 10;
        let ops = SpinOperators::new(n).unwrap();
        let d = n + 1;
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let j = spin_matrix(n, axis).unwrap();
            let w = ops.eigenbasis(axis);
            for a in 0..d {
                for b in 0..d {
                    let mut s = Complex64::new(0.0, 0.0);
                    for r in 0..d {
                        for q in 0..d {
                            s += w[r * d + a].conj() * j[r * d + q] * w[q * d + b];
                        }
                    }
                    let want = if a == b { a as f64 - 5.0 } else { 0.0 };
                    assert!((s - c(want)).norm() < 1e-11, "{axis:?} ({a},{b}) = {s}");
                }
            }
        }
    }

    #[test]
    fn half_pi_x_rotation_gives_binomial_weights() {
        let n = 20;
        let ops = SpinOperators::new(n).unwrap();
        let top = SpinState::basis(n, 10).unwrap();
        let out = ops.rotate(&top, Axis::X, PI / 2.0).unwrap();
        let weights = crate::special::binomial_weights(n);
        for (i, a) in out.amplitudes().iter().enumerate() {
            assert!((a.norm_sqr() - weights[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn large_rotation_stays_unitary() {
        let n = 400;
        let ops = SpinOperators::new(n).unwrap();
        let d = n + 1;
        // Columns of the Jx eigenbasis are orthonormal.
        let mut worst: f64 = 0.0;
        for a in (0..d).step_by(37) {
            for b in 0..d {
                let s: f64 = (0..d)
                    .map(|r| ops.jx_vectors[r * d + a] * ops.jx_vectors[r * d + b])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - want).abs());
            }
        }
        assert!(worst < 1e-10, "orthogonality defect {worst}");
    }

    #[test]
    fn phase_and_twist() {
        let n = 4;
        let ops = SpinOperators::new(n).unwrap();
        let coh = ops.rotate(&SpinState::basis(n, 2).unwrap(), Axis::Y, PI / 2.0).unwrap();
        assert_eq!(coh.apply_phase_z(0.0), coh);
        assert_eq!(coh.apply_one_axis_twist(0.0), coh);
        let top = SpinState::basis(n, 2).unwrap();
        let shifted = top.apply_phase_z(0.7);
        assert!((shifted.amplitude(2) - Complex64::from_polar(1.0, -1.4)).norm() < 1e-15);
        let fock = SpinState::basis(n, 0).unwrap();
        assert!((fock.apply_one_axis_twist(1.3).fidelity(&fock) - 1.0).abs() < 1e-15);
        // Twist against an elementwise oracle.
        let tau = PI / 2.0;
        let twisted = coh.apply_one_axis_twist(tau);
        for (i, a) in coh.amplitudes().iter().enumerate() {
            let m = i as f64 - 2.0;
            let want = a * Complex64::new((tau * m * m).cos(), -(tau * m * m).sin());
            assert!((twisted.amplitudes()[i] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn noon_phase_matches_two_term_arithmetic() {
        let n = 6;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0); n + 1];
        amps[0] = c(s);
        amps[n] = c(s);
        let noon = SpinState::new(n, amps).unwrap();
        let phi = 2.0 * PI / n as f64 * 0.37;
        let out = noon.apply_phase_z(phi);
        // <NOON|out> = (e^{i phi N/2} + e^{-i phi N/2}) / 2 = cos(N phi / 2)
        let want = (n as f64 * phi / 2.0).cos().powi(2);
        assert!((noon.fidelity(&out) - want).abs() < 1e-14);
    }
}
