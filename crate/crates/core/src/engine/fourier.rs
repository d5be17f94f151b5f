//! Trigonometric expansion of single-interferometer outcome probabilities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spin::{Axis, SpinOperators, SpinState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ALIAS_TOL: f64 = 1e-10;

/// How the phase enters a single interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interferometer {
    /// P(mu|x) = |<mu| e^{-i x Jy} |psi>|^2.
    MachZehnderY,
    /// P(mu|x) = |<mu| e^{-i pi/2 Jx} e^{-i x Jz} |psi>|^2.
    BeamSplitterZ,
}

impl std::str::FromStr for Interferometer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mz-y" | "mzy" | "mach-zehnder-y" => Ok(Self::MachZehnderY),
            "bs-z" | "bs-after-z" | "beam-splitter-z" => Ok(Self::BeamSplitterZ),
            other => Err(Error::InvalidArgument(format!("unknown interferometer '{other}'"))),
        }
    }
}

/// P(mu|x) = sum_{k=0..=N} a_k(mu) cos(k x) + b_k(mu) sin(k x).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProbabilityFourier {
    n: usize,
    outcomes: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ConditionalProbabilityFourier {
    /// Wraps raw coefficient rows (one row of N+1 values per outcome).
    pub fn from_coefficients(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let width = n + 1;
        if a.is_empty() || a.len() % width != 0 || a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient rows must have length {width} and match in count"
            )));
        }
        Ok(Self {
            n,
            outcomes: a.len() / width,
            a,
            b,
        })
    }

    /// Frequency cutoff N.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn a(&self, outcome: usize) -> &[f64] {
        &self.a[outcome * (self.n + 1)..(outcome + 1) * (self.n + 1)]
    }

    pub fn b(&self, outcome: usize) -> &[f64] {
        &self.b[outcome * (self.n + 1)..(outcome + 1) * (self.n + 1)]
    }

    pub fn probability(&self, outcome: usize, x: f64) -> f64 {
        self.a(outcome)
            .iter()
            .zip(self.b(outcome))
            .enumerate()
            .map(|(k, (a, b))| {
                let (s, c) = (k as f64 * x).sin_cos();
                a * c + b * s
            })
            .sum()
    }

    pub fn derivative(&self, outcome: usize, x: f64) -> f64 {
        self.a(outcome)
            .iter()
            .zip(self.b(outcome))
            .enumerate()
            .map(|(k, (a, b))| {
                let kf = k as f64;
                let (s, c) = (kf * x).sin_cos();
                kf * (b * c - a * s)
            })
            .sum()
    }

    /// Largest |b_k| over all outcomes.
    pub fn max_sine(&self) -> f64 {
        self.b.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Fourier coefficients of P(mu|x) from FFT samples on 2^ceil(log2(4N+4)) points.
pub fn single_probability_fourier(
    probe: &SpinState,
    interferometer: Interferometer,
) -> Result<ConditionalProbabilityFourier> {
    let ops = SpinOperators::new(probe.n_particles())?;
    single_probability_fourier_with(&ops, probe, interferometer)
}

pub fn single_probability_fourier_with(
    ops: &SpinOperators,
    probe: &SpinState,
    interferometer: Interferometer,
) -> Result<ConditionalProbabilityFourier> {
    let n = probe.n_particles();
    if ops.n_particles() != n {
        return Err(Error::DimensionMismatch("operators and probe sizes differ".into()));
    }
    let d = n + 1;
    let half = (n / 2) as i64;
    // amplitude_mu(x) = sum_m g[mu][m] e^{-i x m}
    let g = phase_coefficients(ops, probe, interferometer);
    let len = (4 * n + 4).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    let mut buf = vec![ZERO; len];
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d * d];
    let inv_len = 1.0 / len as f64;
    for mu in 0..d {
        buf.iter_mut().for_each(|x| *x = ZERO);
        let row = &g[mu * d..(mu + 1) * d];
        if row.iter().all(|x| *x == ZERO) {
            continue;
        }
        for (k, gk) in row.iter().enumerate() {
            let m = k as i64 - half;
            buf[m.rem_euclid(len as i64) as usize] += gk;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for x in buf.iter_mut() {
            *x = Complex64::new(x.norm_sqr(), 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        let alias: f64 = buf[n + 1..len - n].iter().map(|c| (c * inv_len).norm_sqr()).sum();
        if alias > ALIAS_TOL {
            return Err(Error::Aliasing { energy: alias, cutoff: n });
        }
        let ar = &mut a[mu * d..(mu + 1) * d];
        let br = &mut b[mu * d..(mu + 1) * d];
        ar[0] = buf[0].re * inv_len;
        for k in 1..=n {
            let c = buf[k] * inv_len;
            ar[k] = 2.0 * c.re;
            br[k] = -2.0 * c.im;
        }
    }
    ConditionalProbabilityFourier::from_coefficients(n, a, b)
}

// Row-major g[mu][m] with amplitude_mu(x) = sum_m g[mu][m] e^{-i x m}.
fn phase_coefficients(ops: &SpinOperators, probe: &SpinState, interferometer: Interferometer) -> Vec<Complex64> {
    let d = ops.dim();
    let mut g = vec![ZERO; d * d];
    match interferometer {
        Interferometer::MachZehnderY => {
            // The per-row phase of W_y drops out of |amplitude|^2.
            let c = ops.to_eigenbasis(Axis::Y, probe.amplitudes());
            for mu in 0..d {
                for (m, cm) in c.iter().enumerate() {
                    g[mu * d + m] = cm * ops.eigenbasis_entry(Axis::X, mu, m).re;
                }
            }
        }
        Interferometer::BeamSplitterZ => {
            let mut e = vec![ZERO; d];
            for (m, psi) in probe.amplitudes().iter().enumerate() {
                if *psi == ZERO {
                    continue;
                }
                e.iter_mut().for_each(|x| *x = ZERO);
                e[m] = Complex64::new(1.0, 0.0);
                let col = ops.rotate_vec(Axis::X, PI / 2.0, &e);
                for (mu, r) in col.into_iter().enumerate() {
                    g[mu * d + m] = r * psi;
                }
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::binomial_weights;
    use crate::states::{coherent_x_state, noon_state, twin_fock_state};
    use rand::{Rng, SeedableRng};

    #[test]
    fn twin_fock_matches_dense_rotation() {
        let probe = twin_fock_state(2).unwrap();
        let f = single_probability_fourier(&probe, Interferometer::MachZehnderY).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-PI..PI);
            let r = crate::spin::rotation(2, Axis::Y, x).unwrap();
            let out = r.apply(&probe).unwrap();
            for mu in 0..3 {
                assert!((f.probability(mu, x) - out.amplitudes()[mu].norm_sqr()).abs() < 1e-12);
            }
        }
        assert!(f.max_sine() < 1e-14);
    }

    #[test]
    fn noon_beam_splitter_pattern() {
        let n = 10;
        let f = single_probability_fourier(&noon_state(n).unwrap(), Interferometer::BeamSplitterZ).unwrap();
        let w = binomial_weights(n);
        for i in 0..=n {
            let mu = i as i64 - 5;
            let s = if mu.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            for x in [0.0, 0.1, 0.77, 2.5] {
                let want = w[i] * (1.0 + s * (n as f64 * x).cos());
                assert!((f.probability(i, x) - want).abs() < 1e-13, "mu {mu} x {x}");
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let probe = coherent_x_state(16).unwrap().apply_one_axis_twist(0.4);
        for interf in [Interferometer::MachZehnderY, Interferometer::BeamSplitterZ] {
            let f = single_probability_fourier(&probe, interf).unwrap();
            for x in [0.0, 0.3, 1.9, -2.2] {
                let s: f64 = (0..17).map(|mu| f.probability(mu, x)).sum();
                assert!((s - 1.0).abs() < 1e-10);
                assert!((0..17).all(|mu| f.probability(mu, x) > -1e-10));
            }
        }
    }

    #[test]
    fn coherent_state_derivatives() {
        // Fisher information of a coherent state is N at every x.
        let n = 12;
        let f = single_probability_fourier(&coherent_x_state(n).unwrap(), Interferometer::MachZehnderY).unwrap();
        for x in [0.2, 1.0, 2.4] {
            let fi: f64 = (0..=n)
                .map(|mu| {
                    let p = f.probability(mu, x);
                    let dp = f.derivative(mu, x);
                    if p > 1e-14 {
                        dp * dp / p
                    } else {
                        0.0
                    }
                })
                .sum();
            assert!((fi - n as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn raw_coefficients_validation() {
        assert!(ConditionalProbabilityFourier::from_coefficients(2, vec![1.0; 4], vec![0.0; 4]).is_err());
        let one = ConditionalProbabilityFourier::from_coefficients(2, vec![1.0, 0.0, 0.0], vec![0.0; 3]).unwrap();
        assert_eq!(one.outcomes(), 1);
        assert_eq!(one.probability(0, 1.3), 1.0);
    }
}
