//! Joint outcome probabilities of the differential interferometer.
//!
//! With a point-mass relative noise,
//! P(mu1, mu2 | theta) = int P(e) P(mu1 | theta + e) P(mu2 | e) de
//!                     = sum_k A_k cos(k theta) + B_k sin(k theta),
//! where A_k = a_k p_k + b_k q_k and B_k = b_k p_k - a_k q_k, (a, b) are the
//! coefficients of interferometer 1 and (p, q) the kernel-contracted
//! coefficients of interferometer 2. Storing (a, b) per mu1 and (p, q) per
//! mu2 keeps the table at O(N^2) memory; any pair is formed in O(N).

use rayon::prelude::*;

use super::fourier::ConditionalProbabilityFourier;
use super::kernel::NoiseKernelMatrices;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct JointFourierTable {
    pub(crate) n: usize,
    pub(crate) outcomes1: usize,
    pub(crate) outcomes2: usize,
    pub(crate) a1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) p2: Vec<f64>,
    pub(crate) q2: Vec<f64>,
}

/// Contracts two single-interferometer expansions with a noise kernel.
pub fn joint_fourier(
    probe1: &ConditionalProbabilityFourier,
    probe2: &ConditionalProbabilityFourier,
    kernel: &NoiseKernelMatrices,
) -> Result<JointFourierTable> {
    let n = probe1.n();
    if probe2.n() != n || kernel.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "frequency cutoffs differ: probe1 {n}, probe2 {}, kernel {}",
            probe2.n(),
            kernel.n()
        )));
    }
    let d = n + 1;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..probe2.outcomes())
        .into_par_iter()
        .map(|mu2| kernel.contract(probe2.a(mu2), probe2.b(mu2)))
        .collect();
    let mut p2 = Vec::with_capacity(rows.len() * d);
    let mut q2 = Vec::with_capacity(rows.len() * d);
    for (p, q) in rows {
        p2.extend(p);
        q2.extend(q);
    }
    let mut a1 = Vec::with_capacity(probe1.outcomes() * d);
    let mut b1 = Vec::with_capacity(probe1.outcomes() * d);
    for mu1 in 0..probe1.outcomes() {
        a1.extend_from_slice(probe1.a(mu1));
        b1.extend_from_slice(probe1.b(mu1));
    }
    Ok(JointFourierTable {
        n,
        outcomes1: probe1.outcomes(),
        outcomes2: probe2.outcomes(),
        a1,
        b1,
        p2,
        q2,
    })
}

impl JointFourierTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcomes(&self) -> (usize, usize) {
        (self.outcomes1, self.outcomes2)
    }

    pub(crate) fn row1(&self, mu1: usize) -> (&[f64], &[f64]) {
        let d = self.n + 1;
        (&self.a1[mu1 * d..(mu1 + 1) * d], &self.b1[mu1 * d..(mu1 + 1) * d])
    }

    pub(crate) fn row2(&self, mu2: usize) -> (&[f64], &[f64]) {
        let d = self.n + 1;
        (&self.p2[mu2 * d..(mu2 + 1) * d], &self.q2[mu2 * d..(mu2 + 1) * d])
    }

    /// (A_k, B_k), k = 0..=N, of one outcome pair.
    pub fn coefficients(&self, mu1: usize, mu2: usize) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.row1(mu1);
        let (p, q) = self.row2(mu2);
        let big_a = (0..=self.n).map(|k| a[k] * p[k] + b[k] * q[k]).collect();
        let big_b = (0..=self.n).map(|k| b[k] * p[k] - a[k] * q[k]).collect();
        (big_a, big_b)
    }

    /// P(mu1, mu2 | theta) and its first two theta derivatives.
    pub fn probability_derivatives(&self, mu1: usize, mu2: usize, theta: f64) -> [f64; 3] {
        let (a, b) = self.row1(mu1);
        let (p, q) = self.row2(mu2);
        let mut out = [0.0; 3];
        for k in 0..=self.n {
            let big_a = a[k] * p[k] + b[k] * q[k];
            let big_b = b[k] * p[k] - a[k] * q[k];
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let val = big_a * c + big_b * s;
            out[0] += val;
            out[1] += kf * (big_b * c - big_a * s);
            out[2] -= kf * kf * val;
        }
        out
    }

    pub fn probability(&self, mu1: usize, mu2: usize, theta: f64) -> f64 {
        self.probability_derivatives(mu1, mu2, theta)[0]
    }

    /// Full probability table at theta, row-major with mu1 outer.
    pub fn probabilities(&self, theta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.outcomes1 * self.outcomes2];
        for mu1 in 0..self.outcomes1 {
            for mu2 in 0..self.outcomes2 {
                out[mu1 * self.outcomes2 + mu2] = self.probability(mu1, mu2, theta);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::fourier::{single_probability_fourier, Interferometer};
    use crate::engine::kernel::noise_kernel;
    use crate::noise::{NoiseDistribution, NoisePair};
    use crate::noon::noon_joint_probability;
    use crate::states::{coherent_x_state, noon_state};

    #[test]
    fn delta_kernel_factorizes() {
        let probe = coherent_x_state(6).unwrap().apply_one_axis_twist(0.5);
        let f = single_probability_fourier(&probe, Interferometer::MachZehnderY).unwrap();
        let k = noise_kernel(&NoiseDistribution::Delta, 6).unwrap();
        let t = joint_fourier(&f, &f, &k).unwrap();
        for theta in [0.0, 0.4, 2.0] {
            for mu1 in 0..7 {
                for mu2 in 0..7 {
                    let want = f.probability(mu1, theta) * f.probability(mu2, 0.0);
                    assert!((t.probability(mu1, mu2, theta) - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn deterministic_second_probe_gives_smeared_marginal() {
        let n = 4;
        let probe = coherent_x_state(n).unwrap().apply_one_axis_twist(1.1);
        let f = single_probability_fourier(&probe, Interferometer::MachZehnderY).unwrap();
        let mut a = vec![0.0; n + 1];
        a[0] = 1.0;
        let dummy = ConditionalProbabilityFourier::from_coefficients(n, a, vec![0.0; n + 1]).unwrap();
        let dist = NoiseDistribution::von_mises(0.7).unwrap();
        let k = noise_kernel(&dist, n).unwrap();
        let t = joint_fourier(&f, &dummy, &k).unwrap();
        let c = dist.fourier_coefficients(n).unwrap();
        // Smearing multiplies the frequency-k part by V_k (even density).
        for theta in [0.1, 1.7] {
            for mu in 0..=n {
                let want: f64 = (0..=n)
                    .map(|kk| {
                        let (s, co) = (kk as f64 * theta).sin_cos();
                        c.v()[kk] * (f.a(mu)[kk] * co + f.b(mu)[kk] * s)
                    })
                    .sum();
                assert!((t.probability(mu, 0, theta) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn noon_flat_matches_closed_form() {
        let n = 6;
        let f = single_probability_fourier(&noon_state(n).unwrap(), Interferometer::BeamSplitterZ).unwrap();
        let k = noise_kernel(&NoiseDistribution::Flat, n).unwrap();
        let t = joint_fourier(&f, &f, &k).unwrap();
        let noise = NoisePair::new(NoiseDistribution::Flat, NoiseDistribution::Delta);
        for theta in [0.0, 0.21, 1.3] {
            let closed = noon_joint_probability(n, theta, &noise).unwrap();
            for (x, y) in t.probabilities(theta).iter().zip(&closed) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let f2 = single_probability_fourier(&noon_state(2).unwrap(), Interferometer::BeamSplitterZ).unwrap();
        let f4 = single_probability_fourier(&noon_state(4).unwrap(), Interferometer::BeamSplitterZ).unwrap();
        let k = noise_kernel(&NoiseDistribution::Flat, 4).unwrap();
        assert!(joint_fourier(&f2, &f4, &k).is_err());
    }
}
