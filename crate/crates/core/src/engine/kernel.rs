//! Noise kernels for the joint-probability contraction.
//!
//! All three kernels are Toeplitz-plus-Hankel in the noise moments:
//! C_{k,k'} = int P cos(k e) cos(k' e) = (V_{k-k'} + V_{k+k'}) / 2,
//! S_{k,k'} = int P cos(k e) sin(k' e) = (W_{k+k'} - W_{k-k'}) / 2,
//! T_{k,k'} = int P sin(k e) sin(k' e) = (V_{k-k'} - V_{k+k'}) / 2,
//! with V_{-K} = V_K and W_{-K} = -W_K.

use crate::error::Result;
use crate::noise::NoiseDistribution;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseKernelMatrices {
    n: usize,
    v: Vec<f64>,
    w: Vec<f64>,
}

impl NoiseKernelMatrices {
    pub fn n(&self) -> usize {
        self.n
    }

    fn vm(&self, k: i64) -> f64 {
        self.v[k.unsigned_abs() as usize]
    }

    fn wm(&self, k: i64) -> f64 {
        let x = self.w[k.unsigned_abs() as usize];
        if k < 0 {
            -x
        } else {
            x
        }
    }

    pub fn c(&self, k: usize, kp: usize) -> f64 {
        let (k, kp) = (k as i64, kp as i64);
        0.5 * (self.vm(k - kp) + self.vm(k + kp))
    }

    pub fn s(&self, k: usize, kp: usize) -> f64 {
        let (k, kp) = (k as i64, kp as i64);
        0.5 * (self.wm(k + kp) - self.wm(k - kp))
    }

    pub fn t(&self, k: usize, kp: usize) -> f64 {
        let (k, kp) = (k as i64, kp as i64);
        0.5 * (self.vm(k - kp) - self.vm(k + kp))
    }

    /// Dense (N+1) x (N+1) copy of one kernel, row-major.
    pub fn dense(&self, which: KernelPart) -> Vec<f64> {
        let d = self.n + 1;
        let mut out = vec![0.0; d * d];
        for k in 0..d {
            for kp in 0..d {
                out[k * d + kp] = match which {
                    KernelPart::C => self.c(k, kp),
                    KernelPart::S => self.s(k, kp),
                    KernelPart::T => self.t(k, kp),
                };
            }
        }
        out
    }

    /// Contracts interferometer-2 coefficients: returns (p, q) with
    /// p_k = sum_k' C_{k,k'} a_k' + S_{k,k'} b_k' and
    /// q_k = sum_k' S_{k',k} a_k' + T_{k,k'} b_k'.
    pub fn contract(&self, a2: &[f64], b2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.n + 1;
        let mut p = vec![0.0; d];
        let mut q = vec![0.0; d];
        let nz: Vec<usize> = (0..d).filter(|&k| a2[k] != 0.0 || b2[k] != 0.0).collect();
        for k in 0..d {
            let ki = k as i64;
            let (mut pk, mut qk) = (0.0, 0.0);
            for &kp in &nz {
                let kpi = kp as i64;
                let vd = self.vm(ki - kpi);
                let vs = self.vm(ki + kpi);
                let ws = self.wm(ki + kpi);
                let wd = self.wm(ki - kpi);
                let (a, b) = (a2[kp], b2[kp]);
                pk += 0.5 * ((vd + vs) * a + (ws - wd) * b);
                // S_{k',k} = (W_{k+k'} - W_{k'-k}) / 2 = (W_{k+k'} + W_{k-k'}) / 2
                qk += 0.5 * ((ws + wd) * a + (vd - vs) * b);
            }
            p[k] = pk;
            q[k] = qk;
        }
        (p, q)
    }

    #[allow(dead_code)]
    pub(crate) fn moments(&self) -> (&[f64], &[f64]) {
        (&self.v, &self.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPart {
    C,
    S,
    T,
}

/// Kernels of a total-noise density for frequencies 0..=N.
pub fn noise_kernel(noise_total: &NoiseDistribution, n: usize) -> Result<NoiseKernelMatrices> {
    let coeffs = noise_total.fourier_coefficients((2 * n).max(1))?;
    Ok(NoiseKernelMatrices {
        n,
        v: coeffs.v().to_vec(),
        w: coeffs.w().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_multi_peak, DensityValue};
    use crate::quadrature::integrate;
    use std::f64::consts::PI;

    #[test]
    fn delta_kernel_is_all_ones() {
        let k = noise_kernel(&NoiseDistribution::Delta, 5).unwrap();
        assert!(k.dense(KernelPart::C).iter().all(|&x| x == 1.0));
        assert!(k.dense(KernelPart::S).iter().all(|&x| x == 0.0));
        assert!(k.dense(KernelPart::T).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn flat_kernel_is_diagonal() {
        let k = noise_kernel(&NoiseDistribution::Flat, 4).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                let want = match (a, b) {
                    (0, 0) => 1.0,
                    _ if a == b => 0.5,
                    _ => 0.0,
                };
                assert_eq!(k.c(a, b), want);
                assert_eq!(k.s(a, b), 0.0);
            }
        }
    }

    #[test]
    fn kernels_match_quadrature() {
        let dists = [NoiseDistribution::von_mises(0.4).unwrap(), sample_multi_peak(3, 0.3, 4).unwrap()];
        for dist in &dists {
            let n = 8;
            let k = noise_kernel(dist, n).unwrap();
            let dens = |e: f64| match dist.density(e).unwrap() {
                DensityValue::Value(v) => v,
                DensityValue::PointMass => unreachable!(),
            };
            for a in 0..=n {
                for b in 0..=n {
                    let (af, bf) = (a as f64, b as f64);
                    let c = integrate(|e| dens(e) * (af * e).cos() * (bf * e).cos(), -PI, PI, 1e-13).unwrap();
                    let s = integrate(|e| dens(e) * (af * e).cos() * (bf * e).sin(), -PI, PI, 1e-13).unwrap();
                    let t = integrate(|e| dens(e) * (af * e).sin() * (bf * e).sin(), -PI, PI, 1e-13).unwrap();
                    assert!((k.c(a, b) - c).abs() < 1e-10);
                    assert!((k.s(a, b) - s).abs() < 1e-10);
                    assert!((k.t(a, b) - t).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn contraction_matches_dense_products() {
        let n = 6;
        let k = noise_kernel(&sample_multi_peak(2, 0.5, 8).unwrap(), n).unwrap();
        let a: Vec<f64> = (0..=n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..=n).map(|i| (i as f64 * 1.3).cos()).collect();
        let (p, q) = k.contract(&a, &b);
        let (c, s, t) = (k.dense(KernelPart::C), k.dense(KernelPart::S), k.dense(KernelPart::T));
        let d = n + 1;
        for i in 0..d {
            let pw: f64 = (0..d).map(|j| c[i * d + j] * a[j] + s[i * d + j] * b[j]).sum();
            let qw: f64 = (0..d).map(|j| s[j * d + i] * a[j] + t[i * d + j] * b[j]).sum();
            assert!((p[i] - pw).abs() < 1e-14 && (q[i] - qw).abs() < 1e-14);
        }
    }
}
