//! Direct quadrature of the joint probability, independent of the spectral
//! pipeline: outcome probabilities come from explicit rotations at every
//! noise node and the theta derivative from finite differences.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fourier::Interferometer;
use crate::error::{Error, Result};
use crate::noise::{DensityValue, NoiseDistribution, NoisePair};
use crate::spin::{Axis, RotationMatrix, SpinOperators, SpinState};

struct Direct {
    ops: SpinOperators,
    beam_splitter: Option<RotationMatrix>,
    interferometer: Interferometer,
}

impl Direct {
    fn new(n: usize, interferometer: Interferometer) -> Result<Self> {
        let ops = SpinOperators::new(n)?;
        let beam_splitter = match interferometer {
            Interferometer::BeamSplitterZ => Some(ops.rotation(Axis::X, PI / 2.0)),
            Interferometer::MachZehnderY => None,
        };
        Ok(Self {
            ops,
            beam_splitter,
            interferometer,
        })
    }

    fn outcome_probabilities(&self, probe: &SpinState, x: f64) -> Vec<f64> {
        let out: Vec<Complex64> = match self.interferometer {
            Interferometer::MachZehnderY => self.ops.rotate_vec(Axis::Y, x, probe.amplitudes()),
            Interferometer::BeamSplitterZ => {
                let r = self.beam_splitter.as_ref().expect("beam splitter");
                let phased = probe.apply_phase_z(x);
                let d = r.dim();
                (0..d)
                    .map(|row| (0..d).map(|c| r.get(row, c) * phased.amplitudes()[c]).sum())
                    .collect()
            }
        };
        out.into_iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Quadrature nodes and weights for one noise density.
fn nodes(dist: &NoiseDistribution, mesh: usize) -> Result<Vec<(f64, f64)>> {
    Ok(match dist {
        NoiseDistribution::Delta => vec![(0.0, 1.0)],
        NoiseDistribution::Tabulated(t) => (0..t.len())
            .map(|j| (t.node(j), t.values()[j] * t.spacing()))
            .filter(|(_, w)| *w != 0.0)
            .collect(),
        _ => {
            let h = 2.0 * PI / mesh as f64;
            let mut out = Vec::with_capacity(mesh);
            for j in 0..mesh {
                let e = -PI + h * j as f64;
                match dist.density(e)? {
                    DensityValue::Value(v) => out.push((e, v * h)),
                    DensityValue::PointMass => unreachable!("handled above"),
                }
            }
            out
        }
    })
}

/// P(mu1, mu2 | theta) by periodic trapezoid quadrature over both noises.
pub fn bruteforce_joint_probability(
    probe1: &SpinState,
    probe2: &SpinState,
    interferometer: Interferometer,
    noise: &NoisePair,
    theta: f64,
    mesh: usize,
) -> Result<Vec<f64>> {
    let n = probe1.n_particles();
    if probe2.n_particles() != n {
        return Err(Error::DimensionMismatch("probes differ in particle number".into()));
    }
    if mesh < 4 * n + 4 {
        return Err(Error::InvalidArgument(format!("mesh must be >= 4N + 4 = {}", 4 * n + 4)));
    }
    let direct = Direct::new(n, interferometer)?;
    let plus = nodes(&noise.total, mesh)?;
    let minus = nodes(&noise.relative, mesh)?;
    joint_with(&direct, probe1, probe2, &plus, &minus, theta)
}

fn joint_with(
    direct: &Direct,
    probe1: &SpinState,
    probe2: &SpinState,
    plus: &[(f64, f64)],
    minus: &[(f64, f64)],
    theta: f64,
) -> Result<Vec<f64>> {
    let d = probe1.dim();
    let mut table = vec![0.0; d * d];
    for &(ep, wp) in plus {
        for &(em, wm) in minus {
            let w = wp * wm;
            let p1 = direct.outcome_probabilities(probe1, theta + ep + em);
            let p2 = direct.outcome_probabilities(probe2, ep - em);
            for i in 0..d {
                let wi = w * p1[i];
                for j in 0..d {
                    table[i * d + j] += wi * p2[j];
                }
            }
        }
    }
    Ok(table)
}

/// Fisher information with a point-mass relative noise.
pub fn fisher_bruteforce(
    probe1: &SpinState,
    probe2: &SpinState,
    interferometer: Interferometer,
    noise_total: &NoiseDistribution,
    theta: f64,
    mesh: usize,
) -> Result<f64> {
    let pair = NoisePair::new(noise_total.clone(), NoiseDistribution::Delta);
    fisher_bruteforce_pair(probe1, probe2, interferometer, &pair, theta, mesh)
}

/// Fisher information for arbitrary total and relative noise.
///
/// P' uses a central difference with step 1e-6/N. Outcomes with P <= 1e-15
/// use the double-zero limit 2 P'' from a wider second difference.
pub fn fisher_bruteforce_pair(
    probe1: &SpinState,
    probe2: &SpinState,
    interferometer: Interferometer,
    noise: &NoisePair,
    theta: f64,
    mesh: usize,
) -> Result<f64> {
    let n = probe1.n_particles();
    if probe2.n_particles() != n {
        return Err(Error::DimensionMismatch("probes differ in particle number".into()));
    }
    if mesh < 4 * n + 4 {
        return Err(Error::InvalidArgument(format!("mesh must be >= 4N + 4 = {}", 4 * n + 4)));
    }
    let direct = Direct::new(n, interferometer)?;
    let plus = nodes(&noise.total, mesh)?;
    let minus = nodes(&noise.relative, mesh)?;
    let at = |t: f64| joint_with(&direct, probe1, probe2, &plus, &minus, t);
    let h = 1e-6 / n as f64;
    let h2 = 1e-3 / n as f64;
    let (lo, mid, hi) = (at(theta - h)?, at(theta)?, at(theta + h)?);
    let mut wide: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut f = 0.0;
    for i in 0..mid.len() {
        let p = mid[i];
        if p > 1e-15 {
            let dp = (hi[i] - lo[i]) / (2.0 * h);
            f += dp * dp / p;
        } else {
            if wide.is_none() {
                wide = Some((at(theta - h2)?, at(theta + h2)?));
            }
            let (wl, wh) = wide.as_ref().expect("computed above");
            let d2 = (wh[i] - 2.0 * p + wl[i]) / (h2 * h2);
            f += 2.0 * d2.max(0.0);
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{noon_state, twin_fock_state};

    #[test]
    fn delta_noise_is_single_interferometer() {
        let n = 4;
        let probe = twin_fock_state(n).unwrap();
        let theta = 0.3;
        let f = fisher_bruteforce(&probe, &probe, Interferometer::MachZehnderY, &NoiseDistribution::Delta, theta, 64)
            .unwrap();
        // Single-interferometer FI of the same probe by direct differences.
        let direct = Direct::new(n, Interferometer::MachZehnderY).unwrap();
        let h = 1e-6;
        let (lo, mid, hi) = (
            direct.outcome_probabilities(&probe, theta - h),
            direct.outcome_probabilities(&probe, theta),
            direct.outcome_probabilities(&probe, theta + h),
        );
        let single: f64 = (0..=n)
            .filter(|&i| mid[i] > 1e-15)
            .map(|i| ((hi[i] - lo[i]) / (2.0 * h)).powi(2) / mid[i])
            .sum();
        assert!((f - single).abs() < 1e-6 * single);
    }

    #[test]
    fn noon_flat_profile() {
        let n = 2;
        let probe = noon_state(n).unwrap();
        for theta in [0.2, PI / 4.0, 1.3] {
            let f = fisher_bruteforce(&probe, &probe, Interferometer::BeamSplitterZ, &NoiseDistribution::Flat, theta, 64)
                .unwrap();
            let x = n as f64 * theta;
            let want = (n * n) as f64 * x.sin().powi(2) / (4.0 - x.cos().powi(2));
            assert!((f - want).abs() < 1e-6 * want.max(1.0), "{f} vs {want}");
        }
    }

    #[test]
    fn small_mesh_rejected() {
        let p = noon_state(4).unwrap();
        assert!(fisher_bruteforce(&p, &p, Interferometer::BeamSplitterZ, &NoiseDistribution::Flat, 0.1, 8).is_err());
    }
}
