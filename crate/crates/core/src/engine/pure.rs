//! Noiseless single-probe Fisher information from amplitudes.
//!
//! Without phase noise the joint distribution factorizes and only the
//! probe carrying theta contributes. Working with amplitudes a(theta) keeps
//! each term 4 Re(conj(a) a')^2 / |a|^2 well conditioned at dark outcomes,
//! where P'^2 / P from probabilities alone loses all relative precision.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fourier::Interferometer;
use super::maximize::FisherCurve;
use crate::error::Result;
use crate::spin::{spin_matrix, Axis, RotationMatrix, SpinOperators, SpinState};

pub struct PureProbeFisher {
    probe: SpinState,
    ops: SpinOperators,
    interferometer: Interferometer,
    jy: Vec<Complex64>,
    beam_splitter: Option<RotationMatrix>,
}

impl PureProbeFisher {
    pub fn new(probe: &SpinState, interferometer: Interferometer) -> Result<Self> {
        let n = probe.n_particles();
        let ops = SpinOperators::new(n)?;
        let beam_splitter = match interferometer {
            Interferometer::BeamSplitterZ => Some(ops.rotation(Axis::X, PI / 2.0)),
            Interferometer::MachZehnderY => None,
        };
        Ok(Self {
            probe: probe.clone(),
            jy: spin_matrix(n, Axis::Y)?,
            ops,
            interferometer,
            beam_splitter,
        })
    }

    /// Output amplitudes and their theta derivative.
    fn amplitudes(&self, theta: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let d = self.probe.dim();
        let mi = Complex64::new(0.0, -1.0);
        match self.interferometer {
            Interferometer::MachZehnderY => {
                let a = self.ops.rotate_vec(Axis::Y, theta, self.probe.amplitudes());
                let da = (0..d)
                    .map(|r| mi * (0..d).map(|c| self.jy[r * d + c] * a[c]).sum::<Complex64>())
                    .collect();
                (a, da)
            }
            Interferometer::BeamSplitterZ => {
                let r = self.beam_splitter.as_ref().expect("beam splitter");
                let phased = self.probe.apply_phase_z(theta);
                let dphased: Vec<Complex64> = phased
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, x)| mi * phased.eigenvalue_at(i) as f64 * x)
                    .collect();
                let apply = |v: &[Complex64]| -> Vec<Complex64> {
                    (0..d).map(|row| (0..d).map(|c| r.get(row, c) * v[c]).sum()).collect()
                };
                (apply(phased.amplitudes()), apply(&dphased))
            }
        }
    }
}

impl FisherCurve for PureProbeFisher {
    fn fisher_at(&self, theta: f64) -> Result<f64> {
        let (a, da) = self.amplitudes(theta);
        Ok(a.iter()
            .zip(&da)
            .map(|(x, dx)| {
                let p = x.norm_sqr();
                if p > 0.0 {
                    let g = (x.conj() * dx).re;
                    4.0 * g * (g / p)
                } else {
                    4.0 * dx.norm_sqr()
                }
            })
            .sum())
    }
}
