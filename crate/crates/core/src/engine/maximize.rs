//! Maximization of F(theta) over one period.

use std::f64::consts::PI;

use super::fisher::{fisher_curve, fisher_from_fourier};
use super::joint::JointFourierTable;
use crate::error::{Error, Result};
use crate::noon::NoonCoefficients;
use crate::optimize::{best_of, golden_max, FisherResult};

/// Anything that yields F(theta).
pub trait FisherCurve {
    fn fisher_at(&self, theta: f64) -> Result<f64>;

    /// F on theta0 + period * j / points. Sources with a faster batched path
    /// override this.
    fn fisher_grid(&self, theta0: f64, period: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        (0..points)
            .map(|j| {
                let t = theta0 + period * j as f64 / points as f64;
                self.fisher_at(t).map(|f| (t, f))
            })
            .collect()
    }

    /// Highest theta frequency of the underlying probabilities, if known.
    /// Noisy curves carry structure on scales ~1 / N, so the coarse grid
    /// is refined to [`POINTS_PER_FREQUENCY`] points per unit of it.
    fn max_frequency(&self) -> usize {
        0
    }
}

/// Grid points per unit of the maximal frequency over a 2 pi period.
pub const POINTS_PER_FREQUENCY: usize = 8;

impl FisherCurve for JointFourierTable {
    fn fisher_at(&self, theta: f64) -> Result<f64> {
        fisher_from_fourier(self, theta)
    }

    fn fisher_grid(&self, theta0: f64, period: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        fisher_curve(self, theta0, period, points)
    }

    fn max_frequency(&self) -> usize {
        self.n()
    }
}

impl FisherCurve for NoonCoefficients {
    fn fisher_at(&self, theta: f64) -> Result<f64> {
        self.fisher(theta)
    }
}

impl<F: Fn(f64) -> Result<f64>> FisherCurve for F {
    fn fisher_at(&self, theta: f64) -> Result<f64> {
        self(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    /// Coarse grid points per period.
    pub points: usize,
    /// Golden-section bracket width, as a fraction of the period.
    pub tolerance: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            points: 512,
            tolerance: 1e-9,
        }
    }
}

/// Smallest 2^a 3^b 5^c >= x, a cheap FFT length.
fn smooth_at_least(x: usize) -> usize {
    let mut m = x.max(1);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Grid points actually used: at least `requested`, and enough to resolve
/// the source's frequency content over `period`.
pub fn grid_points<C: FisherCurve + ?Sized>(source: &C, period: f64, requested: usize) -> usize {
    let need = (POINTS_PER_FREQUENCY as f64 * source.max_frequency() as f64 * period / (2.0 * PI)).ceil() as usize;
    if need > requested {
        smooth_at_least(need)
    } else {
        requested
    }
}

/// Coarse grid over [0, period) followed by golden-section refinement.
pub fn maximize_fisher<C: FisherCurve + ?Sized>(source: &C, period: f64, opts: MaximizeOptions) -> Result<FisherResult> {
    if !(period > 0.0) || opts.points < 3 {
        return Err(Error::InvalidArgument("maximization needs a positive period and >= 3 grid points".into()));
    }
    let points = grid_points(source, period, opts.points);
    let curve = source.fisher_grid(0.0, period, points)?;
    let (t0, f0) = best_of(&curve);
    if !f0.is_finite() {
        return Err(Error::InvalidArgument("Fisher curve is not finite".into()));
    }
    let step = period / points as f64;
    let (t, f) = golden_max(|t| source.fisher_at(t), t0 - step, t0 + step, opts.tolerance * period)?;
    let (theta, fisher) = if f > f0 { (t, f) } else { (t0, f0) };
    Ok(FisherResult {
        theta: theta.rem_euclid(period),
        fisher,
        curve,
    })
}

/// 2 pi, the generic period of a joint table.
pub const FULL_PERIOD: f64 = 2.0 * PI;
