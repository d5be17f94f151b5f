//! Closed-form results for product-NOON probes in the beam-splitter
//! differential interferometer.
//!
//! With NOON inputs every outcome probability is a binomial weight times one
//! of four parity-dependent shape functions
//! g(theta) = A(p2) + C(p1, p2) cos N theta - S(p1, p2) sin N theta,
//! so all sums over outcomes collapse to the four parity classes.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{check_even, Error, Result};
use crate::noise::{sample_multi_peak, NoiseDistribution, NoisePair};
use crate::optimize::{grid_then_golden, FisherResult};
use crate::special::binomial_weights;

/// Shape functions below this are treated as probability zeros.
pub const ZERO_FLOOR: f64 = 1e-14;
const NEGATIVE_FLOOR: f64 = -1e-9;
const SYMMETRY_TOL: f64 = 1e-14;

/// The moments at K = N and 2N of both noise densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoonCoefficients {
    pub n: usize,
    pub vn_total: f64,
    pub v2n_total: f64,
    pub wn_total: f64,
    pub w2n_total: f64,
    pub vn_rel: f64,
    pub v2n_rel: f64,
    pub wn_rel: f64,
    pub w2n_rel: f64,
}

fn sign(parity: usize) -> f64 {
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl NoonCoefficients {
    pub fn new(n: usize, noise: &NoisePair) -> Result<Self> {
        check_even(n)?;
        let (t, r) = noise.coefficients(2 * n)?;
        Ok(Self {
            n,
            vn_total: t.v()[n],
            v2n_total: t.v()[2 * n],
            wn_total: t.w()[n],
            w2n_total: t.w()[2 * n],
            vn_rel: r.v()[n],
            v2n_rel: r.v()[2 * n],
            wn_rel: r.w()[n],
            w2n_rel: r.w()[2 * n],
        })
    }

    /// A(p2) for outcome parity p2 (0 even, 1 odd).
    pub fn a(&self, p2: usize) -> f64 {
        1.0 + sign(p2) * (self.vn_total * self.vn_rel + self.wn_total * self.wn_rel)
    }

    pub fn c(&self, p1: usize, p2: usize) -> f64 {
        sign(p1) * (self.vn_total * self.vn_rel - self.wn_total * self.wn_rel)
            + sign(p1 + p2) * 0.5 * (self.v2n_total + self.v2n_rel)
    }

    pub fn s(&self, p1: usize, p2: usize) -> f64 {
        sign(p1) * (self.vn_total * self.wn_rel + self.wn_total * self.vn_rel)
            + sign(p1 + p2) * 0.5 * (self.w2n_total + self.w2n_rel)
    }

    /// 1 + V_N^+ V_N^- and 1 - V_N^+ V_N^-.
    pub fn a_plus(&self) -> f64 {
        1.0 + self.vn_total * self.vn_rel
    }

    pub fn a_minus(&self) -> f64 {
        1.0 - self.vn_total * self.vn_rel
    }

    pub fn b_plus(&self) -> f64 {
        self.vn_total * self.vn_rel + 0.5 * (self.v2n_total + self.v2n_rel)
    }

    pub fn b_minus(&self) -> f64 {
        self.vn_total * self.vn_rel - 0.5 * (self.v2n_total + self.v2n_rel)
    }

    /// True when all sine moments vanish.
    pub fn is_symmetric(&self) -> bool {
        [self.wn_total, self.w2n_total, self.wn_rel, self.w2n_rel]
            .iter()
            .all(|w| w.abs() <= SYMMETRY_TOL)
    }

    /// g(theta) for the class (p1, p2).
    pub fn shape(&self, p1: usize, p2: usize, theta: f64) -> f64 {
        let (s, c) = (self.n as f64 * theta).sin_cos();
        self.a(p2) + self.c(p1, p2) * c - self.s(p1, p2) * s
    }

    /// D_j = A(j)^2 - (C(0, j) cos N theta - S(0, j) sin N theta)^2, j = 0, 1.
    pub fn denominators(&self, theta: f64) -> [f64; 2] {
        let (s, c) = (self.n as f64 * theta).sin_cos();
        [0, 1].map(|j| {
            let x = self.c(0, j) * c - self.s(0, j) * s;
            self.a(j).powi(2) - x * x
        })
    }

    /// F(theta) summed over the four parity classes.
    pub fn fisher(&self, theta: f64) -> Result<f64> {
        let nf = self.n as f64;
        let (s, c) = (nf * theta).sin_cos();
        let mut total = 0.0;
        let mut any_mass = false;
        for p1 in 0..2 {
            for p2 in 0..2 {
                let (cc, ss) = (self.c(p1, p2), self.s(p1, p2));
                let g = self.a(p2) + cc * c - ss * s;
                if g < NEGATIVE_FLOOR {
                    return Err(Error::NegativeProbability {
                        value: g,
                        mu1: p1 as i64,
                        mu2: p2 as i64,
                    });
                }
                let dg = -nf * (cc * s + ss * c);
                // Each parity class carries binomial mass 1/2 x 1/2.
                total += 0.25
                    * if g > ZERO_FLOOR {
                        any_mass = true;
                        dg * dg / g
                    } else {
                        let d2g = -nf * nf * (cc * c - ss * s);
                        2.0 * d2g.max(0.0)
                    };
            }
        }
        if !any_mass {
            return Err(Error::VanishingProbabilities);
        }
        Ok(total)
    }
}

/// P(mu1, mu2 | theta) as a row-major (N+1) x (N+1) table, mu1 outer.
pub fn noon_joint_probability(n: usize, theta: f64, noise: &NoisePair) -> Result<Vec<f64>> {
    let coeffs = NoonCoefficients::new(n, noise)?;
    Ok(joint_table(&coeffs, theta))
}

pub(crate) fn joint_table(coeffs: &NoonCoefficients, theta: f64) -> Vec<f64> {
    let n = coeffs.n;
    let half = n / 2;
    let w = binomial_weights(n);
    let shapes: Vec<Vec<f64>> = (0..2)
        .map(|p1| (0..2).map(|p2| coeffs.shape(p1, p2, theta)).collect())
        .collect();
    let mut table = vec![0.0; (n + 1) * (n + 1)];
    for i1 in 0..=n {
        let p1 = (i1 + half) % 2;
        for i2 in 0..=n {
            let p2 = (i2 + half) % 2;
            table[i1 * (n + 1) + i2] = w[i1] * w[i2] * shapes[p1][p2];
        }
    }
    table
}

/// Fisher information of the NOON joint distribution at theta.
pub fn noon_fisher(n: usize, theta: f64, noise: &NoisePair) -> Result<f64> {
    NoonCoefficients::new(n, noise)?.fisher(theta)
}

const GRID_POINTS: usize = 512;
const THETA_TOL: f64 = 1e-10;

/// max over theta of the NOON Fisher information.
///
/// Symmetric noise uses the closed form at cos N theta = 0; otherwise one
/// period [0, 2pi/N) is scanned and the best grid point refined.
pub fn noon_fisher_optimal(n: usize, noise: &NoisePair) -> Result<FisherResult> {
    let coeffs = NoonCoefficients::new(n, noise)?;
    optimal_from_coefficients(&coeffs)
}

pub fn optimal_from_coefficients(coeffs: &NoonCoefficients) -> Result<FisherResult> {
    let n = coeffs.n as f64;
    let period = 2.0 * PI / n;
    if coeffs.is_symmetric() {
        let curve = (0..GRID_POINTS)
            .map(|i| {
                let t = period * i as f64 / GRID_POINTS as f64;
                coeffs.fisher(t).map(|f| (t, f))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut f = 0.0;
        for (a, b) in [(coeffs.a_minus(), coeffs.b_minus()), (coeffs.a_plus(), coeffs.b_plus())] {
            if a > ZERO_FLOOR {
                f += b * b / a;
            }
        }
        return Ok(FisherResult {
            theta: period / 4.0,
            fisher: 0.5 * n * n * f,
            curve,
        });
    }
    let (theta, fisher, curve) = grid_then_golden(|t| coeffs.fisher(t), 0.0, period, GRID_POINTS, THETA_TOL)?;
    Ok(FisherResult {
        theta: theta.rem_euclid(period),
        fisher,
        curve,
    })
}

/// Outcome of the vanishing-information test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroFiCheck {
    pub vanishes: bool,
    /// int P(eps) cos^2(N eps) d eps.
    pub residual: f64,
}

/// Whether a total-noise density (with point-mass relative noise) kills the
/// NOON Fisher information at every theta.
pub fn zero_fi_check(noise_total: &NoiseDistribution, n: usize) -> Result<ZeroFiCheck> {
    check_even(n)?;
    let c = noise_total.fourier_coefficients(2 * n)?;
    let residual = 0.5 * (1.0 + c.v()[2 * n]);
    Ok(ZeroFiCheck {
        vanishes: residual < 1e-10,
        residual,
    })
}

/// Binned distribution of F / N^2.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Per-trial values in trial order.
    pub samples: Vec<f64>,
}

impl Histogram {
    /// `bins` uniform bins on [0, 1]; values at or above 1 land in the last bin.
    pub fn from_samples(samples: Vec<f64>, bins: usize) -> Self {
        let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for &x in &samples {
            let b = ((x * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Self {
            edges,
            counts,
            samples,
        }
    }

    /// Index of the most populated bin (first one on ties).
    pub fn mode_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    /// Fraction of samples in [lo, hi].
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let hits = self.samples.iter().filter(|&&x| x >= lo && x <= hi).count();
        hits as f64 / self.samples.len().max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_left,bin_right,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{}", self.edges[i], self.edges[i + 1], c)?;
        }
        Ok(())
    }
}

/// Seed of trial `trial` derived from the study seed.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Histogram of max_theta F / N^2 over random multi-peak total noise with a
/// point-mass relative noise, 50 bins on [0, 1].
pub fn fisher_histogram_study(n: usize, m: usize, sigma: f64, trials: usize, seed: u64) -> Result<Histogram> {
    check_even(n)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let nn = (n * n) as f64;
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let total = sample_multi_peak(m, sigma, trial_seed(seed, t as u64))?;
            let pair = NoisePair::new(total, NoiseDistribution::Delta);
            Ok(noon_fisher_optimal(n, &pair)?.fisher / nn)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Histogram::from_samples(samples, 50))
}
