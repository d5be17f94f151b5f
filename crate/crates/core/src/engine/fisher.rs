//! Fisher information of a joint Fourier table.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::joint::JointFourierTable;
use crate::error::{Error, Result};

/// Probabilities at or below this use the double-zero limit 2 max(P'', 0).
pub const ZERO_FLOOR: f64 = 1e-14;
/// Reconstructed probabilities below this are reported as errors.
pub const NEGATIVE_FLOOR: f64 = -1e-9;
/// Below this, P'^2 / P is dominated by rounding in P and is capped by its
/// double-zero limit 2 P''.
pub const SMALL_FLOOR: f64 = 1e-11;
const SKIP_MASS: f64 = 1e-18;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Contribution of one outcome to the Fisher sum.
#[inline]
pub(crate) fn outcome_term(p: f64, dp: f64, d2p: impl FnOnce() -> f64, mu1: usize, mu2: usize) -> Result<f64> {
    if p < NEGATIVE_FLOOR {
        return Err(Error::NegativeProbability {
            value: p,
            mu1: mu1 as i64,
            mu2: mu2 as i64,
        });
    }
    Ok(if p > SMALL_FLOOR {
        dp * dp / p
    } else if p > ZERO_FLOOR {
        let cap = 2.0 * d2p();
        let t = dp * dp / p;
        if cap > 0.0 && t > cap {
            cap
        } else {
            t
        }
    } else {
        2.0 * d2p().max(0.0)
    })
}

/// F(theta) = sum over outcome pairs of P'^2 / P.
///
/// With u_k = p_k cos k theta - q_k sin k theta and v_k = q_k cos k theta +
/// p_k sin k theta, P = a.u + b.v, so the whole table of P and P' is one
/// matrix product [a b] [u du; v dv].
pub fn fisher_from_fourier(table: &JointFourierTable, theta: f64) -> Result<f64> {
    let n = table.n;
    let d = n + 1;
    let (d1, d2) = (table.outcomes1, table.outcomes2);
    let trig: Vec<(f64, f64)> = (0..d).map(|k| (k as f64 * theta).sin_cos()).collect();
    let left = DMatrix::from_fn(d1, 2 * d, |i, k| {
        if k < d {
            table.a1[i * d + k]
        } else {
            table.b1[i * d + k - d]
        }
    });
    let mut right = DMatrix::zeros(2 * d, 2 * d2);
    for mu2 in 0..d2 {
        let (p, q) = table.row2(mu2);
        for k in 0..d {
            let (s, c) = trig[k];
            let kf = k as f64;
            right[(k, mu2)] = p[k] * c - q[k] * s;
            right[(d + k, mu2)] = q[k] * c + p[k] * s;
            right[(k, d2 + mu2)] = -kf * (p[k] * s + q[k] * c);
            right[(d + k, d2 + mu2)] = kf * (p[k] * c - q[k] * s);
        }
    }
    let prod = left * &right;
    let mut total = Kahan::default();
    for mu2 in 0..d2 {
        for mu1 in 0..d1 {
            let term = outcome_term(
                prod[(mu1, mu2)],
                prod[(mu1, d2 + mu2)],
                || {
                    let (a, b) = table.row1(mu1);
                    -(0..d)
                        .map(|k| ((k * k) as f64) * (a[k] * right[(k, mu2)] + b[k] * right[(d + k, mu2)]))
                        .sum::<f64>()
                },
                mu1,
                mu2,
            )?;
            total.add(term);
        }
    }
    Ok(total.value())
}

/// F on the grid theta_j = theta0 + period * j / points, j = 0..points.
///
/// `period` must divide 2 pi. Each outcome pair is evaluated with one FFT
/// of the folded series sum_k (1 - k) c_k e^{i k theta}, whose real and
/// imaginary parts are P and P'; P'' is only transformed where needed.
pub fn fisher_curve(table: &JointFourierTable, theta0: f64, period: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if points == 0 || !(period > 0.0) {
        return Err(Error::InvalidArgument("curve needs points > 0 and a positive period".into()));
    }
    let ratio = 2.0 * PI / period;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > 1e-9 * ratio {
        // Not a divisor of 2 pi: fall back to pointwise evaluation.
        return (0..points)
            .map(|j| {
                let t = theta0 + period * j as f64 / points as f64;
                fisher_from_fourier(table, t).map(|f| (t, f))
            })
            .collect();
    }
    let grid = r as usize * points;
    let n = table.n;
    let d = n + 1;
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(grid);
    let shift: Vec<Complex64> = (0..d).map(|k| Complex64::from_polar(1.0, k as f64 * theta0)).collect();
    let partial: Vec<Result<Vec<Kahan>>> = (0..table.outcomes2)
        .into_par_iter()
        .map_init(
            || (vec![ZERO; grid], vec![ZERO; grid], vec![ZERO; fft.get_inplace_scratch_len()]),
            |(buf, buf2, scratch), mu2| {
                let mut acc = vec![Kahan::default(); points];
                let (p, q) = table.row2(mu2);
                let mut chat = vec![ZERO; d];
                for mu1 in 0..table.outcomes1 {
                    let (a, b) = table.row1(mu1);
                    let mut mass = 0.0;
                    for k in 0..d {
                        let big_a = a[k] * p[k] + b[k] * q[k];
                        let big_b = b[k] * p[k] - a[k] * q[k];
                        mass += big_a.abs() + big_b.abs();
                        let c = if k == 0 {
                            Complex64::new(big_a, 0.0)
                        } else {
                            Complex64::new(0.5 * big_a, -0.5 * big_b)
                        };
                        chat[k] = c * shift[k];
                    }
                    if mass < SKIP_MASS {
                        continue;
                    }
                    fold(buf, &chat, grid, |k| Complex64::new(1.0 - k as f64, 0.0));
                    fft.process_with_scratch(buf, scratch);
                    let mut second_done = false;
                    for j in 0..points {
                        let prob = buf[j].re;
                        let dprob = buf[j].im;
                        if prob <= SMALL_FLOOR && !second_done {
                            fold(buf2, &chat, grid, |k| Complex64::new(-((k * k) as f64), 0.0));
                            fft.process_with_scratch(buf2, scratch);
                            second_done = true;
                        }
                        let term = outcome_term(prob, dprob, || buf2[j].re, mu1, mu2)?;
                        acc[j].add(term);
                    }
                }
                Ok(acc)
            },
        )
        .collect();
    let mut total = vec![Kahan::default(); points];
    for part in partial {
        for (t, a) in total.iter_mut().zip(part?) {
            t.add(a.value());
        }
    }
    Ok(total
        .into_iter()
        .enumerate()
        .map(|(j, f)| (theta0 + period * j as f64 / points as f64, f.value()))
        .collect())
}

// buf[k mod grid] = sum of weight(k) c_k over k in [-N, N], c_{-k} = conj(c_k)
// up to the weight, which is applied to the signed frequency.
fn fold<W: Fn(i64) -> Complex64>(buf: &mut [Complex64], chat: &[Complex64], grid: usize, weight: W) {
    buf.iter_mut().for_each(|x| *x = ZERO);
    let g = grid as i64;
    buf[0] += weight(0) * chat[0];
    for (k, c) in chat.iter().enumerate().skip(1) {
        let ki = k as i64;
        buf[(ki % g) as usize] += weight(ki) * c;
        buf[((-ki).rem_euclid(g)) as usize] += weight(-ki) * c.conj();
    }
}
