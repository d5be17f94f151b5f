//! Real symmetric tridiagonal eigenproblems.
//!
//! Eigenvalues are isolated by Sturm-sequence bisection and eigenvectors are
//! recovered by inverse iteration on a pivoted tridiagonal LU factorization.
//! Both steps cost O(n) memory and O(n) work per sweep, which keeps the
//! collective-spin matrices (dimension N + 1) cheap even for N in the
//! thousands.

use crate::error::{Error, Result};

const MAX_BISECTION_STEPS: usize = 200;
const MAX_INVERSE_ITERATIONS: usize = 8;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch(format!(
                "diagonal has {} entries but off-diagonal has {}",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivot_floor = f64::EPSILON * self.norm_bound();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivot_floor {
            q = -pivot_floor;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = (self.diag[i] - x) - e * e / q;
            if q.abs() < pivot_floor {
                q = -pivot_floor;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue index {k} out of range for dimension {}",
                self.dim()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm_bound() * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..MAX_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Unit eigenvector for an eigenvalue approximation `lambda`.
    ///
    /// The sign is fixed so that the entry of largest magnitude is positive.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let norm = self.norm_bound();
        let lu = ShiftedLu::factor(self, lambda, f64::EPSILON * norm);
        let mut x = start_vector(n);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            lu.solve(&mut x);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::EigenNonConvergence(format!(
                    "inverse iteration overflow at lambda = {lambda:e}, dimension {n}"
                )));
            }
            normalize(&mut x);
            let tx = self.mat_vec(&x);
            residual = tx
                .iter()
                .zip(&x)
                .map(|(t, v)| (t - lambda * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= 1e3 * f64::EPSILON * norm * (n as f64).sqrt() {
                fix_sign(&mut x);
                return Ok(x);
            }
        }
        Err(Error::EigenNonConvergence(format!(
            "residual {residual:e} after {MAX_INVERSE_ITERATIONS} inverse iterations \
             (lambda = {lambda:e}, dimension {n}, norm bound {norm:e})"
        )))
    }

    /// Smallest eigenvalue together with its eigenvector.
    pub fn lowest_eigenpair(&self) -> Result<(f64, Vec<f64>)> {
        let lambda = self.eigenvalue(0)?;
        let v = self.eigenvector(lambda)?;
        Ok((lambda, v))
    }
}

/// LU factorization of `T - shift * I` with partial pivoting.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, pivot_floor: f64) -> Self {
        let n = t.dim();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = pivot_floor;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < pivot_floor {
                *p = if *p < 0.0 { -pivot_floor } else { pivot_floor };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

// Deterministic, non-symmetric start so that no parity sector is missed.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            0.5 + (z >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn normalize(x: &mut [f64]) {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return;
    }
    let norm = x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt() * scale;
    for v in x.iter_mut() {
        *v /= norm;
    }
}

fn fix_sign(x: &mut [f64]) {
    let (_, pivot) = x
        .iter()
        .enumerate()
        .fold((0.0_f64, 0.0_f64), |(best, val), (_, v)| {
            if v.abs() > best {
                (v.abs(), *v)
            } else {
                (best, val)
            }
        });
    if pivot < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}
