//! Phase-noise densities on [-pi, pi] and their trigonometric moments.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::special::{bessel_i0_scaled, bessel_ratios};

const NORM_TOL: f64 = 1e-9;

/// A phase-noise density on [-pi, pi].
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseDistribution {
    /// Point mass at 0.
    Delta,
    /// Uniform density 1 / 2pi.
    Flat,
    /// Density proportional to exp(cos(eps) / sigma^2).
    VonMises { sigma: f64 },
    /// Equal-weight mixture of von Mises peaks of width sigma at `positions`.
    MultiPeak { sigma: f64, positions: Vec<f64> },
    /// Samples on a uniform periodic mesh.
    Tabulated(TabulatedDensity),
}

/// Density samples at eps_j = -pi + 2 pi j / len, j = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    values: Vec<f64>,
}

impl TabulatedDensity {
    /// Requires nonnegative values whose mesh integral is 1 within 1e-9.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("tabulated density needs at least 2 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("tabulated density must be finite and nonnegative".into()));
        }
        let t = Self { values };
        let total = t.mass();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(t)
    }

    /// Rescales nonnegative samples to unit mass.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        let h = 2.0 * PI / values.len().max(1) as f64;
        let total: f64 = values.iter().sum::<f64>() * h;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidArgument("tabulated density has no mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Self::new(values)
    }

    /// Reads two whitespace- or comma-separated columns (eps, density).
    ///
    /// The mesh must be uniform with spacing 2pi/len and start at -pi; a
    /// closing sample at +pi is accepted and dropped. Lines starting with
    /// '#' are ignored. The density is renormalized on the mesh.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut eps = Vec::new();
        let mut vals = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected 2 columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            eps.push(parse(cols[0])?);
            vals.push(parse(cols[1])?);
        }
        if eps.len() < 2 {
            return Err(Error::Parse("need at least two samples".into()));
        }
        if (eps[eps.len() - 1] - PI).abs() < 1e-9 && eps.len() > 2 {
            eps.pop();
            vals.pop();
        }
        let h = 2.0 * PI / eps.len() as f64;
        for (j, e) in eps.iter().enumerate() {
            let want = -PI + h * j as f64;
            if (e - want).abs() > 1e-6 * h.max(1e-3) {
                return Err(Error::Parse(format!(
                    "mesh is not uniform on [-pi, pi): sample {j} at {e}, expected {want}"
                )));
            }
        }
        Self::normalized(vals)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.values.len() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + self.spacing() * j as f64
    }

    fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    // Periodic linear interpolation.
    fn at(&self, eps: f64) -> f64 {
        let h = self.spacing();
        let len = self.values.len();
        let x = (eps + PI) / h;
        let j = x.floor();
        let frac = x - j;
        let j0 = (j as i64).rem_euclid(len as i64) as usize;
        let j1 = (j0 + 1) % len;
        self.values[j0] * (1.0 - frac) + self.values[j1] * frac
    }
}

/// Pointwise density value, or a marker for the point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    PointMass,
    Value(f64),
}

impl NoiseDistribution {
    pub fn von_mises(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self::VonMises { sigma })
    }

    pub fn multi_peak(sigma: f64, positions: Vec<f64>) -> Result<Self> {
        check_sigma(sigma)?;
        if positions.is_empty() {
            return Err(Error::InvalidArgument("multi-peak noise needs at least one peak".into()));
        }
        if positions.iter().any(|x| !x.is_finite() || x.abs() > PI + 1e-12) {
            return Err(Error::InvalidArgument("peak positions must lie in [-pi, pi]".into()));
        }
        Ok(Self::MultiPeak { sigma, positions })
    }

    /// Parses "delta", "flat" or a positive width sigma.
    pub fn from_token(token: &str) -> Result<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "delta" => Ok(Self::Delta),
            "flat" => Ok(Self::Flat),
            other => {
                let sigma: f64 = other.parse().map_err(|_| {
                    Error::InvalidArgument(format!("noise '{token}' is not 'delta', 'flat' or a width"))
                })?;
                Self::von_mises(sigma)
            }
        }
    }

    /// Short stable description, used in manifests and cache keys.
    pub fn describe(&self) -> String {
        match self {
            Self::Delta => "delta".into(),
            Self::Flat => "flat".into(),
            Self::VonMises { sigma } => format!("vonmises:{sigma:e}"),
            Self::MultiPeak { sigma, positions } => {
                let xs: Vec<String> = positions.iter().map(|x| format!("{x:e}")).collect();
                format!("multipeak:{sigma:e}:{}", xs.join(","))
            }
            Self::Tabulated(t) => {
                let xs: Vec<String> = t.values.iter().map(|x| format!("{x:e}")).collect();
                format!("tabulated:{}", xs.join(","))
            }
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Self::Delta)
    }

    /// Density at eps in [-pi, pi].
    pub fn density(&self, eps: f64) -> Result<DensityValue> {
        if !(eps.abs() <= PI + 1e-12) {
            return Err(Error::InvalidArgument(format!("eps = {eps} outside [-pi, pi]")));
        }
        Ok(match self {
            Self::Delta => DensityValue::PointMass,
            Self::Flat => DensityValue::Value(1.0 / (2.0 * PI)),
            Self::VonMises { sigma } => DensityValue::Value(von_mises_density(*sigma, eps)),
            Self::MultiPeak { sigma, positions } => DensityValue::Value(
                positions
                    .iter()
                    .map(|x| von_mises_density(*sigma, eps - x))
                    .sum::<f64>()
                    / positions.len() as f64,
            ),
            Self::Tabulated(t) => DensityValue::Value(t.at(eps)),
        })
    }

    /// V_K and W_K for K = 0..=kmax.
    pub fn fourier_coefficients(&self, kmax: usize) -> Result<FourierCoefficients> {
        if kmax < 1 {
            return Err(Error::InvalidArgument("Kmax must be >= 1".into()));
        }
        let (v, w) = match self {
            Self::Delta => (vec![1.0; kmax + 1], vec![0.0; kmax + 1]),
            Self::Flat => {
                let mut v = vec![0.0; kmax + 1];
                v[0] = 1.0;
                (v, vec![0.0; kmax + 1])
            }
            Self::VonMises { sigma } => (bessel_ratios(1.0 / (sigma * sigma), kmax), vec![0.0; kmax + 1]),
            Self::MultiPeak { sigma, positions } => {
                let rho = bessel_ratios(1.0 / (sigma * sigma), kmax);
                let m = positions.len() as f64;
                let mut v = vec![0.0; kmax + 1];
                let mut w = vec![0.0; kmax + 1];
                for k in 0..=kmax {
                    let (s, c) = positions
                        .iter()
                        .map(|x| (k as f64 * x).sin_cos())
                        .fold((0.0, 0.0), |acc, sc| (acc.0 + sc.0, acc.1 + sc.1));
                    v[k] = rho[k] * c / m;
                    w[k] = rho[k] * s / m;
                }
                (v, w)
            }
            Self::Tabulated(t) => {
                let h = t.spacing();
                let mut v = vec![0.0; kmax + 1];
                let mut w = vec![0.0; kmax + 1];
                for k in 0..=kmax {
                    for (j, p) in t.values.iter().enumerate() {
                        if *p == 0.0 {
                            continue;
                        }
                        let (s, c) = (k as f64 * t.node(j)).sin_cos();
                        v[k] += p * c;
                        w[k] += p * s;
                    }
                    v[k] *= h;
                    w[k] *= h;
                }
                v[0] = 1.0;
                w[0] = 0.0;
                (v, w)
            }
        };
        Ok(FourierCoefficients { v, w })
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise width must be positive and finite, got {sigma}")));
    }
    Ok(())
}

fn von_mises_density(sigma: f64, eps: f64) -> f64 {
    let kappa = 1.0 / (sigma * sigma);
    ((eps.cos() - 1.0) * kappa).exp() / (2.0 * PI * bessel_i0_scaled(kappa))
}

/// `M` peaks of width sigma at positions drawn uniformly from [-pi, pi).
pub fn sample_multi_peak(m: usize, sigma: f64, seed: u64) -> Result<NoiseDistribution> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..m).map(|_| rng.gen_range(-PI..PI)).collect();
    NoiseDistribution::multi_peak(sigma, positions)
}

/// Trigonometric moments V_K = int P cos(K eps), W_K = int P sin(K eps).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    v: Vec<f64>,
    w: Vec<f64>,
}

impl FourierCoefficients {
    pub fn kmax(&self) -> usize {
        self.v.len() - 1
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// P~(k) = int P(eps) e^{-i k eps} for |k| <= kmax.
    pub fn ptilde(&self, k: i64) -> Complex64 {
        let a = k.unsigned_abs() as usize;
        let z = Complex64::new(self.v[a], -self.w[a]);
        if k >= 0 {
            z
        } else {
            z.conj()
        }
    }

    /// Truncated series (1 + 2 sum_K V_K cos K eps + W_K sin K eps) / 2pi.
    pub fn reconstruct(&self, eps: f64, kmax: usize) -> f64 {
        let top = kmax.min(self.kmax());
        let mut s = 1.0;
        for k in 1..=top {
            let (sn, cs) = (k as f64 * eps).sin_cos();
            s += 2.0 * (self.v[k] * cs + self.w[k] * sn);
        }
        s / (2.0 * PI)
    }
}

/// Independent noise on the total and relative phases.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePair {
    pub total: NoiseDistribution,
    pub relative: NoiseDistribution,
}

impl NoisePair {
    pub fn new(total: NoiseDistribution, relative: NoiseDistribution) -> Self {
        Self { total, relative }
    }

    pub fn noiseless() -> Self {
        Self::new(NoiseDistribution::Delta, NoiseDistribution::Delta)
    }

    /// Moments of both densities up to kmax.
    pub fn coefficients(&self, kmax: usize) -> Result<(FourierCoefficients, FourierCoefficients)> {
        Ok((
            self.total.fourier_coefficients(kmax)?,
            self.relative.fourier_coefficients(kmax)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn value(d: &NoiseDistribution, e: f64) -> f64 {
        match d.density(e).unwrap() {
            DensityValue::Value(v) => v,
            DensityValue::PointMass => panic!("point mass"),
        }
    }

    #[test]
    fn delta_and_flat_moments() {
        let c = NoiseDistribution::Delta.fourier_coefficients(5).unwrap();
        assert!(c.v().iter().all(|&v| v == 1.0) && c.w().iter().all(|&w| w == 0.0));
        let c = NoiseDistribution::Flat.fourier_coefficients(5).unwrap();
        assert_eq!(c.v()[0], 1.0);
        assert!(c.v()[1..].iter().all(|&v| v == 0.0));
        assert_eq!(NoiseDistribution::Delta.density(0.3).unwrap(), DensityValue::PointMass);
        assert!((value(&NoiseDistribution::Flat, -2.0) - 1.0 / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn von_mises_moment_matches_quadrature() {
        let d = NoiseDistribution::von_mises(0.5).unwrap();
        let c = d.fourier_coefficients(4).unwrap();
        let q = integrate(|e| value(&d, e) * (4.0 * e).cos(), -PI, PI, 1e-13).unwrap();
        assert!((c.v()[4] - q).abs() < 1e-10);
        let norm = integrate(|e| value(&d, e), -PI, PI, 1e-13).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn broad_von_mises_is_nearly_flat() {
        let d = NoiseDistribution::von_mises(1e3).unwrap();
        assert!((value(&d, 0.0) / value(&d, PI) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn multi_peak_moments_match_quadrature() {
        let d = sample_multi_peak(5, 0.3, 11).unwrap();
        let c = d.fourier_coefficients(6).unwrap();
        for k in 0..=6 {
            let kf = k as f64;
            let v = integrate(|e| value(&d, e) * (kf * e).cos(), -PI, PI, 1e-13).unwrap();
            let w = integrate(|e| value(&d, e) * (kf * e).sin(), -PI, PI, 1e-13).unwrap();
            assert!((c.v()[k] - v).abs() < 1e-10 && (c.w()[k] - w).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn multi_peak_trapezoid_normalization() {
        let d = sample_multi_peak(50, 2.0 * PI / 100.0, 3).unwrap();
        let n = 1 << 14;
        let h = 2.0 * PI / n as f64;
        let total: f64 = (0..n).map(|j| value(&d, -PI + h * j as f64)).sum::<f64>() * h;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_centered_peak_is_von_mises() {
        let a = NoiseDistribution::multi_peak(0.4, vec![0.0]).unwrap();
        let b = NoiseDistribution::von_mises(0.4).unwrap();
        assert_eq!(a.fourier_coefficients(10).unwrap(), b.fourier_coefficients(10).unwrap());
        assert!((value(&a, 1.1) - value(&b, 1.1)).abs() < 1e-15);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        assert_eq!(sample_multi_peak(7, 0.1, 42).unwrap(), sample_multi_peak(7, 0.1, 42).unwrap());
        assert_ne!(sample_multi_peak(7, 0.1, 42).unwrap(), sample_multi_peak(7, 0.1, 43).unwrap());
    }

    #[test]
    fn tabulated_round_trip_and_errors() {
        let n = 64;
        let h = 2.0 * PI / n as f64;
        let text: String = (0..=n)
            .map(|j| {
                let e = -PI + h * j as f64;
                format!("{e} {}\n", (1.0 + 0.5 * e.cos()) / (2.0 * PI))
            })
            .collect();
        let t = TabulatedDensity::parse(&text).unwrap();
        assert_eq!(t.len(), n);
        let c = NoiseDistribution::Tabulated(t).fourier_coefficients(3).unwrap();
        assert!((c.v()[1] - 0.25).abs() < 1e-12 && c.v()[2].abs() < 1e-12);
        assert!(TabulatedDensity::parse("0 1\n0.5 1\n3 1\n").is_err());
        assert!(TabulatedDensity::new(vec![1.0, -1.0]).is_err());
        assert!(TabulatedDensity::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(NoiseDistribution::von_mises(0.0).is_err());
        assert!(NoiseDistribution::Flat.fourier_coefficients(0).is_err());
        assert!(NoiseDistribution::Flat.density(4.0).is_err());
        assert!(sample_multi_peak(0, 0.1, 1).is_err());
        assert_eq!(NoiseDistribution::from_token("FLAT").unwrap(), NoiseDistribution::Flat);
        assert!(NoiseDistribution::from_token("wide").is_err());
    }
}
