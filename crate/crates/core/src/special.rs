//! Special functions: log-binomials and modified Bessel functions.

/// ln C(n, k) computed from a running sum of logarithms.
///
/// Exact to a few ulps for the particle numbers used here (n below ~10^5).
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "ln_binomial: k > n");
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Binomial weights C(n, k) / 2^n for k = 0..=n, evaluated in log space.
pub fn binomial_weights(n: usize) -> Vec<f64> {
    let mut ln_fact = vec![0.0; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln2n = n as f64 * std::f64::consts::LN_2;
    (0..=n)
        .map(|k| {
            let w = (ln_fact[n] - ln_fact[k] - ln_fact[n - k] - ln2n).exp();
            if w < 1e-300 {
                0.0
            } else {
                w
            }
        })
        .collect()
}

/// e^{-x} I_0(x) for x >= 0.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_i0_scaled: negative argument");
    if x <= 30.0 {
        // Power series; all terms positive.
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 1.0;
        while term > f64::EPSILON * sum * 1e-2 {
            term *= q / (m * m);
            sum += term;
            m += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Asymptotic series, truncated well before its smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * x * kf);
            if next < f64::EPSILON * sum * 1e-2 || next > term {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// Ratios I_K(kappa) / I_0(kappa) for K = 0..=kmax.
///
/// Uses downward recurrence on r_K = I_K / I_{K-1} started far enough above
/// `kmax` that the truncation error has decayed below double precision. The
/// result stays finite for kappa up to 10^6 and beyond.
pub fn bessel_ratios(kappa: f64, kmax: usize) -> Vec<f64> {
    assert!(kappa >= 0.0 && kappa.is_finite(), "bessel_ratios: bad kappa");
    let mut out = vec![0.0; kmax + 1];
    out[0] = 1.0;
    if kappa == 0.0 || kmax == 0 {
        return out;
    }
    let k1 = (kmax + 1) as f64;
    let start = ((k1 * k1 + 40.0 * kappa).sqrt() + 40.0).ceil() as usize;
    let mut ratios = vec![0.0; kmax + 1];
    let mut r = 0.0;
    for k in (1..=start).rev() {
        r = 1.0 / (2.0 * k as f64 / kappa + r);
        if k <= kmax {
            ratios[k] = r;
        }
    }
    let mut acc = 1.0;
    for k in 1..=kmax {
        acc *= ratios[k];
        out[k] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
        let w = binomial_weights(4);
        let want = [1.0, 4.0, 6.0, 4.0, 1.0].map(|x| x / 16.0);
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let total: f64 = binomial_weights(1000).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn i0_reference_values() {
        // I_0(1) = 1.2660658777520082, I_0(10) = 2815.716628466254
        assert!((bessel_i0_scaled(1.0) * 1f64.exp() - 1.2660658777520082).abs() < 1e-14);
        let i10 = bessel_i0_scaled(10.0) * 10f64.exp();
        assert!((i10 / 2815.716628466254 - 1.0).abs() < 1e-13);
        // Continuity across the series/asymptotic switch.
        let a = bessel_i0_scaled(30.0);
        let b = bessel_i0_scaled(30.000001);
        assert!((a - b).abs() / a < 1e-6);
    }

    #[test]
    fn ratio_reference_values() {
        // I_1(1)/I_0(1) and I_2(2)/I_0(2).
        let r = bessel_ratios(1.0, 3);
        assert!((r[1] - 0.5651591039924851 / 1.2660658777520082).abs() < 1e-14);
        let r = bessel_ratios(2.0, 2);
        assert!((r[2] - 0.6889484476987382 / 2.2795853023360673).abs() < 1e-14);
        // Large kappa stays finite and close to the Gaussian limit exp(-K^2/(2 kappa)).
        let r = bessel_ratios(1e6, 100);
        assert!(r.iter().all(|x| x.is_finite()));
        assert!((r[100] - (-100.0f64 * 100.0 / 2e6).exp()).abs() < 1e-4);
    }
}
