//! Power-law fits F = beta N^alpha.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub beta: f64,
    pub alpha: f64,
    /// RMS residual in ln F.
    pub rms: f64,
    pub points: usize,
}

/// Ordinary least squares of ln F against ln N. `tail` keeps only the last
/// points (largest N after sorting) when given.
pub fn fit_power_law(points: &[(f64, f64)], tail: Option<usize>) -> Result<PowerLawFit> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(t) = tail {
        let skip = pts.len().saturating_sub(t);
        pts.drain(..skip);
    }
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!("power-law fit needs >= 3 points, got {}", pts.len())));
    }
    if let Some(&(n, f)) = pts.iter().find(|(n, f)| !(*n > 0.0) || !(*f > 0.0)) {
        return Err(Error::InvalidArgument(format!("power-law fit needs N, F > 0; got ({n}, {f})")));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("power-law fit needs distinct N".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum::<f64>() / m).sqrt();
    Ok(PowerLawFit {
        beta: intercept.exp(),
        alpha,
        rms,
        points: pts.len(),
    })
}
