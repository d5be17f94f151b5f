//! One-dimensional maximization helpers shared by the Fisher routines.

use crate::error::Result;

/// Maximized Fisher information with the sampled curve it was read from.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FisherResult {
    pub theta: f64,
    pub fisher: f64,
    /// (theta, F) on the coarse grid, in grid order.
    pub curve: Vec<(f64, f64)>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` inside `[lo, hi]`.
///
/// Returns `(x, f(x))` for the best point seen, stopping once the bracket
/// is narrower than `tol`.
pub fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    while (hi - lo).abs() > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

/// Scans `points` equispaced values on `[lo, lo + span)` and refines the best
/// one by golden-section search within one grid step on either side.
pub fn grid_then_golden<F>(
    mut f: F,
    lo: f64,
    span: f64,
    points: usize,
    tol: f64,
) -> Result<(f64, f64, Vec<(f64, f64)>)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let step = span / points as f64;
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let x = lo + step * i as f64;
        curve.push((x, f(x)?));
    }
    let (x0, f0) = best_of(&curve);
    let (x, fx) = golden_max(&mut f, x0 - step, x0 + step, tol)?;
    Ok(if fx > f0 { (x, fx, curve) } else { (x0, f0, curve) })
}

/// First point attaining the maximum value.
pub fn best_of(curve: &[(f64, f64)]) -> (f64, f64) {
    curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
}
