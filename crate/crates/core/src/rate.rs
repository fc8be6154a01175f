//! Log-log rate fitting.

use crate::error::{invalid, Result};

/// Fewest points a fit accepts.
pub const MIN_POINTS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// In [0, 1].
    pub r_squared: f64,
    /// (ln v, ln err′) pairs used by the fit.
    pub points: Vec<(f64, f64)>,
    pub log_correction_stripped: bool,
    /// Input points with nonpositive or non-finite error.
    pub dropped: usize,
}

/// (ln 2v)^{(d−1)(a+b)}, the logarithmic factor of the class rates.
pub fn log_correction_exponent(d: usize, a: f64, b: f64) -> f64 {
    (d as f64 - 1.0) * (a + b)
}

/// Ordinary least squares of ln err′ on ln v with err′ = err/(ln 2v)^strip.
/// Points with err ≤ 0 are dropped; fewer than four remaining is an error.
pub fn fit_rate(points: &[(f64, f64)], strip: Option<f64>) -> Result<RateFit> {
    let mut used = Vec::with_capacity(points.len());
    let mut dropped = 0;
    for &(v, err) in points {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("v must be positive, got {v}")));
        }
        if !(err > 0.0 && err.is_finite()) {
            dropped += 1;
            continue;
        }
        let corrected = match strip {
            Some(e) => err / (2.0 * v).ln().powf(e),
            None => err,
        };
        used.push((v.ln(), corrected.ln()));
    }
    if used.len() < MIN_POINTS {
        return Err(invalid(format!(
            "rate fit needs {MIN_POINTS} positive points, got {}",
            used.len()
        )));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit needs at least two distinct v"));
    }
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = used.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: used,
        log_correction_stripped: strip.is_some(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Vec<f64> {
        vec![4.0, 8.0, 16.0, 32.0, 64.0]
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = grid().into_iter().map(|v| (v, v.powi(-2))).collect();
        let fit = fit_rate(&pts, None).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(!fit.log_correction_stripped);
    }

    #[test]
    fn stripping_removes_log_factor() {
        let pts: Vec<(f64, f64)> = grid().into_iter().map(|v| (v, 3.0 / v * (2.0 * v).ln())).collect();
        let fit = fit_rate(&pts, Some(1.0)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-9);
        assert!(fit.log_correction_stripped);
        // with exponent zero the stripped fit is the raw fit
        let raw = fit_rate(&pts, None).unwrap();
        let zero = fit_rate(&pts, Some(log_correction_exponent(1, 1.0, 0.0))).unwrap();
        assert_eq!(raw.slope, zero.slope);
    }

    #[test]
    fn jitter_lowers_r_squared() {
        let jitter = [1.3, 0.8, 1.1, 0.7, 1.2];
        let pts: Vec<(f64, f64)> = grid().into_iter().zip(jitter).map(|(v, j)| (v, j / v)).collect();
        let fit = fit_rate(&pts, None).unwrap();
        assert!(fit.r_squared < 1.0 && fit.r_squared > 0.0);
    }

    #[test]
    fn drops_nonpositive_and_requires_four() {
        let mut pts: Vec<(f64, f64)> = grid().into_iter().map(|v| (v, 1.0 / v)).collect();
        pts.push((128.0, 0.0));
        let fit = fit_rate(&pts, None).unwrap();
        assert_eq!(fit.dropped, 1);
        assert_eq!(fit.points.len(), 5);
        pts[0].1 = -1.0;
        pts[1].1 = f64::NAN;
        assert!(fit_rate(&pts, None).is_err());
        assert!(fit_rate(&[(2.0, 1.0); 4], None).is_err());
    }

    proptest! {
        #[test]
        fn slope_invariant_to_scaling(scale in 1e-6f64..1e6, errs in proptest::collection::vec(1e-6f64..1.0, 5)) {
            let pts: Vec<(f64, f64)> = grid().into_iter().zip(errs).collect();
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(v, e)| (v, e * scale)).collect();
            let a = fit_rate(&pts, None).unwrap();
            let b = fit_rate(&scaled, None).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-9);
            prop_assert!((b.intercept - a.intercept - scale.ln()).abs() < 1e-9);
        }
    }
}
