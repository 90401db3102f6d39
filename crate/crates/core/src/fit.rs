//! Power-law extrapolation: least-squares fits of v = L + C * delta^beta.

use crate::error::{Error, Result};

/// Result of a power-law fit. `limit` is the extrapolated value at delta = 0.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerLawFit {
    pub limit: f64,
    pub rate_exponent: f64,
    pub amplitude: f64,
    pub residual: f64,
}

/// Fits v = L + C * delta^beta to (delta, v) samples with strictly
/// decreasing delta. When `fixed_exponent` is given only (L, C) are fitted;
/// otherwise beta is estimated from log-differences of consecutive samples
/// and then refined by a scalar search on the profiled residual.
pub fn fit_power_law(samples: &[(f64, f64)], fixed_exponent: Option<f64>) -> Result<PowerLawFit> {
    if samples.len() < 3 {
        return Err(Error::Domain("fit_power_law needs at least 3 samples".into()));
    }
    for w in samples.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::Domain("deltas must be strictly decreasing".into()));
        }
    }
    if samples.iter().any(|(d, v)| !(*d > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("samples must have positive delta and finite values".into()));
    }

    // constant sequence: limit is the common value
    let vmax = samples.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let spread = samples
        .iter()
        .map(|(_, v)| v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if spread.1 - spread.0 <= 1e-14 * vmax.max(1.0) {
        let mean = samples.iter().map(|(_, v)| v).sum::<f64>() / samples.len() as f64;
        return Ok(PowerLawFit {
            limit: mean,
            rate_exponent: fixed_exponent.unwrap_or(0.0),
            amplitude: 0.0,
            residual: 0.0,
        });
    }

    match fixed_exponent {
        Some(beta) => linear_fit(samples, beta),
        None => {
            let beta0 = exponent_from_log_differences(samples)?;
            // refine by golden search on the profiled sum of squares
            let obj = |b: f64| match linear_fit(samples, b) {
                Ok(f) => f.residual,
                Err(_) => f64::INFINITY,
            };
            let (beta, _) = crate::minimize::golden_min_1d(obj, beta0 * 0.5, beta0 * 2.0, 1e-12);
            let cand = linear_fit(samples, beta)?;
            let base = linear_fit(samples, beta0)?;
            Ok(if cand.residual <= base.residual { cand } else { base })
        }
    }
}

/// Least squares in (L, C) for fixed beta.
fn linear_fit(samples: &[(f64, f64)], beta: f64) -> Result<PowerLawFit> {
    let n = samples.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(d, v) in samples {
        let x = d.powf(beta);
        sx += x;
        sxx += x * x;
        sy += v;
        sxy += x * v;
    }
    let det = n * sxx - sx * sx;
    if det.abs() <= 1e-14 * (n * sxx).abs().max(1e-300) {
        return Err(Error::SingularFit(format!("degenerate basis for exponent {beta}")));
    }
    let limit = (sxx * sy - sx * sxy) / det;
    let amp = (n * sxy - sx * sy) / det;
    let mut ss = 0.0;
    for &(d, v) in samples {
        let r = v - limit - amp * d.powf(beta);
        ss += r * r;
    }
    Ok(PowerLawFit {
        limit,
        rate_exponent: beta,
        amplitude: amp,
        residual: (ss / n).sqrt(),
    })
}

/// Slope of log|v_k - v_{k+1}| against log delta_k; exact for noise-free
/// samples on a geometric delta grid.
fn exponent_from_log_differences(samples: &[(f64, f64)]) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in samples.windows(2) {
        let dv = (w[0].1 - w[1].1).abs();
        if dv > 0.0 {
            xs.push(w[0].0.ln());
            ys.push(dv.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::SingularFit("not enough distinct differences".into()));
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    if det.abs() <= 1e-14 * (n * sxx).abs().max(1e-300) {
        return Err(Error::SingularFit("coincident deltas in log-difference fit".into()));
    }
    Ok((n * sxy - sx * sy) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_half_power_model() {
        let samples: Vec<(f64, f64)> =
            (0..5).map(|k| { let d = 0.25f64.powi(k); (d, 1.0 + d.sqrt()) }).collect();
        let fit = fit_power_law(&samples, None).unwrap();
        assert!((fit.limit - 1.0).abs() < 1e-9, "limit {}", fit.limit);
        assert!((fit.rate_exponent - 0.5).abs() < 1e-9);
        assert!((fit.amplitude - 1.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn constant_sequence() {
        let samples: Vec<(f64, f64)> = (0..5).map(|k| (0.5f64.powi(k), 0.9854)).collect();
        let fit = fit_power_law(&samples, None).unwrap();
        assert_eq!(fit.limit, 0.9854);
        assert_eq!(fit.amplitude, 0.0);
    }

    #[test]
    fn perturbed_two_thirds_model() {
        let samples: Vec<(f64, f64)> = (1..=5)
            .map(|k| {
                let d = 10f64.powi(-k);
                (d, 2.0 + 3.0 * d.powf(2.0 / 3.0) + 0.1 * d)
            })
            .collect();
        let fit = fit_power_law(&samples, None).unwrap();
        assert!((fit.limit - 2.0).abs() < 1e-3, "limit {}", fit.limit);
    }

    #[test]
    fn fixed_exponent_recovers_against_contamination() {
        let samples: Vec<(f64, f64)> = (1..=6)
            .map(|k| {
                let d = 4f64.powi(-k);
                (d, 5.0 - 2.0 * d.powf(2.0 / 3.0))
            })
            .collect();
        let fit = fit_power_law(&samples, Some(2.0 / 3.0)).unwrap();
        assert!((fit.limit - 5.0).abs() < 1e-12);
        assert!((fit.amplitude + 2.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_power_law(&[(1.0, 1.0), (0.5, 1.1)], None).is_err());
    }
}
