//! Convex minimization: gradient descent with backtracking, plus a golden
//! section search for one-dimensional slices.

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, dot, norm};

const MAX_ITERS: usize = 20_000;

/// Minimizes a convex function by gradient descent with Armijo backtracking.
///
/// `grad` may be `None`, in which case central finite differences are used.
/// Returns (argmin, min value).
pub fn gd_minimize<F, G>(
    f: F,
    grad: Option<G>,
    x0: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::Domain("objective not finite at the start point".into()));
    }
    let fd_grad = |x: &[f64]| -> Vec<f64> {
        let h = f64::EPSILON.cbrt() * norm(x).max(1.0);
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) - f(&xm)) / (2.0 * h)
            })
            .collect()
    };
    let mut step = 1.0;
    let mut stall = 0usize;
    for _ in 0..MAX_ITERS {
        let g = match &grad {
            Some(gr) => gr(&x),
            None => fd_grad(&x),
        };
        let gn2 = dot(&g, &g);
        if gn2.sqrt() <= 1e-13 * (1.0 + fx.abs()) {
            return Ok((x, fx));
        }
        // backtrack until Armijo decrease
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let xt = add_scaled(&x, -t, &g);
            let ft = f(&xt);
            if ft <= fx - 0.25 * t * gn2 {
                let drop = fx - ft;
                x = xt;
                fx = ft;
                step = t * 2.0;
                accepted = true;
                if drop <= 0.01 * tol.max(1e-300) {
                    stall += 1;
                } else {
                    stall = 0;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // step underflow: gradient noise floor reached
            return Ok((x, fx));
        }
        if stall >= 4 {
            return Ok((x, fx));
        }
    }
    Err(Error::ToleranceNotMet { what: "gd_minimize".into(), best: fx, err: f64::NAN })
}

/// Golden-section minimum of a convex function of one variable on [lo, hi].
pub fn golden_min_1d<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol * (a.abs().max(b.abs()).max(1.0)) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let (x, v) = gd_minimize(|x| x[0] * x[0] / 2.0, None::<fn(&[f64]) -> Vec<f64>>, &[3.0], 1e-12)
            .unwrap();
        assert!(x[0].abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn shifted_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0) * (x[0] - 3.0) / 2.0 + 1.0;
        let g = |x: &[f64]| vec![x[0] - 3.0];
        let (x, v) = gd_minimize(f, Some(g), &[0.0], 1e-12).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_with_linear_term() {
        // |x|^4/4 + x_1 has its minimum -0.75 at (-1, 0)
        let f = |x: &[f64]| {
            let n2 = x[0] * x[0] + x[1] * x[1];
            n2 * n2 / 4.0 + x[0]
        };
        let g = |x: &[f64]| {
            let n2 = x[0] * x[0] + x[1] * x[1];
            vec![n2 * x[0] + 1.0, n2 * x[1]]
        };
        let (x, v) = gd_minimize(f, Some(g), &[0.2, 0.2], 1e-12).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-4, "x = {x:?}");
        assert!(x[1].abs() < 1e-4);
        assert!((v + 0.75).abs() < 1e-8);
    }

    #[test]
    fn golden_section_parabola() {
        let (x, v) = golden_min_1d(|t| (t - 1.5) * (t - 1.5), -10.0, 10.0, 1e-12);
        assert!((x - 1.5).abs() < 1e-7);
        assert!(v < 1e-12);
    }
}
