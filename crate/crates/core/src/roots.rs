//! Root finding for nondecreasing scalar maps: bracket by doubling from a
//! known lower point, then safeguarded secant/bisection.

use crate::error::{Error, Result};

const MAX_EXPANSIONS: usize = 200;
const MAX_REFINE: usize = 200;

/// Finds `a` with g(a) = target for nondecreasing `g`, given a lower bracket
/// point with g(bracket_lo) <= target. The residual tolerance is
/// `tol * max(1, target)`.
pub fn find_monotone_root<G>(mut g: G, target: f64, bracket_lo: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Domain("root tolerance must be positive".into()));
    }
    let resid_tol = tol * target.abs().max(1.0);
    let mut lo = bracket_lo;
    let mut glo = g(lo)?;
    if glo > target + resid_tol {
        return Err(Error::Domain(format!(
            "target {target:.6e} below g(bracket_lo) = {glo:.6e}"
        )));
    }
    if (glo - target).abs() <= resid_tol {
        return Ok(lo);
    }

    // expand upward until the target is bracketed
    let mut step = 1e-8 * bracket_lo.abs().max(1.0);
    let mut hi = lo;
    let mut ghi = glo;
    let mut bracketed = false;
    for _ in 0..MAX_EXPANSIONS {
        hi = lo + step;
        ghi = g(hi)?;
        if ghi >= target {
            bracketed = true;
            break;
        }
        lo = hi;
        glo = ghi;
        step *= 2.0;
    }
    if !bracketed {
        return Err(Error::Unbounded(format!(
            "no upper bracket for target {target:.6e} after {MAX_EXPANSIONS} doublings"
        )));
    }
    if (ghi - target).abs() <= resid_tol {
        return Ok(hi);
    }

    // secant step, with a forced bisection every other iteration so the
    // bracket provably halves
    let mut best = (hi, (ghi - target).abs());
    for iter in 0..MAX_REFINE {
        let mut mid = if iter % 2 == 0 && (ghi - glo).abs() > 0.0 {
            lo + (target - glo) * (hi - lo) / (ghi - glo)
        } else {
            0.5 * (lo + hi)
        };
        let safety = 0.01 * (hi - lo);
        if !(mid > lo + safety && mid < hi - safety) {
            mid = 0.5 * (lo + hi);
        }
        let gm = g(mid)?;
        let resid = (gm - target).abs();
        if resid < best.1 {
            best = (mid, resid);
        }
        if resid <= resid_tol {
            return Ok(mid);
        }
        if gm < target {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
            // interval exhausted at machine precision
            if best.1 <= resid_tol {
                return Ok(best.0);
            }
            return Err(Error::ToleranceNotMet {
                what: "find_monotone_root".into(),
                best: best.0,
                err: best.1,
            });
        }
    }
    Err(Error::ToleranceNotMet { what: "find_monotone_root".into(), best: best.0, err: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let r = find_monotone_root(|a| Ok(a * a * a), 8.0, 0.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn parabola_cap_volume_inverse() {
        // eta(a) = (2/3) (2a)^{3/2}, target 2/3 -> a = 1/2
        let eta = |a: f64| Ok(2.0 / 3.0 * (2.0 * a).max(0.0).powf(1.5));
        let r = find_monotone_root(eta, 2.0 / 3.0, 0.0, 1e-12).unwrap();
        assert!((r - 0.5).abs() < 1e-9);
    }

    #[test]
    fn target_below_bracket_errors() {
        let res = find_monotone_root(|a| Ok(a), -1.0, 0.0, 1e-10);
        assert!(matches!(res, Err(Error::Domain(_))));
    }

    #[test]
    fn negative_lower_bracket() {
        let r = find_monotone_root(|a| Ok(a.exp()), 1.0, -5.0, 1e-12).unwrap();
        assert!(r.abs() < 1e-9);
    }
}
