//! Integration over sublevel sets {x : psi(x) <= level} of convex functions.
//!
//! Works by iterated one-dimensional integration: on each slice the section
//! of the sublevel set is an interval whose endpoints are found by monotone
//! root finding around the slice minimum, so the integrand is only ever
//! evaluated inside the region.

use crate::convex::Psi;
use crate::error::{Error, Result};
use crate::minimize::{gd_minimize, golden_min_1d};
use crate::quad::{integrate_1d_with, QuadratureSpec};
use crate::roots::find_monotone_root;

/// Integral of `f` over {x : region_fn(x) <= level}, with an error estimate.
pub fn integrate_region<F>(
    f: F,
    region_fn: &Psi,
    level: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = region_fn.dim();
    if n == 0 || n > 3 {
        return Err(Error::Domain("integrate_region supports 1..=3 dimensions".into()));
    }
    let radius = region_fn.sublevel_radius(level)?;
    if radius == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut point = vec![0.0; n];
    integrate_slice(&f, region_fn, level, radius, &mut point, 0, spec)
}

fn integrate_slice<F>(
    f: &F,
    region_fn: &Psi,
    level: f64,
    radius: f64,
    point: &mut Vec<f64>,
    depth: usize,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = region_fn.dim();
    let rest = n - depth;
    // restriction of the region function to the current prefix
    let restricted = if depth == 0 {
        region_fn.clone()
    } else {
        Psi::Restricted {
            inner: Box::new(region_fn.clone()),
            prefix: point[..depth].to_vec(),
        }
    };

    // minimum over the remaining variables
    let (xm, vm) = match restricted.as_quadratic() {
        Some(q) => (q.minimizer.clone(), q.min_value()),
        None => {
            if rest == 1 {
                let (x, v) =
                    golden_min_1d(|t| restricted.value(&[t]), -radius - 1.0, radius + 1.0, 1e-13);
                (vec![x], v)
            } else {
                let hint = vec![0.0; rest];
                let fr = |x: &[f64]| restricted.value(x);
                gd_minimize(fr, None::<fn(&[f64]) -> Vec<f64>>, &hint, 1e-13)?
            }
        }
    };
    if vm > level {
        return Ok((0.0, 0.0));
    }

    // the current coordinate ranges over an interval around xm[0]; find its
    // endpoints by monotone root finding on the partial minimum
    let profile = |t: f64| -> Result<f64> {
        if rest == 1 {
            Ok(restricted.value(&[t]))
        } else {
            let slice = Psi::Restricted { inner: Box::new(restricted.clone()), prefix: vec![t] };
            match slice.as_quadratic() {
                Some(q) => Ok(q.min_value()),
                None => {
                    if rest - 1 == 1 {
                        Ok(golden_min_1d(|u| slice.value(&[u]), -radius - 1.0, radius + 1.0, 1e-12).1)
                    } else {
                        let fr = |x: &[f64]| slice.value(x);
                        Ok(gd_minimize(fr, None::<fn(&[f64]) -> Vec<f64>>, &vec![0.0; rest - 1], 1e-12)?.1)
                    }
                }
            }
        }
    };
    let root_tol = 1e-12;
    let hi = endpoint(&profile, xm[0], radius + 1.0, level, root_tol, 1.0)?;
    let lo = endpoint(&profile, xm[0], radius + 1.0, level, root_tol, -1.0)?;

    if depth + 1 == n {
        let mut g = |t: f64| -> Result<f64> {
            point[depth] = t;
            f(point)
        };
        integrate_1d_with(&mut g, lo, hi, spec)
    } else {
        let inner_spec = QuadratureSpec {
            abs_tol: spec.abs_tol * 0.25 / (hi - lo).max(1.0),
            rel_tol: spec.rel_tol * 0.5,
            ..spec.clone()
        };
        let inner_err = std::cell::Cell::new(0.0f64);
        let mut g = |t: f64| -> Result<f64> {
            let mut sub = point.clone();
            sub[depth] = t;
            let (v, e) =
                integrate_slice(f, region_fn, level, radius, &mut sub, depth + 1, &inner_spec)?;
            inner_err.set(inner_err.get().max(e));
            Ok(v)
        };
        let (v, e) = integrate_1d_with(&mut g, lo, hi, spec)?;
        Ok((v, e + inner_err.get() * (hi - lo)))
    }
}

/// Finds the point where the convex profile crosses `level` on the given
/// side of the minimizer `x0`, scanning no farther than `reach`.
fn endpoint<P>(profile: &P, x0: f64, reach: f64, level: f64, tol: f64, side: f64) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
{
    // g(s) = profile(x0 + side*s) is nondecreasing in s >= 0
    let far = profile(x0 + side * reach)?;
    if far <= level {
        // region touches the certified bounding radius; integrate to it
        return Ok(x0 + side * reach);
    }
    let g = |s: f64| -> Result<f64> { profile(x0 + side * s) };
    let s = find_monotone_root(g, level, 0.0, tol)?;
    Ok(x0 + side * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::PNorm;
    use crate::linalg::SymMatrix;

    #[test]
    fn disk_area() {
        // region |x|^2 <= 1 as a quadratic sublevel set at level 1/2
        let q = Psi::gaussian(2);
        let spec = QuadratureSpec::with_tols(1e-12, 1e-10);
        let (v, _) = integrate_region(|_| Ok(1.0), &q, 0.5, &spec).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-8, "area {v}");
    }

    #[test]
    fn parabola_cap_mass() {
        let q = Psi::gaussian(1);
        let spec = QuadratureSpec::default();
        let (v, _) =
            integrate_region(|x| Ok(0.5 - x[0] * x[0] / 2.0), &q, 0.5, &spec).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_mass_large_level() {
        let q = Psi::gaussian(2);
        let spec = QuadratureSpec::with_tols(1e-12, 1e-9);
        let f = |x: &[f64]| Ok((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
        let (v, _) = integrate_region(f, &q, 40.0, &spec).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-8, "mass {v}");
    }

    #[test]
    fn empty_region_is_zero() {
        let q = Psi::gaussian(1);
        let spec = QuadratureSpec::default();
        let (v, e) = integrate_region(|_| Ok(1.0), &q, -1.0, &spec).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn nonquadratic_region_quartic_ball() {
        // {|x|^4/4 <= 1/4} is the unit interval in 1d
        let p = Psi::PNorm(PNorm::new(1, 4.0, 1.0).unwrap());
        let spec = QuadratureSpec::default();
        let (v, _) = integrate_region(|_| Ok(1.0), &p, 0.25, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "length {v}");
    }

    #[test]
    fn ball_volume_3d() {
        let q = Psi::gaussian(3);
        let spec = QuadratureSpec::with_tols(1e-9, 1e-7);
        let (v, _) = integrate_region(|_| Ok(1.0), &q, 0.5, &spec).unwrap();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-5, "volume {v}");
    }

    #[test]
    fn anisotropic_quadratic_section() {
        // ellipse x^2/2 + 2 y^2 <= 1/2 has area pi * 1 * 0.5
        let a = SymMatrix::from_rows(2, &[1.0, 0.0, 0.0, 4.0]).unwrap();
        let q = Psi::quadratic(a, vec![0.0, 0.0], 0.0).unwrap();
        let spec = QuadratureSpec::with_tols(1e-12, 1e-10);
        let (v, _) = integrate_region(|_| Ok(1.0), &q, 0.5, &spec).unwrap();
        assert!((v - std::f64::consts::PI * 0.5).abs() < 1e-8, "area {v}");
    }
}
