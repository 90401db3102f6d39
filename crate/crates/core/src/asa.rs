//! Affine surface area of log-concave densities e^{-psi} and of convex
//! bodies, in both the density form (an integral over R^n) and the boundary
//! form (the same integral written through the epigraph parametrization).

use crate::bodies::ConvexBody;
use crate::constants::unit_ball_volume;
use crate::convex::{coercivity_box, derivatives, epigraph_curvature, Psi};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::quad::{integrate_1d_with, integrate_1d_with_breaks, integrate_box, QuadratureSpec};

/// Which formula produced an affine surface area value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsaForm {
    Density,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct AsaResult {
    pub value: f64,
    pub err_estimate: f64,
    pub form: AsaForm,
}

const TAIL_EPS: f64 = 1e-12;

fn asa_integral<F>(psi: &Psi, integrand: F, spec: &QuadratureSpec, form: AsaForm) -> Result<AsaResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let n = psi.dim();
    let r = coercivity_box(psi, TAIL_EPS)?;
    let bounds: Vec<(f64, f64)> = (0..n).map(|_| (-r, r)).collect();
    // kinks of piecewise families sit on null sets; nudge a node once before
    // giving up on it
    let f = |x: &[f64]| -> Result<f64> {
        match integrand(x) {
            Ok(v) => Ok(v),
            Err(Error::NonsmoothPoint { .. }) => {
                let bumped: Vec<f64> = x.iter().map(|v| v + 1e-7 * r).collect();
                integrand(&bumped)
            }
            Err(e) => Err(e),
        }
    };
    let (value, err) = if n == 1 {
        let breaks = psi.feature_breaks();
        integrate_1d_with_breaks(|x| f(&[x]), -r, r, &breaks, spec)?
    } else {
        integrate_box(f, &bounds, spec)?
    };
    Ok(AsaResult { value: value.max(0.0), err_estimate: err + TAIL_EPS, form })
}

/// as(e^{-psi}) as the density integral of det(Hess)^{1/(n+2)} e^{-psi}.
pub fn asa_density(psi: &Psi) -> Result<AsaResult> {
    asa_density_with(psi, &QuadratureSpec::with_tols(1e-12, 1e-9))
}

pub fn asa_density_with(psi: &Psi, spec: &QuadratureSpec) -> Result<AsaResult> {
    let n = psi.dim() as f64;
    let integrand = |x: &[f64]| -> Result<f64> {
        let (_, h) = derivatives(psi, x)?;
        let det = h.det().max(0.0);
        Ok(det.powf(1.0 / (n + 2.0)) * (-psi.value(x)).exp())
    };
    asa_integral(psi, integrand, spec, AsaForm::Density)
}

/// The same quantity written as a boundary integral over the epigraph:
/// kappa^{1/(n+2)} e^{-height} against the surface measure, pulled back to
/// R^n through the graph parametrization. Serves as an independent
/// implementation cross-check of the density form.
pub fn asa_boundary(psi: &Psi) -> Result<AsaResult> {
    asa_boundary_with(psi, &QuadratureSpec::with_tols(1e-12, 1e-9))
}

pub fn asa_boundary_with(psi: &Psi, spec: &QuadratureSpec) -> Result<AsaResult> {
    let n = psi.dim() as f64;
    let integrand = |x: &[f64]| -> Result<f64> {
        let kappa = epigraph_curvature(psi, x)?;
        let (g, _) = derivatives(psi, x)?;
        let area_factor = (1.0 + dot(&g, &g)).sqrt();
        Ok(kappa.powf(1.0 / (n + 2.0)) * (-psi.value(x)).exp() * area_factor)
    };
    asa_integral(psi, integrand, spec, AsaForm::Boundary)
}

/// Affine surface area of a convex body: the boundary integral of the Gauss
/// curvature to the power 1/(m+1).
pub fn asa_body(body: &ConvexBody) -> Result<f64> {
    let spec = QuadratureSpec::with_tols(1e-13, 1e-11);
    match body {
        ConvexBody::Ball { dim, radius } => {
            let m = *dim;
            let mf = m as f64;
            let surface = mf * unit_ball_volume(m)? * radius.powf(mf - 1.0);
            Ok(surface * radius.powf(-(mf - 1.0) / (mf + 1.0)))
        }
        ConvexBody::Ellipsoid { semi_axes } => match semi_axes.len() {
            2 => {
                let (a, b) = (semi_axes[0], semi_axes[1]);
                // boundary parametrization (a cos t, b sin t):
                // kappa = ab / w^3, surface element = w dt, w^2 = a^2 sin^2 + b^2 cos^2
                let f = |t: f64| -> Result<f64> {
                    let w2 = a * a * t.sin().powi(2) + b * b * t.cos().powi(2);
                    let kappa = a * b / w2.powf(1.5);
                    Ok(kappa.powf(1.0 / 3.0) * w2.sqrt())
                };
                let (v, _) = integrate_1d_with(f, 0.0, 2.0 * std::f64::consts::PI, &spec)?;
                Ok(v)
            }
            3 => {
                let (a, b, c) = (semi_axes[0], semi_axes[1], semi_axes[2]);
                // spherical parametrization; kappa = (abc)^{-2} q^{-2} with
                // q = x^2/a^4 + y^2/b^4 + z^2/c^4
                let f = |p: &[f64]| -> Result<f64> {
                    let (phi, th) = (p[0], p[1]);
                    let (sp, cp) = (phi.sin(), phi.cos());
                    let (st, ct) = (th.sin(), th.cos());
                    let (x, y, z) = (a * sp * ct, b * sp * st, c * cp);
                    let q = x * x / a.powi(4) + y * y / b.powi(4) + z * z / c.powi(4);
                    let kappa = 1.0 / ((a * b * c).powi(2) * q * q);
                    let area = sp
                        * ((b * c * sp * ct).powi(2)
                            + (a * c * sp * st).powi(2)
                            + (a * b * cp).powi(2))
                        .sqrt();
                    Ok(kappa.powf(0.25) * area)
                };
                let spec2 = QuadratureSpec::with_tols(1e-11, 1e-9);
                let (v, _) = integrate_box(
                    f,
                    &[(0.0, std::f64::consts::PI), (0.0, 2.0 * std::f64::consts::PI)],
                    &spec2,
                )?;
                Ok(v)
            }
            _ => Err(Error::Domain("ellipsoid affine surface area needs dimension 2 or 3".into())),
        },
        ConvexBody::Polygon { .. } => Ok(0.0),
    }
}

/// Both sides of the affine invariance relation
/// as(f o T) = |det T|^{-n/(n+2)} as(f), with their relative gap.
pub fn asa_invariance_check(psi: &Psi, t: &Matrix) -> Result<(f64, f64, f64)> {
    let n = psi.dim() as f64;
    let det = t.det().abs();
    if det == 0.0 {
        return Err(Error::Domain("transform must be invertible".into()));
    }
    let composed = crate::convex::affine_precompose(psi, t)?;
    let lhs = asa_density(&composed)?.value;
    let rhs = det.powf(-n / (n + 2.0)) * asa_density(psi)?.value;
    let gap = (lhs - rhs).abs() / rhs.abs().max(1e-300);
    Ok((lhs, rhs, gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{MaxAffine, PNorm, Quadratic, SmoothedMaxAffine};
    use crate::linalg::SymMatrix;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_density_1d() {
        let g = Psi::gaussian(1);
        let r = asa_density(&g).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-6, "value {}", r.value);
    }

    #[test]
    fn gaussian_density_2d() {
        let g = Psi::gaussian(2);
        let r = asa_density(&g).unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-5, "value {}", r.value);
    }

    #[test]
    fn scaled_gaussian_closed_form() {
        // psi = a x^2/2 has as = sqrt(2 pi) a^{-1/6}; at a=8 this is sqrt(pi)
        let a = SymMatrix::from_rows(1, &[8.0]).unwrap();
        let q = Psi::quadratic(a, vec![0.0], 0.0).unwrap();
        let r = asa_density(&q).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-6, "value {}", r.value);
    }

    #[test]
    fn boundary_form_matches_density() {
        let g = Psi::gaussian(1);
        let d = asa_density(&g).unwrap();
        let b = asa_boundary(&g).unwrap();
        assert!((d.value - b.value).abs() <= 1e-8 * d.value.max(1.0));
        // anisotropic 2d case
        let a = SymMatrix::from_rows(2, &[1.0, 0.0, 0.0, 4.0]).unwrap();
        let q = Psi::quadratic(a, vec![0.0, 0.0], 0.0).unwrap();
        let d2 = asa_density(&q).unwrap();
        let b2 = asa_boundary(&q).unwrap();
        let tol = (d2.err_estimate + b2.err_estimate).max(1e-7 * d2.value);
        assert!((d2.value - b2.value).abs() <= tol, "{} vs {}", d2.value, b2.value);
    }

    #[test]
    fn piecewise_affine_vanishes() {
        let ma = Psi::MaxAffine(MaxAffine::abs_value());
        let r = asa_density(&ma).unwrap();
        assert!(r.value.abs() < 1e-10, "value {}", r.value);
        let rb = asa_boundary(&ma).unwrap();
        assert!(rb.value.abs() < 1e-10);
    }

    #[test]
    fn smoothed_kink_small_area() {
        // frozen from an independent trapezoid evaluation of the closed-form
        // integrand: 0.2097 at beta=100, 0.0617 at beta=1000 (ridge 1e-6)
        let mk = |beta: f64| {
            Psi::SmoothedMaxAffine(
                SmoothedMaxAffine::new(MaxAffine::abs_value(), beta, 1e-6).unwrap(),
            )
        };
        let a100 = asa_density(&mk(100.0)).unwrap().value;
        assert!((a100 - 0.2097).abs() < 5e-3, "beta=100: {a100}");
        let a1000 = asa_density(&mk(1000.0)).unwrap().value;
        assert!((a1000 - 0.0617).abs() < 2e-3, "beta=1000: {a1000}");
        assert!(a1000 < a100);
    }

    #[test]
    fn quartic_density_both_forms() {
        let p = Psi::PNorm(PNorm::new(1, 4.0, 1.0).unwrap());
        let d = asa_density(&p).unwrap();
        let b = asa_boundary(&p).unwrap();
        let tol = (d.err_estimate + b.err_estimate).max(1e-7 * d.value);
        assert!((d.value - b.value).abs() <= tol);
        assert!(d.value > 0.0);
    }

    #[test]
    fn invariance_identity_and_dilation() {
        let g = Psi::gaussian(1);
        let (lhs, rhs, gap) = asa_invariance_check(&g, &Matrix::identity(1)).unwrap();
        assert!(gap <= 1e-10, "gap {gap} ({lhs} vs {rhs})");
        let t = Matrix::from_rows(1, &[2.0]).unwrap();
        let (lhs, rhs, gap) = asa_invariance_check(&g, &t).unwrap();
        // closed forms: as(2x^2) = 2^{-1/3} sqrt(2 pi)
        let expect = 2f64.powf(-1.0 / 3.0) * (2.0 * PI).sqrt();
        assert!((lhs - expect).abs() < 1e-5, "lhs {lhs}");
        assert!((rhs - expect).abs() < 1e-5);
        assert!(gap < 1e-5);
    }

    #[test]
    fn valuation_on_nested_quadratics() {
        // psi2 = psi1 + 1: min(psi1, psi2) = psi1 and max = psi2 pointwise,
        // so the valuation identity closes exactly
        let psi1 = Psi::gaussian(1);
        let psi2 = Psi::Quadratic(
            Quadratic::new(SymMatrix::identity(1), vec![0.0], 1.0).unwrap(),
        );
        let min_psi = Psi::PointwiseMin(Box::new(psi1.clone()), Box::new(psi2.clone()));
        let max_psi = Psi::PointwiseMax(Box::new(psi1.clone()), Box::new(psi2.clone()));
        let as1 = asa_density(&psi1).unwrap().value;
        let as2 = asa_density(&psi2).unwrap().value;
        // max of the densities is e^{-min(psi)}, min is e^{-max(psi)}
        let as_max_f = asa_density(&min_psi).unwrap().value;
        let as_min_f = asa_density(&max_psi).unwrap().value;
        let lhs = as1 + as2;
        let rhs = as_max_f + as_min_f;
        assert!((lhs - rhs).abs() <= 1e-6 * lhs, "{lhs} vs {rhs}");
    }
}
