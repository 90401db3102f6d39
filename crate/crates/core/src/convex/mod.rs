//! Convex functions psi and log-concave densities e^{-psi}: built-in
//! families, derivatives, epigraph geometry and coercivity bookkeeping.

mod families;
mod grid;

pub use families::{MaxAffine, PNorm, Quadratic, SmoothedMaxAffine};
pub use grid::{conjugate_on_grid, GridAxis, GridFunction, LatticeEnvelope, SlopeGrid, SupportEnvelope};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix, SymMatrix};
use crate::quad::{integrate_1d_with, QuadratureSpec};
use crate::roots::find_monotone_root;

/// A convex function on R^n, smooth off a null set, with growth certificates
/// that make e^{-psi} integrable.
#[derive(Debug, Clone)]
pub enum Psi {
    Quadratic(Quadratic),
    PNorm(PNorm),
    MaxAffine(MaxAffine),
    SmoothedMaxAffine(SmoothedMaxAffine),
    /// x -> inner(T x) for invertible T.
    Precomposed { inner: Box<Psi>, map: Matrix, inv_map: Matrix },
    /// x -> inner(x) - <slope, x>; the slab function of a tilted cut.
    Tilted { inner: Box<Psi>, slope: Vec<f64> },
    /// x -> inner(prefix ++ x); used to integrate over sections.
    Restricted { inner: Box<Psi>, prefix: Vec<f64> },
    /// Pointwise maximum (always convex).
    PointwiseMax(Box<Psi>, Box<Psi>),
    /// Pointwise minimum; the caller is responsible for convexity.
    PointwiseMin(Box<Psi>, Box<Psi>),
    /// Hides analytic derivatives, forcing the finite-difference path.
    ValueOnly(Box<Psi>),
}

impl Psi {
    pub fn quadratic(a: SymMatrix, b: Vec<f64>, c: f64) -> Result<Psi> {
        Ok(Psi::Quadratic(Quadratic::new(a, b, c)?))
    }

    pub fn gaussian(n: usize) -> Psi {
        Psi::Quadratic(Quadratic::isotropic(n))
    }

    pub fn dim(&self) -> usize {
        match self {
            Psi::Quadratic(q) => q.n,
            Psi::PNorm(p) => p.n,
            Psi::MaxAffine(m) => m.n,
            Psi::SmoothedMaxAffine(s) => s.base.n,
            Psi::Precomposed { inner, .. } => inner.dim(),
            Psi::Tilted { inner, .. } => inner.dim(),
            Psi::Restricted { inner, prefix } => inner.dim() - prefix.len(),
            Psi::PointwiseMax(a, _) => a.dim(),
            Psi::PointwiseMin(a, _) => a.dim(),
            Psi::ValueOnly(inner) => inner.dim(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Psi::Quadratic(q) => q.value(x),
            Psi::PNorm(p) => p.value(x),
            Psi::MaxAffine(m) => m.value(x),
            Psi::SmoothedMaxAffine(s) => s.value(x),
            Psi::Precomposed { inner, map, .. } => inner.value(&map.matvec(x)),
            Psi::Tilted { inner, slope } => inner.value(x) - dot(slope, x),
            Psi::Restricted { inner, prefix } => {
                let mut full = prefix.clone();
                full.extend_from_slice(x);
                inner.value(&full)
            }
            Psi::PointwiseMax(a, b) => a.value(x).max(b.value(x)),
            Psi::PointwiseMin(a, b) => a.value(x).min(b.value(x)),
            Psi::ValueOnly(inner) => inner.value(x),
        }
    }

    /// Analytic gradient where attached; Ok(None) requests finite differences.
    pub fn analytic_gradient(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        match self {
            Psi::Quadratic(q) => Ok(Some(q.gradient(x))),
            Psi::PNorm(p) => Ok(Some(p.gradient(x))),
            Psi::MaxAffine(m) => {
                let i = m.binding_piece(x)?;
                Ok(Some(m.slopes[i].clone()))
            }
            Psi::SmoothedMaxAffine(s) => Ok(Some(s.gradient(x))),
            Psi::Precomposed { inner, map, .. } => {
                let gx = inner.analytic_gradient(&map.matvec(x))?;
                Ok(gx.map(|g| map.transpose().matvec(&g)))
            }
            Psi::Tilted { inner, slope } => {
                let g = inner.analytic_gradient(x)?;
                Ok(g.map(|mut g| {
                    for (gi, si) in g.iter_mut().zip(slope) {
                        *gi -= si;
                    }
                    g
                }))
            }
            Psi::Restricted { inner, prefix } => {
                let mut full = prefix.clone();
                full.extend_from_slice(x);
                let g = inner.analytic_gradient(&full)?;
                Ok(g.map(|g| g[prefix.len()..].to_vec()))
            }
            Psi::PointwiseMax(a, b) => active_branch(a, b, x, true)?.analytic_gradient(x),
            Psi::PointwiseMin(a, b) => active_branch(a, b, x, false)?.analytic_gradient(x),
            Psi::ValueOnly(_) => Ok(None),
        }
    }

    /// Analytic Hessian where attached; Ok(None) requests finite differences.
    pub fn analytic_hessian(&self, x: &[f64]) -> Result<Option<SymMatrix>> {
        match self {
            Psi::Quadratic(q) => Ok(Some(q.a.clone())),
            Psi::PNorm(p) => Ok(Some(p.hessian(x)?)),
            Psi::MaxAffine(m) => {
                m.binding_piece(x)?;
                Ok(Some(SymMatrix::zeros(m.n)))
            }
            Psi::SmoothedMaxAffine(s) => Ok(Some(s.hessian(x))),
            Psi::Precomposed { inner, map, .. } => {
                let hx = inner.analytic_hessian(&map.matvec(x))?;
                Ok(hx.map(|h| map.conjugate_sym(&h)))
            }
            Psi::Tilted { inner, .. } => inner.analytic_hessian(x),
            Psi::Restricted { inner, prefix } => {
                let mut full = prefix.clone();
                full.extend_from_slice(x);
                let h = inner.analytic_hessian(&full)?;
                Ok(h.map(|h| {
                    let k = prefix.len();
                    let n = self.dim();
                    let mut out = SymMatrix::zeros(n);
                    for i in 0..n {
                        for j in i..n {
                            out.set_sym(i, j, h.get(k + i, k + j));
                        }
                    }
                    out
                }))
            }
            Psi::PointwiseMax(a, b) => active_branch(a, b, x, true)?.analytic_hessian(x),
            Psi::PointwiseMin(a, b) => active_branch(a, b, x, false)?.analytic_hessian(x),
            Psi::ValueOnly(_) => Ok(None),
        }
    }

    pub fn supercoercive(&self) -> bool {
        match self {
            Psi::Quadratic(_) => true,
            Psi::PNorm(_) => true,
            Psi::MaxAffine(_) => false,
            Psi::SmoothedMaxAffine(s) => s.ridge > 0.0,
            Psi::Precomposed { inner, .. } => inner.supercoercive(),
            Psi::Tilted { inner, .. } => inner.supercoercive(),
            Psi::Restricted { inner, .. } => inner.supercoercive(),
            Psi::PointwiseMax(a, b) => a.supercoercive() || b.supercoercive(),
            Psi::PointwiseMin(a, b) => a.supercoercive() && b.supercoercive(),
            Psi::ValueOnly(inner) => inner.supercoercive(),
        }
    }

    /// Returns b with psi(x) >= alpha ||x|| + b everywhere, when such a
    /// linear minorant exists for this alpha.
    pub fn growth_offset(&self, alpha: f64) -> Option<f64> {
        if alpha < 0.0 {
            return None;
        }
        match self {
            Psi::Quadratic(q) => {
                let bn = norm(&q.b);
                Some(q.c - (alpha + bn) * (alpha + bn) / (2.0 * q.min_eig))
            }
            Psi::PNorm(p) => {
                if alpha == 0.0 {
                    return Some(0.0);
                }
                let q = p.p / (p.p - 1.0);
                Some(-alpha.powf(q) * p.scale.powf(1.0 - q) / q)
            }
            Psi::MaxAffine(m) => (alpha <= m.kappa).then_some(m.min_offset),
            Psi::SmoothedMaxAffine(s) => {
                if alpha <= s.base.kappa {
                    Some(s.base.min_offset)
                } else if s.ridge > 0.0 {
                    let excess = alpha - s.base.kappa;
                    Some(s.base.min_offset - excess * excess / (2.0 * s.ridge))
                } else {
                    None
                }
            }
            Psi::Precomposed { inner, inv_map, .. } => {
                inner.growth_offset(alpha * inv_map.frobenius_norm())
            }
            Psi::Tilted { inner, slope } => inner.growth_offset(alpha + norm(slope)),
            Psi::Restricted { inner, .. } => inner.growth_offset(alpha),
            Psi::PointwiseMax(a, b) => match (a.growth_offset(alpha), b.growth_offset(alpha)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (Some(x), None) => Some(x),
                (None, Some(y)) => Some(y),
                (None, None) => None,
            },
            Psi::PointwiseMin(a, b) => {
                Some(a.growth_offset(alpha)?.min(b.growth_offset(alpha)?))
            }
            Psi::ValueOnly(inner) => inner.growth_offset(alpha),
        }
    }

    /// The attached coercivity pair (a, b) with psi >= a ||x|| + b.
    pub fn coercivity(&self) -> Result<(f64, f64)> {
        if let Psi::MaxAffine(m) = self {
            return Ok((m.kappa, m.min_offset));
        }
        let mut alpha = 1.0;
        for _ in 0..60 {
            if let Some(b) = self.growth_offset(alpha) {
                return Ok((alpha, b));
            }
            alpha *= 0.5;
        }
        Err(Error::Domain("no linear coercivity certificate found".into()))
    }

    /// Radius R with {psi <= level} contained in the centered ball of
    /// radius R, from the best available linear minorant.
    pub fn sublevel_radius(&self, level: f64) -> Result<f64> {
        let (a0, _) = self.coercivity()?;
        let mut best = f64::INFINITY;
        let mut alpha = a0;
        for _ in 0..48 {
            if let Some(b) = self.growth_offset(alpha) {
                let r = (level - b) / alpha;
                if r <= 0.0 {
                    return Ok(0.0);
                }
                best = best.min(r);
            } else {
                break;
            }
            alpha *= 2.0;
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::Domain("no finite bounding radius for sublevel set".into()))
        }
    }

    pub fn minimizer_hint(&self) -> Vec<f64> {
        match self {
            Psi::Quadratic(q) => q.minimizer.clone(),
            Psi::PNorm(p) => vec![0.0; p.n],
            Psi::MaxAffine(m) => vec![0.0; m.n],
            Psi::SmoothedMaxAffine(s) => vec![0.0; s.base.n],
            Psi::Precomposed { inner, inv_map, .. } => inv_map.matvec(&inner.minimizer_hint()),
            Psi::Tilted { inner, .. } => inner.minimizer_hint(),
            Psi::Restricted { inner, prefix } => inner.minimizer_hint()[prefix.len()..].to_vec(),
            Psi::PointwiseMax(a, _) => a.minimizer_hint(),
            Psi::PointwiseMin(a, _) => a.minimizer_hint(),
            Psi::ValueOnly(inner) => inner.minimizer_hint(),
        }
    }

    /// Canonical parameter serialization; two functions with equal ids are
    /// identical. Used for cache keys.
    pub fn canonical_id(&self) -> String {
        fn fmt_slice(v: &[f64]) -> String {
            v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",")
        }
        match self {
            Psi::Quadratic(q) => format!(
                "quadratic(n={};A={};b={};c={:.17e})",
                q.n,
                fmt_slice(q.a.entries()),
                fmt_slice(&q.b),
                q.c
            ),
            Psi::PNorm(p) => format!("pnorm(n={};p={:.17e};scale={:.17e})", p.n, p.p, p.scale),
            Psi::MaxAffine(m) => format!(
                "maxaffine(n={};slopes={};offsets={})",
                m.n,
                m.slopes.iter().map(|s| fmt_slice(s)).collect::<Vec<_>>().join("|"),
                fmt_slice(&m.offsets)
            ),
            Psi::SmoothedMaxAffine(s) => format!(
                "smoothed({};beta={:.17e};ridge={:.17e})",
                Psi::MaxAffine(s.base.clone()).canonical_id(),
                s.beta,
                s.ridge
            ),
            Psi::Precomposed { inner, map, .. } => {
                format!("precomposed({};T={})", inner.canonical_id(), fmt_slice(map.entries()))
            }
            Psi::Tilted { inner, slope } => {
                format!("tilted({};y={})", inner.canonical_id(), fmt_slice(slope))
            }
            Psi::Restricted { inner, prefix } => {
                format!("restricted({};prefix={})", inner.canonical_id(), fmt_slice(prefix))
            }
            Psi::PointwiseMax(a, b) => {
                format!("max({};{})", a.canonical_id(), b.canonical_id())
            }
            Psi::PointwiseMin(a, b) => {
                format!("min({};{})", a.canonical_id(), b.canonical_id())
            }
            Psi::ValueOnly(inner) => format!("valueonly({})", inner.canonical_id()),
        }
    }

    /// Folds tilts, precompositions and restrictions of a quadratic into a
    /// single quadratic, enabling closed-form cap machinery.
    pub fn as_quadratic(&self) -> Option<Quadratic> {
        match self {
            Psi::Quadratic(q) => Some(q.clone()),
            Psi::Tilted { inner, slope } => {
                let q = inner.as_quadratic()?;
                let b = q.b.iter().zip(slope).map(|(bi, si)| bi - si).collect();
                Quadratic::new(q.a.clone(), b, q.c).ok()
            }
            Psi::Precomposed { inner, map, .. } => {
                let q = inner.as_quadratic()?;
                let a = map.conjugate_sym(&q.a);
                let b = map.transpose().matvec(&q.b);
                Quadratic::new(a, b, q.c).ok()
            }
            Psi::Restricted { inner, prefix } => {
                let q = inner.as_quadratic()?;
                let k = prefix.len();
                let n = q.n - k;
                if n == 0 {
                    return None;
                }
                let mut a = SymMatrix::zeros(n);
                for i in 0..n {
                    for j in i..n {
                        a.set_sym(i, j, q.a.get(k + i, k + j));
                    }
                }
                // b_i = q.b[k+i] + sum_j A[k+i][j] prefix[j]
                let mut b = vec![0.0; n];
                for i in 0..n {
                    b[i] = q.b[k + i];
                    for (j, pj) in prefix.iter().enumerate() {
                        b[i] += q.a.get(k + i, j) * pj;
                    }
                }
                let mut c = q.c;
                for (j, pj) in prefix.iter().enumerate() {
                    c += q.b[j] * pj;
                    for (l, pl) in prefix.iter().enumerate() {
                        c += 0.5 * q.a.get(j, l) * pj * pl;
                    }
                }
                Quadratic::new(a, b, c).ok()
            }
            _ => None,
        }
    }

    /// psi - <slope, x>.
    pub fn tilt(&self, slope: &[f64]) -> Psi {
        Psi::Tilted { inner: Box::new(self.clone()), slope: slope.to_vec() }
    }

    /// Locations on the axis where one-dimensional piecewise families switch
    /// pieces. Quadrature seeds panels there so that narrow smoothed kinks
    /// cannot slip between nodes. Empty above one dimension.
    pub fn feature_breaks(&self) -> Vec<f64> {
        if self.dim() != 1 {
            return Vec::new();
        }
        match self {
            Psi::MaxAffine(m) => max_affine_breaks(m),
            Psi::SmoothedMaxAffine(s) => {
                let mut b = max_affine_breaks(&s.base);
                // geometric markers spanning the smoothing scale and its
                // exponentially decaying shoulders
                let mut around = Vec::new();
                for x in &b {
                    let mut w = 1.0 / s.beta;
                    for _ in 0..=6 {
                        around.push(x - w);
                        around.push(x + w);
                        w *= 4.0;
                    }
                }
                b.extend(around);
                b
            }
            Psi::Precomposed { inner, inv_map, .. } => inner
                .feature_breaks()
                .into_iter()
                .map(|x| inv_map.get(0, 0) * x)
                .collect(),
            Psi::Tilted { inner, .. } => inner.feature_breaks(),
            Psi::ValueOnly(inner) => inner.feature_breaks(),
            Psi::PointwiseMax(a, b) | Psi::PointwiseMin(a, b) => {
                let mut out = a.feature_breaks();
                out.extend(b.feature_breaks());
                out
            }
            _ => Vec::new(),
        }
    }
}

fn max_affine_breaks(m: &MaxAffine) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..m.slopes.len() {
        for j in (i + 1)..m.slopes.len() {
            let ds = m.slopes[i][0] - m.slopes[j][0];
            if ds.abs() > 1e-14 {
                out.push((m.offsets[j] - m.offsets[i]) / ds);
            }
        }
    }
    out
}

fn active_branch<'a>(a: &'a Psi, b: &'a Psi, x: &[f64], want_max: bool) -> Result<&'a Psi> {
    let (va, vb) = (a.value(x), b.value(x));
    let tie = families::KINK_TIE * va.abs().max(vb.abs()).max(1.0);
    if (va - vb).abs() < tie {
        return Err(Error::NonsmoothPoint { x: x.to_vec() });
    }
    if (va > vb) == want_max {
        Ok(a)
    } else {
        Ok(b)
    }
}

/// Gradient and Hessian at x: analytic when attached, otherwise central
/// finite differences with steps scaled to max(1, ||x||).
pub fn derivatives(psi: &Psi, x: &[f64]) -> Result<(Vec<f64>, SymMatrix)> {
    let n = psi.dim();
    if x.len() != n {
        return Err(Error::Domain("point dimension mismatch".into()));
    }
    let scale = norm(x).max(1.0);
    let grad = match psi.analytic_gradient(x)? {
        Some(g) => g,
        None => {
            let h = f64::EPSILON.cbrt() * scale;
            let mut g = vec![0.0; n];
            let mut xp = x.to_vec();
            for i in 0..n {
                xp[i] = x[i] + h;
                let fp = psi.value(&xp);
                xp[i] = x[i] - h;
                let fm = psi.value(&xp);
                xp[i] = x[i];
                g[i] = (fp - fm) / (2.0 * h);
            }
            g
        }
    };
    let hess = match psi.analytic_hessian(x)? {
        Some(h) => h,
        None => {
            let h = f64::EPSILON.powf(0.25) * scale;
            let mut m = SymMatrix::zeros(n);
            let f0 = psi.value(x);
            let mut xt = x.to_vec();
            for i in 0..n {
                xt[i] = x[i] + h;
                let fp = psi.value(&xt);
                xt[i] = x[i] - h;
                let fm = psi.value(&xt);
                xt[i] = x[i];
                m.set_sym(i, i, (fp - 2.0 * f0 + fm) / (h * h));
                for j in (i + 1)..n {
                    xt[i] = x[i] + h;
                    xt[j] = x[j] + h;
                    let fpp = psi.value(&xt);
                    xt[j] = x[j] - h;
                    let fpm = psi.value(&xt);
                    xt[i] = x[i] - h;
                    let fmm = psi.value(&xt);
                    xt[j] = x[j] + h;
                    let fmp = psi.value(&xt);
                    xt[i] = x[i];
                    xt[j] = x[j];
                    m.set_sym(i, j, (fpp - fpm - fmp + fmm) / (4.0 * h * h));
                }
            }
            m
        }
    };
    Ok((grad, hess))
}

/// Gauss curvature of the epigraph boundary above x:
/// det(H) / (1 + |grad|^2)^{(n+2)/2}, clamped at zero.
pub fn epigraph_curvature(psi: &Psi, x: &[f64]) -> Result<f64> {
    let n = psi.dim() as f64;
    let (g, h) = derivatives(psi, x)?;
    let det = h.det().max(0.0);
    Ok(det / (1.0 + dot(&g, &g)).powf((n + 2.0) / 2.0))
}

/// Outer unit normal of the epigraph boundary above x: (grad, -1) normalized.
pub fn epigraph_normal(psi: &Psi, x: &[f64]) -> Result<Vec<f64>> {
    let (g, _) = derivatives(psi, x)?;
    let s = (1.0 + dot(&g, &g)).sqrt();
    let mut v: Vec<f64> = g.iter().map(|gi| gi / s).collect();
    v.push(-1.0 / s);
    Ok(v)
}

/// Upper bound kappa^{-1/n} for the rolling radius at x; infinite where the
/// curvature vanishes.
pub fn rolling_bound(psi: &Psi, x: &[f64]) -> Result<f64> {
    let kappa = epigraph_curvature(psi, x)?;
    if kappa <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(kappa.powf(-1.0 / psi.dim() as f64))
}

/// Radius R such that the exponential tail bound for e^{-psi} outside the
/// centered ball of radius R is at most eps. Scans the available linear
/// minorants and keeps the smallest certified radius.
pub fn coercivity_box(psi: &Psi, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain("tail budget must be positive".into()));
    }
    let n = psi.dim();
    let (a0, _) = psi.coercivity()?;
    let mut best: Option<f64> = None;
    let mut alpha = a0;
    let mut prev = f64::INFINITY;
    for _ in 0..48 {
        let Some(b) = psi.growth_offset(alpha) else { break };
        let Ok(r) = tail_radius(n, alpha, b, eps) else { break };
        best = Some(best.map_or(r, |cur: f64| cur.min(r)));
        if r > prev {
            // radius worsening: past the sweet spot of the alpha scan
            break;
        }
        prev = r;
        alpha *= 2.0;
    }
    best.ok_or_else(|| Error::Domain("no coercivity certificate available".into()))
}

/// Solves tail(R) = eps for the closed-form tail of e^{-alpha r - b}.
fn tail_radius(n: usize, alpha: f64, b: f64, eps: f64) -> Result<f64> {
    let tail = |r: f64| -> f64 {
        let e = (-alpha * r - b).exp();
        match n {
            1 => 2.0 * e / alpha,
            2 => {
                2.0 * std::f64::consts::PI * e * (r / alpha + 1.0 / (alpha * alpha))
            }
            3 => {
                4.0 * std::f64::consts::PI
                    * e
                    * (r * r / alpha + 2.0 * r / (alpha * alpha) + 2.0 / (alpha * alpha * alpha))
            }
            _ => f64::INFINITY,
        }
    };
    if n > 3 {
        return Err(Error::Domain("coercivity boxes support n <= 3".into()));
    }
    if tail(0.0) <= eps {
        return Ok(0.0);
    }
    // solve in log space so the residual tolerance is relative to eps
    let g = |r: f64| -> Result<f64> { Ok(-tail(r).ln()) };
    find_monotone_root(g, -eps.ln(), 0.0, 1e-9)
}

/// Checks numerically that the returned box indeed captures all but eps of
/// the mass of e^{-psi} in one dimension. Test helper.
pub fn tail_mass_1d(psi: &Psi, r: f64, reach: f64) -> Result<f64> {
    let spec = QuadratureSpec::with_tols(1e-14, 1e-10);
    let f = |x: f64| -> Result<f64> { Ok((-psi.value(&[x])).exp()) };
    let (upper, _) = integrate_1d_with(f, r, r + reach, &spec)?;
    let g = |x: f64| -> Result<f64> { Ok((-psi.value(&[x])).exp()) };
    let (lower, _) = integrate_1d_with(g, -r - reach, -r, &spec)?;
    Ok(upper + lower)
}

/// Applies an invertible linear change of variables: returns psi composed
/// with T, with derivatives and coercivity transformed accordingly.
pub fn affine_precompose(psi: &Psi, t: &Matrix) -> Result<Psi> {
    if t.dim() != psi.dim() {
        return Err(Error::Domain("transform dimension mismatch".into()));
    }
    let inv = t.inverse()?;
    Ok(Psi::Precomposed { inner: Box::new(psi.clone()), map: t.clone(), inv_map: inv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola() -> Psi {
        Psi::gaussian(1)
    }

    #[test]
    fn quadratic_derivatives_are_exact() {
        let q = Psi::gaussian(2);
        let x = [0.7, -1.3];
        let (g, h) = derivatives(&q, &x).unwrap();
        assert!((g[0] - 0.7).abs() < 1e-15 && (g[1] + 1.3).abs() < 1e-15);
        assert!((h.get(0, 0) - 1.0).abs() < 1e-15 && h.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn pnorm_derivatives() {
        let p = Psi::PNorm(PNorm::new(1, 4.0, 1.0).unwrap());
        let (g, h) = derivatives(&p, &[2.0]).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-12);
        assert!((h.get(0, 0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_hessian_matches() {
        let p = Psi::ValueOnly(Box::new(Psi::PNorm(PNorm::new(1, 4.0, 1.0).unwrap())));
        let (g, h) = derivatives(&p, &[1.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8);
        assert!((h.get(0, 0) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn fd_matches_analytic_on_random_quadratics() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let m = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let a = SymMatrix::from_rows(
                2,
                &[
                    m[0] * m[0] + m[1] * m[1] + 0.3,
                    m[0] * m[2] + m[1] * m[3],
                    m[0] * m[2] + m[1] * m[3],
                    m[2] * m[2] + m[3] * m[3] + 0.3,
                ],
            )
            .unwrap();
            let q = Psi::quadratic(a, vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], 0.0).unwrap();
            let fd = Psi::ValueOnly(Box::new(q.clone()));
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let (ga, ha) = derivatives(&q, &x).unwrap();
            let (gf, hf) = derivatives(&fd, &x).unwrap();
            for i in 0..2 {
                assert!((ga[i] - gf[i]).abs() <= 1e-6 * (1.0 + ga[i].abs()));
                for j in 0..2 {
                    assert!((ha.get(i, j) - hf.get(i, j)).abs() <= 1e-5 * (1.0 + ha.get(i, j).abs()));
                }
            }
        }
    }

    #[test]
    fn curvature_normal_rolling_on_parabola() {
        let p = parabola();
        assert!((epigraph_curvature(&p, &[0.0]).unwrap() - 1.0).abs() < 1e-12);
        let k1 = epigraph_curvature(&p, &[1.0]).unwrap();
        assert!((k1 - 1.0 / 2f64.sqrt().powi(3)).abs() < 1e-12);
        let n0 = epigraph_normal(&p, &[0.0]).unwrap();
        assert!((n0[0]).abs() < 1e-15 && (n0[1] + 1.0).abs() < 1e-15);
        let n1 = epigraph_normal(&p, &[1.0]).unwrap();
        let s = 2f64.sqrt();
        assert!((n1[0] - 1.0 / s).abs() < 1e-12 && (n1[1] + 1.0 / s).abs() < 1e-12);
        assert!((rolling_bound(&p, &[0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((rolling_bound(&p, &[1.0]).unwrap() - 2f64.powf(1.5)).abs() < 1e-10);
        let ma = Psi::MaxAffine(MaxAffine::abs_value());
        assert!(rolling_bound(&ma, &[0.5]).unwrap().is_infinite());
        assert!((epigraph_curvature(&ma, &[0.5]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn normal_has_unit_norm_and_negative_last() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let p = Psi::PNorm(PNorm::new(2, 3.0, 0.7).unwrap());
        for _ in 0..50 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let nv = epigraph_normal(&p, &x).unwrap();
            assert!((norm(&nv) - 1.0).abs() < 1e-12);
            assert!(nv[2] < 0.0);
        }
    }

    #[test]
    fn coercivity_box_abs_value() {
        let ma = Psi::MaxAffine(MaxAffine::abs_value());
        let (a, b) = ma.coercivity().unwrap();
        assert!((a - 1.0).abs() < 1e-12 && b.abs() < 1e-12);
        let r = coercivity_box(&ma, 1e-10).unwrap();
        assert!((r - 23.719).abs() < 1e-2);
        // the actual Gaussian tail at that radius is far below the budget
        let g = parabola();
        let rg = coercivity_box(&g, 1e-10).unwrap();
        let tail = tail_mass_1d(&g, rg, 30.0).unwrap();
        assert!(tail <= 1e-10, "tail {tail:.3e}");
        // eps at least the full bound mass gives radius zero
        let r0 = coercivity_box(&ma, 10.0).unwrap();
        assert_eq!(r0, 0.0);
    }

    #[test]
    fn tilt_and_fold_to_quadratic() {
        let g = Psi::gaussian(2);
        let t = g.tilt(&[0.5, -0.25]);
        let q = t.as_quadratic().unwrap();
        assert!((q.value(&[1.0, 1.0]) - (1.0 - 0.25)).abs() < 1e-14);
        let tr = Matrix::from_rows(2, &[2.0, 0.0, 0.0, 0.5]).unwrap();
        let pc = affine_precompose(&g, &tr).unwrap();
        let q2 = pc.as_quadratic().unwrap();
        assert!((q2.value(&[1.0, 1.0]) - (4.0 + 0.25) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn restricted_quadratic_fold() {
        let a = SymMatrix::from_rows(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let q = Psi::quadratic(a, vec![0.3, -0.2], 0.7).unwrap();
        let r = Psi::Restricted { inner: Box::new(q.clone()), prefix: vec![1.5] };
        let folded = r.as_quadratic().unwrap();
        for x in [-2.0, -0.3, 0.0, 1.1, 2.7] {
            assert!((folded.value(&[x]) - q.value(&[1.5, x])).abs() < 1e-12);
        }
    }

    #[test]
    fn sublevel_radius_contains_set() {
        let g = Psi::gaussian(2);
        let r = g.sublevel_radius(2.0).unwrap();
        // the true sublevel set is the ball of radius 2
        assert!(r >= 2.0 && r < 12.0, "radius {r}");
    }
}
