//! Bounded convex bodies with analytic cap oracles: balls, ellipsoids and
//! planar polygons. Supports floating bodies, metronoid supports, and the
//! volume-deficit sweeps behind the curvature-limit checks.

use crate::constants::unit_ball_volume;
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::linalg::{dot, norm};
use crate::quad::{integrate_1d_with, QuadratureSpec};
use crate::roots::find_monotone_root;

/// A convex body given by closed-form cap oracles. Caps are always cut from
/// the theta side: {x in K : <x, theta> >= a}.
#[derive(Debug, Clone)]
pub enum ConvexBody {
    Ball { dim: usize, radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
    Polygon { vertices: Vec<[f64; 2]> },
}

fn profile_spec() -> QuadratureSpec {
    QuadratureSpec::with_tols(1e-14, 1e-12)
}

/// Revolution profile integrals of a ball of radius rho in dimension m:
/// integral of (2 rho t - t^2)^{(m-1)/2} t^k dt over [0, h], k in {0, 1}.
fn ball_profile(rho: f64, m: usize, h: f64, k: u32) -> Result<f64> {
    let e = (m as f64 - 1.0) / 2.0;
    let f = |t: f64| -> Result<f64> {
        let w = (2.0 * rho * t - t * t).max(0.0);
        Ok(w.powf(e) * t.powi(k as i32))
    };
    let (v, _) = integrate_1d_with(f, 0.0, h, &profile_spec())?;
    Ok(v)
}

/// Volume of a cap of height h of the ball of radius rho in R^m.
fn ball_cap_volume(rho: f64, m: usize, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Ok(0.0);
    }
    let h = h.min(2.0 * rho);
    Ok(unit_ball_volume(m - 1)? * ball_profile(rho, m, h, 0)?)
}

/// Distance from the ball center to the cap barycenter, for a cap of
/// height h in direction theta.
fn ball_cap_barycenter_offset(rho: f64, m: usize, h: f64) -> Result<f64> {
    let i0 = ball_profile(rho, m, h, 0)?;
    let i1 = ball_profile(rho, m, h, 1)?;
    Ok(rho - i1 / i0)
}

impl ConvexBody {
    pub fn ball(dim: usize, radius: f64) -> Result<ConvexBody> {
        if !(2..=3).contains(&dim) || !(radius > 0.0) {
            return Err(Error::Domain("balls need dimension 2 or 3 and positive radius".into()));
        }
        Ok(ConvexBody::Ball { dim, radius })
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<ConvexBody> {
        if !(2..=3).contains(&semi_axes.len()) || semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Domain("ellipsoids need 2 or 3 positive semi-axes".into()));
        }
        Ok(ConvexBody::Ellipsoid { semi_axes })
    }

    /// Counterclockwise convex polygon.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<ConvexBody> {
        if vertices.len() < 3 {
            return Err(Error::Domain("polygons need at least 3 vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= 0.0 {
                return Err(Error::Domain(
                    "polygon must be convex with counterclockwise vertices".into(),
                ));
            }
        }
        Ok(ConvexBody::Polygon { vertices })
    }

    pub fn square(half_width: f64) -> ConvexBody {
        ConvexBody::polygon(vec![
            [half_width, -half_width],
            [half_width, half_width],
            [-half_width, half_width],
            [-half_width, -half_width],
        ])
        .expect("square is convex")
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ConvexBody::Ball { dim, .. } => *dim,
            ConvexBody::Ellipsoid { semi_axes } => semi_axes.len(),
            ConvexBody::Polygon { .. } => 2,
        }
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => radius * norm(theta),
            ConvexBody::Ellipsoid { semi_axes } => {
                semi_axes.iter().zip(theta).map(|(a, t)| (a * t) * (a * t)).sum::<f64>().sqrt()
            }
            ConvexBody::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0] * theta[0] + v[1] * theta[1])
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn total_volume(&self) -> Result<f64> {
        match self {
            ConvexBody::Ball { dim, radius } => {
                Ok(unit_ball_volume(*dim)? * radius.powi(*dim as i32))
            }
            ConvexBody::Ellipsoid { semi_axes } => {
                Ok(unit_ball_volume(semi_axes.len())? * semi_axes.iter().product::<f64>())
            }
            ConvexBody::Polygon { vertices } => Ok(shoelace_area(vertices)),
        }
    }

    /// Volume of the cap {x in K : <x, theta> >= a} for unit theta.
    pub fn cap_volume(&self, theta: &[f64], a: f64) -> Result<f64> {
        match self {
            ConvexBody::Ball { dim, radius } => ball_cap_volume(*radius, *dim, radius - a),
            ConvexBody::Ellipsoid { semi_axes } => {
                let u: Vec<f64> = semi_axes.iter().zip(theta).map(|(s, t)| s * t).collect();
                let w = norm(&u);
                let unit_cap = ball_cap_volume(1.0, semi_axes.len(), 1.0 - a / w)?;
                Ok(semi_axes.iter().product::<f64>() * unit_cap)
            }
            ConvexBody::Polygon { vertices } => {
                let clipped = clip_halfplane(vertices, theta, a);
                Ok(shoelace_area(&clipped))
            }
        }
    }

    /// Barycenter of the same cap.
    pub fn cap_barycenter(&self, theta: &[f64], a: f64) -> Result<Vec<f64>> {
        match self {
            ConvexBody::Ball { dim, radius } => {
                let h = (radius - a).min(2.0 * radius);
                if h <= 0.0 {
                    return Err(Error::Domain("empty cap".into()));
                }
                let off = ball_cap_barycenter_offset(*radius, *dim, h)?;
                Ok(theta.iter().map(|t| t * off).collect())
            }
            ConvexBody::Ellipsoid { semi_axes } => {
                let u: Vec<f64> = semi_axes.iter().zip(theta).map(|(s, t)| s * t).collect();
                let w = norm(&u);
                let h = (1.0 - a / w).min(2.0);
                if h <= 0.0 {
                    return Err(Error::Domain("empty cap".into()));
                }
                let off = ball_cap_barycenter_offset(1.0, semi_axes.len(), h)?;
                // barycenter of the unit-ball cap in direction u/|u|, mapped back
                Ok(semi_axes.iter().zip(&u).map(|(s, ui)| s * ui / w * off).collect())
            }
            ConvexBody::Polygon { vertices } => {
                let clipped = clip_halfplane(vertices, theta, a);
                if shoelace_area(&clipped) <= 0.0 {
                    return Err(Error::Domain("empty cap".into()));
                }
                let c = shoelace_centroid(&clipped);
                Ok(vec![c[0], c[1]])
            }
        }
    }
}

/// Clips a ccw polygon against the halfplane {<x, n> >= c}.
fn clip_halfplane(poly: &[[f64; 2]], n: &[f64], c: f64) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(poly.len() + 4);
    let len = poly.len();
    for i in 0..len {
        let cur = poly[i];
        let nxt = poly[(i + 1) % len];
        let dc = cur[0] * n[0] + cur[1] * n[1] - c;
        let dn = nxt[0] * n[0] + nxt[1] * n[1] - c;
        if dc >= 0.0 {
            out.push(cur);
        }
        if (dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0) {
            let t = dc / (dc - dn);
            out.push([cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])]);
        }
    }
    out
}

fn shoelace_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

fn shoelace_centroid(poly: &[[f64; 2]]) -> [f64; 2] {
    let area = shoelace_area(poly);
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let w = a[0] * b[1] - b[0] * a[1];
        cx += (a[0] + b[0]) * w;
        cy += (a[1] + b[1]) * w;
    }
    [cx / (6.0 * area), cy / (6.0 * area)]
}

/// Cut level R with vol(K cap {<x,theta> >= R}) = delta.
pub fn body_cut_level(body: &ConvexBody, theta: &[f64], delta: f64) -> Result<f64> {
    let total = body.total_volume()?;
    if !(delta > 0.0 && delta < total) {
        return Err(Error::Domain(format!(
            "cap volume must lie strictly between 0 and the body volume {total:.6e}"
        )));
    }
    let top = body.support(theta);
    // depth from the top face is a monotone parametrization
    let g = |s: f64| body.cap_volume(theta, top - s);
    let s = find_monotone_root(g, delta, 0.0, 1e-12)?;
    Ok(top - s)
}

/// Support value of the metronoid in direction theta: the barycenter of the
/// delta-volume cap, paired with theta.
pub fn metronoid_support(body: &ConvexBody, theta: &[f64], delta: f64) -> Result<f64> {
    let r = body_cut_level(body, theta, delta)?;
    let bary = body.cap_barycenter(theta, r)?;
    Ok(dot(&bary, theta))
}

/// Outer halfspace-envelope approximation of a floating body.
#[derive(Debug, Clone)]
pub struct SupportEnvelopeBody {
    pub directions: Vec<Vec<f64>>,
    pub support_values: Vec<f64>,
    pub volume: f64,
    /// exact for balls, halfspace envelope otherwise
    pub exact: bool,
}

/// Support values of the floating body over a direction grid, with the
/// enclosed volume. For balls the floating body is again a ball and the
/// result is exact.
pub fn floating_body_support_envelope(
    body: &ConvexBody,
    n_directions: usize,
    delta: f64,
) -> Result<SupportEnvelopeBody> {
    let total = body.total_volume()?;
    if !(delta > 0.0 && delta < total / 2.0) {
        return Err(Error::Domain("delta must lie in (0, vol/2)".into()));
    }
    if let ConvexBody::Ball { dim, radius } = body {
        let h = cap_height_for_volume(*radius, *dim, delta)?;
        let r = radius - h;
        let dirs = planar_directions(n_directions.max(4));
        return Ok(SupportEnvelopeBody {
            support_values: vec![r; dirs.len()],
            directions: dirs,
            volume: unit_ball_volume(*dim)? * r.powi(*dim as i32),
            exact: true,
        });
    }
    if body.ambient_dim() != 2 {
        return Err(Error::Domain("support envelopes need planar bodies or balls".into()));
    }
    let dirs = planar_directions(n_directions);
    let values: Vec<f64> = dirs
        .iter()
        .map(|th| body_cut_level(body, th, delta))
        .collect::<Result<Vec<_>>>()?;
    let volume = halfplane_intersection_volume(body, &dirs, &values)?;
    Ok(SupportEnvelopeBody { directions: dirs, support_values: values, volume, exact: false })
}

/// Same machinery for the metronoid: support values are cap barycenters.
pub fn metronoid_support_envelope(
    body: &ConvexBody,
    n_directions: usize,
    delta: f64,
) -> Result<SupportEnvelopeBody> {
    let total = body.total_volume()?;
    if !(delta > 0.0 && delta < total / 2.0) {
        return Err(Error::Domain("delta must lie in (0, vol/2)".into()));
    }
    if let ConvexBody::Ball { dim, radius } = body {
        let h = cap_height_for_volume(*radius, *dim, delta)?;
        let r = ball_cap_barycenter_offset(*radius, *dim, h)?;
        let dirs = planar_directions(n_directions.max(4));
        return Ok(SupportEnvelopeBody {
            support_values: vec![r; dirs.len()],
            directions: dirs,
            volume: unit_ball_volume(*dim)? * r.powi(*dim as i32),
            exact: true,
        });
    }
    if body.ambient_dim() != 2 {
        return Err(Error::Domain("support envelopes need planar bodies or balls".into()));
    }
    let dirs = planar_directions(n_directions);
    let values: Vec<f64> = dirs
        .iter()
        .map(|th| metronoid_support(body, th, delta))
        .collect::<Result<Vec<_>>>()?;
    let volume = halfplane_intersection_volume(body, &dirs, &values)?;
    Ok(SupportEnvelopeBody { directions: dirs, support_values: values, volume, exact: false })
}

fn planar_directions(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn halfplane_intersection_volume(
    body: &ConvexBody,
    dirs: &[Vec<f64>],
    supports: &[f64],
) -> Result<f64> {
    // start from a bounding square and clip by {<x, theta_i> <= h_i}
    let r = body.support(&[1.0, 0.0])
        .max(body.support(&[-1.0, 0.0]))
        .max(body.support(&[0.0, 1.0]))
        .max(body.support(&[0.0, -1.0]))
        + 1.0;
    let mut poly = vec![[r, -r], [r, r], [-r, r], [-r, -r]];
    for (th, h) in dirs.iter().zip(supports) {
        // {<x, th> <= h} = {<x, -th> >= -h}
        poly = clip_halfplane(&poly, &[-th[0], -th[1]], -h);
        if poly.len() < 3 {
            return Ok(0.0);
        }
    }
    Ok(shoelace_area(&poly))
}

/// Height of the ball cap with the given volume.
fn cap_height_for_volume(rho: f64, m: usize, delta: f64) -> Result<f64> {
    let g = |h: f64| ball_cap_volume(rho, m, h);
    find_monotone_root(g, delta, 0.0, 1e-12)
}

/// One row of a volume-deficit sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DeficitRow {
    pub delta: f64,
    pub deficit: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeficitKind {
    Floating,
    Metronoid,
}

#[derive(Debug, Clone)]
pub struct DeficitReport {
    pub kind: DeficitKind,
    pub rows: Vec<DeficitRow>,
    pub fit: PowerLawFit,
    pub free_fit: Option<PowerLawFit>,
}

/// Volume-deficit sweep over decreasing deltas: deficits, scaled values and
/// the extrapolation with the exponent pinned to 2/(m+1).
pub fn deficit_sweep(
    body: &ConvexBody,
    deltas: &[f64],
    kind: DeficitKind,
) -> Result<DeficitReport> {
    let m = body.ambient_dim() as f64;
    let total = body.total_volume()?;
    let exponent = 2.0 / (m + 1.0);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let vol = refined_envelope_volume(body, delta, kind)?;
        let deficit = (total - vol).max(0.0);
        rows.push(DeficitRow { delta, deficit, scaled: deficit / delta.powf(exponent) });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.scaled)).collect();
    let fit = fit_power_law(&samples, Some(exponent))?;
    let free_fit = fit_power_law(&samples, None).ok();
    Ok(DeficitReport { kind, rows, fit, free_fit })
}

fn refined_envelope_volume(body: &ConvexBody, delta: f64, kind: DeficitKind) -> Result<f64> {
    let build = |n: usize| -> Result<f64> {
        let env = match kind {
            DeficitKind::Floating => floating_body_support_envelope(body, n, delta)?,
            DeficitKind::Metronoid => metronoid_support_envelope(body, n, delta)?,
        };
        Ok(env.volume)
    };
    if matches!(body, ConvexBody::Ball { .. }) {
        return build(4); // closed form, direction count irrelevant
    }
    let mut n = 2048usize;
    let mut prev = build(n)?;
    while n < 16384 {
        n *= 2;
        let cur = build(n)?;
        if (cur - prev).abs() < 1e-9 {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Cap height, barycenter-depth and their ratio for a ball cap of volume
/// delta; the ratio tends to (m+3)/(m+1) as delta -> 0.
pub fn ball_cap_profile(rho: f64, m: usize, delta: f64) -> Result<(f64, f64, f64)> {
    if !(2..=3).contains(&m) || !(rho > 0.0) {
        return Err(Error::Domain("ball caps need dimension 2 or 3 and positive radius".into()));
    }
    let dh = cap_height_for_volume(rho, m, delta)?;
    if dh >= rho {
        return Err(Error::Domain("delta too large for a proper cap".into()));
    }
    let drho = ball_profile(rho, m, dh, 1)? / ball_profile(rho, m, dh, 0)?;
    Ok((dh, drho, dh / drho))
}

/// Two-sided bound for the normalized cap volume of a ball of radius r cut
/// at height h: lower <= d_m (vol / r^{(m-1)/2})^{2/(m+1)} <= upper with
/// lower = (1 - h/2r)^{(m-1)/(m+1)} h and upper = h.
pub fn ellipsoid_cap_sandwich_check(r: f64, h: f64, m: usize) -> Result<(f64, f64, f64, bool)> {
    if !(h > 0.0 && h < 2.0 * r) {
        return Err(Error::Domain("cap height must lie in (0, 2r)".into()));
    }
    let mf = m as f64;
    let vol = ball_cap_volume(r, m, h)?;
    let d = crate::constants::constant_d(m)?;
    let middle = d * (vol / r.powf((mf - 1.0) / 2.0)).powf(2.0 / (mf + 1.0));
    let lower = (1.0 - h / (2.0 * r)).powf((mf - 1.0) / (mf + 1.0)) * h;
    let upper = h;
    let eps = 1e-10 * h;
    Ok((lower, middle, upper, lower <= middle + eps && middle <= upper + eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_disk() -> ConvexBody {
        ConvexBody::ball(2, 1.0).unwrap()
    }

    #[test]
    fn disk_cut_level_example() {
        // cap of height 0.1 has area arccos(0.9) - 0.9 sqrt(0.19)
        let delta = 0.9f64.acos() - 0.9 * 0.19f64.sqrt();
        let r = body_cut_level(&unit_disk(), &[1.0, 0.0], delta).unwrap();
        assert!((r - 0.9).abs() < 1e-9, "cut level {r}");
    }

    #[test]
    fn symmetric_half_cut_is_zero() {
        let r = body_cut_level(&unit_disk(), &[0.0, 1.0], PI / 2.0).unwrap();
        assert!(r.abs() < 1e-9);
    }

    #[test]
    fn square_strip_cut() {
        let sq = ConvexBody::square(1.0);
        let r = body_cut_level(&sq, &[1.0, 0.0], 0.02).unwrap();
        assert!((r - 0.99).abs() < 1e-10, "cut level {r}");
    }

    #[test]
    fn disk_metronoid_support_value() {
        // frozen oracle: closed-form segment integrals at cap height 0.1
        let prim0 = |t: f64| ((t - 1.0) * (2.0 * t - t * t).max(0.0).sqrt() + (t - 1.0).asin()) / 2.0;
        let i0 = prim0(0.1) - prim0(0.0);
        let phi = 0.9f64.acos();
        let i1 = phi / 2.0 - (2.0 * phi).sin() / 4.0 - phi.sin().powi(3) / 3.0;
        let delta = 2.0 * i0;
        let want = 1.0 - i1 / i0;
        let h = metronoid_support(&unit_disk(), &[1.0, 0.0], delta).unwrap();
        assert!((h - want).abs() < 1e-9, "support {h} vs {want}");
        assert!((h - 0.94018).abs() < 1e-4);
    }

    #[test]
    fn disk_metronoid_rotation_invariant() {
        let d = unit_disk();
        let h0 = metronoid_support(&d, &[1.0, 0.0], 0.05).unwrap();
        for k in 1..8 {
            let t = k as f64 * 0.7;
            let h = metronoid_support(&d, &[t.cos(), t.sin()], 0.05).unwrap();
            assert!((h - h0).abs() < 1e-10);
        }
    }

    #[test]
    fn floating_envelope_of_disk_is_exact() {
        let delta = 0.9f64.acos() - 0.9 * 0.19f64.sqrt();
        let env = floating_body_support_envelope(&unit_disk(), 64, delta).unwrap();
        assert!(env.exact);
        assert!((env.support_values[0] - 0.9).abs() < 1e-9);
        assert!((env.volume - PI * 0.81).abs() < 1e-9);
    }

    #[test]
    fn square_envelope_volume_monotone_in_directions() {
        let sq = ConvexBody::square(1.0);
        let v1 = floating_body_support_envelope(&sq, 256, 1e-3).unwrap().volume;
        let v2 = floating_body_support_envelope(&sq, 512, 1e-3).unwrap().volume;
        let v3 = floating_body_support_envelope(&sq, 1024, 1e-3).unwrap().volume;
        assert!(v2 <= v1 + 1e-12 && v3 <= v2 + 1e-12, "{v1} {v2} {v3}");
        assert!(v3 < 4.0);
    }

    #[test]
    fn ellipse_cap_against_disk() {
        // a circle written as an ellipsoid must agree with the ball oracle
        let e = ConvexBody::ellipsoid(vec![1.0, 1.0]).unwrap();
        let d = unit_disk();
        for a in [0.2, 0.5, 0.9] {
            let th = [0.6, 0.8];
            let ve = e.cap_volume(&th, a).unwrap();
            let vd = d.cap_volume(&th, a).unwrap();
            assert!((ve - vd).abs() < 1e-10);
        }
        // squashed ellipse: cap along the long axis via affine scaling
        let e2 = ConvexBody::ellipsoid(vec![2.0, 1.0]).unwrap();
        let v = e2.cap_volume(&[1.0, 0.0], 1.0).unwrap();
        // affine image of the unit-disk cap at level 1/2, scaled by area 2
        let want = 2.0 * d.cap_volume(&[1.0, 0.0], 0.5).unwrap();
        assert!((v - want).abs() < 1e-10);
    }

    #[test]
    fn ball_cap_ratio_limits() {
        let (dh, drho, ratio) = ball_cap_profile(1.0, 2, 1e-6).unwrap();
        assert!(drho < dh);
        assert!((ratio - 5.0 / 3.0).abs() < 0.01, "m=2 ratio {ratio}");
        let (_, _, ratio3) = ball_cap_profile(1.0, 3, 1e-8).unwrap();
        assert!((ratio3 - 1.5).abs() < 0.01, "m=3 ratio {ratio3}");
    }

    #[test]
    fn cap_profile_rejects_large_delta() {
        assert!(ball_cap_profile(1.0, 2, 3.0).is_err());
    }

    #[test]
    fn sandwich_bound_examples() {
        let (lo, mid, up, holds) = ellipsoid_cap_sandwich_check(1.0, 1.0, 2).unwrap();
        assert!(holds);
        assert!((mid - 0.8853).abs() < 1e-3, "middle {mid}");
        assert!((lo - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((up - 1.0).abs() < 1e-12);
        let (_, _, _, holds3) = ellipsoid_cap_sandwich_check(1.0, 0.5, 3).unwrap();
        assert!(holds3);
        // tangency as h -> 0: middle/h -> 1
        let (_, mid_small, _, _) = ellipsoid_cap_sandwich_check(1.0, 1e-5, 2).unwrap();
        assert!((mid_small / 1e-5 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn deficit_rows_positive_and_increasing() {
        let deltas = [0.05, 0.02, 0.01, 0.005];
        let rep = deficit_sweep(&unit_disk(), &deltas, DeficitKind::Floating).unwrap();
        for w in rep.rows.windows(2) {
            assert!(w[0].deficit > w[1].deficit);
            assert!(w[1].deficit > 0.0);
        }
    }
}
