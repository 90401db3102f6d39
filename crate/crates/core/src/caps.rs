//! Halfspace caps of epigraphs: volumes, cut levels, barycenters, and the
//! conjugate samples they induce on the floating machinery.
//!
//! Directions are parametrized by a slope y in R^n through
//! theta = (-y, 1) / sqrt(1 + |y|^2), so every admissible cut corresponds to
//! a supporting slope of the function. Cutting epi(psi) with the halfspace
//! {<z, theta> <= a} reduces, by integrating over vertical fibers, to the
//! slab function psi_y(x) = psi(x) - <y, x> at level L = a / theta_last.

use crate::constants::unit_ball_volume;
use crate::convex::{Psi, Quadratic};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::minimize::gd_minimize;
use crate::quad::QuadratureSpec;
use crate::region::integrate_region;
use crate::roots::find_monotone_root;

/// Unit direction in R^{n+1} with positive last coordinate, stored together
/// with its slope parametrization.
#[derive(Debug, Clone)]
pub struct Direction {
    theta: Vec<f64>,
    slope: Vec<f64>,
}

impl Direction {
    pub fn from_slope(y: &[f64]) -> Direction {
        let s = (1.0 + dot(y, y)).sqrt();
        let mut theta: Vec<f64> = y.iter().map(|v| -v / s).collect();
        theta.push(1.0 / s);
        Direction { theta, slope: y.to_vec() }
    }

    pub fn from_theta(theta: &[f64]) -> Result<Direction> {
        let last = *theta.last().ok_or_else(|| Error::Domain("empty direction".into()))?;
        if !(last > 0.0) {
            return Err(Error::Domain("direction must have positive last coordinate".into()));
        }
        let nrm = norm(theta);
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("direction not unit (norm {nrm})")));
        }
        let slope = theta[..theta.len() - 1].iter().map(|v| -v / last).collect();
        Ok(Direction { theta: theta.to_vec(), slope })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn slope(&self) -> &[f64] {
        &self.slope
    }

    pub fn theta_last(&self) -> f64 {
        *self.theta.last().expect("nonempty")
    }

    /// Converts a cut level from theta units to slab units L = a / theta_last.
    pub fn slab_level(&self, a: f64) -> f64 {
        a / self.theta_last()
    }
}

/// A solved cap: cut level, volume and barycenter of epi(psi) below it.
#[derive(Debug, Clone)]
pub struct CapStats {
    pub direction: Direction,
    /// cut level a in theta units
    pub level: f64,
    pub volume: f64,
    /// barycenter in R^{n+1}
    pub barycenter: Vec<f64>,
}

/// Numeric tolerances for cap solves.
#[derive(Debug, Clone)]
pub struct CapTolerances {
    pub root_tol: f64,
    pub quad: QuadratureSpec,
}

impl Default for CapTolerances {
    fn default() -> Self {
        CapTolerances { root_tol: 1e-9, quad: QuadratureSpec::default() }
    }
}

/// Only supercoercive functions cut by upward directions admit finite caps
/// that this artifact certifies.
pub fn admissible(psi: &Psi, dir: &Direction) -> bool {
    psi.supercoercive() && dir.theta_last() > 0.0
}

fn require_admissible(psi: &Psi, dir: &Direction) -> Result<()> {
    if !admissible(psi, dir) {
        return Err(Error::Domain(
            "cap requires a supercoercive function and an upward direction".into(),
        ));
    }
    if dir.slope().len() != psi.dim() {
        return Err(Error::Domain("direction dimension mismatch".into()));
    }
    Ok(())
}

/// Internal solution of a cap in slab units.
#[derive(Debug, Clone, PartialEq)]
pub struct CapSolution {
    /// level of the slab function psi_y, so the theta-level is
    /// level_l * theta_last
    pub level_l: f64,
    pub barycenter_spatial: Vec<f64>,
    pub barycenter_last: f64,
}

/// Closed-form profile constants for quadratic slab functions:
/// vol(L) = kvol * (L - m0)^{(n+2)/2}.
struct QuadraticCapProfile {
    n: usize,
    minimizer: Vec<f64>,
    min_value: f64,
    kvol: f64,
    kmoment: f64,
}

impl QuadraticCapProfile {
    fn new(q: &Quadratic) -> QuadraticCapProfile {
        let n = q.n;
        let vn = unit_ball_volume(n).expect("n >= 1");
        let sqrt_det = q.det_a.sqrt();
        let nf = n as f64;
        let kvol = 2f64.powf((nf + 2.0) / 2.0) * vn / ((nf + 2.0) * sqrt_det);
        let kmoment =
            2f64.powf(nf / 2.0) * 2.0 * nf * vn / ((nf + 2.0) * (nf + 4.0) * sqrt_det);
        QuadraticCapProfile {
            n,
            minimizer: q.minimizer.clone(),
            min_value: q.min_value(),
            kvol,
            kmoment,
        }
    }

    fn volume(&self, level_l: f64) -> f64 {
        let t = (level_l - self.min_value).max(0.0);
        self.kvol * t.powf((self.n as f64 + 2.0) / 2.0)
    }

    fn level_for_volume(&self, delta: f64) -> f64 {
        self.min_value + (delta / self.kvol).powf(2.0 / (self.n as f64 + 2.0))
    }

    fn solve(&self, y: &[f64], delta: f64) -> CapSolution {
        let level_l = self.level_for_volume(delta);
        let t = level_l - self.min_value;
        let moment = self.kmoment * t.powf((self.n as f64 + 4.0) / 2.0);
        let last = 0.5
            * (level_l + 2.0 * dot(y, &self.minimizer) + self.min_value + moment / delta);
        CapSolution {
            level_l,
            barycenter_spatial: self.minimizer.clone(),
            barycenter_last: last,
        }
    }
}

/// Cap solver for quadratic functions with the matrix work hoisted out of
/// the per-slope loop; `solve` is allocation-light and exact.
#[derive(Debug, Clone)]
pub struct QuadCapSolver {
    quad: Quadratic,
    kvol: f64,
    kmoment: f64,
    n: usize,
}

impl QuadCapSolver {
    pub fn try_new(psi: &Psi) -> Option<QuadCapSolver> {
        let quad = psi.as_quadratic()?;
        let profile = QuadraticCapProfile::new(&quad);
        Some(QuadCapSolver { n: quad.n, kvol: profile.kvol, kmoment: profile.kmoment, quad })
    }

    pub fn solve(&self, y: &[f64], delta: f64) -> CapSolution {
        let nf = self.n as f64;
        // minimizer of psi - <y, x>: A x0 = y - b
        let rhs: Vec<f64> = y.iter().zip(&self.quad.b).map(|(yi, bi)| yi - bi).collect();
        let x0 = self.quad.inv_a.matvec(&rhs);
        let ydotx0 = dot(y, &x0);
        let m0 = self.quad.value(&x0) - ydotx0;
        let t = (delta / self.kvol).powf(2.0 / (nf + 2.0));
        let level_l = m0 + t;
        let moment = self.kmoment * t.powf((nf + 4.0) / 2.0);
        let last = 0.5 * (level_l + 2.0 * ydotx0 + m0 + moment / delta);
        CapSolution { level_l, barycenter_spatial: x0, barycenter_last: last }
    }
}

/// Volume of epi(psi) cut by {<z, theta> <= a}.
pub fn cap_volume(psi: &Psi, dir: &Direction, a: f64) -> Result<f64> {
    cap_volume_with(psi, dir, a, &CapTolerances::default())
}

pub fn cap_volume_with(psi: &Psi, dir: &Direction, a: f64, tols: &CapTolerances) -> Result<f64> {
    require_admissible(psi, dir)?;
    let tilted = psi.tilt(dir.slope());
    let level_l = dir.slab_level(a);
    if let Some(q) = tilted.as_quadratic() {
        return Ok(QuadraticCapProfile::new(&q).volume(level_l));
    }
    slab_volume(&tilted, level_l, &tols.quad)
}

fn slab_volume(tilted: &Psi, level_l: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |x: &[f64]| Ok(level_l - tilted.value(x));
    let (v, _) = integrate_region(f, tilted, level_l, spec)?;
    Ok(v.max(0.0))
}

/// Cut level a with cap volume delta, solved by bracketed monotone root
/// finding; the lower bracket is the level through the supporting point of
/// the epigraph in direction -theta.
pub fn cap_level(psi: &Psi, dir: &Direction, delta: f64) -> Result<f64> {
    cap_level_with(psi, dir, delta, &CapTolerances::default())
}

pub fn cap_level_with(psi: &Psi, dir: &Direction, delta: f64, tols: &CapTolerances) -> Result<f64> {
    require_admissible(psi, dir)?;
    if !(delta > 0.0) {
        return Err(Error::Domain("cap volume must be positive".into()));
    }
    let tilted = psi.tilt(dir.slope());
    if let Some(q) = tilted.as_quadratic() {
        let level_l = QuadraticCapProfile::new(&q).level_for_volume(delta);
        return Ok(level_l * dir.theta_last());
    }
    let level_l = numeric_cap_level(&tilted, delta, tols)?;
    Ok(level_l * dir.theta_last())
}

fn slab_minimum(tilted: &Psi) -> Result<f64> {
    if let Some(q) = tilted.as_quadratic() {
        return Ok(q.min_value());
    }
    let hint = tilted.minimizer_hint();
    let f = |x: &[f64]| tilted.value(x);
    let has_grad = tilted.analytic_gradient(&hint).ok().flatten().is_some();
    let (_, v) = if has_grad {
        let t = tilted.clone();
        let grad = move |x: &[f64]| {
            t.analytic_gradient(x).ok().flatten().expect("analytic gradient available")
        };
        gd_minimize(f, Some(grad), &hint, 1e-13)?
    } else {
        gd_minimize(f, None::<fn(&[f64]) -> Vec<f64>>, &hint, 1e-13)?
    };
    Ok(v)
}

fn numeric_cap_level(tilted: &Psi, delta: f64, tols: &CapTolerances) -> Result<f64> {
    let m0 = slab_minimum(tilted)?;
    let resid_tol = tols.root_tol * delta.abs().max(1.0);
    let spec = QuadratureSpec {
        abs_tol: (0.2 * resid_tol).min(tols.quad.abs_tol.max(1e-300)),
        rel_tol: tols.quad.rel_tol.min(1e-6),
        ..tols.quad.clone()
    };
    let g = |l: f64| -> Result<f64> { slab_volume(tilted, l, &spec) };
    find_monotone_root(g, delta, m0, tols.root_tol)
}

/// Cap of volume delta in the given direction: level and barycenter.
pub fn cap_barycenter(psi: &Psi, dir: &Direction, delta: f64) -> Result<CapStats> {
    cap_barycenter_with(psi, dir, delta, &CapTolerances::default())
}

pub fn cap_barycenter_with(
    psi: &Psi,
    dir: &Direction,
    delta: f64,
    tols: &CapTolerances,
) -> Result<CapStats> {
    let sol = solve_cap(psi, dir.slope(), delta, tols)?;
    let mut barycenter = sol.barycenter_spatial.clone();
    barycenter.push(sol.barycenter_last);
    Ok(CapStats {
        direction: dir.clone(),
        level: sol.level_l * dir.theta_last(),
        volume: delta,
        barycenter,
    })
}

/// Full cap solve in slab units; closed form for quadratics, quadrature
/// otherwise.
pub fn solve_cap(psi: &Psi, y: &[f64], delta: f64, tols: &CapTolerances) -> Result<CapSolution> {
    let dir = Direction::from_slope(y);
    require_admissible(psi, &dir)?;
    if !(delta > 0.0) {
        return Err(Error::Domain("cap volume must be positive".into()));
    }
    let tilted = psi.tilt(y);
    if let Some(q) = tilted.as_quadratic() {
        return Ok(QuadraticCapProfile::new(&q).solve(y, delta));
    }

    let level_l = numeric_cap_level(&tilted, delta, tols)?;
    let n = psi.dim();
    let spec = QuadratureSpec {
        abs_tol: (0.05 * tols.root_tol * delta.max(1e-12)).max(1e-300),
        rel_tol: tols.quad.rel_tol.min(1e-7),
        ..tols.quad.clone()
    };
    let mut spatial = vec![0.0; n];
    for i in 0..n {
        let f = |x: &[f64]| Ok(x[i] * (level_l - tilted.value(x)));
        let (v, _) = integrate_region(f, &tilted, level_l, &spec)?;
        spatial[i] = v / delta;
    }
    // vertical moment of the fiber over x: integrate (T - psi)(T + psi)/2
    // with T(x) = level_l + <y, x> and psi = tilted + <y, x>
    let f = |x: &[f64]| {
        let fiber = level_l - tilted.value(x);
        let tplus = level_l + 2.0 * dot(y, x) + tilted.value(x);
        Ok(0.5 * fiber * tplus)
    };
    let (v, _) = integrate_region(f, &tilted, level_l, &spec)?;
    Ok(CapSolution { level_l, barycenter_spatial: spatial, barycenter_last: v / delta })
}

/// Conjugate sample of the floating function at slope y: the support value
/// of the floating set at (y, -1), i.e. <y_bar, y> - t_bar for the cap
/// barycenter (y_bar, t_bar).
pub fn conjugate_sample(psi: &Psi, delta: f64, y: &[f64]) -> Result<f64> {
    conjugate_sample_with(psi, delta, y, &CapTolerances::default())
}

pub fn conjugate_sample_with(
    psi: &Psi,
    delta: f64,
    y: &[f64],
    tols: &CapTolerances,
) -> Result<f64> {
    let sol = solve_cap(psi, y, delta, tols)?;
    Ok(dot(&sol.barycenter_spatial, y) - sol.barycenter_last)
}

/// Seeded Monte Carlo estimate of a cap volume and barycenter; the
/// independent oracle for the analytic and quadrature paths.
#[derive(Debug, Clone)]
pub struct McCapEstimate {
    pub volume: f64,
    pub volume_se: f64,
    pub barycenter: Vec<f64>,
    pub barycenter_se: Vec<f64>,
    pub accepted: usize,
}

pub fn mc_cap_estimate(
    psi: &Psi,
    dir: &Direction,
    a: f64,
    samples: usize,
    seed: u64,
) -> Result<McCapEstimate> {
    use rand::{Rng, SeedableRng};
    require_admissible(psi, dir)?;
    let n = psi.dim();
    let y = dir.slope();
    let level_l = dir.slab_level(a);
    let tilted = psi.tilt(y);
    let radius = tilted.sublevel_radius(level_l)?;
    if radius == 0.0 {
        return Ok(McCapEstimate {
            volume: 0.0,
            volume_se: 0.0,
            barycenter: vec![0.0; n + 1],
            barycenter_se: vec![0.0; n + 1],
            accepted: 0,
        });
    }
    let t_lo = slab_minimum(&Psi::Tilted { inner: Box::new(psi.clone()), slope: vec![0.0; n] })?;
    let t_hi = level_l + y.iter().map(|v| v.abs()).sum::<f64>() * radius;
    if !(t_hi > t_lo) {
        return Err(Error::Domain("degenerate sampling box".into()));
    }
    let mut box_vol = t_hi - t_lo;
    for _ in 0..n {
        box_vol *= 2.0 * radius;
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0usize;
    let mut sums = vec![0.0f64; n + 1];
    let mut sq_sums = vec![0.0f64; n + 1];
    let mut x = vec![0.0f64; n];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen_range(-radius..radius);
        }
        let t = rng.gen_range(t_lo..t_hi);
        if psi.value(&x) <= t && t <= level_l + dot(y, &x) {
            acc += 1;
            for i in 0..n {
                sums[i] += x[i];
                sq_sums[i] += x[i] * x[i];
            }
            sums[n] += t;
            sq_sums[n] += t * t;
        }
    }
    let p = acc as f64 / samples as f64;
    let volume = box_vol * p;
    let volume_se = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
    let mut barycenter = vec![0.0; n + 1];
    let mut barycenter_se = vec![0.0; n + 1];
    if acc > 1 {
        for i in 0..=n {
            let mean = sums[i] / acc as f64;
            let var = (sq_sums[i] / acc as f64 - mean * mean).max(0.0);
            barycenter[i] = mean;
            barycenter_se[i] = (var / acc as f64).sqrt();
        }
    }
    Ok(McCapEstimate { volume, volume_se, barycenter, barycenter_se, accepted: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::MaxAffine;

    fn parabola() -> Psi {
        Psi::gaussian(1)
    }

    fn vertical() -> Direction {
        Direction::from_slope(&[0.0])
    }

    #[test]
    fn admissibility_policy() {
        let p = parabola();
        assert!(admissible(&p, &vertical()));
        let ma = Psi::MaxAffine(MaxAffine::abs_value());
        assert!(!admissible(&ma, &vertical()));
        assert!(Direction::from_theta(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn direction_roundtrip() {
        let d = Direction::from_slope(&[1.0]);
        let s = 2f64.sqrt();
        assert!((d.theta()[0] + 1.0 / s).abs() < 1e-15);
        assert!((d.theta()[1] - 1.0 / s).abs() < 1e-15);
        let d2 = Direction::from_theta(d.theta()).unwrap();
        assert!((d2.slope()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parabola_cap_volume_closed_form() {
        let p = parabola();
        let v = cap_volume(&p, &vertical(), 0.5).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        // empty cap below the minimum
        let v0 = cap_volume(&p, &vertical(), -0.25).unwrap();
        assert_eq!(v0, 0.0);
    }

    #[test]
    fn parabola_cap_level_and_monotonicity() {
        let p = parabola();
        let a = cap_level(&p, &vertical(), 2.0 / 3.0).unwrap();
        assert!((a - 0.5).abs() < 1e-10);
        let small = cap_level(&p, &vertical(), 2.0 / 3.0 * 1e-3).unwrap();
        assert!((small - 0.005).abs() < 1e-10);
        let mut prev = 0.0;
        for k in 1..=5 {
            let a = cap_level(&p, &vertical(), k as f64 * 0.1).unwrap();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn parabola_cap_barycenter() {
        let p = parabola();
        let stats = cap_barycenter(&p, &vertical(), 2.0 / 3.0).unwrap();
        assert!((stats.level - 0.5).abs() < 1e-10);
        assert!(stats.barycenter[0].abs() < 1e-12);
        assert!((stats.barycenter[1] - 0.3).abs() < 1e-10);
        // general delta: last coordinate is (3/5) of the cut level
        for delta in [0.1, 0.02, 1e-4] {
            let s = cap_barycenter(&p, &vertical(), delta).unwrap();
            assert!((s.barycenter[1] - 0.6 * s.level).abs() < 1e-10 * s.level.max(1e-10));
            // barycenter strictly inside the cap halfspace
            assert!(dot(&s.barycenter, s.direction.theta()) < s.level);
        }
    }

    #[test]
    fn conjugate_sample_examples() {
        let p = parabola();
        let v = conjugate_sample(&p, 2.0 / 3.0, &[0.0]).unwrap();
        assert!((v + 0.3).abs() < 1e-10);
        // delta -> 0 recovers the conjugate of the parabola: y^2/2
        let v = conjugate_sample(&p, 1e-8, &[1.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-4);
        // nonincreasing in delta
        let deltas = [1.0, 0.3, 0.1, 0.01, 1e-4];
        let vals: Vec<f64> =
            deltas.iter().map(|d| conjugate_sample(&p, *d, &[0.7]).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn numeric_path_matches_closed_form() {
        // force the quadrature path by hiding the quadratic structure
        let q = parabola();
        let hidden = Psi::ValueOnly(Box::new(Psi::PNorm(
            crate::convex::PNorm::new(1, 2.0, 1.0).unwrap(),
        )));
        let dir = Direction::from_slope(&[0.8]);
        let tols = CapTolerances::default();
        let a_closed = cap_level_with(&q, &dir, 0.05, &tols).unwrap();
        let a_numeric = cap_level_with(&hidden, &dir, 0.05, &tols).unwrap();
        assert!(
            (a_closed - a_numeric).abs() < 1e-7,
            "closed {a_closed} vs numeric {a_numeric}"
        );
        let s_closed = solve_cap(&q, &[0.8], 0.05, &tols).unwrap();
        let s_numeric = solve_cap(&hidden, &[0.8], 0.05, &tols).unwrap();
        assert!((s_closed.level_l - s_numeric.level_l).abs() < 1e-7);
        assert!((s_closed.barycenter_spatial[0] - s_numeric.barycenter_spatial[0]).abs() < 1e-6);
        assert!((s_closed.barycenter_last - s_numeric.barycenter_last).abs() < 1e-6);
    }

    #[test]
    fn tilted_cap_against_monte_carlo() {
        let q = parabola();
        let dir = Direction::from_slope(&[1.0]);
        // level through a point above the tangency
        let a = cap_level(&q, &dir, 0.2).unwrap();
        let mc = mc_cap_estimate(&q, &dir, a, 1_000_000, 42).unwrap();
        let v = cap_volume(&q, &dir, a).unwrap();
        assert!(
            (v - mc.volume).abs() <= 3.0 * mc.volume_se,
            "analytic {v} vs mc {} +/- {}",
            mc.volume,
            mc.volume_se
        );
        let stats = cap_barycenter(&q, &dir, 0.2).unwrap();
        for i in 0..2 {
            assert!(
                (stats.barycenter[i] - mc.barycenter[i]).abs() <= 3.0 * mc.barycenter_se[i],
                "coord {i}: {} vs {} +/- {}",
                stats.barycenter[i],
                mc.barycenter[i],
                mc.barycenter_se[i]
            );
        }
    }
}
