//! Rectangular slope lattices, discrete function carriers, and support
//! envelopes (discrete Legendre transforms).

use crate::error::{Error, Result};
use crate::linalg::dot;

/// One axis of a rectangular lattice: lo, lo+step, ..., lo+(count-1)*step.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn coord(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    pub fn hi(&self) -> f64 {
        self.coord(self.count - 1)
    }

    fn nearest(&self, y: f64) -> usize {
        if self.step <= 0.0 || self.count == 1 {
            return 0;
        }
        let t = ((y - self.lo) / self.step).round();
        t.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

/// Rectangular lattice in R^n, indexed lexicographically (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeGrid {
    axes: Vec<GridAxis>,
}

impl SlopeGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.count == 0 || !(a.step > 0.0) && a.count > 1) {
            return Err(Error::Domain("grid axes must be nonempty with positive step".into()));
        }
        Ok(SlopeGrid { axes })
    }

    /// Symmetric grid covering [-range, range]^n with the given step; always
    /// contains the origin exactly.
    pub fn symmetric(n: usize, range: f64, step: f64) -> Result<Self> {
        if !(range > 0.0) || !(step > 0.0) {
            return Err(Error::Domain("grid range and step must be positive".into()));
        }
        let half = (range / step).ceil() as usize;
        let axes = (0..n)
            .map(|_| GridAxis { lo: -step * half as f64, step, count: 2 * half + 1 })
            .collect();
        SlopeGrid::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point_into(&self, index: usize, out: &mut [f64]) {
        let mut rem = index;
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = ax.coord(rem % ax.count);
            rem /= ax.count;
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(index, &mut out);
        out
    }

    pub fn multi_to_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (m, ax) in multi.iter().zip(&self.axes) {
            idx = idx * ax.count + m;
        }
        idx
    }

    pub fn index_to_multi(&self, index: usize) -> Vec<usize> {
        let mut rem = index;
        let mut multi = vec![0usize; self.dim()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            multi[k] = rem % ax.count;
            rem /= ax.count;
        }
        multi
    }

    /// Index of the lattice point closest to y (clamped to the grid).
    pub fn nearest_index(&self, y: &[f64]) -> usize {
        let multi: Vec<usize> =
            self.axes.iter().zip(y).map(|(ax, yi)| ax.nearest(*yi)).collect();
        self.multi_to_index(&multi)
    }

    /// Halved step, same extent; contains this grid as the even sub-lattice.
    pub fn refined(&self) -> SlopeGrid {
        let axes = self
            .axes
            .iter()
            .map(|a| GridAxis { lo: a.lo, step: a.step / 2.0, count: 2 * a.count - 1 })
            .collect();
        SlopeGrid { axes }
    }

    /// Maps an index of this grid to the matching index of `self.refined()`.
    pub fn index_in_refined(&self, index: usize) -> usize {
        let multi = self.index_to_multi(index);
        let fine = self.refined();
        let fm: Vec<usize> = multi.iter().map(|m| 2 * m).collect();
        fine.multi_to_index(&fm)
    }

    pub fn iter_points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// Values sampled on a lattice; the discrete carrier for conjugate samples
/// and cut levels.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: SlopeGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: SlopeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain("grid/value length mismatch".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid values must be finite".into()));
        }
        Ok(GridFunction { grid, values })
    }
}

/// Pointwise maximum of supporting affine maps x -> <x, y_j> - v_j.
/// Brute-force evaluation, O(#grid) per call.
#[derive(Debug, Clone)]
pub struct SupportEnvelope {
    pub slopes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl SupportEnvelope {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.slopes
            .iter()
            .zip(&self.values)
            .map(|(y, v)| dot(x, y) - v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds the brute-force support envelope from conjugate samples on a grid.
pub fn conjugate_on_grid(samples: &GridFunction) -> SupportEnvelope {
    SupportEnvelope {
        slopes: samples.grid.iter_points().collect(),
        values: samples.values.clone(),
    }
}

/// Same envelope over a lattice, evaluated by hill climbing from a hint
/// index. The climb is exact when the score is strictly concave along the
/// lattice, which holds for conjugate samples of smooth strictly convex
/// functions; `eval_brute` is the reference.
#[derive(Debug, Clone)]
pub struct LatticeEnvelope {
    pub grid: SlopeGrid,
    pub offsets: Vec<f64>,
}

const MAX_GRID_DIM: usize = 3;

impl LatticeEnvelope {
    pub fn new(samples: GridFunction) -> Self {
        LatticeEnvelope { grid: samples.grid, offsets: samples.values }
    }

    #[inline]
    fn score(&self, x: &[f64], idx: usize, buf: &mut [f64]) -> f64 {
        self.grid.point_into(idx, buf);
        dot(x, buf) - self.offsets[idx]
    }

    pub fn eval_brute(&self, x: &[f64]) -> f64 {
        let mut buf = [0.0; MAX_GRID_DIM];
        let buf = &mut buf[..self.grid.dim()];
        (0..self.grid.len())
            .map(|i| self.score(x, i, buf))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn eval_from(&self, x: &[f64], start: usize) -> f64 {
        self.eval_hinted(x, start).0
    }

    /// Hill-climbs over the `{-1,0,1}^n` neighborhood from the given start
    /// index; returns the envelope value together with the binding index, so
    /// scans along a curve can reuse it as the next start.
    pub fn eval_hinted(&self, x: &[f64], start: usize) -> (f64, usize) {
        let n = self.grid.dim();
        debug_assert!(n <= MAX_GRID_DIM);
        let mut buf = [0.0; MAX_GRID_DIM];
        let buf = &mut buf[..n];
        let mut counts = [1usize; MAX_GRID_DIM];
        for (k, ax) in self.grid.axes().iter().enumerate() {
            counts[k] = ax.count;
        }
        let mut cur = [0usize; MAX_GRID_DIM];
        {
            let multi = self.grid.index_to_multi(start.min(self.grid.len() - 1));
            cur[..n].copy_from_slice(&multi);
        }
        let to_index = |m: &[usize]| -> usize {
            let mut idx = 0;
            for k in 0..n {
                idx = idx * counts[k] + m[k];
            }
            idx
        };
        let mut cur_idx = to_index(&cur[..n]);
        let mut cur_score = self.score(x, cur_idx, buf);
        let budget: usize = counts[..n].iter().sum::<usize>() + 64;
        let mut cand = [0usize; MAX_GRID_DIM];
        for _ in 0..budget {
            let mut best_score = cur_score;
            let mut best_idx = usize::MAX;
            let mut best_multi = [0usize; MAX_GRID_DIM];
            // enumerate the 3^n - 1 neighbors without allocating
            let total = 3usize.pow(n as u32);
            for code in 0..total {
                let mut rem = code;
                let mut ok = true;
                let mut all_zero = true;
                for k in 0..n {
                    let d = (rem % 3) as isize - 1;
                    rem /= 3;
                    if d != 0 {
                        all_zero = false;
                    }
                    let i = cur[k] as isize + d;
                    if i < 0 || i as usize >= counts[k] {
                        ok = false;
                        break;
                    }
                    cand[k] = i as usize;
                }
                if !ok || all_zero {
                    continue;
                }
                let idx = to_index(&cand[..n]);
                let s = self.score(x, idx, buf);
                if s > best_score {
                    best_score = s;
                    best_idx = idx;
                    best_multi = cand;
                }
            }
            if best_idx == usize::MAX {
                return (cur_score, cur_idx);
            }
            cur = best_multi;
            cur_idx = best_idx;
            cur_score = best_score;
        }
        // budget exhausted: fall back to the exact scan
        let mut best = (f64::NEG_INFINITY, 0usize);
        for i in 0..self.grid.len() {
            let s = self.score(x, i, buf);
            if s > best.0 {
                best = (s, i);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_contains_origin() {
        let g = SlopeGrid::symmetric(2, 5.0, 0.3).unwrap();
        let mid = g.nearest_index(&[0.0, 0.0]);
        let p = g.point(mid);
        assert!(p[0].abs() < 1e-14 && p[1].abs() < 1e-14);
        assert!(g.axes()[0].hi() >= 5.0);
    }

    #[test]
    fn refinement_contains_base_points() {
        let g = SlopeGrid::symmetric(2, 1.0, 0.25).unwrap();
        let f = g.refined();
        for i in 0..g.len() {
            let j = g.index_in_refined(i);
            let (p, q) = (g.point(i), f.point(j));
            assert!((p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn discrete_conjugate_of_parabola() {
        // conj values y^2/2 on [-5, 5] step 0.01; envelope at 1 is x^2/2 = 0.5
        let grid = SlopeGrid::symmetric(1, 5.0, 0.01).unwrap();
        let values: Vec<f64> = grid.iter_points().map(|y| y[0] * y[0] / 2.0).collect();
        let gf = GridFunction::new(grid, values).unwrap();
        let env = conjugate_on_grid(&gf);
        assert!((env.eval(&[1.0]) - 0.5).abs() < 5e-5);
        // lower envelope property: never exceeds the true conjugate
        for x in [-3.3, -1.0, 0.0, 0.7, 2.9] {
            assert!(env.eval(&[x]) <= x * x / 2.0 + 1e-12);
        }
    }

    #[test]
    fn single_slope_is_affine() {
        let grid = SlopeGrid::new(vec![GridAxis { lo: 0.0, step: 1.0, count: 1 }]).unwrap();
        let gf = GridFunction::new(grid, vec![3.0]).unwrap();
        let env = conjugate_on_grid(&gf);
        for x in [-2.0, 0.0, 5.0] {
            assert!((env.eval(&[x]) + 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn envelope_midpoint_convexity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let grid = SlopeGrid::symmetric(1, 2.0, 0.05).unwrap();
        let values: Vec<f64> = grid.iter_points().map(|y| y[0].abs().powf(1.5)).collect();
        let env = conjugate_on_grid(&GridFunction::new(grid, values).unwrap());
        for _ in 0..200 {
            let a = rng.gen_range(-4.0..4.0);
            let b = rng.gen_range(-4.0..4.0);
            let m = 0.5 * (a + b);
            assert!(env.eval(&[m]) <= 0.5 * (env.eval(&[a]) + env.eval(&[b])) + 1e-12);
        }
    }

    #[test]
    fn hill_climb_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let grid = SlopeGrid::symmetric(2, 3.0, 0.1).unwrap();
        let values: Vec<f64> =
            grid.iter_points().map(|y| 0.5 * (y[0] * y[0] + 2.0 * y[1] * y[1]) + 0.3 * y[0]).collect();
        let env = LatticeEnvelope::new(GridFunction::new(grid, values).unwrap());
        for _ in 0..200 {
            let x = [rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5)];
            let start = env.grid.nearest_index(&[x[0] * 0.8, x[1] * 0.3]);
            let a = env.eval_from(&x, start);
            let b = env.eval_brute(&x);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "climb {a} vs brute {b}");
        }
    }
}
