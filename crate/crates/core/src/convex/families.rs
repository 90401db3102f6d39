//! Built-in convex function families.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, SymMatrix};

/// Relative tie threshold below which two affine pieces count as a kink.
pub(crate) const KINK_TIE: f64 = 1e-9;

/// psi(x) = x'Ax/2 + b'x + c with A positive definite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub(crate) n: usize,
    pub(crate) a: SymMatrix,
    pub(crate) b: Vec<f64>,
    pub(crate) c: f64,
    pub(crate) inv_a: SymMatrix,
    pub(crate) det_a: f64,
    pub(crate) min_eig: f64,
    pub(crate) minimizer: Vec<f64>,
}

impl Quadratic {
    pub fn new(a: SymMatrix, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = a.dim();
        if b.len() != n {
            return Err(Error::Domain("linear term dimension mismatch".into()));
        }
        let min_eig = a.min_eigenvalue();
        if !(min_eig > 0.0) {
            return Err(Error::Domain(format!(
                "quadratic matrix must be positive definite (min eigenvalue {min_eig:.3e})"
            )));
        }
        let inv_a = a.inverse()?;
        let det_a = a.det();
        let minimizer: Vec<f64> = inv_a.matvec(&b).iter().map(|v| -v).collect();
        Ok(Quadratic { n, a, b, c, inv_a, det_a, min_eig, minimizer })
    }

    /// Isotropic x'x/2 in dimension n.
    pub fn isotropic(n: usize) -> Self {
        Quadratic::new(SymMatrix::identity(n), vec![0.0; n], 0.0).expect("identity is PD")
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.a.matvec(x)) + dot(&self.b, x) + self.c
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.a.matvec(x);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi += bi;
        }
        g
    }

    pub fn min_value(&self) -> f64 {
        self.value(&self.minimizer)
    }
}

/// psi(x) = scale * ||x||^p / p with p > 1.
#[derive(Debug, Clone)]
pub struct PNorm {
    pub(crate) n: usize,
    pub(crate) p: f64,
    pub(crate) scale: f64,
}

impl PNorm {
    pub fn new(n: usize, p: f64, scale: f64) -> Result<Self> {
        if !(p > 1.0) || !(scale > 0.0) {
            return Err(Error::Domain("power function needs p > 1 and scale > 0".into()));
        }
        Ok(PNorm { n, p, scale })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.scale * norm(x).powf(self.p) / self.p
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            return vec![0.0; self.n];
        }
        let f = self.scale * r.powf(self.p - 2.0);
        x.iter().map(|v| f * v).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> Result<SymMatrix> {
        let r = norm(x);
        if r == 0.0 {
            if self.p > 2.0 {
                return Ok(SymMatrix::zeros(self.n));
            }
            if (self.p - 2.0).abs() < 1e-14 {
                let mut h = SymMatrix::identity(self.n);
                for i in 0..self.n {
                    h.set_sym(i, i, self.scale);
                }
                return Ok(h);
            }
            return Err(Error::NonsmoothPoint { x: x.to_vec() });
        }
        let f = self.scale * r.powf(self.p - 2.0);
        let mut h = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let mut v = f * (self.p - 2.0) * x[i] * x[j] / (r * r);
                if i == j {
                    v += f;
                }
                h.set_sym(i, j, v);
            }
        }
        Ok(h)
    }
}

/// psi(x) = max_i (<s_i, x> + o_i). Coercive, never supercoercive.
#[derive(Debug, Clone)]
pub struct MaxAffine {
    pub(crate) n: usize,
    pub(crate) slopes: Vec<Vec<f64>>,
    pub(crate) offsets: Vec<f64>,
    /// certified kappa with max_i <s_i, u> >= kappa for all unit u
    pub(crate) kappa: f64,
    pub(crate) min_offset: f64,
}

impl MaxAffine {
    pub fn new(n: usize, slopes: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if n > 2 {
            return Err(Error::Domain("max-affine families support n <= 2".into()));
        }
        if slopes.len() != offsets.len() || slopes.len() < n + 1 {
            return Err(Error::Domain(format!(
                "need at least {} affine pieces with matching offsets",
                n + 1
            )));
        }
        if slopes.iter().any(|s| s.len() != n) {
            return Err(Error::Domain("slope dimension mismatch".into()));
        }
        let kappa = certified_kappa(n, &slopes);
        if !(kappa > 0.0) {
            return Err(Error::Domain(
                "slopes do not positively span the space (certified growth is zero)".into(),
            ));
        }
        let min_offset = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(MaxAffine { n, slopes, offsets, kappa, min_offset })
    }

    /// psi(x) = |x| in one dimension.
    pub fn abs_value() -> Self {
        MaxAffine::new(1, vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0]).expect("valid pieces")
    }

    pub fn pieces(&self, x: &[f64]) -> Vec<f64> {
        self.slopes
            .iter()
            .zip(&self.offsets)
            .map(|(s, o)| dot(s, x) + o)
            .collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.pieces(x).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the unique binding piece, or a nonsmooth-point error on ties.
    pub fn binding_piece(&self, x: &[f64]) -> Result<usize> {
        let vals = self.pieces(x);
        let mut best = 0;
        for (i, v) in vals.iter().enumerate() {
            if *v > vals[best] {
                best = i;
            }
        }
        let tie_tol = KINK_TIE * vals[best].abs().max(1.0);
        for (i, v) in vals.iter().enumerate() {
            if i != best && vals[best] - v < tie_tol {
                return Err(Error::NonsmoothPoint { x: x.to_vec() });
            }
        }
        Ok(best)
    }
}

/// Lower bound on min_{|u|=1} max_i <s_i, u>, certified against the grid
/// spacing through the Lipschitz constant of the directional maximum.
fn certified_kappa(n: usize, slopes: &[Vec<f64>]) -> f64 {
    let lip = slopes.iter().map(|s| norm(s)).fold(0.0, f64::max);
    match n {
        1 => {
            let up = slopes.iter().map(|s| s[0]).fold(f64::NEG_INFINITY, f64::max);
            let down = slopes.iter().map(|s| -s[0]).fold(f64::NEG_INFINITY, f64::max);
            up.min(down)
        }
        2 => {
            let m = 4096;
            let dtheta = 2.0 * std::f64::consts::PI / m as f64;
            let mut worst = f64::INFINITY;
            for k in 0..m {
                let t = k as f64 * dtheta;
                let u = [t.cos(), t.sin()];
                let v = slopes.iter().map(|s| s[0] * u[0] + s[1] * u[1]).fold(f64::NEG_INFINITY, f64::max);
                worst = worst.min(v);
            }
            worst - lip * dtheta * 0.5
        }
        _ => 0.0,
    }
}

/// Log-sum-exp smoothing of a max-affine function plus a quadratic ridge:
/// psi(x) = (1/beta) log sum_i exp(beta (<s_i,x> + o_i)) + ridge ||x||^2 / 2.
#[derive(Debug, Clone)]
pub struct SmoothedMaxAffine {
    pub(crate) base: MaxAffine,
    pub(crate) beta: f64,
    pub(crate) ridge: f64,
}

impl SmoothedMaxAffine {
    pub fn new(base: MaxAffine, beta: f64, ridge: f64) -> Result<Self> {
        if !(beta > 0.0) || ridge < 0.0 {
            return Err(Error::Domain("smoothing needs beta > 0 and ridge >= 0".into()));
        }
        Ok(SmoothedMaxAffine { base, beta, ridge })
    }

    fn softmax_weights(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let pieces = self.base.pieces(x);
        let m = pieces.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut ws: Vec<f64> = pieces.iter().map(|p| ((p - m) * self.beta).exp()).collect();
        let z: f64 = ws.iter().sum();
        for w in ws.iter_mut() {
            *w /= z;
        }
        // smoothed value = m + log(z)/beta
        (ws, m + z.ln() / self.beta)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (_, lse) = self.softmax_weights(x);
        lse + 0.5 * self.ridge * dot(x, x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (ws, _) = self.softmax_weights(x);
        let n = self.base.n;
        let mut g = vec![0.0; n];
        for (w, s) in ws.iter().zip(&self.base.slopes) {
            for i in 0..n {
                g[i] += w * s[i];
            }
        }
        for i in 0..n {
            g[i] += self.ridge * x[i];
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> SymMatrix {
        let (ws, _) = self.softmax_weights(x);
        let n = self.base.n;
        let mut mean = vec![0.0; n];
        for (w, s) in ws.iter().zip(&self.base.slopes) {
            for i in 0..n {
                mean[i] += w * s[i];
            }
        }
        let mut h = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for (w, s) in ws.iter().zip(&self.base.slopes) {
                    v += w * s[i] * s[j];
                }
                v = self.beta * (v - mean[i] * mean[j]);
                if i == j {
                    v += self.ridge;
                }
                h.set_sym(i, j, v);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_requires_pd() {
        let a = SymMatrix::from_rows(2, &[1.0, 2.0, 2.0, 1.0]).unwrap(); // eigenvalues 3, -1
        assert!(Quadratic::new(a, vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn max_affine_kappa_1d() {
        let abs = MaxAffine::abs_value();
        assert!((abs.kappa - 1.0).abs() < 1e-12);
        assert_eq!(abs.value(&[-2.5]), 2.5);
        assert!(abs.binding_piece(&[0.0]).is_err());
        assert_eq!(abs.binding_piece(&[1.0]).unwrap(), 0);
    }

    #[test]
    fn max_affine_spanning_check() {
        // both slopes point the same way: not coercive
        assert!(MaxAffine::new(1, vec![vec![1.0], vec![2.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn smoothed_abs_matches_asymptotics() {
        let sm = SmoothedMaxAffine::new(MaxAffine::abs_value(), 50.0, 0.0).unwrap();
        assert!((sm.value(&[3.0]) - 3.0).abs() < 1e-12);
        assert!((sm.value(&[0.0]) - 2f64.ln() / 50.0).abs() < 1e-14);
        let h = sm.hessian(&[0.0]);
        assert!((h.get(0, 0) - 50.0).abs() < 1e-9); // beta * sech^2(0)
    }
}
