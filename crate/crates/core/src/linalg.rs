//! Small dense linear algebra for dimensions 1..=3.
//!
//! Points are plain `&[f64]` slices; matrices are row-major `Vec<f64>` behind
//! thin newtypes. Everything here is closed-form ‒ no external solver.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// a + s*b
pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Symmetric n x n matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    d: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, d: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.d[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from row-major entries, symmetrizing (A + A^T)/2.
    pub fn from_rows(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                rows.len()
            )));
        }
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = 0.5 * (rows[i * n + j] + rows[j * n + i]);
            }
        }
        Ok(SymMatrix { n, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.d[i * self.n + j] = v;
        self.d[j * self.n + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| dot(&self.d[i * n..(i + 1) * n], x)).collect()
    }

    pub fn det(&self) -> f64 {
        det_row_major(self.n, &self.d)
    }

    /// Smallest eigenvalue, closed form for n <= 3.
    pub fn min_eigenvalue(&self) -> f64 {
        match self.n {
            1 => self.d[0],
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let t = 0.5 * (a + c);
                let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
                t - r
            }
            3 => {
                // Trigonometric solution of the characteristic cubic.
                let a = &self.d;
                let p1 = a[1] * a[1] + a[2] * a[2] + a[5] * a[5];
                let q = (a[0] + a[4] + a[8]) / 3.0;
                if p1 == 0.0 {
                    return a[0].min(a[4]).min(a[8]);
                }
                let p2 = (a[0] - q).powi(2) + (a[4] - q).powi(2) + (a[8] - q).powi(2) + 2.0 * p1;
                let p = (p2 / 6.0).sqrt();
                let mut b = [0.0; 9];
                for i in 0..9 {
                    b[i] = a[i] / p;
                }
                b[0] -= q / p;
                b[4] -= q / p;
                b[8] -= q / p;
                let r = (det_row_major(3, &b) / 2.0).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                // smallest of the three eigenvalues
                q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
            }
            _ => panic!("min_eigenvalue supports n <= 3"),
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        let m = Matrix { n: self.n, d: self.d.clone() }.inverse()?;
        Ok(SymMatrix { n: self.n, d: m.d })
    }
}

/// General square n x n matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    d: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                rows.len()
            )));
        }
        Ok(Matrix { n, d: rows.to_vec() })
    }

    pub fn identity(n: usize) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 1.0;
        }
        Matrix { n, d }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    pub fn det(&self) -> f64 {
        det_row_major(self.n, &self.d)
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[j * n + i] = self.d[i * n + j];
            }
        }
        Matrix { n, d }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| dot(&self.d[i * n..(i + 1) * n], x)).collect()
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.d[i * n + k] * rhs.d[k * n + j];
                }
                d[i * n + j] = s;
            }
        }
        Matrix { n, d }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let det = self.det();
        if det.abs() < 1e-300 {
            return Err(Error::Domain("singular matrix".into()));
        }
        let d = &self.d;
        let inv = match n {
            1 => vec![1.0 / d[0]],
            2 => vec![d[3] / det, -d[1] / det, -d[2] / det, d[0] / det],
            3 => {
                let c = |i: usize, j: usize| -> f64 {
                    // cofactor of entry (i, j)
                    let rows: Vec<usize> = (0..3).filter(|&r| r != i).collect();
                    let cols: Vec<usize> = (0..3).filter(|&c| c != j).collect();
                    let m = d[rows[0] * 3 + cols[0]] * d[rows[1] * 3 + cols[1]]
                        - d[rows[0] * 3 + cols[1]] * d[rows[1] * 3 + cols[0]];
                    if (i + j) % 2 == 0 {
                        m
                    } else {
                        -m
                    }
                };
                // adjugate transpose / det
                let mut out = vec![0.0; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        out[j * 3 + i] = c(i, j) / det;
                    }
                }
                out
            }
            _ => return Err(Error::Domain("inverse supports n <= 3".into())),
        };
        Ok(Matrix { n, d: inv })
    }

    /// Conjugation T^T S T for symmetric S.
    pub fn conjugate_sym(&self, s: &SymMatrix) -> SymMatrix {
        let st = Matrix { n: s.n, d: s.d.clone() };
        let prod = self.transpose().matmul(&st).matmul(self);
        // symmetrize against rounding
        SymMatrix::from_rows(self.n, &prod.d).expect("dims agree")
    }
}

fn det_row_major(n: usize, d: &[f64]) -> f64 {
    match n {
        1 => d[0],
        2 => d[0] * d[3] - d[1] * d[2],
        3 => {
            d[0] * (d[4] * d[8] - d[5] * d[7]) - d[1] * (d[3] * d[8] - d[5] * d[6])
                + d[2] * (d[3] * d[7] - d[4] * d[6])
        }
        _ => panic!("determinant supports n <= 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_roundtrip() {
        let m = Matrix::from_rows(3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - want).abs() < 1e-12);
            }
        }
        assert!((m.det() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn sym_min_eigenvalue() {
        let m = SymMatrix::from_rows(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((m.min_eigenvalue() - 1.0).abs() < 1e-12);
        let m3 = SymMatrix::from_rows(3, &[4.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 7.0]).unwrap();
        assert!((m3.min_eigenvalue() - 2.0).abs() < 1e-10);
        let m3b =
            SymMatrix::from_rows(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        // eigenvalues 2, 2 +/- sqrt(2)
        assert!((m3b.min_eigenvalue() - (2.0 - 2f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn conjugation_matches_direct() {
        let t = Matrix::from_rows(2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        let s = SymMatrix::from_rows(2, &[1.0, 0.0, 0.0, 4.0]).unwrap();
        let c = t.conjugate_sym(&s);
        // T^T S T = [[1,2],[2,8]]
        assert!((c.get(0, 0) - 1.0).abs() < 1e-14);
        assert!((c.get(0, 1) - 2.0).abs() < 1e-14);
        assert!((c.get(1, 1) - 8.0).abs() < 1e-14);
    }
}
