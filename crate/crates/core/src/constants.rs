//! Unit-ball volumes and the two variational constants used throughout.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Volume of the m-dimensional Euclidean unit ball.
///
/// Uses the parity closed forms pi^k/k! (m = 2k) and 2^{k+1} pi^k / (2k+1)!!
/// (m = 2k+1), exact for integer dimensions.
pub fn unit_ball_volume(m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("unit_ball_volume needs m >= 1".into()));
    }
    if m % 2 == 0 {
        let k = m / 2;
        let mut v = 1.0;
        for i in 1..=k {
            v *= PI / i as f64;
        }
        Ok(v)
    } else {
        let k = m / 2;
        let mut v = 2.0;
        for i in 1..=k {
            v *= 2.0 * PI / (2 * i + 1) as f64;
        }
        Ok(v)
    }
}

/// Constant in front of the metronoid volume-deficit limit in ambient
/// dimension m: (m+1)/(2(m+3)) * ((m+1)/vol_{m-1}(B))^{2/(m+1)}.
pub fn constant_c(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain("constant_c needs m >= 2".into()));
    }
    let v = unit_ball_volume(m - 1)?;
    let mf = m as f64;
    Ok((mf + 1.0) / (2.0 * (mf + 3.0)) * ((mf + 1.0) / v).powf(2.0 / (mf + 1.0)))
}

/// Constant in front of the floating-body volume-deficit limit:
/// (1/2) * ((m+1)/vol_{m-1}(B))^{2/(m+1)}.
pub fn constant_d(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain("constant_d needs m >= 2".into()));
    }
    let v = unit_ball_volume(m - 1)?;
    let mf = m as f64;
    Ok(0.5 * ((mf + 1.0) / v).powf(2.0 / (mf + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_low_dims() {
        assert!((unit_ball_volume(1).unwrap() - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn ball_volume_recursion() {
        // V_m = V_{m-2} * 2 pi / m
        for m in 3..=10 {
            let lhs = unit_ball_volume(m).unwrap();
            let rhs = unit_ball_volume(m - 2).unwrap() * 2.0 * PI / m as f64;
            assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs());
        }
    }

    #[test]
    fn variational_constants() {
        // direct evaluation of the defining formulas
        let c2 = 0.3 * 1.5f64.powf(2.0 / 3.0);
        let c3 = (1.0 / 3.0) * (4.0 / PI).sqrt();
        let d2 = 0.5 * 1.5f64.powf(2.0 / 3.0);
        let d3 = 0.5 * (4.0 / PI).sqrt();
        assert!((constant_c(2).unwrap() - c2).abs() < 1e-15);
        assert!((constant_c(3).unwrap() - c3).abs() < 1e-15);
        assert!((constant_d(2).unwrap() - d2).abs() < 1e-15);
        assert!((constant_d(3).unwrap() - d3).abs() < 1e-15);
        // six-digit reference values
        assert!((constant_c(2).unwrap() - 0.393111).abs() < 1e-6);
        assert!((constant_c(3).unwrap() - 0.376126).abs() < 1e-6);
        assert!((constant_d(2).unwrap() - 0.655185).abs() < 1e-6);
        assert!((constant_d(3).unwrap() - 0.564190).abs() < 1e-6);
    }

    #[test]
    fn constant_ratio_identity() {
        for m in 2..=8 {
            let c = constant_c(m).unwrap();
            let d = constant_d(m).unwrap();
            let mf = m as f64;
            assert!((c / d - (mf + 1.0) / (mf + 3.0)).abs() < 1e-14);
            assert!(d > c);
        }
    }
}
