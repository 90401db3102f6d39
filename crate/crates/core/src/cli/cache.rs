//! Append-only cap-solve cache keyed by (function hash, delta, slope).
//!
//! Rows store the cut level in theta units and the cap barycenter, which is
//! exactly what a sweep recomputes; a warm cache therefore reproduces a cold
//! run to the last digit. Only quadrature-path solves are cached; quadratic
//! closed forms are cheaper to recompute than to read.

use crate::caps::CapSolution;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn psi_hash(psi: &crate::convex::Psi) -> String {
    format!("{:016x}", fnv1a64(&psi.canonical_id()))
}

fn key_of(hash: &str, delta: f64, y: &[f64]) -> String {
    let ys = y.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(";");
    format!("{hash}|{delta:.17e}|{ys}")
}

/// Routes a fresh solution through the same theta-level conversion a cache
/// read performs, so warm and cold runs agree to the last bit.
pub fn roundtrip_normalize(y: &[f64], sol: CapSolution) -> CapSolution {
    let s = (1.0 + crate::linalg::dot(y, y)).sqrt();
    CapSolution { level_l: (sol.level_l / s) * s, ..sol }
}

#[derive(Debug)]
pub struct CapCache {
    path: PathBuf,
    map: HashMap<String, CapSolution>,
    pending: Mutex<Vec<(String, String)>>,
}

impl CapCache {
    /// Loads (or starts) the cache at `path`.
    pub fn open(path: &Path) -> Result<CapCache> {
        let mut map = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            for (lineno, line) in text.lines().enumerate() {
                if line.is_empty() || line.starts_with("psi_hash") {
                    continue;
                }
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 6 {
                    return Err(Error::Config(format!(
                        "cache {}: line {} has {} columns, expected 6",
                        path.display(),
                        lineno + 1,
                        cols.len()
                    )));
                }
                let parse = |s: &str| -> Result<f64> {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("cache: bad number {s}")))
                };
                let y: Vec<f64> =
                    cols[2].split(';').map(parse).collect::<Result<Vec<_>>>()?;
                let level_theta = parse(cols[3])?;
                let spatial: Vec<f64> =
                    cols[4].split(';').map(parse).collect::<Result<Vec<_>>>()?;
                let last = parse(cols[5])?;
                let level_l = level_theta * (1.0 + crate::linalg::dot(&y, &y)).sqrt();
                let key = key_of(cols[0], parse(cols[1])?, &y);
                map.insert(
                    key,
                    CapSolution {
                        level_l,
                        barycenter_spatial: spatial,
                        barycenter_last: last,
                    },
                );
            }
        }
        Ok(CapCache { path: path.to_path_buf(), map, pending: Mutex::new(Vec::new()) })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn lookup(&self, hash: &str, delta: f64, y: &[f64]) -> Option<&CapSolution> {
        self.map.get(&key_of(hash, delta, y))
    }

    /// Records a fresh solve; rows are buffered and written by `flush`.
    pub fn record(&self, hash: &str, delta: f64, y: &[f64], sol: &CapSolution) {
        let level_theta = sol.level_l / (1.0 + crate::linalg::dot(y, y)).sqrt();
        let ys = y.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(";");
        let sp = sol
            .barycenter_spatial
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(";");
        let row = format!(
            "{hash},{delta:.17e},{ys},{level_theta:.17e},{sp},{:.17e}",
            sol.barycenter_last
        );
        let key = key_of(hash, delta, y);
        self.pending.lock().expect("cache lock").push((key, row));
    }

    /// Appends all buffered rows, sorted by key for run-to-run determinism.
    pub fn flush(&self) -> Result<usize> {
        let mut pending = self.pending.lock().expect("cache lock");
        if pending.is_empty() {
            return Ok(0);
        }
        pending.sort_by(|a, b| a.0.cmp(&b.0));
        pending.dedup_by(|a, b| a.0 == b.0);
        let fresh = !self.path.exists();
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        if fresh {
            writeln!(file, "psi_hash,delta,y,level,barycenter,barycenter_last")?;
        }
        let count = pending.len();
        for (_, row) in pending.iter() {
            writeln!(file, "{row}")?;
        }
        pending.clear();
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::{solve_cap, CapTolerances};
    use crate::convex::{PNorm, Psi};

    #[test]
    fn roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        let psi = Psi::PNorm(PNorm::new(1, 4.0, 1.0).unwrap());
        let hash = psi_hash(&psi);
        let tols = CapTolerances::default();
        let sol = solve_cap(&psi, &[0.3], 0.05, &tols).unwrap();

        let cache = CapCache::open(&path).unwrap();
        cache.record(&hash, 0.05, &[0.3], &sol);
        assert_eq!(cache.flush().unwrap(), 1);
        assert_eq!(cache.flush().unwrap(), 0);

        let warm = CapCache::open(&path).unwrap();
        assert_eq!(warm.len(), 1);
        let got = warm.lookup(&hash, 0.05, &[0.3]).unwrap();
        assert!((got.level_l - sol.level_l).abs() < 1e-15 * sol.level_l.abs().max(1.0));
        assert!((got.barycenter_last - sol.barycenter_last).abs() < 1e-15);
        assert!(warm.lookup(&hash, 0.06, &[0.3]).is_none());
    }
}
