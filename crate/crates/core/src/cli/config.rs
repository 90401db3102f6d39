//! Flat key=value run configuration with repeated-key lists.
//!
//! The format is line-oriented: `key = value`, `#` comments, blank lines
//! ignored. Repeating a key appends to its list. Emission is canonical
//! (sorted keys, original value order), so emit -> parse round-trips.

use crate::convex::{MaxAffine, PNorm, Psi, Quadratic, SmoothedMaxAffine};
use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, Vec<String>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            entries.entry(key.to_string()).or_default().push(value.trim().to_string());
        }
        Ok(RunConfig { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (key, values) in &self.entries {
            for v in values {
                out.push_str(key);
                out.push_str(" = ");
                out.push_str(v);
                out.push('\n');
            }
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), vec![value.into()]);
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.entry(key.to_string()).or_default().push(value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(|s| s.as_str())
    }

    pub fn get_all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("key '{key}': not a number: {s}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Config(format!("key '{key}': not an integer: {s}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(s) => Err(Error::Config(format!("key '{key}': not a boolean: {s}"))),
        }
    }

    /// Whitespace-separated floats in one value.
    pub fn f64_row(&self, key: &str) -> Result<Vec<f64>> {
        let s = self.require(key)?;
        parse_row(key, s)
    }

    /// One row of floats per repeated key occurrence.
    pub fn f64_rows(&self, key: &str) -> Result<Vec<Vec<f64>>> {
        self.get_all(key).iter().map(|s| parse_row(key, s)).collect()
    }

    /// Delta list: repeated `delta` keys, or a geometric sweep given by
    /// `delta_start`, `delta_ratio` (> 1) and `delta_count`.
    pub fn delta_list(&self) -> Result<Vec<f64>> {
        let explicit = self.get_all("delta");
        if !explicit.is_empty() {
            let list: Vec<f64> = explicit
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("delta: not a number: {s}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(list);
        }
        let start = self
            .f64_opt("delta_start")?
            .ok_or_else(|| Error::Config("need delta entries or delta_start".into()))?;
        let ratio = self.f64_or("delta_ratio", 4.0)?;
        let count = self.usize_opt("delta_count")?.unwrap_or(5);
        if !(ratio > 1.0) || count < 1 {
            return Err(Error::Config("delta_ratio must exceed 1 and delta_count be >= 1".into()));
        }
        Ok((0..count).map(|k| start / ratio.powi(k as i32)).collect())
    }
}

fn parse_row(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("key '{key}': bad number {t}"))))
        .collect()
}

/// Builds the convex function named by the config: family plus parameters.
pub fn psi_from_config(cfg: &RunConfig) -> Result<Psi> {
    let family = cfg.require("family")?;
    let n = cfg
        .usize_opt("n")?
        .ok_or_else(|| Error::Config("missing dimension key 'n'".into()))?;
    match family {
        "gaussian" => Ok(Psi::gaussian(n)),
        "quadratic" => {
            let a_entries = cfg.f64_row("A")?;
            let a = SymMatrix::from_rows(n, &a_entries)?;
            let b = match cfg.get("b") {
                Some(_) => cfg.f64_row("b")?,
                None => vec![0.0; n],
            };
            let c = cfg.f64_or("c", 0.0)?;
            Ok(Psi::Quadratic(Quadratic::new(a, b, c)?))
        }
        "pnorm" => {
            let p = cfg.f64_or("p", 4.0)?;
            let scale = cfg.f64_or("scale", 1.0)?;
            Ok(Psi::PNorm(PNorm::new(n, p, scale)?))
        }
        "maxaffine" | "smoothed_maxaffine" => {
            let slopes = cfg.f64_rows("slope")?;
            let offsets: Vec<f64> = cfg.f64_rows("offset")?.into_iter().flatten().collect();
            let ma = MaxAffine::new(n, slopes, offsets)?;
            if family == "maxaffine" {
                Ok(Psi::MaxAffine(ma))
            } else {
                let beta = cfg.f64_or("beta", 100.0)?;
                let mu = cfg.f64_or("mu", 1e-6)?;
                Ok(Psi::SmoothedMaxAffine(SmoothedMaxAffine::new(ma, beta, mu)?))
            }
        }
        other => Err(Error::Config(format!("unknown family '{other}'"))),
    }
}

/// Builds the convex body named by the config.
pub fn body_from_config(cfg: &RunConfig) -> Result<ConvexBody> {
    let kind = cfg.require("body")?;
    match kind {
        "disk" => ConvexBody::ball(2, cfg.f64_or("radius", 1.0)?),
        "ball" => {
            let m = cfg.usize_opt("m")?.unwrap_or(3);
            ConvexBody::ball(m, cfg.f64_or("radius", 1.0)?)
        }
        "square" => Ok(ConvexBody::square(cfg.f64_or("half_width", 1.0)?)),
        "ellipse" | "ellipsoid" => ConvexBody::ellipsoid(cfg.f64_row("semi_axes")?),
        "polygon" => {
            let rows = cfg.f64_rows("vertex")?;
            let verts: Vec<[f64; 2]> = rows
                .iter()
                .map(|r| {
                    if r.len() == 2 {
                        Ok([r[0], r[1]])
                    } else {
                        Err(Error::Config("each vertex needs two coordinates".into()))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::polygon(verts)
        }
        other => Err(Error::Config(format!("unknown body '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_emit_roundtrip() {
        let text = "family = quadratic\nn = 1\nA = 1\ndelta = 0.5\ndelta = 0.125\n# note\n";
        let cfg = RunConfig::parse(text).unwrap();
        let emitted = cfg.emit();
        let again = RunConfig::parse(&emitted).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.get_all("delta").len(), 2);
        assert_eq!(cfg.get("n"), Some("1"));
    }

    #[test]
    fn geometric_delta_sweep() {
        let mut cfg = RunConfig::default();
        cfg.set("delta_start", "1.0");
        cfg.set("delta_ratio", "10");
        cfg.set("delta_count", "3");
        let d = cfg.delta_list().unwrap();
        assert_eq!(d.len(), 3);
        assert!((d[2] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn family_construction() {
        let cfg = RunConfig::parse("family = quadratic\nn = 2\nA = 1 0 0 4\nb = 0 0\nc = 0\n")
            .unwrap();
        let psi = psi_from_config(&cfg).unwrap();
        assert_eq!(psi.dim(), 2);
        assert!((psi.value(&[1.0, 1.0]) - 2.5).abs() < 1e-14);

        let cfg = RunConfig::parse(
            "family = smoothed_maxaffine\nn = 1\nslope = 1\nslope = -1\noffset = 0 0\nbeta = 100\nmu = 1e-6\n",
        )
        .unwrap();
        let psi = psi_from_config(&cfg).unwrap();
        assert!(psi.supercoercive());
    }

    #[test]
    fn body_construction() {
        let cfg = RunConfig::parse("body = square\nhalf_width = 1\n").unwrap();
        let b = body_from_config(&cfg).unwrap();
        assert!((b.total_volume().unwrap() - 4.0).abs() < 1e-14);
        let bad = RunConfig::parse("body = cube\n").unwrap();
        assert!(body_from_config(&bad).is_err());
    }
}
