//! Report emission: fixed-schema CSV, JSON summaries, optional SVG charts.
//! All files are written atomically (temp file in place, then rename) and
//! with fixed float formatting, so reruns are byte-identical.

use crate::error::Result;
use crate::harness::ConvergenceReport;
use std::path::Path;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Sweep CSV: `delta,raw,scaled`.
pub fn converge_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("delta,raw,scaled\n");
    for row in &report.rows {
        out.push_str(&format!("{},{},{}\n", fmt(row.delta), fmt(row.raw), fmt(row.scaled)));
    }
    out
}

/// Body deficit CSV: `delta,deficit,scaled`.
pub fn bodies_csv(rows: &[crate::bodies::DeficitRow]) -> String {
    let mut out = String::from("delta,deficit,scaled\n");
    for row in rows {
        out.push_str(&format!("{},{},{}\n", fmt(row.delta), fmt(row.deficit), fmt(row.scaled)));
    }
    out
}

/// Sandwich probe CSV: `x,psi,ulam,floating,slack`. Multi-dimensional probes
/// join their coordinates with ';'.
pub fn sandwich_csv(rows: &[crate::floating::SandwichRow]) -> String {
    let mut out = String::from("x,psi,ulam,floating,slack\n");
    for row in rows {
        let x = row.x.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(";");
        out.push_str(&format!(
            "{x},{},{},{},{}\n",
            fmt(row.psi),
            fmt(row.ulam),
            fmt(row.floating),
            fmt(row.slack)
        ));
    }
    out
}

/// Probe evaluation CSV with one value column.
pub fn eval_csv(column: &str, rows: &[(Vec<f64>, f64, f64)]) -> String {
    let mut out = format!("x,psi,{column}\n");
    for (x, psi, val) in rows {
        let xs = x.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(";");
        out.push_str(&format!("{xs},{},{}\n", fmt(*psi), fmt(*val)));
    }
    out
}

#[derive(serde::Serialize)]
struct FitJson {
    exponent: f64,
    amplitude: f64,
    residual: f64,
}

#[derive(serde::Serialize)]
struct SummaryJson<'a> {
    quantity: &'a str,
    reference: f64,
    limit: f64,
    rel_gap: f64,
    fit: FitJson,
}

/// JSON summary object for one convergence report.
pub fn summary_json(report: &ConvergenceReport) -> String {
    summary_json_parts(
        report.quantity.label(),
        report.reference,
        report.fit.limit,
        report.rel_gap,
        report.fit.rate_exponent,
        report.fit.amplitude,
        report.fit.residual,
    )
}

pub fn summary_json_parts(
    quantity: &str,
    reference: f64,
    limit: f64,
    rel_gap: f64,
    exponent: f64,
    amplitude: f64,
    residual: f64,
) -> String {
    let s = SummaryJson {
        quantity,
        reference,
        limit,
        rel_gap,
        fit: FitJson { exponent, amplitude, residual },
    };
    let mut out = serde_json::to_string_pretty(&s).expect("summary serializes");
    out.push('\n');
    out
}

/// Minimal line chart of scaled values against log10(delta).
pub fn sweep_svg(title: &str, rows: &[crate::harness::SweepRow], reference: f64) -> String {
    let (w, h, ml, mb) = (640.0, 400.0, 60.0, 40.0);
    let xs: Vec<f64> = rows.iter().map(|r| r.delta.log10()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    let (xmin, xmax) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (ymin, ymax) = {
        let lo = ys.iter().cloned().fold(reference, f64::min);
        let hi = ys.iter().cloned().fold(reference, f64::max);
        let pad = 0.1 * (hi - lo).max(1e-12);
        (lo - pad, hi + pad)
    };
    let px = |x: f64| ml + (x - xmin) / (xmax - xmin).max(1e-12) * (w - ml - 20.0);
    let py = |y: f64| (h - mb) - (y - ymin) / (ymax - ymin).max(1e-12) * (h - mb - 30.0);
    let mut path = String::new();
    for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
        path.push_str(if i == 0 { "M" } else { " L" });
        path.push_str(&format!("{:.2},{:.2}", px(*x), py(*y)));
    }
    let ref_y = py(reference);
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"20\" font-family=\"monospace\" font-size=\"14\">{title}</text>\n",
            "<line x1=\"{ml}\" y1=\"{hb}\" x2=\"{wr}\" y2=\"{hb}\" stroke=\"black\"/>\n",
            "<line x1=\"{ml}\" y1=\"30\" x2=\"{ml}\" y2=\"{hb}\" stroke=\"black\"/>\n",
            "<line x1=\"{ml}\" y1=\"{ry:.2}\" x2=\"{wr}\" y2=\"{ry:.2}\" ",
            "stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n",
            "<path d=\"{path}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            "<text x=\"{ml}\" y=\"{hl}\" font-family=\"monospace\" font-size=\"11\">",
            "log10(delta) from {x0:.2} to {x1:.2}; dashed line = reference {refv:.6}</text>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        tx = ml,
        title = title,
        ml = ml,
        hb = h - mb,
        wr = w - 20.0,
        ry = ref_y,
        path = path,
        hl = h - 10.0,
        x0 = xmin,
        x1 = xmax,
        refv = reference,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SweepRow;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one\n").unwrap();
        write_atomic(&p, b"two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert!(!p.with_extension("csv.tmp").exists());
    }

    #[test]
    fn summary_schema_fields() {
        let json = summary_json_parts("I_scaled", 1.0, 0.99, 0.01, 2.0 / 3.0, -0.5, 1e-4);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["quantity"], "I_scaled");
        assert!(v["fit"]["exponent"].as_f64().unwrap() > 0.6);
        assert!(v.get("limit").is_some() && v.get("rel_gap").is_some());
    }

    #[test]
    fn svg_has_path_and_reference() {
        let rows = vec![
            SweepRow { delta: 0.1, raw: 0.05, scaled: 1.1 },
            SweepRow { delta: 0.01, raw: 0.02, scaled: 1.02 },
            SweepRow { delta: 0.001, raw: 0.008, scaled: 1.005 },
        ];
        let svg = sweep_svg("demo", &rows, 1.0);
        assert!(svg.contains("<path d=\"M"));
        assert!(svg.contains("stroke-dasharray"));
    }
}
