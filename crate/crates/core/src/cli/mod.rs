//! Command-line front end: configuration, subcommand drivers, persistence.

pub mod cache;
pub mod config;
pub mod output;

pub use cache::{psi_hash, CapCache};
pub use config::{body_from_config, psi_from_config, RunConfig};

use crate::asa::{asa_body, asa_density};
use crate::bodies::{
    ball_cap_profile, body_cut_level, deficit_sweep, ellipsoid_cap_sandwich_check, ConvexBody,
    DeficitKind,
};
use crate::caps::{CapSolution, CapTolerances};
use crate::constants::{constant_c, constant_d};
use crate::convex::Psi;
use crate::error::{Error, Result};
use crate::floating::{build_pair_with, resolve_layout, sandwich_report, SlopeGridSpec};
use crate::harness::{
    default_cap_solver, floating_sweep_with, theorem_sweep_with, ConvergenceReport, SweepOptions,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ulamfloat",
    about = "Floating bodies, metronoids and affine surface areas at desk scale",
    version
)]
struct Cli {
    /// Configuration file (flat key = value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON reports
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap-solve cache file (CSV, append-only)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for Monte Carlo oracle checks
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct FamilyArgs {
    /// Function family: gaussian | quadratic | pnorm | maxaffine | smoothed_maxaffine
    #[arg(long)]
    family: Option<String>,
    /// Dimension of the function domain
    #[arg(long)]
    n: Option<usize>,
    /// Matrix entries, row-major (quadratic family)
    #[arg(long, short = 'A', allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Linear term (quadratic family)
    #[arg(long, allow_hyphen_values = true)]
    linear: Option<String>,
    /// Constant term (quadratic family)
    #[arg(long, allow_hyphen_values = true)]
    constant: Option<f64>,
    /// Power (pnorm family)
    #[arg(long)]
    p: Option<f64>,
    /// Scale (pnorm family)
    #[arg(long)]
    scale: Option<f64>,
    /// Smoothing sharpness (smoothed_maxaffine family)
    #[arg(long)]
    beta: Option<f64>,
    /// Quadratic ridge weight (smoothed_maxaffine family)
    #[arg(long)]
    mu: Option<f64>,
}

impl FamilyArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.family {
            cfg.set("family", v.clone());
        }
        if let Some(v) = self.n {
            cfg.set("n", v.to_string());
        }
        if let Some(v) = &self.matrix {
            cfg.set("A", v.replace(',', " "));
        }
        if let Some(v) = &self.linear {
            cfg.set("b", v.replace(',', " "));
        }
        if let Some(v) = self.constant {
            cfg.set("c", format!("{v:.17e}"));
        }
        if let Some(v) = self.p {
            cfg.set("p", format!("{v:.17e}"));
        }
        if let Some(v) = self.scale {
            cfg.set("scale", format!("{v:.17e}"));
        }
        if let Some(v) = self.beta {
            cfg.set("beta", format!("{v:.17e}"));
        }
        if let Some(v) = self.mu {
            cfg.set("mu", format!("{v:.17e}"));
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Affine surface area of a log-concave density
    Asa {
        #[command(flatten)]
        family: FamilyArgs,
        /// Also evaluate the boundary form and report both
        #[arg(long)]
        both_forms: bool,
    },
    /// Evaluate the support-envelope floating function at probe points
    UlamEval {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Evaluate the halfspace-envelope floating function at probe points
    FloatEval {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Delta-sweep of both deficit integrals with extrapolated limits
    Converge {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Delta-sweep of the floating-function deficit integral
    FloatConverge {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Volume-deficit sweeps for a convex body
    Bodies {
        /// floating | metronoid | both
        #[arg(long)]
        which: Option<String>,
    },
    /// Cap height / barycenter-depth ratio of a ball cap
    CapRatio {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Probe the ordering psi <= support envelope <= halfspace envelope
    Sandwich {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Built-in verification suites: quick | full | oracle
    Check {
        #[arg(long, default_value = "quick")]
        suite: String,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap renders its own usage/help text
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let run = || -> Result<()> {
        let mut cfg = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &cli.out {
            cfg.set("out", out.display().to_string());
        }
        if let Some(cache) = &cli.cache {
            cfg.set("cache", cache.display().to_string());
        }
        if let Some(seed) = cli.seed {
            cfg.set("seed", seed.to_string());
        }
        dispatch(&cli.cmd, cfg)
    };
    let result = match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build();
            match pool {
                Ok(p) => p.install(run),
                Err(e) => Err(Error::Config(format!("thread pool: {e}"))),
            }
        }
        None => run(),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Cmd, mut cfg: RunConfig) -> Result<()> {
    match cmd {
        Cmd::Asa { family, both_forms } => {
            family.apply(&mut cfg);
            run_asa(&cfg, *both_forms)
        }
        Cmd::UlamEval { family, delta } => {
            family.apply(&mut cfg);
            if let Some(d) = delta {
                cfg.set("delta", format!("{d:.17e}"));
            }
            run_eval(&cfg, true)
        }
        Cmd::FloatEval { family, delta } => {
            family.apply(&mut cfg);
            if let Some(d) = delta {
                cfg.set("delta", format!("{d:.17e}"));
            }
            run_eval(&cfg, false)
        }
        Cmd::Converge { family } => {
            family.apply(&mut cfg);
            run_converge(&cfg)
        }
        Cmd::FloatConverge { family } => {
            family.apply(&mut cfg);
            run_float_converge(&cfg)
        }
        Cmd::Bodies { which } => {
            if let Some(w) = which {
                cfg.set("which", w.clone());
            }
            run_bodies(&cfg)
        }
        Cmd::CapRatio { m, rho, delta } => {
            if let Some(m) = m {
                cfg.set("m", m.to_string());
            }
            if let Some(r) = rho {
                cfg.set("rho", format!("{r:.17e}"));
            }
            if let Some(d) = delta {
                cfg.set("delta", format!("{d:.17e}"));
            }
            run_cap_ratio(&cfg)
        }
        Cmd::Sandwich { family, delta } => {
            family.apply(&mut cfg);
            if let Some(d) = delta {
                cfg.set("delta", format!("{d:.17e}"));
            }
            run_sandwich(&cfg)
        }
        Cmd::Check { suite } => run_check(&cfg, suite),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.get("out").unwrap_or("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run_name(cfg: &RunConfig, fallback: &str) -> String {
    cfg.get("name").unwrap_or(fallback).to_string()
}

fn sweep_options(cfg: &RunConfig, n: usize) -> Result<SweepOptions> {
    let mut opts = SweepOptions::auto(n);
    if let Some(step) = cfg.f64_opt("grid_step")? {
        opts.grid.step = step;
    }
    match cfg.get("grid_range") {
        None | Some("auto") => {}
        Some(_) => opts.grid.range = Some(cfg.f64_or("grid_range", 0.0)?),
    }
    if let Some(v) = cfg.f64_opt("quad_rel_tol")? {
        opts.cap_tols.quad.rel_tol = v;
    }
    if let Some(v) = cfg.f64_opt("quad_abs_tol")? {
        opts.cap_tols.quad.abs_tol = v;
    }
    if let Some(v) = cfg.f64_opt("root_tol")? {
        opts.cap_tols.root_tol = v;
    }
    if let Some(v) = cfg.usize_opt("max_subdivisions")? {
        opts.cap_tols.quad.max_subdivisions = v;
        opts.deficit_quad.max_subdivisions = v;
    }
    if let Some(v) = cfg.f64_opt("deficit_rel_tol")? {
        opts.deficit_quad.rel_tol = v;
    }
    if let Some(v) = cfg.usize_opt("probe_count")? {
        opts.grid.probes_per_axis = v;
    }
    Ok(opts)
}

/// Cache-aware cap solver: quadratics bypass the cache, quadrature solves
/// are looked up and recorded.
fn with_cache<'a>(
    psi: &'a Psi,
    tols: &'a CapTolerances,
    cache: Option<&'a CapCache>,
) -> impl Fn(&[f64], f64) -> Result<CapSolution> + Sync + 'a {
    let hash = psi_hash(psi);
    let is_quadratic = psi.as_quadratic().is_some();
    let default = default_cap_solver(psi, tols);
    move |y: &[f64], delta: f64| {
        if is_quadratic {
            return default(y, delta);
        }
        if let Some(c) = cache {
            if let Some(hit) = c.lookup(&hash, delta, y) {
                return Ok(hit.clone());
            }
            let sol = cache::roundtrip_normalize(y, default(y, delta)?);
            c.record(&hash, delta, y, &sol);
            return Ok(sol);
        }
        default(y, delta)
    }
}

fn open_cache(cfg: &RunConfig) -> Result<Option<CapCache>> {
    match cfg.get("cache") {
        Some(path) => Ok(Some(CapCache::open(std::path::Path::new(path))?)),
        None => Ok(None),
    }
}

fn run_asa(cfg: &RunConfig, both_forms: bool) -> Result<()> {
    let psi = psi_from_config(cfg)?;
    let d = asa_density(&psi)?;
    if both_forms {
        let b = crate::asa::asa_boundary(&psi)?;
        println!("{:.7}", d.value);
        println!("boundary form: {:.7} (gap {:.3e})", b.value, (d.value - b.value).abs());
    } else {
        println!("{:.7}", d.value);
    }
    Ok(())
}

fn probe_points(psi: &Psi, cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let opts = sweep_options(cfg, psi.dim())?;
    let layout = resolve_layout(psi, &opts.grid)?;
    Ok(layout.probes)
}

fn run_eval(cfg: &RunConfig, ulam: bool) -> Result<()> {
    let psi = psi_from_config(cfg)?;
    let deltas = cfg.delta_list()?;
    let delta = *deltas.first().ok_or_else(|| Error::Config("need a delta".into()))?;
    let opts = sweep_options(cfg, psi.dim())?;
    let layout = resolve_layout(&psi, &opts.grid)?;
    let cache = open_cache(cfg)?;
    let solver = with_cache(&psi, &opts.cap_tols, cache.as_ref());
    let solve = |y: &[f64]| solver(y, delta);
    let pair = build_pair_with(&psi, delta, &layout, &solve)?;
    let origin = vec![0.0; psi.dim()];
    let (column, value_at_origin) = if ulam {
        ("ulam", pair.ulam.eval(&origin))
    } else {
        ("floating", pair.floating.eval(&origin))
    };
    let rows: Vec<(Vec<f64>, f64, f64)> = probe_points(&psi, cfg)?
        .into_iter()
        .map(|x| {
            let v = if ulam { pair.ulam.eval(&x) } else { pair.floating.eval(&x) };
            let p = psi.value(&x);
            (x, p, v)
        })
        .collect();
    let dir = out_dir(cfg)?;
    let name = run_name(cfg, if ulam { "ulam_eval" } else { "float_eval" });
    let path = dir.join(format!("{name}.csv"));
    output::write_atomic(&path, output::eval_csv(column, &rows).as_bytes())?;
    if let Some(c) = &cache {
        c.flush()?;
    }
    println!("{column}(0) = {value_at_origin:.10} (delta {delta:.6e}, grid slack {:.3e})",
        if ulam { pair.ulam.grid_slack } else { pair.floating.grid_slack });
    println!("wrote {}", path.display());
    Ok(())
}

fn emit_report(cfg: &RunConfig, name: &str, tag: &str, report: &ConvergenceReport) -> Result<()> {
    let dir = out_dir(cfg)?;
    let csv_path = dir.join(format!("{name}_{tag}.csv"));
    output::write_atomic(&csv_path, output::converge_csv(report).as_bytes())?;
    let json_path = dir.join(format!("{name}_{tag}.json"));
    output::write_atomic(&json_path, output::summary_json(report).as_bytes())?;
    if cfg.bool_or("svg", false)? {
        let svg_path = dir.join(format!("{name}_{tag}.svg"));
        let svg = output::sweep_svg(
            &format!("{} ({tag})", report.quantity.label()),
            &report.rows,
            report.reference,
        );
        output::write_atomic(&svg_path, svg.as_bytes())?;
    }
    let free = report
        .free_fit
        .as_ref()
        .map(|f| format!("{:.4}", f.rate_exponent))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "{}: limit {:.6} vs reference {:.6} (rel gap {:.4}; fitted exponent {:.4}, free exponent {})",
        report.quantity.label(),
        report.fit.limit,
        report.reference,
        report.rel_gap,
        report.fit.rate_exponent,
        free
    );
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn run_converge(cfg: &RunConfig) -> Result<()> {
    let psi = psi_from_config(cfg)?;
    let deltas = cfg.delta_list()?;
    let opts = sweep_options(cfg, psi.dim())?;
    let cache = open_cache(cfg)?;
    let solver = with_cache(&psi, &opts.cap_tols, cache.as_ref());
    let reports = theorem_sweep_with(&psi, &deltas, &opts, Some(&solver))?;
    if let Some(c) = &cache {
        c.flush()?;
    }
    let name = run_name(cfg, "converge");
    emit_report(cfg, &name, "i", &reports.i_report)?;
    emit_report(cfg, &name, "j", &reports.j_report)?;
    let gap = (reports.i_report.fit.limit - reports.j_report.fit.limit).abs()
        / reports.i_report.reference.max(1e-300);
    println!("limit agreement |I - J| / reference = {gap:.4}");
    Ok(())
}

fn run_float_converge(cfg: &RunConfig) -> Result<()> {
    let psi = psi_from_config(cfg)?;
    let deltas = cfg.delta_list()?;
    let opts = sweep_options(cfg, psi.dim())?;
    let cache = open_cache(cfg)?;
    let solver = with_cache(&psi, &opts.cap_tols, cache.as_ref());
    let report = floating_sweep_with(&psi, &deltas, &opts, Some(&solver))?;
    if let Some(c) = &cache {
        c.flush()?;
    }
    let name = run_name(cfg, "float_converge");
    emit_report(cfg, &name, "float", &report)
}

fn run_bodies(cfg: &RunConfig) -> Result<()> {
    let body = body_from_config(cfg)?;
    let deltas = cfg.delta_list()?;
    let which = cfg.get("which").unwrap_or("both");
    let kinds: Vec<(DeficitKind, &str)> = match which {
        "floating" => vec![(DeficitKind::Floating, "floating")],
        "metronoid" => vec![(DeficitKind::Metronoid, "metronoid")],
        "both" => vec![(DeficitKind::Floating, "floating"), (DeficitKind::Metronoid, "metronoid")],
        other => return Err(Error::Config(format!("unknown deficit kind '{other}'"))),
    };
    let m = body.ambient_dim();
    let as_body = asa_body(&body)?;
    let dir = out_dir(cfg)?;
    let name = run_name(cfg, "bodies");
    for (kind, tag) in kinds {
        let rep = deficit_sweep(&body, &deltas, kind)?;
        let reference = match kind {
            DeficitKind::Floating => constant_d(m)? * as_body,
            DeficitKind::Metronoid => constant_c(m)? * as_body,
        };
        let rel_gap = if reference.abs() > 1e-9 {
            (rep.fit.limit - reference).abs() / reference.abs()
        } else {
            (rep.fit.limit - reference).abs()
        };
        let csv_path = dir.join(format!("{name}_{tag}.csv"));
        output::write_atomic(&csv_path, output::bodies_csv(&rep.rows).as_bytes())?;
        let json_path = dir.join(format!("{name}_{tag}.json"));
        let json = output::summary_json_parts(
            &format!("{tag}_deficit_scaled"),
            reference,
            rep.fit.limit,
            rel_gap,
            rep.fit.rate_exponent,
            rep.fit.amplitude,
            rep.fit.residual,
        );
        output::write_atomic(&json_path, json.as_bytes())?;
        println!(
            "{tag}: limit {:.6} vs reference {:.6} (rel gap {:.4})",
            rep.fit.limit, reference, rel_gap
        );
        println!("wrote {}", csv_path.display());
    }
    Ok(())
}

fn run_cap_ratio(cfg: &RunConfig) -> Result<()> {
    let m = cfg.usize_opt("m")?.unwrap_or(2);
    let rho = cfg.f64_or("rho", 1.0)?;
    let deltas = match cfg.get("delta").or(cfg.get("delta_start")) {
        Some(_) => cfg.delta_list()?,
        None => vec![1e-6],
    };
    let mf = m as f64;
    println!("limit (m+3)/(m+1) = {:.6}", (mf + 3.0) / (mf + 1.0));
    for delta in deltas {
        let (dh, drho, ratio) = ball_cap_profile(rho, m, delta)?;
        println!("delta {delta:.3e}: height {dh:.6e}, barycenter depth {drho:.6e}, ratio {ratio:.6}");
    }
    Ok(())
}

fn run_sandwich(cfg: &RunConfig) -> Result<()> {
    let psi = psi_from_config(cfg)?;
    let deltas = cfg.delta_list()?;
    let delta = *deltas.first().ok_or_else(|| Error::Config("need a delta".into()))?;
    let opts = sweep_options(cfg, psi.dim())?;
    let layout = resolve_layout(&psi, &opts.grid)?;
    let cache = open_cache(cfg)?;
    let solver = with_cache(&psi, &opts.cap_tols, cache.as_ref());
    let solve = |y: &[f64]| solver(y, delta);
    let pair = build_pair_with(&psi, delta, &layout, &solve)?;
    let report = sandwich_report(&pair, &layout.probes);
    if let Some(c) = &cache {
        c.flush()?;
    }
    let dir = out_dir(cfg)?;
    let name = run_name(cfg, "sandwich");
    let path = dir.join(format!("{name}.csv"));
    output::write_atomic(&path, output::sandwich_csv(&report.rows).as_bytes())?;
    println!(
        "violations: lower {:.3e}, mid {:.3e}, upper {:.3e}; grid slack {:.3e}",
        report.max_violation_lower,
        report.max_violation_mid,
        report.max_violation_upper,
        report.grid_slack
    );
    println!("wrote {}", path.display());
    if report.max_violation_lower > report.grid_slack + 1e-9
        || report.max_violation_mid > report.grid_slack + 1e-9
        || report.max_violation_upper > report.grid_slack + 1e-9
    {
        return Err(Error::ToleranceNotMet {
            what: "sandwich ordering".into(),
            best: report.max_violation_mid,
            err: report.grid_slack,
        });
    }
    Ok(())
}

struct CheckRun {
    failures: usize,
}

impl CheckRun {
    fn assert(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS {name}: {detail}");
        } else {
            println!("FAIL {name}: {detail}");
            self.failures += 1;
        }
    }
}

fn run_check(cfg: &RunConfig, suite: &str) -> Result<()> {
    let mut run = CheckRun { failures: 0 };
    match suite {
        "quick" => check_quick(&mut run)?,
        "full" => {
            check_quick(&mut run)?;
            check_full(&mut run)?;
        }
        "oracle" => {
            let seed = cfg.usize_opt("seed")?.unwrap_or(20260810) as u64;
            check_oracle(&mut run, seed)?;
        }
        other => return Err(Error::Config(format!("unknown suite '{other}'"))),
    }
    if run.failures > 0 {
        return Err(Error::ToleranceNotMet {
            what: format!("check suite '{suite}' ({} failures)", run.failures),
            best: run.failures as f64,
            err: 0.0,
        });
    }
    println!("suite '{suite}': all checks passed");
    Ok(())
}

fn check_quick(run: &mut CheckRun) -> Result<()> {
    let c2 = constant_c(2)?;
    let d2 = constant_d(2)?;
    run.assert(
        "constants",
        (c2 - 0.393111).abs() < 1e-6 && (d2 - 0.655185).abs() < 1e-6,
        format!("c_2 = {c2:.9}, d_2 = {d2:.9}"),
    );
    let ratio_ok = (2..=6).all(|m| {
        let c = constant_c(m).unwrap();
        let d = constant_d(m).unwrap();
        (c / d - (m as f64 + 1.0) / (m as f64 + 3.0)).abs() < 1e-14
    });
    run.assert("constant-ratio", ratio_ok, "c_m/d_m = (m+1)/(m+3)".into());

    let p = Psi::gaussian(1);
    let dir = crate::caps::Direction::from_slope(&[0.0]);
    let v = crate::caps::cap_volume(&p, &dir, 0.5)?;
    run.assert(
        "parabola-cap",
        (v - 2.0 / 3.0).abs() < 1e-10,
        format!("volume at level 1/2 = {v:.12}"),
    );
    let disk = ConvexBody::ball(2, 1.0)?;
    let delta = 0.9f64.acos() - 0.9 * 0.19f64.sqrt();
    let r = body_cut_level(&disk, &[1.0, 0.0], delta)?;
    run.assert("disk-cut", (r - 0.9).abs() < 1e-9, format!("cut level = {r:.12}"));
    let sq = ConvexBody::square(1.0);
    let rs = body_cut_level(&sq, &[1.0, 0.0], 0.02)?;
    run.assert("square-cut", (rs - 0.99).abs() < 1e-9, format!("cut level = {rs:.12}"));
    run.assert(
        "polygon-asa",
        asa_body(&sq)?.abs() < 1e-12,
        "affine surface area of a polygon vanishes".into(),
    );
    Ok(())
}

fn check_full(run: &mut CheckRun) -> Result<()> {
    // parabola identity at three deltas
    let p = Psi::gaussian(1);
    let c2 = constant_c(2)?;
    let d2 = constant_d(2)?;
    let spec = SlopeGridSpec::with_step(0.02, 1);
    for delta in [2.0 / 3.0, 2.0 / 3.0 * 1e-3, 2.0 / 3.0 * 1e-6] {
        let pair = crate::floating::build_pair(&p, delta, &spec)?;
        let m0 = pair.ulam.eval(&[0.0]);
        let f0 = pair.floating.eval(&[0.0]);
        let scale = delta.powf(2.0 / 3.0);
        let ok = (m0 - c2 * scale).abs() <= 1e-3 * c2 * scale
            && (f0 - d2 * scale).abs() <= 1e-3 * d2 * scale;
        run.assert(
            "parabola-identity",
            ok,
            format!("delta {delta:.3e}: M(0)/delta^(2/3) = {:.6}, F(0)/delta^(2/3) = {:.6}",
                m0 / scale, f0 / scale),
        );
    }
    let (_, _, ratio2) = ball_cap_profile(1.0, 2, 1e-6)?;
    run.assert(
        "cap-ratio-2d",
        (ratio2 - 5.0 / 3.0).abs() < 0.01,
        format!("ratio = {ratio2:.6} vs 5/3"),
    );
    let (_, _, ratio3) = ball_cap_profile(1.0, 3, 1e-8)?;
    run.assert(
        "cap-ratio-3d",
        (ratio3 - 1.5).abs() < 0.01,
        format!("ratio = {ratio3:.6} vs 3/2"),
    );
    let (lo, mid, up, holds) = ellipsoid_cap_sandwich_check(1.0, 1.0, 2)?;
    run.assert(
        "cap-sandwich",
        holds,
        format!("{lo:.4} <= {mid:.4} <= {up:.4}"),
    );
    Ok(())
}

fn check_oracle(run: &mut CheckRun, seed: u64) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for case in 0..5 {
        let n = if case % 2 == 0 { 1 } else { 2 };
        let psi = Psi::gaussian(n);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dir = crate::caps::Direction::from_slope(&y);
        let delta = rng.gen_range(0.02..0.4);
        let a = crate::caps::cap_level(&psi, &dir, delta)?;
        let mc = crate::caps::mc_cap_estimate(&psi, &dir, a, 400_000, seed + case)?;
        let ok = (delta - mc.volume).abs() <= 3.0 * mc.volume_se;
        run.assert(
            "mc-cap-volume",
            ok,
            format!(
                "n={n} delta {delta:.4}: mc {:.4} +/- {:.4}",
                mc.volume, mc.volume_se
            ),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_error_exit_code() {
        assert_eq!(cli_main(["ulamfloat", "no-such-subcommand"]), 1);
        assert_eq!(cli_main(["ulamfloat", "--help"]), 0);
    }

    #[test]
    fn asa_subcommand_runs() {
        let code = cli_main([
            "ulamfloat", "asa", "--family", "quadratic", "--n", "1", "-A", "1",
        ]);
        assert_eq!(code, 0);
    }

    #[test]
    fn check_quick_passes() {
        assert_eq!(cli_main(["ulamfloat", "check", "--suite", "quick"]), 0);
        assert_eq!(cli_main(["ulamfloat", "check", "--suite", "nonsense"]), 1);
    }
}
