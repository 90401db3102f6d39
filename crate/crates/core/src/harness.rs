//! Delta-sweep experiments: deficit integrals of the floating approximations
//! against the variational references, with power-law extrapolation of the
//! scaled sequences.

use crate::asa::asa_density;
use crate::caps::{solve_cap, CapSolution, CapTolerances, QuadCapSolver};
use crate::constants::{constant_c, constant_d};
use crate::convex::{coercivity_box, Psi};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::floating::{
    build_pair_with, resolve_layout, FloatingFunctionApprox, SlopeGridSpec, UlamFunctionApprox,
};
use crate::quad::{integrate_1d_with_breaks, integrate_box, QuadratureSpec};
use rayon::prelude::*;

/// Scaled quantity tracked by a convergence report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Quantity {
    #[serde(rename = "I_scaled")]
    UlamIntegral,
    #[serde(rename = "J_scaled")]
    UlamWeighted,
    #[serde(rename = "float_scaled")]
    FloatingIntegral,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::UlamIntegral => "I_scaled",
            Quantity::UlamWeighted => "J_scaled",
            Quantity::FloatingIntegral => "float_scaled",
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub raw: f64,
    pub scaled: f64,
}

/// A sweep of one scaled quantity with its extrapolated limit and reference.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceReport {
    pub psi_id: String,
    pub quantity: Quantity,
    pub rows: Vec<SweepRow>,
    pub fit: PowerLawFit,
    pub free_fit: Option<PowerLawFit>,
    pub reference: f64,
    pub rel_gap: f64,
}

impl ConvergenceReport {
    fn new(
        psi: &Psi,
        quantity: Quantity,
        rows: Vec<SweepRow>,
        exponent: f64,
        reference: f64,
    ) -> Result<ConvergenceReport> {
        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.scaled)).collect();
        let fit = fit_power_law(&samples, Some(exponent))?;
        let free_fit = fit_power_law(&samples, None).ok();
        let rel_gap = if reference.abs() > 1e-9 {
            (fit.limit - reference).abs() / reference.abs()
        } else {
            (fit.limit - reference).abs()
        };
        Ok(ConvergenceReport {
            psi_id: psi.canonical_id(),
            quantity,
            rows,
            fit,
            free_fit,
            reference,
            rel_gap,
        })
    }
}

/// Knobs for one sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub grid: SlopeGridSpec,
    pub cap_tols: CapTolerances,
    /// tail budget for the integration box
    pub tail_eps: f64,
    /// tolerances of the deficit integrals themselves
    pub deficit_quad: QuadratureSpec,
}

impl SweepOptions {
    pub fn auto(n: usize) -> SweepOptions {
        let grid = SlopeGridSpec::auto(n);
        // the deficit integrand carries micro-kinks at the envelope facet
        // scale; panels below half a facet are accepted, since the per-facet
        // errors alternate in sign and stay far below the fit tolerances
        let deficit_quad = if n == 1 {
            QuadratureSpec::with_tols(1e-13, 2e-6)
        } else {
            QuadratureSpec {
                min_panel_width: grid.step / 4.0,
                ..QuadratureSpec::with_tols(1e-12, 3e-5)
            }
        };
        SweepOptions {
            grid,
            cap_tols: CapTolerances::default(),
            tail_eps: 1e-12,
            deficit_quad,
        }
    }
}

/// A cap solver pluggable into sweeps (e.g. a caching wrapper).
pub type CapSolverFn<'a> = dyn Fn(&[f64], f64) -> Result<CapSolution> + Sync + 'a;

/// Closed-form quadratic solver when available, quadrature otherwise.
pub fn default_cap_solver<'a>(
    psi: &'a Psi,
    tols: &'a CapTolerances,
) -> impl Fn(&[f64], f64) -> Result<CapSolution> + Sync + 'a {
    let fast = QuadCapSolver::try_new(psi);
    move |y: &[f64], delta: f64| match &fast {
        Some(s) => Ok(s.solve(y, delta)),
        None => solve_cap(psi, y, delta, tols),
    }
}

/// The two deficit integrals of one floating approximation:
/// i = integral of (e^{-psi} - e^{-M}) and j = integral of (M - psi) e^{-psi},
/// both clamped at zero with the clamped mass recorded.
#[derive(Debug, Clone)]
pub struct DeficitIntegrals {
    pub i_value: f64,
    pub j_value: f64,
    pub i_err: f64,
    pub j_err: f64,
    /// mass of the negative excursions of M - psi (grid artifacts)
    pub clamp_mass: f64,
}

pub fn deficit_integrals(psi: &Psi, delta: f64, opts: &SweepOptions) -> Result<DeficitIntegrals> {
    let layout = resolve_layout(psi, &opts.grid)?;
    let solver = default_cap_solver(psi, &opts.cap_tols);
    let solve = |y: &[f64]| solver(y, delta);
    let pair = build_pair_with(psi, delta, &layout, &solve)?;
    deficit_integrals_from(&pair.ulam, opts)
}

pub fn deficit_integrals_from(
    approx: &UlamFunctionApprox,
    opts: &SweepOptions,
) -> Result<DeficitIntegrals> {
    let psi = &approx.psi;
    let n = psi.dim();
    let r = coercivity_box(psi, opts.tail_eps)?;
    let spec = &opts.deficit_quad;

    let integrate = |f: &dyn Fn(&[f64]) -> f64, spec: &QuadratureSpec| -> Result<(f64, f64)> {
        if n == 1 {
            let breaks = psi.feature_breaks();
            integrate_1d_with_breaks(|x| Ok(f(&[x])), -r, r, &breaks, spec)
        } else {
            let bounds: Vec<(f64, f64)> = (0..n).map(|_| (-r, r)).collect();
            integrate_box(|x| Ok(f(x)), &bounds, spec)
        }
    };

    // consecutive quadrature nodes are close, so chain the binding index
    let hint = std::cell::Cell::new(approx.origin_index());
    let envelope = |x: &[f64]| -> f64 {
        let (v, idx) = approx.eval_hinted(x, hint.get());
        hint.set(idx);
        v
    };

    let i_fn = |x: &[f64]| ((-psi.value(x)).exp() - (-envelope(x)).exp()).max(0.0);
    let (i_value, i_err) = integrate(&i_fn, spec)?;
    let j_fn = |x: &[f64]| (envelope(x) - psi.value(x)).max(0.0) * (-psi.value(x)).exp();
    let (j_value, j_err) = integrate(&j_fn, spec)?;
    let clamp_fn = |x: &[f64]| (psi.value(x) - envelope(x)).max(0.0) * (-psi.value(x)).exp();
    let loose = QuadratureSpec { min_panel_width: spec.min_panel_width, ..QuadratureSpec::with_tols(1e-11, 1e-3) };
    let (clamp_mass, _) = integrate(&clamp_fn, &loose)?;

    Ok(DeficitIntegrals { i_value, j_value, i_err, j_err, clamp_mass: clamp_mass.max(0.0) })
}

fn floating_deficit_integral(
    approx: &FloatingFunctionApprox,
    opts: &SweepOptions,
) -> Result<(f64, f64)> {
    let psi = &approx.psi;
    let n = psi.dim();
    let r = coercivity_box(psi, opts.tail_eps)?;
    let hint = std::cell::Cell::new(approx.origin_index());
    let f = |x: &[f64]| {
        let (m, idx) = approx.eval_hinted(x, hint.get());
        hint.set(idx);
        ((-psi.value(x)).exp() - (-m).exp()).max(0.0)
    };
    if n == 1 {
        let breaks = psi.feature_breaks();
        integrate_1d_with_breaks(|x| Ok(f(&[x])), -r, r, &breaks, &opts.deficit_quad)
    } else {
        let bounds: Vec<(f64, f64)> = (0..n).map(|_| (-r, r)).collect();
        integrate_box(|x| Ok(f(x)), &bounds, &opts.deficit_quad)
    }
}

fn check_delta_list(deltas: &[f64]) -> Result<()> {
    if deltas.len() < 4 {
        return Err(Error::Domain("sweeps need at least 4 delta values".into()));
    }
    for w in deltas.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) {
            return Err(Error::Domain("delta list must be positive and decreasing".into()));
        }
    }
    Ok(())
}

/// Reports for both deficit integrals of the support-envelope approximation;
/// their limits agree in exact arithmetic.
#[derive(Debug, Clone)]
pub struct TheoremReports {
    pub i_report: ConvergenceReport,
    pub j_report: ConvergenceReport,
}

pub fn theorem_sweep(psi: &Psi, deltas: &[f64], opts: &SweepOptions) -> Result<TheoremReports> {
    theorem_sweep_with(psi, deltas, opts, None)
}

pub fn theorem_sweep_with(
    psi: &Psi,
    deltas: &[f64],
    opts: &SweepOptions,
    solver: Option<&CapSolverFn>,
) -> Result<TheoremReports> {
    check_delta_list(deltas)?;
    let n = psi.dim();
    let exponent = 2.0 / (n as f64 + 2.0);
    let reference = constant_c(n + 1)? * asa_density(psi)?.value;
    let layout = resolve_layout(psi, &opts.grid)?;
    let default = default_cap_solver(psi, &opts.cap_tols);

    let run_one = |delta: f64| -> Result<(f64, f64)> {
        let solve = |y: &[f64]| match solver {
            Some(s) => s(y, delta),
            None => default(y, delta),
        };
        let pair = build_pair_with(psi, delta, &layout, &solve)?;
        let ints = deficit_integrals_from(&pair.ulam, opts)?;
        Ok((ints.i_value, ints.j_value))
    };

    // parallel over deltas in one dimension; sequential in two where each
    // build already parallelizes over slopes and holds a large grid
    let results: Vec<(f64, f64)> = if n == 1 {
        deltas.par_iter().map(|&d| run_one(d)).collect::<Result<Vec<_>>>()?
    } else {
        deltas.iter().map(|&d| run_one(d)).collect::<Result<Vec<_>>>()?
    };

    let mk_rows = |pick: &dyn Fn(&(f64, f64)) -> f64| -> Vec<SweepRow> {
        deltas
            .iter()
            .zip(&results)
            .map(|(&delta, pair)| {
                let raw = pick(pair);
                SweepRow { delta, raw, scaled: raw / delta.powf(exponent) }
            })
            .collect()
    };
    let i_report =
        ConvergenceReport::new(psi, Quantity::UlamIntegral, mk_rows(&|p| p.0), exponent, reference)?;
    let j_report =
        ConvergenceReport::new(psi, Quantity::UlamWeighted, mk_rows(&|p| p.1), exponent, reference)?;
    Ok(TheoremReports { i_report, j_report })
}

/// Sweep of the halfspace-envelope (floating) deficit integral against its
/// own constant.
pub fn floating_sweep(psi: &Psi, deltas: &[f64], opts: &SweepOptions) -> Result<ConvergenceReport> {
    floating_sweep_with(psi, deltas, opts, None)
}

pub fn floating_sweep_with(
    psi: &Psi,
    deltas: &[f64],
    opts: &SweepOptions,
    solver: Option<&CapSolverFn>,
) -> Result<ConvergenceReport> {
    check_delta_list(deltas)?;
    let n = psi.dim();
    let exponent = 2.0 / (n as f64 + 2.0);
    let reference = constant_d(n + 1)? * asa_density(psi)?.value;
    let layout = resolve_layout(psi, &opts.grid)?;
    let default = default_cap_solver(psi, &opts.cap_tols);

    let run_one = |delta: f64| -> Result<f64> {
        let solve = |y: &[f64]| match solver {
            Some(s) => s(y, delta),
            None => default(y, delta),
        };
        let pair = build_pair_with(psi, delta, &layout, &solve)?;
        Ok(floating_deficit_integral(&pair.floating, opts)?.0)
    };
    let raws: Vec<f64> = if n == 1 {
        deltas.par_iter().map(|&d| run_one(d)).collect::<Result<Vec<_>>>()?
    } else {
        deltas.iter().map(|&d| run_one(d)).collect::<Result<Vec<_>>>()?
    };
    let rows: Vec<SweepRow> = deltas
        .iter()
        .zip(&raws)
        .map(|(&delta, &raw)| SweepRow { delta, raw, scaled: raw / delta.powf(exponent) })
        .collect();
    ConvergenceReport::new(psi, Quantity::FloatingIntegral, rows, exponent, reference)
}

/// Sweep for a smoothed piecewise-affine surrogate: the scaled sequence
/// decays toward the small floor set by the smoothing and ridge parameters.
pub fn degenerate_sweep(psi: &Psi, deltas: &[f64], opts: &SweepOptions) -> Result<ConvergenceReport> {
    if !matches!(psi, Psi::SmoothedMaxAffine(_)) {
        return Err(Error::Domain(
            "degenerate sweeps expect a smoothed max-affine surrogate".into(),
        ));
    }
    Ok(theorem_sweep(psi, deltas, opts)?.i_report)
}

/// Stability gate: halving the slope-grid step must move the extrapolated
/// limit by less than `tol` (absolute).
pub fn grid_stability_gap(psi: &Psi, deltas: &[f64], opts: &SweepOptions) -> Result<f64> {
    let coarse = theorem_sweep(psi, deltas, opts)?;
    let mut fine_opts = opts.clone();
    fine_opts.grid.step /= 2.0;
    let fine = theorem_sweep(psi, deltas, &fine_opts)?;
    Ok((coarse.i_report.fit.limit - fine.i_report.fit.limit).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_opts() -> SweepOptions {
        let mut o = SweepOptions::auto(1);
        o.grid.step = 0.02;
        o
    }

    #[test]
    fn parabola_weighted_deficit_is_exact() {
        // for psi = x^2/2 the envelope is a uniform shift c2 delta^{2/3}, so
        // J / delta^{2/3} equals c2 sqrt(2 pi) at every delta
        let p = Psi::gaussian(1);
        let opts = gaussian_opts();
        let want = constant_c(2).unwrap() * (2.0 * PI).sqrt();
        let ints = deficit_integrals(&p, 1e-4, &opts).unwrap();
        let scaled = ints.j_value / 1e-4f64.powf(2.0 / 3.0);
        assert!((scaled - want).abs() <= 0.02 * want, "scaled {scaled} vs {want}");
        assert!(ints.i_value <= ints.j_value + 1e-12);
        assert!(ints.clamp_mass <= 1e-6);
    }

    #[test]
    fn deficits_shrink_with_delta() {
        let p = Psi::gaussian(1);
        let opts = gaussian_opts();
        let big = deficit_integrals(&p, 0.5, &opts).unwrap();
        let small = deficit_integrals(&p, 1e-3, &opts).unwrap();
        assert!(small.i_value < big.i_value);
        assert!(small.j_value < big.j_value);
        assert!(small.i_value > 0.0);
    }

    #[test]
    fn quick_gaussian_sweep() {
        let p = Psi::gaussian(1);
        let opts = gaussian_opts();
        let deltas: Vec<f64> = (0..5).map(|k| 2.0 / 3.0 * 4f64.powi(-k)).collect();
        let reports = theorem_sweep(&p, &deltas, &opts).unwrap();
        let want = constant_c(2).unwrap() * (2.0 * PI).sqrt();
        assert!((reports.i_report.reference - want).abs() < 1e-6);
        assert!(reports.i_report.rel_gap < 0.03, "I gap {}", reports.i_report.rel_gap);
        assert!(reports.j_report.rel_gap < 0.03, "J gap {}", reports.j_report.rel_gap);
        // rows are scaled consistently
        for row in &reports.i_report.rows {
            assert!((row.scaled - row.raw / row.delta.powf(2.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn quick_floating_sweep_and_ratio() {
        let p = Psi::gaussian(1);
        let opts = gaussian_opts();
        let deltas: Vec<f64> = (0..5).map(|k| 2.0 / 3.0 * 4f64.powi(-k)).collect();
        let fl = floating_sweep(&p, &deltas, &opts).unwrap();
        let want = constant_d(2).unwrap() * (2.0 * PI).sqrt();
        assert!((fl.reference - want).abs() < 1e-6);
        assert!(fl.rel_gap < 0.03, "float gap {}", fl.rel_gap);
        let th = theorem_sweep(&p, &deltas, &opts).unwrap();
        let ratio = fl.fit.limit / th.i_report.fit.limit;
        assert!((ratio - 5.0 / 3.0).abs() < 0.05 * (5.0 / 3.0), "ratio {ratio}");
    }

    #[test]
    fn delta_list_validation() {
        let p = Psi::gaussian(1);
        let opts = gaussian_opts();
        assert!(theorem_sweep(&p, &[0.1, 0.01, 0.001], &opts).is_err());
        assert!(theorem_sweep(&p, &[0.1, 0.2, 0.01, 0.001], &opts).is_err());
    }
}
