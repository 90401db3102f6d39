//! Floating and metronoid-style approximations of a convex function: the
//! support envelope built from cap barycenters, the halfspace envelope built
//! from cap levels, and their sandwich/equivariance diagnostics.
//!
//! Both envelopes are lower approximations that sharpen as the slope grid
//! refines; the builder measures the refinement gap ("grid slack") between
//! the requested grid and its half-step refinement and reports it alongside
//! the evaluators.

use crate::caps::{solve_cap, CapSolution, CapTolerances};
use crate::convex::{coercivity_box, GridFunction, LatticeEnvelope, Psi, SlopeGrid};
use crate::error::{Error, Result};
use crate::linalg::norm;
use rayon::prelude::*;

pub use crate::convex::affine_precompose;

/// How to lay out the slope grid and probe set for one build.
#[derive(Debug, Clone)]
pub struct SlopeGridSpec {
    /// half-extent of the slope grid; derived from the gradient range when
    /// absent
    pub range: Option<f64>,
    /// base grid step (the evaluator uses the half-step refinement)
    pub step: f64,
    /// tail budget fixing the probe box
    pub probe_eps: f64,
    /// probe count per axis for slack measurement
    pub probes_per_axis: usize,
}

impl SlopeGridSpec {
    pub fn auto(n: usize) -> SlopeGridSpec {
        SlopeGridSpec {
            range: None,
            step: 0.016,
            probe_eps: 1e-8,
            probes_per_axis: if n == 1 { 81 } else { 17 },
        }
    }

    pub fn with_step(step: f64, n: usize) -> SlopeGridSpec {
        SlopeGridSpec { step, ..SlopeGridSpec::auto(n) }
    }
}

/// Shared layout for one (psi, grid spec) combination.
#[derive(Debug, Clone)]
pub struct BuildLayout {
    pub base_grid: SlopeGrid,
    pub fine_grid: SlopeGrid,
    pub probes: Vec<Vec<f64>>,
    pub probe_radius: f64,
}

/// Resolves the slope range policy: cover every gradient arising on the
/// probe box, plus a margin of 2.
pub fn resolve_layout(psi: &Psi, spec: &SlopeGridSpec) -> Result<BuildLayout> {
    let n = psi.dim();
    let r = coercivity_box(psi, spec.probe_eps)?;
    let probes = probe_grid(n, r, spec.probes_per_axis);
    let range = match spec.range {
        Some(y) => y,
        None => {
            let mut maxg: f64 = 0.0;
            for p in &probes {
                if let Ok(Some(g)) = psi.analytic_gradient(p) {
                    maxg = maxg.max(norm(&g));
                } else if let Ok((g, _)) = crate::convex::derivatives(psi, p) {
                    maxg = maxg.max(norm(&g));
                }
            }
            maxg + 2.0
        }
    };
    let base_grid = SlopeGrid::symmetric(n, range, spec.step)?;
    let fine_grid = base_grid.refined();
    if fine_grid.len() > 40_000_000 {
        return Err(Error::Domain(format!(
            "slope grid too large ({} points); coarsen the step or shrink the range",
            fine_grid.len()
        )));
    }
    Ok(BuildLayout { base_grid, fine_grid, probes, probe_radius: r })
}

fn probe_grid(n: usize, radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(3);
    let coords: Vec<f64> = (0..per_axis)
        .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    match n {
        1 => coords.iter().map(|&x| vec![x]).collect(),
        2 => {
            let mut out = Vec::with_capacity(per_axis * per_axis);
            for &x in &coords {
                for &y in &coords {
                    out.push(vec![x, y]);
                }
            }
            out
        }
        _ => {
            let mut out = Vec::new();
            for &x in &coords {
                for &y in &coords {
                    for &z in &coords {
                        out.push(vec![x, y, z]);
                    }
                }
            }
            out
        }
    }
}

/// Support-envelope approximation of the metronoid-style floating function:
/// evaluator x -> max_j (<x, y_j> - v_j) with v_j the conjugate samples.
#[derive(Debug, Clone)]
pub struct UlamFunctionApprox {
    pub psi: Psi,
    pub delta: f64,
    pub slope_grid: SlopeGrid,
    pub conj_values: Vec<f64>,
    envelope: LatticeEnvelope,
    base_envelope: LatticeEnvelope,
    pub grid_slack: f64,
}

/// Halfspace-envelope approximation of the floating function:
/// evaluator x -> max_j (L_j + <y_j, x>) with L_j the slab cut levels.
#[derive(Debug, Clone)]
pub struct FloatingFunctionApprox {
    pub psi: Psi,
    pub delta: f64,
    pub slope_grid: SlopeGrid,
    /// cut levels in theta units, one per fine grid slope
    pub cut_levels: Vec<f64>,
    envelope: LatticeEnvelope,
    base_envelope: LatticeEnvelope,
    pub grid_slack: f64,
}

impl UlamFunctionApprox {
    pub fn eval(&self, x: &[f64]) -> f64 {
        eval_enveloped(&self.psi, &self.envelope, x)
    }

    pub fn eval_base(&self, x: &[f64]) -> f64 {
        eval_enveloped(&self.psi, &self.base_envelope, x)
    }

    /// Evaluation with an explicit hill-climb start; returns the binding
    /// index so scans along a curve can chain hints.
    pub fn eval_hinted(&self, x: &[f64], hint: usize) -> (f64, usize) {
        self.envelope.eval_hinted(x, hint)
    }

    pub fn origin_index(&self) -> usize {
        self.slope_grid.nearest_index(&vec![0.0; self.slope_grid.dim()])
    }
}

impl FloatingFunctionApprox {
    pub fn eval(&self, x: &[f64]) -> f64 {
        eval_enveloped(&self.psi, &self.envelope, x)
    }

    pub fn eval_base(&self, x: &[f64]) -> f64 {
        eval_enveloped(&self.psi, &self.base_envelope, x)
    }

    pub fn eval_hinted(&self, x: &[f64], hint: usize) -> (f64, usize) {
        self.envelope.eval_hinted(x, hint)
    }

    pub fn origin_index(&self) -> usize {
        self.slope_grid.nearest_index(&vec![0.0; self.slope_grid.dim()])
    }
}

fn eval_enveloped(psi: &Psi, env: &LatticeEnvelope, x: &[f64]) -> f64 {
    // the binding slope sits near the gradient of psi at x
    let start = match psi.analytic_gradient(x) {
        Ok(Some(g)) => env.grid.nearest_index(&g),
        _ => env.grid.nearest_index(x),
    };
    env.eval_from(x, start)
}

/// Both approximations for one (psi, delta), sharing a single cap solve per
/// slope.
#[derive(Debug, Clone)]
pub struct FloatingPair {
    pub ulam: UlamFunctionApprox,
    pub floating: FloatingFunctionApprox,
}

pub fn build_pair(psi: &Psi, delta: f64, spec: &SlopeGridSpec) -> Result<FloatingPair> {
    let layout = resolve_layout(psi, spec)?;
    let tols = CapTolerances::default();
    let fast = crate::caps::QuadCapSolver::try_new(psi);
    let solve = move |y: &[f64]| match &fast {
        Some(s) => Ok(s.solve(y, delta)),
        None => solve_cap(psi, y, delta, &tols),
    };
    build_pair_with(psi, delta, &layout, &solve)
}

/// Builder over an explicit layout and cap solver; the solver is called once
/// per fine-grid slope, in parallel.
pub fn build_pair_with<S>(
    psi: &Psi,
    delta: f64,
    layout: &BuildLayout,
    solve: &S,
) -> Result<FloatingPair>
where
    S: Fn(&[f64]) -> Result<CapSolution> + Sync,
{
    if !psi.supercoercive() {
        return Err(Error::Domain("floating builds require a supercoercive function".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let fine = &layout.fine_grid;
    let solutions: Vec<CapSolution> = (0..fine.len())
        .into_par_iter()
        .map(|j| {
            let y = fine.point(j);
            solve(&y)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut conj_values = Vec::with_capacity(fine.len());
    let mut float_offsets = Vec::with_capacity(fine.len());
    let mut cut_levels = Vec::with_capacity(fine.len());
    let mut y = vec![0.0; fine.dim()];
    for (j, sol) in solutions.iter().enumerate() {
        fine.point_into(j, &mut y);
        conj_values.push(crate::linalg::dot(&sol.barycenter_spatial, &y) - sol.barycenter_last);
        float_offsets.push(-sol.level_l);
        cut_levels.push(sol.level_l / (1.0 + crate::linalg::dot(&y, &y)).sqrt());
    }

    let subset = |values: &[f64]| -> Vec<f64> {
        (0..layout.base_grid.len())
            .map(|i| values[layout.base_grid.index_in_refined(i)])
            .collect()
    };
    let base_conj = subset(&conj_values);
    let base_float = subset(&float_offsets);

    let mk = |grid: &SlopeGrid, vals: Vec<f64>| -> Result<LatticeEnvelope> {
        Ok(LatticeEnvelope::new(GridFunction::new(grid.clone(), vals)?))
    };
    let ulam_env = mk(fine, conj_values.clone())?;
    let ulam_base = mk(&layout.base_grid, base_conj)?;
    let float_env = mk(fine, float_offsets)?;
    let float_base = mk(&layout.base_grid, base_float)?;

    let slack = |env: &LatticeEnvelope, base: &LatticeEnvelope| -> f64 {
        layout
            .probes
            .iter()
            .map(|p| {
                let fine_v = eval_enveloped(psi, env, p);
                let base_v = eval_enveloped(psi, base, p);
                (fine_v - base_v).max(0.0)
            })
            .fold(0.0, f64::max)
    };
    let ulam_slack = slack(&ulam_env, &ulam_base);
    let float_slack = slack(&float_env, &float_base);

    Ok(FloatingPair {
        ulam: UlamFunctionApprox {
            psi: psi.clone(),
            delta,
            slope_grid: fine.clone(),
            conj_values: ulam_env.offsets.clone(),
            envelope: ulam_env,
            base_envelope: ulam_base,
            grid_slack: ulam_slack,
        },
        floating: FloatingFunctionApprox {
            psi: psi.clone(),
            delta,
            slope_grid: fine.clone(),
            cut_levels,
            envelope: float_env,
            base_envelope: float_base,
            grid_slack: float_slack,
        },
    })
}

pub fn build_ulam_function(psi: &Psi, delta: f64, spec: &SlopeGridSpec) -> Result<UlamFunctionApprox> {
    Ok(build_pair(psi, delta, spec)?.ulam)
}

pub fn build_floating_function(
    psi: &Psi,
    delta: f64,
    spec: &SlopeGridSpec,
) -> Result<FloatingFunctionApprox> {
    Ok(build_pair(psi, delta, spec)?.floating)
}

/// The floating approximation of the log-concave density e^{-psi}:
/// x -> exp(-M(x)). Never exceeds the density, up to grid slack.
#[derive(Debug, Clone)]
pub struct UlamDensity {
    pub approx: UlamFunctionApprox,
}

impl UlamDensity {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (-self.approx.eval(x)).exp()
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        (-self.approx.psi.value(x)).exp()
    }
}

pub fn ulam_log_concave(psi: &Psi, delta: f64, spec: &SlopeGridSpec) -> Result<UlamDensity> {
    Ok(UlamDensity { approx: build_ulam_function(psi, delta, spec)? })
}

/// One probe row of a sandwich check.
#[derive(Debug, Clone)]
pub struct SandwichRow {
    pub x: Vec<f64>,
    pub psi: f64,
    pub ulam: f64,
    pub floating: f64,
    /// per-probe refinement gap (both envelopes combined)
    pub slack: f64,
}

/// Violations of the ordering psi <= M <= psi_float over a probe set.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub max_violation_lower: f64,
    pub max_violation_mid: f64,
    pub max_violation_upper: f64,
    pub grid_slack: f64,
}

pub fn sandwich_report(pair: &FloatingPair, probes: &[Vec<f64>]) -> SandwichReport {
    let mut rows = Vec::with_capacity(probes.len());
    let (mut lo, mut mid, mut up) = (0.0f64, 0.0f64, 0.0f64);
    for p in probes {
        let psi_v = pair.ulam.psi.value(p);
        let ulam_v = pair.ulam.eval(p);
        let float_v = pair.floating.eval(p);
        let slack = (ulam_v - pair.ulam.eval_base(p)).max(0.0)
            + (float_v - pair.floating.eval_base(p)).max(0.0);
        lo = lo.max(psi_v - ulam_v);
        mid = mid.max(ulam_v - float_v);
        up = up.max(psi_v - float_v);
        rows.push(SandwichRow { x: p.clone(), psi: psi_v, ulam: ulam_v, floating: float_v, slack });
    }
    SandwichReport {
        rows,
        max_violation_lower: lo,
        max_violation_mid: mid,
        max_violation_upper: up,
        grid_slack: pair.ulam.grid_slack + pair.floating.grid_slack,
    }
}
