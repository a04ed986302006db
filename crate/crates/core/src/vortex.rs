//! Flat-space multivortices by monotone iteration from the supersolution `v = 0`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{decay_fit, DecayKind, DecaySource};
use crate::discrete::DiscreteProblem;
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::iteration::{self, Settings, Shift, MONOTONE_SLACK};
use crate::model::ProblemSpec;
use crate::report::SolveReport;

/// Roundoff allowance for the sign audits.
pub(crate) const AUDIT_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VortexSolveOptions {
    /// Safety multiplier on the analytic slope bound; at least 1.05.
    pub k_factor: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for VortexSolveOptions {
    fn default() -> Self {
        VortexSolveOptions {
            k_factor: 1.1,
            tol: 1e-10,
            max_iters: 500,
        }
    }
}

impl VortexSolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_factor.is_finite() && self.k_factor >= 1.05) {
            return Err(Error::Config(format!("k_factor must be >= 1.05, got {}", self.k_factor)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// `k = k_factor·β2ᵐ` for `m > 0`, `k_factor·β(1+n)` for `m = −n`.
    pub fn shift(&self, spec: &ProblemSpec) -> f64 {
        self.k_factor * spec.coupling().slope_bound()
    }
}

fn check_flat(spec: &ProblemSpec, grid: &Grid2D) -> Result<()> {
    spec.validate()?;
    if spec.newton_g != 0.0 {
        return Err(Error::Precondition("vortex solves require G = 0".into()));
    }
    let rebuilt = Grid2D::build(grid.radius(), grid.nodes_per_side(), spec)?;
    if rebuilt.offset() != grid.offset() {
        return Err(Error::Precondition("grid was not built for this spec".into()));
    }
    Ok(())
}

/// Solves the vortex equation; returns `v` and the audit report.
pub fn solve_vortex(
    spec: &ProblemSpec,
    grid: &Grid2D,
    opts: &VortexSolveOptions,
) -> Result<(Field2D, SolveReport)> {
    solve_from(spec, grid, opts, None)
}

/// Solves from `v_1 = perturbation` (so `w_1 = −v0 + perturbation`), or from `v_1 = 0`.
/// Only the supersolution start enforces monotonicity.
pub(crate) fn solve_from(
    spec: &ProblemSpec,
    grid: &Grid2D,
    opts: &VortexSolveOptions,
    perturbation: Option<&Field2D>,
) -> Result<(Field2D, SolveReport)> {
    check_flat(spec, grid)?;
    opts.validate()?;
    let problem = DiscreteProblem::vortex(spec, grid);
    let start = match perturbation {
        Some(p) => {
            if p.grid.nodes_per_side() != grid.nodes_per_side() {
                return Err(Error::Precondition("perturbation grid mismatch".into()));
            }
            p.clone()
        }
        None => Field2D::zeros(grid),
    };
    let k = opts.shift(spec);
    let settings = Settings {
        solver: "vortex iteration",
        tol: opts.tol,
        max_iters: opts.max_iters,
        strict_monotone: perturbation.is_none(),
    };
    let out = iteration::run(&problem, start, Shift::Fixed(k), &settings)?;
    let v = out.v;
    let w = problem.offset_part(&v);
    let residual = problem.residual_sup(&w);

    let mut negativity = true;
    let mut sandwich = true;
    for (i, j) in grid.interior() {
        let idx = grid.index(i, j);
        if v.values[idx] >= AUDIT_SLACK {
            negativity = false;
        }
        if w.values[idx] < -AUDIT_SLACK {
            sandwich = false;
        }
    }
    let decay = if spec.total_number() > 0 {
        decay_fit(DecaySource::Field(&v), DecayKind::Exponential)
            .ok()
            .map(|f| f.order)
    } else {
        None
    };
    let report = SolveReport {
        iterations: out.iterations,
        final_update_sup: out.final_update,
        residual_sup: residual,
        monotone: out.max_increase <= MONOTONE_SLACK,
        negativity,
        sandwich,
        max_increase: out.max_increase,
        shift_first: out.shifts[0],
        shift_last: *out.shifts.last().unwrap_or(&k),
        update_trace: out.trace,
        decay_exponent_fit: decay,
        diagnostics: None,
        delta_schedule: Vec::new(),
        gaps: Vec::new(),
        warnings: Vec::new(),
    };
    Ok((v, report))
}

/// Solves once from the supersolution and once per perturbed start; returns the largest
/// pairwise sup-distance between the converged fields.
pub fn uniqueness_check(
    spec: &ProblemSpec,
    grid: &Grid2D,
    opts: &VortexSolveOptions,
    perturbations: &[Field2D],
) -> Result<f64> {
    if spec.m >= 0.0 {
        return Err(Error::Precondition(format!(
            "uniqueness check is restricted to m < 0, got m = {}",
            spec.m
        )));
    }
    let (base, _) = solve_vortex(spec, grid, opts)?;
    let mut fields = vec![base];
    for p in perturbations {
        fields.push(solve_from(spec, grid, opts, Some(p))?.0);
    }
    let mut worst = 0.0f64;
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            worst = worst.max(fields[a].sup_distance(&fields[b]));
        }
    }
    Ok(worst)
}

/// Gaussian bump `height·e^{−|x−c|²/width²}`, vanishing on the boundary.
pub fn gaussian_bump(grid: &Grid2D, center: (f64, f64), height: f64, width: f64) -> Field2D {
    let mut f = Field2D::from_fn(grid, |x, y| {
        let r2 = (x - center.0).powi(2) + (y - center.1).powi(2);
        height * (-r2 / (width * width)).exp()
    });
    let n = grid.nodes_per_side();
    for j in 0..n {
        for i in 0..n {
            if grid.is_boundary(i, j) {
                f.values[grid.index(i, j)] = 0.0;
            }
        }
    }
    f
}
