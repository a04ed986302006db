//! Gravitating multi-strings through the δ-regularized equation and continuation δ → 0.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{decay_fit, DecayKind, DecaySource};
use crate::discrete::{DiscreteProblem, StringWeight};
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::iteration::{self, Settings, Shift, MONOTONE_SLACK};
use crate::model::ProblemSpec;
use crate::report::SolveReport;
use crate::vortex::AUDIT_SLACK;

/// Tolerance of the sandwich audit `v_δ ≤ v ≤ 0`.
pub const SANDWICH_TOL: f64 = 1e-9;

/// Gaps are measured where every center is at least this far away.
pub const GAP_CLEARANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KPolicy {
    /// One global shift valid for every iterate below zero.
    Analytic,
    /// Shift recomputed each sweep from the current iterate, with analytic fallback.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StringSolveOptions {
    /// Decreasing `δ` values in `(0, 1/2]`; empty means halving from `1/2` while `δ ≥ h²`.
    pub delta_schedule: Vec<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub k_policy: KPolicy,
    pub k_factor: f64,
}

impl Default for StringSolveOptions {
    fn default() -> Self {
        StringSolveOptions {
            delta_schedule: Vec::new(),
            tol: 1e-10,
            max_iters: 2000,
            k_policy: KPolicy::Adaptive,
            k_factor: 1.1,
        }
    }
}

impl StringSolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if !(self.k_factor.is_finite() && self.k_factor >= 1.05) {
            return Err(Error::Config(format!("k_factor must be >= 1.05, got {}", self.k_factor)));
        }
        for d in &self.delta_schedule {
            if !(*d > 0.0 && *d <= 0.5) {
                return Err(Error::Config(format!("delta {d} outside (0, 1/2]")));
            }
        }
        if self.delta_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("delta_schedule must be strictly decreasing".into()));
        }
        Ok(())
    }

    /// The schedule to run on `grid`, checked against the floor `δ ≥ h²/4`.
    pub fn schedule_for(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        let h2 = grid.spacing() * grid.spacing();
        let schedule = if self.delta_schedule.is_empty() {
            let mut s = Vec::new();
            let mut d = 0.5;
            while d >= h2 {
                s.push(d);
                d *= 0.5;
            }
            if s.is_empty() {
                s.push(0.5);
            }
            s
        } else {
            self.delta_schedule.clone()
        };
        if let Some(&last) = schedule.last() {
            if last < 0.25 * h2 {
                return Err(Error::Config(format!(
                    "final delta {last} below the resolvable floor spacing^2/4 = {}",
                    0.25 * h2
                )));
            }
        }
        Ok(schedule)
    }
}

fn check_string(spec: &ProblemSpec, grid: &Grid2D) -> Result<()> {
    spec.validate()?;
    if spec.newton_g <= 0.0 {
        return Err(Error::Precondition("string solves require G > 0".into()));
    }
    let an = spec.a() * spec.total_number() as f64;
    if an > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("string solves require aN <= 1, got {an}")));
    }
    if spec.distinct_centers() < 2 {
        return Err(Error::Precondition(
            "string solves need at least two distinct centers; use the radial solver for coincident centers"
                .into(),
        ));
    }
    let rebuilt = Grid2D::build(grid.radius(), grid.nodes_per_side(), spec)?;
    if rebuilt.offset() != grid.offset() {
        return Err(Error::Precondition("grid was not built for this spec".into()));
    }
    Ok(())
}

/// Solves the regularized equation for one `δ`, from `v = 0` or a projected warm start.
pub fn solve_string_fixed_delta(
    spec: &ProblemSpec,
    grid: &Grid2D,
    delta: f64,
    opts: &StringSolveOptions,
    warm_start: Option<&Field2D>,
) -> Result<(Field2D, SolveReport)> {
    check_string(spec, grid)?;
    opts.validate()?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    let weight = StringWeight::new(grid, spec, delta)?;
    let problem = DiscreteProblem::string(spec, grid, &weight)?;
    let start = match warm_start {
        Some(w) => {
            if w.grid.nodes_per_side() != grid.nodes_per_side() {
                return Err(Error::Precondition("warm start grid mismatch".into()));
            }
            w.zip_with(&problem.offset, |v, lo| v.clamp(lo, 0.0))
        }
        None => Field2D::zeros(grid),
    };
    let strict = warm_start.is_none();
    let settings = Settings {
        solver: "string iteration",
        tol: opts.tol,
        max_iters: opts.max_iters,
        strict_monotone: strict,
    };
    let analytic = Shift::Fixed(opts.k_factor * problem.analytic_shift());
    let mut warnings = Vec::new();
    let out = match opts.k_policy {
        KPolicy::Analytic => iteration::run(&problem, start, analytic, &settings)?,
        KPolicy::Adaptive => {
            match iteration::run(&problem, start.clone(), Shift::Adaptive { factor: opts.k_factor }, &settings) {
                Err(Error::MonotoneBreak { iteration, increase }) => {
                    warnings.push(format!(
                        "MONOTONE_BREAK at iteration {iteration} ({increase:.3e}); reran with the analytic shift"
                    ));
                    iteration::run(&problem, start, analytic, &settings)?
                }
                other => other?,
            }
        }
    };
    let v = out.v;

    let mut violation = 0.0f64;
    let mut negativity = true;
    for (i, j) in grid.interior() {
        let idx = grid.index(i, j);
        let vi = v.values[idx];
        violation = violation.max(problem.offset.values[idx] - vi).max(vi);
        if vi >= AUDIT_SLACK {
            negativity = false;
        }
    }
    if violation > SANDWICH_TOL {
        return Err(Error::SandwichBreak { delta, violation });
    }
    let w = problem.offset_part(&v);
    let report = SolveReport {
        iterations: out.iterations,
        final_update_sup: out.final_update,
        residual_sup: problem.residual_sup(&w),
        monotone: out.max_increase <= MONOTONE_SLACK,
        negativity,
        sandwich: true,
        max_increase: out.max_increase,
        shift_first: out.shifts[0],
        shift_last: *out.shifts.last().unwrap_or(&out.shifts[0]),
        update_trace: out.trace,
        decay_exponent_fit: decay_fit(DecaySource::Field(&v), DecayKind::Algebraic)
            .ok()
            .map(|f| f.order),
        diagnostics: None,
        delta_schedule: vec![delta],
        gaps: Vec::new(),
        warnings,
    };
    Ok((v, report))
}

/// Sup of `|a − b|` over nodes at distance at least [`GAP_CLEARANCE`] from every center.
pub fn annulus_gap(a: &Field2D, b: &Field2D, spec: &ProblemSpec) -> f64 {
    let g = &a.grid;
    (0..g.len())
        .filter(|&idx| {
            let (x, y) = g.point(idx);
            Grid2D::distance_to_centers(spec, x, y) >= GAP_CLEARANCE
        })
        .map(|idx| (a.values[idx] - b.values[idx]).abs())
        .fold(0.0, f64::max)
}

/// Runs the schedule with warm starts; returns the last field, a combined report and the
/// Cauchy gaps between consecutive `δ`.
pub fn solve_string_continuation(
    spec: &ProblemSpec,
    grid: &Grid2D,
    opts: &StringSolveOptions,
) -> Result<(Field2D, SolveReport, Vec<f64>)> {
    check_string(spec, grid)?;
    opts.validate()?;
    let schedule = opts.schedule_for(grid)?;
    let mut previous: Option<Field2D> = None;
    let mut gaps = Vec::new();
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    let mut monotone = true;
    let mut max_increase = f64::NEG_INFINITY;
    let mut last = None;
    for &delta in &schedule {
        let (v, report) = solve_string_fixed_delta(spec, grid, delta, opts, previous.as_ref())?;
        if let Some(p) = &previous {
            gaps.push(annulus_gap(&v, p, spec));
        }
        iterations += report.iterations;
        trace.extend_from_slice(&report.update_trace);
        warnings.extend(report.warnings.iter().cloned());
        monotone &= report.monotone;
        max_increase = max_increase.max(report.max_increase);
        previous = Some(v);
        last = Some(report);
    }
    if gaps.windows(2).any(|w| w[1] >= w[0]) {
        warnings.push("CONTINUATION_STALL: continuation gaps are not strictly decreasing".to_string());
    }
    let mut report = last.ok_or_else(|| Error::Config("empty delta schedule".into()))?;
    report.iterations = iterations;
    report.update_trace = trace;
    report.monotone = monotone;
    report.max_increase = max_increase;
    report.delta_schedule = schedule;
    report.gaps = gaps.clone();
    report.warnings = warnings;
    let v = previous.ok_or_else(|| Error::Config("empty delta schedule".into()))?;
    Ok((v, report, gaps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Center;
    use std::f64::consts::PI;

    fn two_center(beta: f64, an: f64) -> ProblemSpec {
        let g = an / (2.0 * 4.0 * PI);
        ProblemSpec::new(vec![Center::new(1.0, 0.0, 1), Center::new(-1.0, 0.0, 1)], 1.0, beta, g).unwrap()
    }

    #[test]
    fn preconditions() {
        let spec = two_center(30.0, 1.5);
        let grid = Grid2D::build(8.0, 65, &spec).unwrap();
        let opts = StringSolveOptions::default();
        assert!(solve_string_fixed_delta(&spec, &grid, 0.5, &opts, None).unwrap_err().is_config());

        let flat = ProblemSpec::flat(&[(1.0, 0.0), (-1.0, 0.0)], 1.0, 30.0).unwrap();
        assert!(solve_string_fixed_delta(&flat, &grid, 0.5, &opts, None).unwrap_err().is_config());

        let g = 0.5 / (2.0 * 4.0 * PI);
        let coincident = ProblemSpec::new(vec![Center::new(0.0, 0.0, 2)], 1.0, 30.0, g).unwrap();
        let err = solve_string_continuation(&coincident, &grid, &opts).unwrap_err();
        assert!(err.to_string().contains("radial"));
    }

    #[test]
    fn schedule_rules() {
        let spec = two_center(30.0, 0.5);
        let grid = Grid2D::build(8.0, 81, &spec).unwrap();
        let h2 = grid.spacing().powi(2);
        let s = StringSolveOptions::default().schedule_for(&grid).unwrap();
        assert_eq!(s[0], 0.5);
        assert!(*s.last().unwrap() >= h2);
        let bad = StringSolveOptions {
            delta_schedule: vec![0.25, 0.5],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let tiny = StringSolveOptions {
            delta_schedule: vec![0.5, 0.1 * h2],
            ..Default::default()
        };
        assert!(tiny.schedule_for(&grid).is_err());
    }
}
