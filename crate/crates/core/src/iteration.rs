//! The shifted monotone iteration `(Δ_h − k) w_n = F(v_b + w_{n−1}) − k w_{n−1} + g_h`.
//! Tracking `v = v_b + w` directly is algebraically the same scheme.

use crate::discrete::{DiscreteProblem, EquationKind};
use crate::error::{Error, Result};
use crate::grid::{Field2D, HelmholtzSolver};

/// Pointwise increase tolerated between consecutive iterates.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shift {
    Fixed(f64),
    /// `factor · max_x` of the local slope bound at the current iterate.
    Adaptive { factor: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct Settings {
    pub solver: &'static str,
    pub tol: f64,
    pub max_iters: usize,
    /// Abort with `MonotoneBreak` instead of just recording the increase.
    pub strict_monotone: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub v: Field2D,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub max_increase: f64,
    pub shifts: Vec<f64>,
    pub final_update: f64,
}

impl DiscreteProblem {
    /// Upper bound of `∂F/∂v` on `(−∞, v]` at node `idx`.
    #[inline]
    fn slope_bound_at(&self, idx: usize, v: f64) -> f64 {
        match (self.kind, &self.weight) {
            (EquationKind::String, Some(u)) => u.values[idx] * self.string.derivative_bound(v),
            _ => self.coupling.slope_bound(),
        }
    }

    /// `max_x` of the slope bound at the iterate `v`.
    pub(crate) fn adaptive_shift(&self, v: &Field2D) -> f64 {
        (0..self.grid.len())
            .map(|idx| self.slope_bound_at(idx, v.values[idx]))
            .fold(0.0, f64::max)
    }

    /// Shift valid for every iterate below `v = 0`.
    pub(crate) fn analytic_shift(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| self.slope_bound_at(idx, 0.0))
            .fold(0.0, f64::max)
    }
}

/// Runs the iteration on the full field `v` in correction form:
/// `(Δ_h − k) d = F(v) + charge − Δ_h v`, `v ← v + d`, with `v = 0` on the boundary.
pub(crate) fn run(
    problem: &DiscreteProblem,
    start: Field2D,
    shift: Shift,
    settings: &Settings,
) -> Result<Outcome> {
    let grid = &problem.grid;
    let solver = HelmholtzSolver::new(grid);
    let zero = Field2D::zeros(grid);
    let mut v = start;
    let n_side = grid.nodes_per_side();
    for j in 0..n_side {
        for i in 0..n_side {
            if grid.is_boundary(i, j) {
                v.values[grid.index(i, j)] = 0.0;
            }
        }
    }
    let mut trace = Vec::new();
    let mut shifts = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    for n in 1..=settings.max_iters {
        let k = match shift {
            Shift::Fixed(k) => k,
            Shift::Adaptive { factor } => factor * problem.adaptive_shift(&v),
        };
        let defect = problem.defect(&v)?;
        let (d, _) = solver.solve(k, &defect, &zero)?;
        let mut update = 0.0f64;
        let mut increase = f64::NEG_INFINITY;
        for (vi, di) in v.values.iter_mut().zip(&d.values) {
            update = update.max(di.abs());
            increase = increase.max(*di);
            *vi += di;
        }
        if !update.is_finite() {
            return Err(Error::NonFinite { context: settings.solver });
        }
        trace.push(update);
        shifts.push(k);
        max_increase = max_increase.max(increase);
        if settings.strict_monotone && increase > MONOTONE_SLACK {
            return Err(Error::MonotoneBreak {
                iteration: n,
                increase,
            });
        }
        if update < settings.tol {
            return Ok(Outcome {
                v,
                iterations: n,
                trace,
                max_increase,
                shifts,
                final_update: update,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: settings.solver,
        iterations: settings.max_iters,
        last_update: trace.last().copied().unwrap_or(f64::NAN),
        trace,
    })
}
