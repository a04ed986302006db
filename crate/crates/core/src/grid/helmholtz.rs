use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Field2D, Grid2D};
use crate::error::{Error, Result};

const REFINE_STEPS: usize = 3;

/// Direct solver for `(Δ_h − k) u = rhs` with Dirichlet data, by a 2-D sine transform.
pub struct HelmholtzSolver {
    grid: Grid2D,
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    /// Negated 1-D stencil eigenvalues `(4/h²) sin²(πp / 2(M+1))`.
    lambda: Vec<f64>,
}

impl std::fmt::Debug for HelmholtzSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzSolver").field("m", &self.m).finish()
    }
}

impl HelmholtzSolver {
    pub fn new(grid: &Grid2D) -> Self {
        let m = grid.nodes_per_side() - 2;
        let len = 2 * (m + 1);
        let fft = FftPlanner::new().plan_fft_forward(len);
        let h = grid.spacing();
        let lambda = (1..=m)
            .map(|p| {
                let s = (std::f64::consts::PI * p as f64 / (2.0 * (m + 1) as f64)).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        HelmholtzSolver {
            grid: grid.clone(),
            m,
            fft,
            lambda,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Most negative eigenvalue magnitude of `Δ_h`, i.e. `min(−eig)`.
    pub fn smallest_eigenvalue(&self) -> f64 {
        2.0 * self.lambda[0]
    }

    /// Solves on the interior; boundary values are copied from `boundary`.
    /// Returns the solution and the sup-norm residual of the discrete equation.
    pub fn solve(&self, k: f64, rhs: &Field2D, boundary: &Field2D) -> Result<(Field2D, f64)> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Precondition(format!("shift k must be non-negative, got {k}")));
        }
        if rhs.grid.nodes_per_side() != self.grid.nodes_per_side()
            || boundary.grid.nodes_per_side() != self.grid.nodes_per_side()
        {
            return Err(Error::Precondition("field does not match solver grid".into()));
        }
        if rhs.values.iter().any(|v| !v.is_finite()) || boundary.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "helmholtz right-hand side" });
        }
        let g = &self.grid;
        let n = g.nodes_per_side();
        let m = self.m;
        let h2 = g.spacing() * g.spacing();

        let mut u = Field2D::zeros(g);
        for j in 0..n {
            for i in 0..n {
                if g.is_boundary(i, j) {
                    let idx = g.index(i, j);
                    u.values[idx] = boundary.values[idx];
                }
            }
        }

        // interior right-hand side with the boundary data moved across
        let mut b = vec![0.0; m * m];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let mut val = rhs.at(i, j);
                if i == 1 {
                    val -= u.at(0, j) / h2;
                }
                if i == n - 2 {
                    val -= u.at(n - 1, j) / h2;
                }
                if j == 1 {
                    val -= u.at(i, 0) / h2;
                }
                if j == n - 2 {
                    val -= u.at(i, n - 1) / h2;
                }
                b[(j - 1) * m + (i - 1)] = val;
            }
        }

        let mut x = self.solve_interior(k, &b);
        let scale = 1.0 + rhs_sup(rhs, g);
        let tol = 1e-10 * scale;
        let mut residual = f64::INFINITY;
        for step in 0..=REFINE_STEPS {
            for j in 1..n - 1 {
                for i in 1..n - 1 {
                    u.values[g.index(i, j)] = x[(j - 1) * m + (i - 1)];
                }
            }
            let r = interior_residual(&u, k, rhs);
            residual = r.iter().fold(0.0, |acc, v| acc.max(v.abs()));
            if residual <= 1e-3 * tol || step == REFINE_STEPS {
                break;
            }
            let dx = self.solve_interior(k, &r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        if !residual.is_finite() {
            return Err(Error::NonFinite { context: "helmholtz solution" });
        }
        if residual > tol {
            return Err(Error::LinearSolve {
                residual,
                tolerance: tol,
            });
        }
        Ok((u, residual))
    }

    /// Inverts `(Δ_h − k)` with homogeneous boundary data on an `M × M` array.
    fn solve_interior(&self, k: f64, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut a = b.to_vec();
        self.dst_rows(&mut a);
        transpose(&mut a, m);
        self.dst_rows(&mut a);
        // a[q][p] now holds coefficients with q the y-mode
        for q in 0..m {
            for p in 0..m {
                a[q * m + p] /= -(self.lambda[p] + self.lambda[q]) - k;
            }
        }
        self.dst_rows(&mut a);
        transpose(&mut a, m);
        self.dst_rows(&mut a);
        let norm = (2.0 / (m + 1) as f64).powi(2);
        for v in &mut a {
            *v *= norm;
        }
        a
    }

    /// Unnormalised DST-I of every row, two rows per complex transform.
    fn dst_rows(&self, a: &mut [f64]) {
        let m = self.m;
        let len = 2 * (m + 1);
        let pairs = m.div_ceil(2);
        let mut buf = vec![Complex64::new(0.0, 0.0); pairs * len];
        for pr in 0..pairs {
            let r1 = 2 * pr;
            let r2 = r1 + 1;
            let seg = &mut buf[pr * len..(pr + 1) * len];
            for j in 0..m {
                let re = a[r1 * m + j];
                let im = if r2 < m { a[r2 * m + j] } else { 0.0 };
                seg[j + 1] = Complex64::new(re, im);
                seg[len - 1 - j] = Complex64::new(-re, -im);
            }
        }
        self.fft.process(&mut buf);
        for pr in 0..pairs {
            let r1 = 2 * pr;
            let r2 = r1 + 1;
            let seg = &buf[pr * len..(pr + 1) * len];
            for kk in 0..m {
                let z = seg[kk + 1];
                a[r1 * m + kk] = -0.5 * z.im;
                if r2 < m {
                    a[r2 * m + kk] = 0.5 * z.re;
                }
            }
        }
    }
}

/// One-shot convenience wrapper around [`HelmholtzSolver`].
pub fn helmholtz_solve(k: f64, rhs: &Field2D, boundary: &Field2D) -> Result<Field2D> {
    HelmholtzSolver::new(&rhs.grid)
        .solve(k, rhs, boundary)
        .map(|(u, _)| u)
}

fn rhs_sup(rhs: &Field2D, g: &Grid2D) -> f64 {
    g.interior().fold(0.0, |acc, (i, j)| acc.max(rhs.at(i, j).abs()))
}

/// `rhs − (Δ_h − k) u` on the interior, as an `M × M` array.
fn interior_residual(u: &Field2D, k: f64, rhs: &Field2D) -> Vec<f64> {
    let g = &u.grid;
    let n = g.nodes_per_side();
    let m = n - 2;
    let mut r = vec![0.0; m * m];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            r[(j - 1) * m + (i - 1)] = rhs.at(i, j) - (u.laplacian_at(i, j) - k * u.at(i, j));
        }
    }
    r
}

fn transpose(a: &mut [f64], m: usize) {
    for r in 0..m {
        for c in r + 1..m {
            a.swap(r * m + c, c * m + r);
        }
    }
}
