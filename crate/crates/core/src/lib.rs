//! Solvers for self-dual multivortices and cosmic strings of the generalized Abelian Higgs
//! model: monotone iteration on a uniform grid, δ-regularized continuation for gravitating
//! strings, radial reductions for coincident centers, and the physical diagnostics.

pub mod cli;
pub mod cosmic_string;
pub mod diagnostics;
pub mod discrete;
pub mod error;
pub mod grid;
pub mod io;
mod iteration;
pub mod model;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod vortex;

pub use cosmic_string::{solve_string_continuation, solve_string_fixed_delta, KPolicy, StringSolveOptions};
pub use diagnostics::{DecayFit, DecayKind, DecaySource, DiagnosticsBundle};
pub use discrete::{residual_sup, StringWeight};
pub use error::{Error, Miss, Result};
pub use grid::{apply_laplacian, helmholtz_solve, Field2D, Grid2D};
pub use model::{Center, ProblemSpec};
pub use radial::{RadialProfile, BetaQuadrature};
pub use report::SolveReport;
pub use vortex::{solve_vortex, uniqueness_check, VortexSolveOptions};
