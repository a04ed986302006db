use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cosmic_string::StringSolveOptions;
use crate::error::{Error, Result};
use crate::grid::MIN_NODES;
use crate::model::ProblemSpec;
use crate::radial::{RadialKind, RadialParams, DEFAULT_STEP};
use crate::vortex::VortexSolveOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Vortex,
    String,
    Radial,
    Sweep,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vortex" => Ok(Mode::Vortex),
            "string" => Ok(Mode::String),
            "radial" => Ok(Mode::Radial),
            "sweep" => Ok(Mode::Sweep),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Vortex => "vortex",
            Mode::String => "string",
            Mode::Radial => "radial",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    FieldCsv,
    ReportJson,
    DecayCsv,
    Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radius: f64,
    pub nodes_per_side: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radius: 20.0,
            nodes_per_side: 401,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialOptions {
    /// End of the string march in `t = ln r`.
    pub t_end: f64,
    pub step: f64,
    pub picard_tol: f64,
    /// Right end of the Picard segment; defaults to `−6 − ln(1+β)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Replace `spec.beta` by `2N²/I(a, m)` for strings.
    pub use_quadrature_beta: bool,
    /// Outer radius of the flat oracle profile.
    pub r_max: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            t_end: 15.0,
            step: DEFAULT_STEP,
            picard_tol: 1e-12,
            t0: None,
            use_quadrature_beta: true,
            r_max: 12.0,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_emit() -> BTreeSet<Emit> {
    [Emit::FieldCsv, Emit::ReportJson, Emit::DecayCsv, Emit::Diagnostics]
        .into_iter()
        .collect()
}

/// One run, or a sweep over nested runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ProblemSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub vortex: VortexSolveOptions,
    #[serde(default)]
    pub string: StringSolveOptions,
    #[serde(default)]
    pub radial: RadialOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_emit")]
    pub emit: BTreeSet<Emit>,
    /// Concurrent runs in a sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RunConfig>,
}

impl RunConfig {
    /// Minimal config for `mode` and `spec` with default grid, options and outputs.
    pub fn new(mode: Mode, spec: ProblemSpec) -> Self {
        RunConfig {
            mode,
            name: None,
            spec: Some(spec),
            grid: GridConfig::default(),
            vortex: VortexSolveOptions::default(),
            string: StringSolveOptions::default(),
            radial: RadialOptions::default(),
            output_dir: default_output_dir(),
            emit: default_emit(),
            parallel: None,
            runs: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn spec(&self) -> Result<&ProblemSpec> {
        self.spec
            .as_ref()
            .ok_or_else(|| Error::Config(format!("mode {} needs a [spec] table", self.mode.as_str())))
    }

    /// Checks every mode-specific precondition without allocating any grid storage.
    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Sweep {
            if self.spec.is_some() {
                return Err(Error::Config("a sweep takes its specs from [[runs]]".into()));
            }
            if self.parallel == Some(0) {
                return Err(Error::Config("parallel must be at least 1".into()));
            }
            for (k, run) in self.runs.iter().enumerate() {
                if run.mode == Mode::Sweep {
                    return Err(Error::Config(format!("run {k}: sweeps cannot be nested")));
                }
                run.validate().map_err(|e| Error::Config(format!("run {k}: {e}")))?;
            }
            return Ok(());
        }
        if !self.runs.is_empty() {
            return Err(Error::Config("[[runs]] is only allowed in sweep mode".into()));
        }
        let spec = self.spec()?;
        spec.validate()?;
        match self.mode {
            Mode::Vortex => {
                self.check_grid(spec)?;
                self.vortex.validate()?;
                if spec.newton_g != 0.0 {
                    return Err(Error::Precondition("vortex mode requires G = 0".into()));
                }
            }
            Mode::String => {
                self.check_grid(spec)?;
                self.string.validate()?;
                if spec.newton_g <= 0.0 {
                    return Err(Error::Precondition("string mode requires G > 0".into()));
                }
                let an = spec.a() * spec.total_number() as f64;
                if an > 1.0 + 1e-12 {
                    return Err(Error::Precondition(format!("string mode requires aN <= 1, got {an}")));
                }
                if spec.distinct_centers() < 2 {
                    return Err(Error::Precondition(
                        "string mode requires at least two distinct centers".into(),
                    ));
                }
                let h = 2.0 * self.grid.radius / (self.grid.nodes_per_side - 1) as f64;
                if let Some(&last) = self.string.delta_schedule.last() {
                    if last < 0.25 * h * h {
                        return Err(Error::Config(format!(
                            "final delta {last} below spacing^2/4 = {}",
                            0.25 * h * h
                        )));
                    }
                }
            }
            Mode::Radial => {
                if !spec.all_coincident() || spec.centers.is_empty() {
                    return Err(Error::Precondition(
                        "radial mode requires coincident centers".into(),
                    ));
                }
                let params = RadialParams::from_spec(spec)?;
                let r = &self.radial;
                match params.kind {
                    RadialKind::Vortex => {
                        if !(r.r_max.is_finite() && r.r_max > 1.0) {
                            return Err(Error::Config("radial.r_max must exceed 1".into()));
                        }
                    }
                    RadialKind::String => {
                        if !(r.step.is_finite() && r.step > 0.0) || !(r.picard_tol > 0.0) {
                            return Err(Error::Config("radial.step and radial.picard_tol must be positive".into()));
                        }
                        let t0 = r.t0.unwrap_or(-6.0 - spec.beta.ln_1p());
                        if !(t0.is_finite() && r.t_end.is_finite() && r.t_end > t0) {
                            return Err(Error::Config("radial.t_end must exceed the Picard end t0".into()));
                        }
                    }
                }
            }
            Mode::Sweep => unreachable!(),
        }
        Ok(())
    }

    fn check_grid(&self, spec: &ProblemSpec) -> Result<()> {
        let g = &self.grid;
        if !(g.radius.is_finite() && g.radius > 0.0) {
            return Err(Error::Config(format!("grid.radius must be positive, got {}", g.radius)));
        }
        if g.nodes_per_side < MIN_NODES || g.nodes_per_side % 2 == 0 {
            return Err(Error::Config(format!(
                "grid.nodes_per_side must be odd and at least {MIN_NODES}, got {}",
                g.nodes_per_side
            )));
        }
        for c in &spec.centers {
            if c.x.hypot(c.y) >= 0.5 * g.radius {
                return Err(Error::Precondition(format!(
                    "center ({}, {}) must lie inside |x| < R/2",
                    c.x, c.y
                )));
            }
        }
        Ok(())
    }
}
