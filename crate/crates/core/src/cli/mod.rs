//! Batch front-end: reads a TOML [`RunConfig`], dispatches to a solver and writes
//! plot-ready artifacts into the output directory.
//!
//! Files written per run: `report.json` (always), `timing.json` (always), `field.csv` or
//! `radial.csv` (`field_csv`), `decay.csv` (`decay_csv`). A sweep writes one subdirectory
//! per run plus `summary.csv`. Exit codes: 0 success, 2 solver failure, 3 config error.

mod config;

pub use config::{Emit, GridConfig, Mode, RadialOptions, RunConfig};

use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cosmic_string::solve_string_continuation;
use crate::diagnostics::{
    decay_fit, decay_samples, default_window, string_bundle, vortex_bundle, DecayKind, DecaySource,
    DiagnosticsBundle,
};
use crate::discrete::StringWeight;
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::model::ProblemSpec;
use crate::radial::{
    beta_for_coincident, default_t0, radial_initialize, radial_march, radial_vortex_oracle, BetaQuadrature,
    RadialKind, RadialParams, RadialProfile,
};
use crate::report::SolveReport;
use crate::vortex::solve_vortex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Summary of a radial profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSummary {
    pub kind: RadialKind,
    pub beta: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub v_end: f64,
    pub max_energy_defect: f64,
    pub monotone: bool,
    pub decay_fit: Option<f64>,
    pub predicted_decay: f64,
    pub picard_sweeps: usize,
    pub samples: usize,
}

/// Contents of `report.json`. Contains no timing, so identical configs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub config: RunConfig,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<BetaQuadrature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsBundle>,
    /// `|source_integral + 4πN| / 4πN`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_error: Option<f64>,
}

impl RunReport {
    fn new(config: RunConfig) -> Self {
        RunReport {
            config,
            status: "ok".into(),
            error: None,
            solve: None,
            radial: None,
            quadrature: None,
            diagnostics: None,
            flux_error: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if report.status != "ok" && report.status != "failed" {
            return Err(Error::Parse(format!("unknown status {:?}", report.status)));
        }
        Ok(report)
    }

    pub fn succeeded(&self) -> bool {
        self.status == "ok"
    }
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mode: Mode,
    pub m: f64,
    pub beta: f64,
    pub newton_g: f64,
    pub n: u32,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub flux_error: Option<f64>,
    pub decay_fit: Option<f64>,
    pub energy: Option<f64>,
    pub status: String,
}

pub const SUMMARY_HEADER: &str = "mode,m,beta,G,N,iterations,residual,flux_error,decay_fit,energy,status";

fn cell<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl SummaryRow {
    fn from_report(report: &RunReport) -> Self {
        let spec = report.config.spec.as_ref();
        SummaryRow {
            mode: report.config.mode,
            m: spec.map_or(f64::NAN, |s| s.m),
            beta: spec.map_or(f64::NAN, |s| s.beta),
            newton_g: spec.map_or(f64::NAN, |s| s.newton_g),
            n: spec.map_or(0, |s| s.total_number()),
            iterations: report.solve.as_ref().map(|s| s.iterations),
            residual: report.solve.as_ref().map(|s| s.residual_sup),
            flux_error: report.flux_error,
            decay_fit: report
                .diagnostics
                .as_ref()
                .and_then(|d| d.decay_exponent_fit)
                .or_else(|| report.solve.as_ref().and_then(|s| s.decay_exponent_fit))
                .or_else(|| report.radial.as_ref().and_then(|r| r.decay_fit)),
            energy: report.diagnostics.as_ref().map(|d| d.energy),
            status: match &report.error {
                None => "ok".into(),
                Some(e) => format!("failed: {}", e.replace([',', '\n'], ";")),
            },
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.mode.as_str(),
            self.m,
            self.beta,
            self.newton_g,
            self.n,
            cell(self.iterations),
            cell(self.residual),
            cell(self.flux_error),
            cell(self.decay_fit),
            cell(self.energy),
            self.status
        )
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn write_decay(path: &Path, source: DecaySource<'_>, kind: DecayKind) -> Result<()> {
    let (lo, hi) = default_window(source, kind);
    let (xs, ys) = decay_samples(source, kind, lo, hi);
    let mut out = create(path)?;
    writeln!(out, "abscissa,log_magnitude")?;
    for (x, y) in xs.iter().zip(&ys) {
        writeln!(out, "{x:.16e},{y:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

fn write_field(path: &Path, v: &Field2D) -> Result<()> {
    let mut out = create(path)?;
    v.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn flux_error(bundle: &DiagnosticsBundle, spec: &ProblemSpec) -> Option<f64> {
    let target = 4.0 * PI * spec.total_number() as f64;
    (target > 0.0).then(|| (bundle.source_integral + target).abs() / target)
}

fn solve_into(config: &mut RunConfig, report: &mut RunReport, dir: &Path) -> Result<()> {
    let emit = config.emit.clone();
    let spec = config.spec()?.clone();
    match config.mode {
        Mode::Vortex => {
            let grid = Grid2D::build(config.grid.radius, config.grid.nodes_per_side, &spec)?;
            let (v, solve) = solve_vortex(&spec, &grid, &config.vortex)?;
            if emit.contains(&Emit::Diagnostics) {
                let bundle = vortex_bundle(&v, &spec)?;
                report.flux_error = flux_error(&bundle, &spec);
                report.diagnostics = Some(bundle);
            }
            report.solve = Some(solve);
            if emit.contains(&Emit::FieldCsv) {
                write_field(&dir.join("field.csv"), &v)?;
            }
            if emit.contains(&Emit::DecayCsv) {
                write_decay(&dir.join("decay.csv"), DecaySource::Field(&v), DecayKind::Exponential)?;
            }
        }
        Mode::String => {
            let grid = Grid2D::build(config.grid.radius, config.grid.nodes_per_side, &spec)?;
            let (v, solve, _) = solve_string_continuation(&spec, &grid, &config.string)?;
            if emit.contains(&Emit::Diagnostics) {
                let delta = *solve.delta_schedule.last().unwrap_or(&0.5);
                let weight = StringWeight::new(&grid, &spec, delta)?;
                let bundle = string_bundle(&v, &spec, &weight)?;
                report.flux_error = flux_error(&bundle, &spec);
                report.diagnostics = Some(bundle);
            }
            report.solve = Some(solve);
            if emit.contains(&Emit::FieldCsv) {
                write_field(&dir.join("field.csv"), &v)?;
            }
            if emit.contains(&Emit::DecayCsv) {
                write_decay(&dir.join("decay.csv"), DecaySource::Field(&v), DecayKind::Algebraic)?;
            }
        }
        Mode::Radial => {
            let params = RadialParams::from_spec(&spec)?;
            let (profile, kind) = match params.kind {
                RadialKind::Vortex => (radial_vortex_oracle(&spec, config.radial.r_max)?, DecayKind::Bessel),
                RadialKind::String => {
                    let mut spec = spec.clone();
                    if config.radial.use_quadrature_beta {
                        let q = beta_for_coincident(spec.a(), spec.m, spec.total_number())?;
                        spec.beta = q.beta;
                        report.quadrature = Some(q);
                        // record the β actually used so the resolved config reproduces the run
                        config.spec = Some(spec.clone());
                        report.config.spec = Some(spec.clone());
                    }
                    let t0 = config.radial.t0.unwrap_or_else(|| default_t0(spec.beta));
                    let init = radial_initialize(&spec, t0, config.radial.picard_tol)?;
                    (radial_march(&init, config.radial.t_end, config.radial.step)?, DecayKind::Algebraic)
                }
            };
            report.radial = Some(summarize(&profile, kind));
            if emit.contains(&Emit::FieldCsv) {
                let mut out = create(&dir.join("radial.csv"))?;
                profile.write_csv(&mut out)?;
                out.flush()?;
            }
            if emit.contains(&Emit::DecayCsv) {
                write_decay(&dir.join("decay.csv"), DecaySource::Profile(&profile), kind)?;
            }
        }
        Mode::Sweep => unreachable!("sweeps are dispatched by run"),
    }
    Ok(())
}

fn summarize(profile: &RadialProfile, kind: DecayKind) -> RadialSummary {
    RadialSummary {
        kind: profile.params.kind,
        beta: profile.params.beta,
        t_start: profile.t_start,
        t_end: profile.t_end,
        v_end: *profile.v_samples.last().unwrap_or(&f64::NAN),
        max_energy_defect: profile.max_energy_defect,
        monotone: profile.is_monotone_negative(),
        decay_fit: decay_fit(DecaySource::Profile(profile), kind).ok().map(|f| f.order),
        predicted_decay: match profile.params.kind {
            RadialKind::String => profile.params.predicted_decay(),
            RadialKind::Vortex => (2f64.powf(profile.params.m) * profile.params.beta).sqrt(),
        },
        picard_sweeps: profile.picard_trace.len(),
        samples: profile.len(),
    }
}

/// Runs one non-sweep config into `config.output_dir`. Solver failures are recorded in
/// the returned report; config and I/O failures are returned as errors.
pub fn execute(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    if config.mode == Mode::Sweep {
        return Err(Error::Config("execute runs a single config; use sweep".into()));
    }
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let mut resolved = config.clone();
    let mut report = RunReport::new(config.clone());
    if let Err(e) = solve_into(&mut resolved, &mut report, &dir) {
        if matches!(e, Error::Io(_)) {
            return Err(e);
        }
        report.status = "failed".into();
        report.error = Some(e.to_string());
    }
    report.config = resolved;
    fs::write(dir.join("report.json"), report.to_json()? + "\n")?;
    let timing = serde_json::json!({ "wall_seconds": start.elapsed().as_secs_f64() });
    fs::write(dir.join("timing.json"), timing.to_string() + "\n")?;
    Ok(report)
}

fn run_dir(root: &Path, k: usize, run: &RunConfig) -> PathBuf {
    let name = run
        .name
        .as_deref()
        .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && n != &"." && n != &"..")
        .map(str::to_string)
        .unwrap_or_else(|| format!("run_{k:03}"));
    root.join(name)
}

/// Runs every config of a sweep on up to `parallelism` threads and writes `summary.csv`.
/// Rows follow the input order; failures are recorded per row.
pub fn sweep(config: &RunConfig, parallelism: usize) -> Result<Vec<SummaryRow>> {
    config.validate()?;
    let root = config.output_dir.clone();
    fs::create_dir_all(&root)?;
    let runs: Vec<RunConfig> = config
        .runs
        .iter()
        .enumerate()
        .map(|(k, run)| {
            let mut run = run.clone();
            run.output_dir = run_dir(&root, k, &run);
            run
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Failed(e.to_string()))?;
    let results: Vec<Result<RunReport>> = pool.install(|| {
        use rayon::prelude::*;
        runs.par_iter().map(execute).collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for (run, result) in runs.iter().zip(results) {
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                let mut r = RunReport::new(run.clone());
                r.status = "failed".into();
                r.error = Some(e.to_string());
                r
            }
        };
        rows.push(SummaryRow::from_report(&report));
    }
    let mut out = create(&root.join("summary.csv"))?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for row in &rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()?;
    Ok(rows)
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub output_dir: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub quiet: bool,
}

/// Loads, overrides and runs a config file; returns the process exit code.
pub fn run_file(path: &Path, overrides: &Overrides) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let mut config = match RunConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(mode) = overrides.mode {
        config.mode = mode;
    }
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(p) = overrides.parallel {
        config.parallel = Some(p);
    }
    run(&config, overrides.quiet)
}

/// Runs a config; returns 0, 2 or 3.
pub fn run(config: &RunConfig, quiet: bool) -> i32 {
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    if config.mode == Mode::Sweep {
        let parallelism = config.parallel.unwrap_or(1);
        return match sweep(config, parallelism) {
            Ok(rows) => {
                let failed = rows.iter().filter(|r| r.status != "ok").count();
                if !quiet {
                    println!("{SUMMARY_HEADER}");
                    for row in &rows {
                        println!("{}", row.to_csv());
                    }
                }
                for row in rows.iter().filter(|r| r.status != "ok") {
                    eprintln!("error: {} run {}", row.mode.as_str(), row.status);
                }
                if failed == 0 {
                    EXIT_OK
                } else {
                    EXIT_SOLVER
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                if e.is_config() {
                    EXIT_CONFIG
                } else {
                    EXIT_SOLVER
                }
            }
        };
    }
    match execute(config) {
        Ok(report) if report.succeeded() => {
            if !quiet {
                println!("{}", SUMMARY_HEADER);
                println!("{}", SummaryRow::from_report(&report).to_csv());
                println!("wrote {}", config.output_dir.display());
            }
            EXIT_OK
        }
        Ok(report) => {
            eprintln!("error: {}", report.error.as_deref().unwrap_or("solver failed"));
            EXIT_SOLVER
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_SOLVER
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Center;

    fn small_vortex() -> RunConfig {
        let spec = ProblemSpec::flat(&[(0.0, 0.0)], 1.0, 2.0).unwrap();
        let mut c = RunConfig::new(Mode::Vortex, spec);
        c.grid = GridConfig {
            radius: 8.0,
            nodes_per_side: 65,
        };
        c
    }

    #[test]
    fn toml_round_trip() {
        let c = small_vortex();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"
            mode = "vortex"
            output_dir = "out/v"
            emit = ["report_json", "field_csv"]

            [spec]
            m = 1.0
            beta = 2.0
            centers = [{ x = 0.0, y = 0.0 }, { x = 1.0, y = 0.5, multiplicity = 2 }]

            [grid]
            radius = 20.0
            nodes_per_side = 401

            [vortex]
            k_factor = 1.2
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.spec.as_ref().unwrap().total_number(), 3);
        assert_eq!(c.vortex.k_factor, 1.2);
        assert_eq!(c.emit.len(), 2);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("mode = \"vortex\"\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("mode = \"warp\"\n").is_err());
    }

    #[test]
    fn mode_preconditions() {
        let two = ProblemSpec::flat(&[(1.0, 0.0), (-1.0, 0.0)], 1.0, 2.0).unwrap();
        let radial = RunConfig::new(Mode::Radial, two.clone());
        let err = radial.validate().unwrap_err();
        assert!(err.to_string().contains("coincident"), "{err}");
        assert_eq!(run(&radial, true), EXIT_CONFIG);

        let string = RunConfig::new(Mode::String, two);
        assert!(string.validate().unwrap_err().to_string().contains("G > 0"));
        assert_eq!(run(&string, true), EXIT_CONFIG);

        let g = ProblemSpec::new(vec![Center::new(0.0, 0.0, 1)], 1.0, 2.0, 0.01).unwrap();
        assert!(RunConfig::new(Mode::Vortex, g).validate().is_err());
    }

    #[test]
    fn empty_sweep_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::from_toml("mode = \"sweep\"\n").unwrap();
        c.output_dir = dir.path().to_path_buf();
        assert_eq!(run(&c, true), EXIT_OK);
        let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text, format!("{SUMMARY_HEADER}\n"));
    }

    #[test]
    fn run_names_cannot_escape_the_sweep_directory() {
        let mut c = small_vortex();
        c.name = Some("../up".into());
        assert_eq!(run_dir(Path::new("root"), 4, &c), Path::new("root").join("run_004"));
        c.name = Some("ok-name".into());
        assert_eq!(run_dir(Path::new("root"), 4, &c), Path::new("root").join("ok-name"));
    }

    #[test]
    fn vortex_run_is_deterministic_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small_vortex();
        c.output_dir = dir.path().join("a");
        assert_eq!(run(&c, true), EXIT_OK);
        let a = fs::read_to_string(dir.path().join("a/report.json")).unwrap();
        c.output_dir = dir.path().join("b");
        assert_eq!(run(&c, true), EXIT_OK);
        let b = fs::read_to_string(dir.path().join("b/report.json")).unwrap();
        assert_eq!(a.replace("/b", "/a"), b.replace("/b", "/a"));
        let report = RunReport::from_json(&a).unwrap();
        assert!(report.succeeded());
        let mut resolved = report.config.clone();
        resolved.output_dir = c.output_dir.clone();
        assert_eq!(resolved, c);
        assert!(dir.path().join("a/field.csv").exists());
        assert!(dir.path().join("a/decay.csv").exists());
        assert!(dir.path().join("a/timing.json").exists());
    }
}
