use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use selfdual_vortex::cli::{run_file, Mode, Overrides, EXIT_CONFIG};

/// Self-dual vortex and cosmic-string solver.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's mode (vortex, string, radial, sweep).
    #[arg(long)]
    mode: Option<String>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent runs in a sweep.
    #[arg(long)]
    parallel: Option<usize>,
    /// Suppress the summary on standard output.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let mode = match args.mode.as_deref().map(str::parse::<Mode>).transpose() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let overrides = Overrides {
        mode,
        output_dir: args.out,
        parallel: args.parallel,
        quiet: args.quiet,
    };
    ExitCode::from(run_file(&args.config, &overrides) as u8)
}
