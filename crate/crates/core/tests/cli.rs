use std::fs;
use std::path::Path;
use std::process::Command;

use selfdual_vortex::cli::{RunConfig, RunReport};
use selfdual_vortex::io::{parse_field_csv, parse_radial_csv};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selfdual-vortex"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn vortex_run_writes_field_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        r#"
        mode = "vortex"
        [spec]
        m = 1.0
        beta = 2.0
        centers = [{ x = 0.0, y = 0.0 }]
        [grid]
        radius = 20.0
        nodes_per_side = 401
        "#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = RunReport::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let d = report.diagnostics.unwrap();
    assert!((d.total_flux / (2.0 * std::f64::consts::PI) - 1.0).abs() < 0.005);
    assert!((-d.source_integral / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.005);
    let field = parse_field_csv(&fs::read_to_string(out.join("field.csv")).unwrap()).unwrap();
    assert_eq!(field.grid.nodes_per_side(), 401);
    // the resolved config re-parses to the config that produced it
    let reparsed: RunConfig = serde_json::from_value(serde_json::to_value(&report.config).unwrap()).unwrap();
    assert_eq!(reparsed, report.config);
    assert_eq!(RunConfig::from_toml(&report.config.to_toml().unwrap()).unwrap(), report.config);
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let radial = write(
        dir.path(),
        "r.toml",
        r#"
        mode = "radial"
        [spec]
        m = 1.0
        beta = 2.0
        centers = [{ x = 1.0, y = 0.0 }, { x = -1.0, y = 0.0 }]
        "#,
    );
    let out = bin().args(["--config", radial.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coincident"));

    let string = write(
        dir.path(),
        "s.toml",
        r#"
        mode = "string"
        [spec]
        m = 1.0
        beta = 2.0
        G = 0.0
        centers = [{ x = 1.0, y = 0.0 }, { x = -1.0, y = 0.0 }]
        "#,
    );
    let out = bin().args(["--config", string.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("G > 0"));

    let garbage = write(dir.path(), "g.toml", "mode = [");
    assert_eq!(bin().args(["--config", garbage.to_str().unwrap()]).status().unwrap().code(), Some(3));
    assert_eq!(bin().args(["--config", "/nonexistent.toml"]).status().unwrap().code(), Some(3));
    assert_eq!(
        bin().args(["--config", string.to_str().unwrap(), "--mode", "bogus"]).status().unwrap().code(),
        Some(3)
    );
}

#[test]
fn solver_failure_exits_2_and_records_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "f.toml",
        r#"
        mode = "vortex"
        [spec]
        m = 1.0
        beta = 2.0
        centers = [{ x = 0.0, y = 0.0 }]
        [grid]
        radius = 10.0
        nodes_per_side = 65
        [vortex]
        max_iters = 3
        "#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let report = RunReport::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.status, "failed");
    assert!(report.error.unwrap().contains("did not converge"));
}

#[test]
fn radial_mode_uses_the_quadrature_beta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.toml",
        r#"
        mode = "radial"
        [spec]
        m = 1.0
        beta = 1.0
        G = 0.07957747154594767
        centers = [{ x = 0.0, y = 0.0 }]
        "#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = RunReport::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let q = report.quadrature.unwrap();
    assert_eq!(report.config.spec.unwrap().beta, q.beta);
    let r = report.radial.unwrap();
    assert!(r.monotone && r.v_end.abs() < 1e-3);
    let samples = parse_radial_csv(&fs::read_to_string(out.join("radial.csv")).unwrap()).unwrap();
    assert_eq!(samples.t.len(), r.samples);
}

#[test]
fn sweep_rows_are_deterministic_and_track_the_decay_rate() {
    let dir = tempfile::tempdir().unwrap();
    let run = |m: f64| {
        format!(
            "[[runs]]\nmode = \"vortex\"\nspec = {{ m = {m:?}, beta = 2.0, centers = [{{ x = 0.0, y = 0.0 }}] }}\ngrid = {{ radius = 16.0, nodes_per_side = 161 }}\n"
        )
    };
    let text = format!("mode = \"sweep\"\n{}{}{}{}{}", run(1.0), run(2.0), run(3.0), run(-1.0), run(-1.0));
    let cfg = write(dir.path(), "sweep.toml", &text);
    let out = dir.path().join("out");
    let status = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--parallel", "2", "--quiet"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[4], lines[5]);
    let decay: Vec<f64> = lines[1..4].iter().map(|l| l.split(',').nth(8).unwrap().parse().unwrap()).collect();
    assert!(decay[0] < decay[1] && decay[1] < decay[2], "{decay:?}");
    for (k, m) in [1.0f64, 2.0, 3.0].iter().enumerate() {
        let predicted = (2f64.powf(*m) * 2.0).sqrt();
        assert!((decay[k] / predicted - 1.0).abs() < 0.1, "m = {m}: {}", decay[k]);
    }
    let a = fs::read(out.join("run_003/report.json")).unwrap();
    let b = fs::read(out.join("run_004/report.json")).unwrap();
    let strip = |bytes: Vec<u8>| String::from_utf8(bytes).unwrap().replace("run_004", "run_003");
    assert_eq!(strip(a), strip(b));
}
