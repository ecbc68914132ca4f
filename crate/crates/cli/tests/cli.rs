use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wirephase"));
    if let Some(text) = config {
        let p = dir.join("run.toml");
        fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.arg("--out").arg(dir.join("out")).args(args).output().unwrap()
}

fn out(dir: &Path, name: &str) -> PathBuf {
    dir.join("out").join(name)
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out(dir, name)).unwrap()).unwrap()
}

/// Rows of a CSV file as (header, numeric columns).
fn csv(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(out(dir, name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

const CIRCLE: &str = "[curve.base]\nx = [[1, 1.0, 0.0]]\ny = [[1, 0.0, 1.0]]\n";

#[test]
fn print_config_round_trips() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), None, &["--print-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("grid = 32"));
    let again = run(t.path(), Some(&text), &["--print-config"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn config_errors_exit_with_two() {
    let t = TempDir::new().unwrap();
    for text in ["grid = 7\n", "gird = 32\n", "[loop]\npoints = 2\n", "[tube]\ncolour = 1\n"] {
        let o = run(t.path(), Some(text), &["geometry"]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_wirephase"))
        .args(["--config", "/nonexistent/run.toml", "geometry"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let none = Command::new(env!("CARGO_BIN_EXE_wirephase")).output().unwrap();
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn geometry_of_circle_and_deformed_curve() {
    let t = TempDir::new().unwrap();
    assert!(run(t.path(), Some(CIRCLE), &["geometry"]).status.success());
    let (header, rows) = csv(t.path(), "geometry.csv");
    assert_eq!(header, ["s", "kappa", "tau", "speed"]);
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| (r[1] - 1.0).abs() < 1e-14 && r[2] == 0.0));

    assert!(run(t.path(), Some("[point]\nxi = 0.01\n"), &["geometry"]).status.success());
    let (_, rows) = csv(t.path(), "geometry.csv");
    for r in rows {
        assert!((r[1] - (1.0 - 0.03 * (2.0 * r[0]).cos())).abs() < 5e-4);
    }
    let meta = &json(t.path(), "geometry.json")["meta"];
    assert_eq!(meta["grid"], 32);
    assert!(meta["git_revision"].as_str().is_some_and(|s| !s.is_empty()));
}

#[test]
fn spectrum_of_circle_and_gap_margin() {
    let t = TempDir::new().unwrap();
    assert!(run(t.path(), Some(CIRCLE), &["spectrum"]).status.success());
    let rep = json(t.path(), "spectrum.json");
    for sector in rep["sectors"].as_array().unwrap() {
        let e: Vec<f64> = sector["energies"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        for (v, w) in e.iter().zip([-0.125, 0.375, 0.375]) {
            assert!((v - w).abs() < 1e-10);
        }
    }
    assert!(rep["sigma_asymmetry"].as_f64().unwrap() < 1e-10);
    let (header, rows) = csv(t.path(), "ground_density.csv");
    assert_eq!(header, ["sigma", "s", "density"]);
    let total: f64 = rows.iter().filter(|r| r[0] == 1.0).map(|r| r[2]).sum::<f64>() * 2.0 * PI / 32.0;
    assert!((total - 1.0).abs() < 1e-12);

    assert!(run(t.path(), Some("[point]\nxi = 0.05\nzeta = 0.05\n"), &["spectrum"]).status.success());
    let margin = json(t.path(), "spectrum.json")["sectors"][0]["gap_margin"].as_f64().unwrap();
    assert!(margin > 0.15 && margin < 0.35, "{margin}");
}

#[test]
fn holonomy_reports_curvature_and_phase() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), None, &["holonomy", "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(t.path(), "holonomy.json");
    let plus = &rep["sectors"][0];
    assert_eq!(plus["sigma"], 1);
    assert!((plus["K_numeric"].as_f64().unwrap() + 0.5625).abs() < 0.005);
    assert!((plus["K_analytic"].as_f64().unwrap() + 0.5625).abs() < 1e-8);
    assert!(plus["rel_err"].as_f64().unwrap() < 0.01);
    assert!(plus["gamma_rel_err"].as_f64().unwrap() < 0.01);
    assert!(rep["transport"]["offdiagonal_max"].as_f64().unwrap() < 1e-6);
}

#[test]
fn holonomy_numerical_failures_are_structured() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), Some("[loop]\nepsilon = 0.2\n"), &["holonomy"]);
    assert_eq!(o.status.code(), Some(3));
    let rep = json(t.path(), "holonomy.json");
    let dp = rep["sectors"][0]["delta_phi_analytic"].as_f64().unwrap();
    assert!((dp + 0.1414).abs() < 1e-4, "{dp}");
    assert!(rep["sectors"][0]["errors"][0]["kind"].is_string());

    // strongly elongated ellipse: two curvature wells, nearly degenerate ground doublet
    let ellipse = format!("[loop]\nepsilon = 1.0\npoints = 16\n{CIRCLE}[curve.xi]\nx = [[1, 3.0, 0.0]]\n");
    let o = run(t.path(), Some(&ellipse), &["holonomy"]);
    assert_eq!(o.status.code(), Some(3));
    let rep = json(t.path(), "holonomy.json");
    assert_eq!(rep["sectors"][0]["errors"][0]["kind"], "GapCollapse");
}

#[test]
fn evolve_writes_trace_and_sweep() {
    let t = TempDir::new().unwrap();
    let cfg = "grid = 16\n[schedule]\nrate = 0.05\ntrace_every = 10\nsweep_rates = [0.1, 0.05]\n";
    let o = run(t.path(), Some(cfg), &["evolve"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(t.path(), "evolve.json");
    let s = &rep["sectors"][0];
    assert!(s["max_norm_drift"].as_f64().unwrap() < 1e-10);
    assert!(s["relative_difference"].as_f64().unwrap() < 0.2);
    let (header, rows) = csv(t.path(), "trace.csv");
    assert_eq!(header, ["sigma", "t", "xi", "zeta", "e0", "population", "dynamical_phase", "geometric_phase"]);
    assert!(rows.len() > 2);
    let (header, rows) = csv(t.path(), "sweep.csv");
    assert_eq!(header[1], "rate");
    assert_eq!(rows.len(), 4);
}

#[test]
fn evolve_reports_adiabaticity_loss() {
    let t = TempDir::new().unwrap();
    let cfg = "grid = 16\nsigma = \"plus\"\n[loop]\nepsilon = 0.15\n[schedule]\nrate = 0.4\ntime_step = 0.05\n";
    let o = run(t.path(), Some(cfg), &["evolve"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(t.path(), "evolve.json")["sectors"][0]["error"]["kind"], "AdiabaticityLoss");
}

#[test]
fn tube_samples_every_cell() {
    let t = TempDir::new().unwrap();
    let cfg = "grid = 16\n[tube]\nradial = 4\nangular = 8\ngamma = 1.5707963267948966\n";
    assert!(run(t.path(), Some(cfg), &["tube"]).status.success());
    let (header, rows) = csv(t.path(), "tube.csv");
    assert_eq!(header, ["s", "rho", "phi", "x", "y", "z", "density"]);
    assert_eq!(rows.len(), 16 * 4 * 8);
    let lobes = json(t.path(), "tube.json")["lobe_phi"].as_array().unwrap().clone();
    assert!(lobes.iter().all(|p| p.as_f64().unwrap().cos().abs() < 1e-12));
}

#[test]
fn reproduce_paper_passes_and_guards_the_convention() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), None, &["reproduce-paper"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    let rep = json(t.path(), "report.json");
    assert_eq!(rep["failed"], 0);
    for f in ["initial_tube.csv", "swept_surface.csv", "rotated_tube.csv"] {
        assert!(out(t.path(), f).exists());
    }

    let o = run(t.path(), Some("torsion = \"flipped\"\n[schedule]\nrate = 8e-3\n"), &["reproduce-paper"]);
    assert_eq!(o.status.code(), Some(3));
    let rep = json(t.path(), "report.json");
    let failing: Vec<&str> = rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.contains(&"first-order Hamiltonian"), "{failing:?}");
}
