use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BASE: &str = r#"
seed = 5

[medium]
c = 1.0
velocity = 0.2
oscillators = [{ chi = 0.5, omega0 = 1.0, g = G }]

[perturbation]
kind = "gaussian"
amplitude = 0.05
width = 0.25

[grid]
sites = 8
dim = 1
spacing = 1.0

[scan]
k = { start = 0.2, stop = 2.0, count = 5 }
omega_prime = { start = 0.4, stop = 0.5, count = 2 }

[scattering]
velocity = U

[output]
format = "csv"
path = "unused"
threads = 2
"#;

fn config(dir: &Path, g: f64, u: f64) -> PathBuf {
    let text = BASE
        .replace("G", &g.to_string())
        .replace("U", &u.to_string());
    let p = dir.join(format!("run_{g}_{u}.toml"));
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopfield"))
        .args(args)
        .arg(cfg)
        .env("HOPFIELD_OUTPUT_DIR", out)
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (comment, header, rows)
}

#[test]
fn validate_passes_on_the_shipped_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let out = run(&["validate"], &cfg, tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
    assert!(tmp.path().join("validate.json").exists());
}

#[test]
fn uncoupled_dispersion_is_the_light_cone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), 0.0, -0.3);
    let out = run(&["dispersion"], &cfg, tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (comment, header, rows) = csv_rows(&tmp.path().join("dispersion.csv"));
    assert!(comment.starts_with("# config_hash="));
    assert!(comment.contains("delta_convention="));
    assert_eq!(header, ["k", "branch", "omega", "residual"]);
    let mut em = 0;
    for r in rows {
        let (k, w): (f64, f64) = (r[0].parse().unwrap(), r[2].parse().unwrap());
        if r[1] == "em" {
            em += 1;
            assert_eq!(w, k);
        } else {
            assert_eq!(w, 1.0);
        }
    }
    assert_eq!(em, 5);
}

#[test]
fn constraints_report_is_json_with_small_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), 0.3, -0.3);
    let out = run(&["constraints"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("constraints.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["config_hash"].as_str().unwrap().len(), 64);
    let r = &doc["report"];
    assert!(r["dirac_table"]["max_residual"].as_f64().unwrap() < 1e-12);
    assert!(r["chain"]["max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn sweep_writes_bogoliubov_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), 0.3, -0.3);
    let out = run(&["sweep"], &cfg, tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, header, rows) = csv_rows(&tmp.path().join("sweep.csv"));
    assert_eq!(header[0], "omega_prime");
    assert_eq!(header.last().unwrap(), "flux_drift");
    assert!(!rows.is_empty());
    let omegas: std::collections::BTreeSet<String> = rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(omegas.len(), 2);
}

#[test]
fn runs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), 0.3, -0.3);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for cmd in ["dispersion", "norms", "sweep", "diagonalize"] {
        assert_eq!(run(&[cmd], &cfg, &a).status.code(), Some(0));
        assert_eq!(run(&[cmd], &cfg, &b).status.code(), Some(0));
    }
    for f in [
        "dispersion.csv",
        "norms.csv",
        "sweep.csv",
        "diagonalize.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn natural_units_rescale_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let text = BASE
        .replace("G", "0.0")
        .replace("U", "-0.3")
        .replace("c = 1.0", "c = 2.0");
    let cfg = tmp.path().join("c2.toml");
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(
        run(&["--natural-units", "dispersion"], &cfg, tmp.path())
            .status
            .code(),
        Some(0)
    );
    let (_, _, rows) = csv_rows(&tmp.path().join("dispersion.csv"));
    for r in rows.iter().filter(|r| r[1] == "em") {
        let (k, w): (f64, f64) = (r[0].parse().unwrap(), r[2].parse().unwrap());
        assert!((w - k).abs() < 1e-15 * k.max(1.0));
    }
}

#[test]
fn bad_config_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[medium]\noscillators = []\n[scan]\nk = 3\n").unwrap();
    let out = run(&["dispersion"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ConfigError"));
    let missing = run(&["dispersion"], &tmp.path().join("nope.toml"), tmp.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), 0.3, 0.0);
    let out = run(&["scatter"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("NumericalFailure: InvalidMedium"));
}
