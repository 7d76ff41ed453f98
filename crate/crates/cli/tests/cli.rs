use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stricttest_core::bubbles::{cev_region, RegionLabel};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stricttest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stricttest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Copy of a bundled config with one parameter re-bound.
fn with_param(dir: &tempfile::TempDir, name: &str, param: &str, value: f64) -> String {
    let text = std::fs::read_to_string(configs().join(name)).unwrap();
    let text: String = text
        .lines()
        .map(|l| {
            if l.starts_with(&format!("param {param} ")) {
                format!("param {param} = {value}\n")
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let path = dir.path().join(format!("{param}_{value}_{name}"));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn classify_ui_case_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = stricttest(&[
        "classify",
        &with_param(&dir, "power_drift.cfg", "alpha", 4.0),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("verdict: UniformlyIntegrableMartingale"),
        "{out}"
    );
    assert!(
        out.contains("uniformly integrable: yes ((B))"),
        "verdict lines cite conditions: {out}"
    );
}

#[test]
fn classify_strict_local_cites_failed_pair() {
    let o = stricttest(&["classify", &config("power_drift.cfg")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("verdict: StrictLocalMartingale"));
    assert!(out.contains("right: none of (a), (b)"), "{out}");
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.cfg");
    std::fs::write(
        &path,
        "interval = (0, inf)\nx0 = 1\nmu = x +* 2\nsigma = 1\n",
    )
    .unwrap();
    let o = stricttest(&["classify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = stricttest(&["classify", "/nonexistent/config.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = stricttest(&["classify"]);
    assert_eq!(o.status.code(), Some(1), "usage errors are input errors");
}

#[test]
fn inconclusive_probes_exit_two() {
    let o = stricttest(&["classify", &config("inconclusive.cfg")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("verdict: Unknown"));
}

#[test]
fn bad_flags_exit_one() {
    let o = stricttest(&["classify", &config("power_drift.cfg"), "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = stricttest(&[
        "simulate",
        &config("power_drift.cfg"),
        "--truncation",
        "5,1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn power_drift_sweep_splits_at_one_and_three() {
    let o = stricttest(&[
        "sweep",
        &config("power_drift.cfg"),
        "--grid",
        "alpha=-0.5,0,0.5,1,1.5,2,3,3.5,4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let want = "alpha,verdict\n\
                -0.5,MartingaleNotUI\n0,MartingaleNotUI\n0.5,MartingaleNotUI\n1,MartingaleNotUI\n\
                1.5,StrictLocalMartingale\n2,StrictLocalMartingale\n3,StrictLocalMartingale\n\
                3.5,UniformlyIntegrableMartingale\n4,UniformlyIntegrableMartingale\n";
    assert_eq!(stdout(&o), want);
}

#[test]
fn cev_sweep_matches_region_map_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "sweep".to_string(),
            config("cev.cfg"),
            "--grid".into(),
            "alpha=-2:2:0.2".into(),
            "--grid".into(),
            "beta=-2:2:0.2".into(),
            "--out".into(),
            out.to_string_lossy().into_owned(),
        ]
    };
    let run = |out: &Path, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_stricttest"))
            .args(args(out))
            .env("STRICTTEST_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run(&a, "1").status.code(), Some(0));
    assert_eq!(run(&b, "4").status.code(), Some(0));
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 441);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        let (alpha, beta): (f64, f64) = (cells[0].parse().unwrap(), cells[1].parse().unwrap());
        let want = match cev_region(alpha, beta) {
            RegionLabel::UI => "UniformlyIntegrableMartingale",
            RegionLabel::StrictLocal => "StrictLocalMartingale",
            RegionLabel::MartingaleNotUI => "MartingaleNotUI",
        };
        assert_eq!(cells[2], want, "alpha={alpha} beta={beta}");
    }
}

#[test]
fn sweep_input_errors() {
    let o = stricttest(&[
        "sweep",
        &config("power_drift.cfg"),
        "--grid",
        "alpha=2:1:0.5",
    ]);
    assert_eq!(o.status.code(), Some(1), "empty grid");
    let o = stricttest(&["sweep", &config("power_drift.cfg"), "--grid", "gamma=1,2"]);
    assert_eq!(o.status.code(), Some(1), "unknown parameter");
    let o = stricttest(&["sweep", &config("power_drift.cfg"), "--grid", "alpha=1;2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bubble_cev_alpha_two_is_type_three() {
    let o = stricttest(&["bubble", &config("cev_price.cfg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("verdict: type 3 bubble"),
        "{}",
        stdout(&o)
    );
    let dir = tempfile::tempdir().unwrap();
    let driftless = with_param(&dir, "cev_price.cfg", "mu0", 0.0);
    let out = stdout(&stricttest(&["bubble", &driftless]));
    assert!(out.contains("driftless dichotomy: type 3 bubble"), "{out}");
    assert!(out.contains("agrees"));
}

#[test]
fn arrangement_reports() {
    let o = stricttest(&["arrangement", &config("identical_pair.cfg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: P~ ∼ P"));
    for pair in ["bm_drift_pair.cfg", "bm_ou_pair.cfg"] {
        let out = stdout(&stricttest(&["arrangement", &config(pair)]));
        assert!(out.contains("P~ loc~ P      yes"), "{pair}: {out}");
        assert!(out.contains("P~ ~ P         no"), "{pair}: {out}");
    }
}

#[test]
fn simulate_both_estimators_and_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |prefix: &str| {
        stricttest(&[
            "simulate",
            &config("power_drift.cfg"),
            "--estimator",
            "both",
            "--paths",
            "2000",
            "--step",
            "0.01",
            "--seed",
            "11",
            "--out",
            dir.path().join(prefix).to_str().unwrap(),
        ])
    };
    let o = run("first");
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    assert!(out.contains("E Z_T (direct)"));
    assert!(out.contains("P~(S > T) (auxiliary)"));
    assert!(out.contains("estimators agree within 3 SE:"));
    assert_eq!(run("second").status.code(), Some(0));
    for kind in ["direct", "auxiliary"] {
        let a = std::fs::read(dir.path().join(format!("first.{kind}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("second.{kind}.csv"))).unwrap();
        assert_eq!(a, b, "{kind} CSV differs between runs");
    }
    let direct = std::fs::read_to_string(dir.path().join("first.direct.csv")).unwrap();
    assert!(direct.starts_with("path_id,absorbed_at,t_absorbed,Z_T\n"));
    assert_eq!(direct.lines().count(), 2001);
}

#[test]
fn simulate_refuses_without_goodness() {
    let o = stricttest(&[
        "simulate",
        &config("inconclusive.cfg"),
        "--paths",
        "10",
        "--step",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("refused"));
}
