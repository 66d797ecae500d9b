use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use sobolev_bvp_cli::config::{parse_config, serialize, EpsilonSpec, ExperimentConfig};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn corpus_configs() -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(corpus()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        if name.starts_with("invalid_") {
            continue;
        }
        let cfg = parse_config(&fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        out.push((name, cfg));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn run(command: &str, config: &str, extra: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_sobolev-bvp"))
        .arg(command)
        .arg("--config")
        .arg(corpus().join(format!("{config}.json")))
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

/// Rows of a CSV file as (header, records).
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().map(|l| l.split(',').map(str::to_owned).collect::<Vec<_>>());
    let header = lines.next().unwrap();
    (header, lines.collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn solve_constant_solution() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve", "solve_constant", &[], dir.path()), 0);
    let (header, rows) = csv(&dir.path().join("solve.csv"));
    let (re, im) = (column(&header, "y1_re"), column(&header, "y1_im"));
    assert_eq!(rows.len(), 2001);
    for row in rows {
        let (y, z): (f64, f64) = (row[re].parse().unwrap(), row[im].parse().unwrap());
        assert!((y - 1.0).abs() <= 1e-12 && z.abs() <= 1e-12);
    }
}

#[test]
fn resonance_is_singular() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("condition0", "condition0_resonant", &[], dir.path()), 1);
    let (header, rows) = csv(&dir.path().join("condition0.csv"));
    assert_eq!(rows[0][column(&header, "condition0")], "singular");

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve", "solve_resonant", &[], dir.path()), 1);
    let (header, rows) = csv(&dir.path().join("solve_summary.csv"));
    assert_eq!(rows[0][column(&header, "residual_l")], "undef");
}

#[test]
fn estimate_rate_near_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("estimate", "estimate_decay", &[], dir.path()), 0);
    let (header, rows) = csv(&dir.path().join("estimate_summary.csv"));
    let rate: f64 = rows[0][column(&header, "fitted_rate")].parse().unwrap();
    assert!((0.9..=1.1).contains(&rate), "rate {rate}");
}

#[test]
fn passing_continuity_errors_decrease() {
    for name in ["continuity_pass_decay", "continuity_pass_oscillator", "continuity_pass_canonical"] {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run("continuity", name, &[], dir.path()), 0, "{name}");
        let (header, rows) = csv(&dir.path().join("continuity.csv"));
        let (series, value) = (column(&header, "series"), column(&header, "value"));
        let errors: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == "experiment" && r[series] == "error")
            .map(|r| r[value].parse().unwrap())
            .collect();
        assert!(errors.len() >= 4);
        let tail = &errors[errors.len() - 4..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0]), "{name}: {tail:?}");
    }
}

#[test]
fn odd_grid_override_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve", "solve_constant", &["--grid", "101"], dir.path()), 2);
    assert_eq!(run("solve", "solve_constant", &["--grid", "100"], dir.path()), 0);
}

#[test]
fn manifest_lists_written_files() {
    let cases = [
        ("solve", "solve_decay", vec!["solve.csv", "solve_summary.csv"]),
        ("condition0", "condition0_shifted", vec!["condition0.csv"]),
        ("estimate", "estimate_decay", vec!["estimate.csv", "estimate_summary.csv"]),
        ("multipoint-check", "multipoint_d5_wandering", vec!["multipoint.csv", "multipoint_summary.csv"]),
    ];
    for (command, config, expected) in cases {
        let dir = tempfile::tempdir().unwrap();
        run(command, config, &[], dir.path());
        let manifest = fs::read_to_string(dir.path().join("MANIFEST")).unwrap();
        let listed: Vec<&str> = manifest.lines().collect();
        for file in &expected {
            assert!(listed.contains(file), "{config}: {listed:?}");
        }
        for file in &listed {
            assert!(dir.path().join(file).is_file(), "{config}: missing {file}");
        }
    }
}

#[test]
fn corpus_round_trips() {
    for (name, cfg) in corpus_configs() {
        let again = parse_config(&serialize(&cfg)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(again, cfg, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbed_configs_round_trip(
        pick in 0usize..27,
        half in 1usize..5000,
        p in 1.0..6.0f64,
        eps in 0.0..1.0f64,
        trend in 1e-6..1.0f64,
        start in 1e-3..1.0f64,
        ratio in 0.05..0.95f64,
        steps in 2usize..20,
    ) {
        let configs = corpus_configs();
        let mut cfg = configs[pick % configs.len()].1.clone();
        cfg.grid.n = 2 * half;
        cfg.space.p = p;
        cfg.eps = eps;
        cfg.tolerances.trend = trend;
        cfg.epsilon = Some(EpsilonSpec { start: Some(start), ratio: Some(ratio), steps: Some(steps), values: None });
        let again = parse_config(&serialize(&cfg));
        prop_assert_eq!(again, Ok(cfg));
    }
}
