use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use giantatom::dynamics::estimate_inversion_time;
use tempfile::TempDir;

fn simulate(config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { header, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).expect("column present");
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }

    fn raw(&self, name: &str) -> Vec<String> {
        let i = self.header.iter().position(|h| h == name).expect("column present");
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

fn summary(path: &Path) -> HashMap<String, String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn value(s: &HashMap<String, String>, key: &str) -> f64 {
    s[key].parse().unwrap()
}

#[test]
fn unknown_key_is_rejected_without_output() {
    let dir = TempDir::new().unwrap();
    let out = simulate("scenario = fig1c\ncircuit.omega_zero_ghz = 5\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("circuit.omega_zero_ghz"), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_value_is_rejected_without_output() {
    for (text, key) in [
        ("drive1.phi_d_rad = nan", "drive1.phi_d_rad"),
        ("circuit.g1_ghz = 80MHz", "circuit.g1_ghz"),
        ("sweep.delta_phi_rad = 0, pi/0", "sweep.delta_phi_rad"),
        ("grid.t_end_ns = -1", "grid.t_end_ns"),
    ] {
        let dir = TempDir::new().unwrap();
        let out = simulate(text, dir.path(), &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(key), "{text}: {}", stderr(&out));
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn missing_config_and_bad_flags_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(["--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = simulate("", dir.path(), &["--frame", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_with_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let out = simulate("frame = lab\ngrid.dt_ns = 0.2\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"), "{}", stderr(&out));
}

#[test]
fn fig1c_files_follow_schema_and_summaries_match_csv() {
    let dir = TempDir::new().unwrap();
    let out = simulate("scenario = fig1c\n", dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let base = dir.path().join("out");
    for case in ["out_of_phase", "in_phase", "single_drive"] {
        let csv_path = base.join(format!("fig1c_{case}.csv"));
        let text = fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with(
            "t_ns,pe_exact,pe_eff,n_r1,n_r2,re_coh_r1,im_coh_r1,re_coh_r2,im_coh_r2,norm_err\n"
        ));
        let csv = Csv::read(&csv_path);
        assert!(csv.rows.len() >= 600);
        assert!(csv.raw("pe_exact").iter().all(|v| v.contains('e')));

        let s = summary(&base.join(format!("fig1c_{case}.summary")));
        let t = csv.column("t_ns");
        let pe = csv.column("pe_exact");
        let pe_max = pe.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((value(&s, "pe_max") - pe_max).abs() <= 1e-8 * pe_max.max(1e-12));
        match estimate_inversion_time(&t, &pe, 0.5) {
            Some(tau) => assert!((value(&s, "tau_e_ns") - tau).abs() < 1e-6, "{case}"),
            None => assert_eq!(s["tau_e_ns"], "", "{case}"),
        }
        for (k, col) in ["n_r1", "n_r2"].iter().enumerate() {
            let n = csv.column(col);
            let tail: Vec<f64> =
                t.iter().zip(&n).filter(|(t, _)| **t >= 5.0).map(|(_, n)| *n).collect();
            let mean = tail.iter().sum::<f64>() / tail.len() as f64;
            let key = format!("n_r{}_mean", k + 1);
            assert!((value(&s, &key) - mean).abs() <= 1e-7 * mean.max(1e-9), "{case} {key}");
        }
        let norm = csv.column("norm_err").into_iter().fold(0.0, f64::max);
        assert!((value(&s, "norm_err_max") - norm).abs() <= 1e-8 * norm.max(1e-20));
    }
    let s = summary(&base.join("fig1c_in_phase.summary"));
    assert!(value(&s, "pe_max") < 0.05);
    let s = summary(&base.join("fig1c_out_of_phase.summary"));
    let tau = value(&s, "tau_e_ns");
    assert!((29.7..=32.8).contains(&tau), "{tau}");
}

#[test]
fn reruns_are_bit_identical() {
    for scenario in ["fig1c", "converge", "phase-sweep"] {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        let text = format!("scenario = {scenario}\n");
        assert!(simulate(&text, a.path(), &[]).status.success());
        assert!(simulate(&text, b.path(), &[]).status.success());
        let mut names: Vec<_> =
            fs::read_dir(a.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let x = fs::read(a.path().join("out").join(&name)).unwrap();
            let y = fs::read(b.path().join("out").join(&name)).unwrap();
            assert_eq!(x, y, "{scenario}: {name:?} differs");
        }
    }
}

#[test]
fn phase_sweep_rows() {
    let dir = TempDir::new().unwrap();
    let out = simulate("scenario = phase-sweep\n", dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = Csv::read(&dir.path().join("out/phase_sweep.csv"));
    assert_eq!(csv.header, ["delta_phi", "pe_max", "tau_e_ns", "omega_res_eff"]);
    assert_eq!(csv.rows.len(), 5);
    let pe = csv.column("pe_max");
    let tau = csv.raw("tau_e_ns");
    assert!(pe[0] < 0.05);
    assert_eq!(tau[0], "");
    assert_eq!(csv.raw("omega_res_eff")[0], "");
    assert!(pe[4] >= 0.95);
    // inverted rows saturate near 0.9968 and differ only at the 1e-5 level
    for w in pe.windows(2) {
        assert!(w[1] >= w[0] - 1e-4, "{pe:?}");
    }
    assert!(tau[1..].iter().all(|t| !t.is_empty()));
}

#[test]
fn geometry_map_cells() {
    let dir = TempDir::new().unwrap();
    let out = simulate("scenario = fig1c\n", dir.path(), &["--scenario", "geometry-map"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = Csv::read(&dir.path().join("out/geometry_map.csv"));
    assert_eq!(csv.header, ["path_diff_over_lambda", "beta_over_alpha", "e_res", "class"]);
    assert_eq!(csv.rows.len(), 41 * 41);
    let x = csv.column("path_diff_over_lambda");
    let b = csv.column("beta_over_alpha");
    let e = csv.column("e_res");
    let class = csv.raw("class");
    let find = |px: f64, pb: f64| {
        (0..x.len()).find(|&i| (x[i] - px).abs() < 1e-12 && (b[i] - pb).abs() < 1e-12).unwrap()
    };
    let i = find(1.0, 1.0);
    assert!((e[i] - 2.0).abs() < 1e-9);
    assert_eq!(class[i], "constructive");
    let i = find(1.0, -1.0);
    assert!(e[i] < 1e-9);
    assert_eq!(class[i], "destructive");
    assert!(e[find(0.5, 1.0)] < 1e-9);
    assert_eq!(x.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 2.0);
}

#[test]
fn dark_state_summaries() {
    let dir = TempDir::new().unwrap();
    let out = simulate("scenario = dark-state\n", dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let base = dir.path().join("out");
    let csv = Csv::read(&base.join("dark_state_dark.csv"));
    assert_eq!(csv.header, ["t_ns", "pe", "n_a", "n_b", "n_col", "norm_err"]);
    let dark = summary(&base.join("dark_state_dark.summary"));
    let bright = summary(&base.join("dark_state_bright.summary"));
    assert!(value(&dark, "pe_max") < 1e-4);
    assert!(value(&dark, "n_col_initial") < 1e-4);
    assert!((value(&dark, "n_total_min") - 0.5).abs() < 1e-3);
    assert!((value(&dark, "n_total_max") - 0.5).abs() < 1e-3);
    assert!(value(&bright, "pe_max") > 0.1);
}

#[test]
fn converge_reports_pass() {
    let dir = TempDir::new().unwrap();
    let out = simulate("scenario = converge\n", dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let s = summary(&dir.path().join("out/converge.summary"));
    assert_eq!(s["passed"], "true");
    assert!(value(&s, "dt_ratio_1") >= 12.0);
    assert!(value(&s, "dt_ratio_2") >= 12.0);
    assert!(value(&s, "truncation_max_dpe") < 1e-4);
    let csv = Csv::read(&dir.path().join("out/converge.csv"));
    assert_eq!(csv.header, ["study", "resonator_levels", "dt_ns", "max_abs_dpe"]);
    assert_eq!(csv.rows.len(), 8);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = fs::read_to_string(&path).unwrap();
            giantatom_cli::load_config(&text, &Default::default())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 5);
}
