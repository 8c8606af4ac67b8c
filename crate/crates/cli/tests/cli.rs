//! End-to-end tests driving the built `hoqmc` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hoqmc");

fn run_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.env_remove("HOQMC_MATRIX_DIR");
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn stdout_str(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

/// Data lines of a CSV output: everything after the comment and header.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn shipped_matrices() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/sobol_6d_32.txt")
        .display()
        .to_string()
}

fn temp_dir(tag: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("hoqmc-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&p).expect("temp dir");
    p
}

#[test]
fn builtin_van_der_corput_lists_all_four_points() {
    let text = stdout_str(&run(&["gen-points", "--method", "vdc", "--n", "2"]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# hoqmc gen-points method=vdc d=1 n=2 "));
    assert_eq!(lines[1], "dim,N,weighted");
    assert_eq!(lines[2], "1,4,0");
    let coords: Vec<f64> = lines[3..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(coords, vec![0.0, 0.5, 0.25, 0.75]);
}

#[test]
fn single_point_rule_has_variance_one_twelfth() {
    let text = stdout_str(&run(&["wce", "--method", "vdc", "--n", "0", "--r", "1"]));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][4], "1", "one point");
    let squared: f64 = rows[0][6].parse().unwrap();
    assert!((squared - 1.0 / 12.0).abs() < 1e-15, "got {squared}");
}

#[test]
fn fibonacci_row_reports_true_point_count() {
    let text =
        stdout_str(&run(&["wce", "--method", "fibonacci", "--d", "2", "--n", "5", "--r", "2"]));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "", "no dyadic exponent for a lattice");
    assert_eq!(rows[0][4], "5");
}

#[test]
fn order2_net_from_file_generates_the_full_grid() {
    let mats = shipped_matrices();
    let text = stdout_str(&run(&[
        "gen-points", "--method", "order2net", "--matrices", &mats, "--d", "2", "--n", "3",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[2], "2,8,0");
    assert_eq!(lines.len(), 3 + 8);
    for row in &lines[3..] {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 3);
        assert!(fields[..2].iter().all(|x| (0.0..1.0).contains(x)));
    }
}

#[test]
fn exact_mode_rejects_fractional_smoothness() {
    let out = run(&["wce", "--method", "vdc", "--n", "3", "--r", "3/2", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact"));
}

#[test]
fn bad_matrix_file_fails_without_partial_output() {
    let dir = temp_dir("badmat");
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "garbage\n1 2\n").unwrap();
    let target = dir.join("out.csv");
    let out = run(&[
        "wce", "--method", "order1net",
        "--matrices", bad.to_str().unwrap(),
        "--d", "1", "--n", "2",
        "--out", target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:1"));
    assert!(!target.exists(), "no partial output");
}

#[test]
fn single_cell_sweep_leaves_the_slope_empty() {
    let text =
        stdout_str(&run(&["convergence", "--method", "halton", "--d", "1", "--n", "5", "--r", "1"]));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][4], "32");
    assert_eq!(rows[0][6], "", "slope column stays empty for one cell");
}

#[test]
fn identity_net_verifies_to_t_zero() {
    let text = stdout_str(&run(&["verify", "--method", "vdc", "--n", "4", "--sigma", "1"]));
    let rows = data_rows(&text);
    assert_eq!(rows[0][..5], ["vdc", "1", "4", "1", "0"].map(String::from));
}

#[test]
fn haar_profile_of_the_trivial_net_starts_at_one_quarter() {
    let text = stdout_str(&run(&["haar", "--method", "vdc", "--n", "0"]));
    let rows = data_rows(&text);
    assert_eq!(rows[0][0], "0");
    let mu: f64 = rows[0][1].parse().unwrap();
    assert_eq!(mu, 0.25);
}

#[test]
fn matrix_directory_env_var_supplies_the_default_file() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let out = run_env(
        &["verify", "--method", "order1net", "--d", "1", "--n", "4", "--sigma", "1"],
        &[("HOQMC_MATRIX_DIR", dir.to_str().unwrap())],
    );
    let text = stdout_str(&out);
    assert!(text.lines().next().unwrap().contains("matrices="));
    let rows = data_rows(&text);
    assert_eq!(rows[0][0], "order1net");
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = temp_dir("config");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "method = \"fibonacci\"\nd = 2\nn = \"5\"\nr = \"2\"\n").unwrap();

    let from_file = stdout_str(&run(&["wce", "--config", cfg.to_str().unwrap()]));
    assert_eq!(data_rows(&from_file)[0][4], "5");

    let overridden = stdout_str(&run(&["wce", "--config", cfg.to_str().unwrap(), "--n", "6"]));
    assert_eq!(data_rows(&overridden)[0][4], "8");
}

#[test]
fn unknown_config_key_is_a_format_error() {
    let dir = temp_dir("badkey");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "methd = \"halton\"\n").unwrap();
    let out = run(&["wce", "--config", cfg.to_str().unwrap(), "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("methd"));
}

#[test]
fn fibonacci_cap_exits_with_capacity_code() {
    let out = run(&["wce", "--method", "fibonacci", "--d", "2", "--n", "41", "--r", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

/// Same configuration, same bytes — modulo the wall-clock seconds column.
#[test]
fn reruns_are_byte_identical() {
    let args = ["gen-points", "--method", "halton", "--d", "2", "--n", "4"];
    assert_eq!(run(&args).stdout, run(&args).stdout);

    let mask_seconds = |text: String| -> String {
        text.lines()
            .map(|l| {
                if l.starts_with('#') || l.starts_with("method") {
                    l.to_string()
                } else {
                    l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default()
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let args =
        ["wce", "--method", "halton,fibonacci", "--d", "2", "--n", "4..6", "--r", "2", "--seed", "7"];
    let a = mask_seconds(stdout_str(&run(&args)));
    let b = mask_seconds(stdout_str(&run(&args)));
    assert!(!a.is_empty() && a == b);
}

#[test]
fn convergence_writes_plot_series_beside_the_csv() {
    let dir = temp_dir("plots");
    let csv = dir.join("sweep.csv");
    let out = run(&[
        "convergence", "--method", "vdc,halton", "--n", "3..6", "--r", "1",
        "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(data_rows(&csv_text).len(), 8, "two methods, four cells each");
    for method in ["vdc", "halton"] {
        let dat = dir.join(format!("sweep.{method}.dat"));
        let text = std::fs::read_to_string(&dat).unwrap();
        let points: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(points.len(), 4);
        assert!(points.iter().all(|l| l.split(' ').count() == 2), "two columns per line");
    }
}
