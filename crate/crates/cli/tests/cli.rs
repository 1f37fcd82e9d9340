use std::process::{Command, Output};

use xyquench::quench::sweep_final_field;
use xyquench::spectral::equilibrium_observables;
use xyquench::{ModelParams, MomentumGrid};

fn xyq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyq"))
        .args(args)
        .env_remove("XYQ_THREADS")
        .output()
        .expect("binary runs")
}

fn records(stdout: &[u8]) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (comment, header, rows)
}

fn close(text: &str, value: f64) -> bool {
    let parsed: f64 = text.parse().unwrap();
    (parsed - value).abs() <= 1e-11 * value.abs().max(1e-300)
}

#[test]
fn equilibrium_rows_and_values() {
    let out = xyq(&["equilibrium", "--delta", "1.0", "--h-range", "0:2:0.01", "--m", "512"]);
    assert!(out.status.success());
    let (comment, header, rows) = records(&out.stdout);
    assert!(comment.starts_with("# xyq equilibrium"));
    assert_eq!(header, ["h", "delta", "m_z", "s_xx"]);
    assert_eq!(rows.len(), 201);
    let grid = MomentumGrid::midpoint(512).unwrap();
    for row in rows.iter().step_by(37) {
        let h: f64 = row[0].parse().unwrap();
        let o = equilibrium_observables(ModelParams::new(1.0, h).unwrap(), &grid).unwrap();
        assert!(close(&row[2], o.mz) && close(&row[3], o.sxx), "{row:?}");
    }
}

#[test]
fn single_sweep_round_trips() {
    let out = xyq(&["single-sweep", "--h-i", "0.2", "--h-f1-range", "0.1:2:0.1", "--m", "1024"]);
    assert!(out.status.success());
    let (_, header, rows) = records(&out.stdout);
    assert_eq!(
        header,
        ["h_f1", "mz_bar", "mz_eq", "sxx_bar", "sxx_eq", "dev_mz", "dev_sxx", "ergodic_mz", "ergodic_sxx"]
    );
    let fields: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let reports = sweep_final_field(1.0, 0.2, &fields, &MomentumGrid::midpoint(1024).unwrap(), 0.01).unwrap();
    assert_eq!(rows.len(), 20);
    for (row, r) in rows.iter().zip(&reports) {
        assert!(close(&row[1], r.long_time.mz));
        assert!(close(&row[5], r.deviation_mz));
        assert_eq!(row[7], r.is_ergodic_mz.to_string());
    }
}

#[test]
fn output_independent_of_thread_count() {
    let args = ["cyclic-sweep", "--h-i", "0.5", "--h-f1", "4.0", "--dwell-range", "0:3:0.25", "--m", "512"];
    let one = xyq(&[&args[..], &["--threads", "1"]].concat());
    let many = xyq(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    let again = xyq(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(one.stdout, again.stdout);
}

#[test]
fn writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c0.csv");
    let out = xyq(&["c0", "--h-i", "0.5", "--h-f1-range", "0:1:0.25", "--n", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let (_, header, rows) = records(&std::fs::read(&path).unwrap());
    assert_eq!(header, ["h_f1", "c0", "log_c0"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn oracle_check_passes() {
    let out = xyq(&["oracle-check", "--n", "8", "--delta", "1.0", "--h-i", "0.5", "--h-f1", "2.0", "--t", "0:10:201"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, header, rows) = records(&out.stdout);
    assert_eq!(header, ["t", "source", "m_z", "s_xx"]);
    assert_eq!(rows.len(), 402);
    assert!(String::from_utf8_lossy(&out.stderr).contains("max |formula - oracle|"));

    let cyclic = xyq(&[
        "oracle-check", "--n", "8", "--h-i", "0.5", "--h-f1", "2.0", "--dwell", "3", "--h-f2", "0.5", "--t", "3:13:201",
    ]);
    assert_eq!(cyclic.status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_two_and_name_the_flag() {
    let cases: [(&[&str], &str); 5] = [
        (&["equilibrium", "--h-range", "0:2"], "--h-range"),
        (&["single-sweep", "--h-i", "0.5", "--threshold", "-1"], "--threshold"),
        (&["c0", "--h-i", "0.5", "--n", "7"], "--n"),
        (&["oracle-check", "--h-i", "0.5", "--h-f1", "1", "--n", "20"], "--n"),
        (&["cyclic-series", "--h-i", "0.5", "--h-f1", "1", "--dwell", "3", "--t", "0:5:3", "--m", "64"], "--t"),
    ];
    for (args, flag) in cases {
        let out = xyq(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(flag), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = xyq(&["modes", "--h-i", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
