use std::fs;
use std::process::{Command, Output};

use mmlink_cli::plot::extract_series;

fn mmlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmlink"))
        .args(args)
        .env_remove("MMLINK_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/table1.toml");

#[test]
fn pilots_dump_rows() {
    let o = mmlink(&["pilots", "dump", "--m-tx", "8", "--k-p", "2", "--n", "16"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("antenna,direction,symbol,subcarrier"));
    assert_eq!(text.lines().filter(|l| l.contains(",forward,")).count(), 32);
    assert_eq!(text.lines().filter(|l| l.contains(",reverse,")).count(), 32);

    let o = mmlink(&["pilots", "dump", "--m-tx", "8", "--k-p", "1", "--n", "16"]);
    assert!(stdout(&o)
        .lines()
        .filter(|l| l.contains(",forward,"))
        .all(|l| l.split(',').nth(2) == Some("1")));

    let o = mmlink(&["pilots", "dump", "--m-tx", "8", "--k-p", "3", "--n", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("K_P"));
}

#[test]
fn run_single_point_from_config() {
    let o = mmlink(&[
        "run",
        "--config",
        CONFIG,
        "--set",
        "velocity_kmh=0",
        "--set",
        "method=perfect",
        "--set",
        "n_realizations=2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "k_factor_db,velocity_kmh,snr_db,pilot_k_p,method,se_mean,se_stderr,n_realizations"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains(",perfect,"));
    assert!(lines[1].ends_with(",2"));
}

#[test]
fn invalid_pattern_exits_2_and_names_the_invariant() {
    let o = mmlink(&["run", "--config", CONFIG, "--set", "pilot_k_p=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("K_P must"), "{}", stderr(&o));
    let o = mmlink(&["validate", "--preset", "fig3a", "--set", "k_p=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_exits_1() {
    let o = mmlink(&["run", "--config", "/definitely/not/here.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "k_factor_sub6_db = [").unwrap();
    let o = mmlink(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_preset_validates() {
    for p in ["fig2a", "fig2b", "fig3a", "fig3b", "table1-smoke"] {
        let o = mmlink(&["validate", "--preset", p]);
        assert!(o.status.success(), "{p}: {}", stderr(&o));
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let a = mmlink(&["run", "--preset", "table1-smoke", "--workers", "1", "--seed", "7"]);
    let b = mmlink(&["run", "--preset", "table1-smoke", "--workers", "3", "--seed", "7"]);
    let c = Command::new(env!("CARGO_BIN_EXE_mmlink"))
        .args(["run", "--preset", "table1-smoke", "--seed", "7"])
        .env("MMLINK_WORKERS", "2")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(stdout(&a).lines().count(), 4);
}

fn fig3_style_csv() -> String {
    let mut s = String::from("k_factor_db,velocity_kmh,snr_db,pilot_k_p,method,se_mean,se_stderr,n_realizations\n");
    for v in [0, 50, 100, 150, 200] {
        for k_p in [1, 2, 4] {
            for (i, m) in ["conventional", "ooba-mrc", "perfect"].iter().enumerate() {
                let se = if *m == "perfect" {
                    8.0 + k_p as f64 * 0.01
                } else {
                    6.0 - v as f64 / 100.0 * k_p as f64 + i as f64 * 0.5
                };
                s.push_str(&format!("20,{v},0,{k_p},{m},{se},0.01,300\n"));
            }
        }
    }
    s
}

#[test]
fn plot_series_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3.csv");
    fs::write(&csv, fig3_style_csv()).unwrap();
    let svg_path = dir.path().join("fig3.svg");
    let o = mmlink(&["plot", "--input", csv.to_str().unwrap(), "--out", svg_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("width=\"800\" height=\"500\""));
    assert_eq!(svg.matches("<polyline").count(), 7);
    assert!(svg.contains("<!-- x-column: velocity_kmh -->"));

    let series = extract_series(&svg);
    assert_eq!(series.len(), 7);
    let conv2 = series.iter().find(|(l, _)| l == "conventional K_P=2").unwrap();
    let want: Vec<(String, String)> = [0, 50, 100, 150, 200]
        .iter()
        .map(|v| (v.to_string(), (6.0 - *v as f64 / 100.0 * 2.0).to_string()))
        .collect();
    assert_eq!(conv2.1, want);
    // perfect CSI merged across patterns: mean of 8.01, 8.02, 8.04
    let perfect = series.iter().find(|(l, _)| l == "perfect CSI").unwrap();
    assert!(perfect.1.iter().all(|(_, y)| y == "8.02333"), "{:?}", perfect.1);

    let again = mmlink(&["plot", "--input", csv.to_str().unwrap()]);
    assert_eq!(again.stdout, svg.as_bytes());
}

#[test]
fn plot_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(
        &empty,
        "k_factor_db,velocity_kmh,snr_db,pilot_k_p,method,se_mean,se_stderr,n_realizations\n",
    )
    .unwrap();
    assert_eq!(mmlink(&["plot", "--input", empty.to_str().unwrap()]).status.code(), Some(1));

    let csv = dir.path().join("ok.csv");
    fs::write(&csv, fig3_style_csv()).unwrap();
    let o = mmlink(&["plot", "--input", csv.to_str().unwrap(), "--x", "doppler"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown column"));

    assert_eq!(mmlink(&["plot", "--input", "/no/such.csv"]).status.code(), Some(1));
}
