use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-secrecy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows as field vectors, header checked and dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(ris_secrecy::cli::CSV_HEADER));
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn value(row: &[String]) -> f64 {
    row[10].parse().unwrap()
}

#[test]
fn metrics_default_point_is_one_row() {
    let out = stdout(&[
        "metrics",
        "--design",
        "coherent",
        "--L",
        "16",
        "--gammaB-db",
        "20",
        "--gammaE-db",
        "-20",
        "--rt",
        "0.8",
        "--metric",
        "sop",
        "--method",
        "closed",
    ]);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(
        &r[0][..10],
        [
            "coherent",
            "16",
            "3.7",
            "0.1",
            "1",
            "20",
            "-20",
            "0.8",
            "sop",
            "closed-form"
        ]
    );
    assert!((value(&r[0]) - 0.004252413748).abs() < 1e-11);
}

#[test]
fn zero_rate_rows_complement() {
    for design in ["coherent", "discrete"] {
        let r = rows(&stdout(&[
            "metrics", "--design", design, "--rt", "0", "--metric", "sop,pnz",
        ]));
        assert_eq!(r.len(), 2);
        assert!((value(&r[0]) + value(&r[1]) - 1.0).abs() < 1e-9, "{design}");
    }
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# shared settings\nL = 4\ngammaB-db = 10\nmetric = pnz\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let r = rows(&stdout(&["metrics", "--config", cfg]));
    assert_eq!(
        (r[0][1].as_str(), r[0][5].as_str(), r[0][8].as_str()),
        ("4", "10", "pnz")
    );
    let r = rows(&stdout(&["metrics", "--config", cfg, "--L", "8"]));
    assert_eq!((r[0][1].as_str(), r[0][5].as_str()), ("8", "10"));
}

#[test]
fn unknown_config_key_and_bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        run(&["metrics", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["metrics", "--rt", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["metrics", "--design", "ideal"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["sweep", "--axis", "q"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_same_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let args = [
        "metrics",
        "--metric",
        "sop,sop_lower,pnz",
        "--method",
        "closed,quad",
    ];
    let printed = stdout(&args);
    let o = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}

#[test]
fn single_step_sweep_equals_metrics() {
    let sweep = stdout(&[
        "sweep",
        "--axis",
        "gammaB-db",
        "--from",
        "10",
        "--to",
        "10",
        "--steps",
        "1",
    ]);
    let metrics = stdout(&["metrics", "--gammaB-db", "10"]);
    assert_eq!(sweep, metrics);
}

#[test]
fn sop_falls_with_bob_snr() {
    let out = stdout(&[
        "sweep",
        "--axis",
        "gammaB-db",
        "--from",
        "0",
        "--to",
        "40",
        "--steps",
        "11",
        "--L",
        "4,16,64",
        "--method",
        "quad",
    ]);
    let r = rows(&out);
    assert_eq!(r.len(), 33);
    for chunk in r.chunks(11) {
        let v: Vec<f64> = chunk.iter().map(|x| value(x)).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "{v:?}");
    }
}

#[test]
fn pnz_sweep_over_l_is_nearly_flat() {
    let out = stdout(&[
        "sweep",
        "--axis",
        "L",
        "--values",
        "8,16,32,64,128,256",
        "--design",
        "coherent,discrete",
        "--metric",
        "pnz",
    ]);
    for chunk in rows(&out).chunks(6) {
        let v: Vec<f64> = chunk.iter().map(|x| value(x)).collect();
        let spread =
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.01, "{v:?}");
    }
}

#[test]
fn identities_suite_passes() {
    let out = run(&["validate", "--suite", "identities"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(ris_secrecy::validate::REPORT_HEADER));
    assert!(!text.contains(",FAIL,"));
}

#[test]
fn small_crosscheck_lists_printed_form_discrepancies() {
    let out = run(&["validate", "--suite", "crosscheck", "--grid", "small"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().filter(|l| l.contains(",discrepancy,")).count(),
        4
    );
}
