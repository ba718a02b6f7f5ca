use std::path::Path;
use std::process::{Command, Output};

fn qmimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmimo")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn plan_reports_documented_bits() {
    for (loss, expected) in [("6", "DAC bits (exact): 2"), ("2", "DAC bits (exact): 4")] {
        let out = qmimo(&["plan", "--fixed-adc", "6", "--loss", loss, "--beta", "0.125"]);
        assert_eq!(code(&out), 0);
        assert!(stdout(&out).contains(expected), "{}", stdout(&out));
    }
    let out = qmimo(&["plan", "--fixed-dac", "6", "--loss", "1", "--beta", "0.125"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("ADC bits: 8"));
}

#[test]
fn plan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.csv");
    let out = qmimo(&[
        "plan", "--fixed-adc", "6", "--loss", "0.5", "--beta", "0.125", "--snr-check", "-10", "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# qmimo plan fixed=adc:6"));
    assert!(lines[1].starts_with("fixed_side,fixed_bits,"));
    assert!(lines[2].starts_with("adc,6,0.5,0.125,6,"));
}

#[test]
fn infeasible_budget_exits_4() {
    let out = qmimo(&["plan", "--fixed-adc", "1", "--loss", "10", "--beta", "0.9"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "master_seed = 1\nsnr_db = -10:30\n").unwrap();
    let out = qmimo(&["rate-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("snr_db"), "{err}");

    assert_eq!(code(&qmimo(&["rate-sweep"])), 2, "missing seed");
    assert_eq!(code(&qmimo(&["contour", "--master-seed", "1", "--dac-bits", "0"])), 2);
    assert_eq!(code(&qmimo(&["rate-sweep", "--config", "/nonexistent/run.cfg"])), 2);
}

#[test]
fn unwritable_dump_is_a_run_failure() {
    let out = qmimo(&[
        "rate-sweep", "--master-seed", "1", "--simulate", "--n-trials", "1", "--symbols-per-trial", "10",
        "--n-antennas", "8", "--n-users", "2", "--snr-db", "0", "--raw-dump", "/nonexistent/dir/dump.csv",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn rate_sweep_closed_form_only() {
    let out = qmimo(&["rate-sweep", "--master-seed", "9", "--snr-db=-10,0", "--converters", "inf/inf,5/5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].contains("master_seed=9"));
    assert_eq!(lines[3], "0,3,,,inf/inf");
    let r = |l: &str| l.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(r(lines[4]) >= 0.99 * r(lines[2]), "5/5 at -10 dB");
}

fn sweep_bytes(dir: &Path, workers: &str, tag: &str) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(format!("sweep-{tag}.csv"));
    let dump = dir.join(format!("dump-{tag}.csv"));
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "# small simulated sweep\nn_antennas = 32\nn_users = 4\nsnr_db = -10:30:5\nconverters = inf/inf, 3/6\n\
         n_trials = 16\nsymbols_per_trial = 200\nmaster_seed = 31\nsimulate = true\n",
    )
    .unwrap();
    let res = qmimo(&[
        "rate-sweep", "--config", cfg.to_str().unwrap(), "--workers", workers, "--output", out.to_str().unwrap(),
        "--raw-dump", dump.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    (std::fs::read(out).unwrap(), std::fs::read(dump).unwrap())
}

#[test]
fn sweep_files_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_bytes(dir.path(), "1", "a");
    let b = sweep_bytes(dir.path(), "8", "b");
    let c = sweep_bytes(dir.path(), "1", "c");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let csv = String::from_utf8(a.0).unwrap();
    assert_eq!(csv.lines().count(), 2 + 10);
    assert!(csv.lines().skip(2).all(|l| l.split(',').filter(|f| !f.is_empty()).count() == 5));
    let dump = String::from_utf8(a.1).unwrap();
    assert_eq!(dump.lines().count(), 1 + 2 * 16 * 5 * 4);
}

#[test]
fn contour_flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "master_seed = 2\ndac_bits = 1..8, inf\nadc_bits = 1..8, inf\n").unwrap();
    let out = qmimo(&["contour", "--config", cfg.to_str().unwrap(), "--adc-bits", "5,inf"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2 + 9 * 2);
    assert!(text.lines().next().unwrap().contains("adc_bits=5,inf"));
    assert!(text.contains("\ninf,inf,0.765534746363\n"));
}

#[test]
fn validate_reports_every_suite() {
    let out = qmimo(&["validate"]);
    let text = stdout(&out);
    for suite in ["quantizer-table", "wishart", "bussgang-orthogonality", "reduction-identities"] {
        assert!(text.contains(suite), "{text}");
    }
    let expected = if text.contains("FAIL") { 5 } else { 0 };
    assert_eq!(code(&out), expected);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&qmimo(&["--help"])), 0);
    assert_eq!(code(&qmimo(&["plan", "--help"])), 0);
}
