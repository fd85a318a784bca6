use std::fs;
use std::process::{Command, Output};

fn psub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psub"))
        .args(args)
        .env_remove("PSUB_OUT_DIR")
        .output()
        .expect("spawn psub")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_prints_outcomes_and_efficiency() {
    let o = psub(&["run", "--lambda", "0.2", "--n", "1", "--t", "0.8", "--scheme", "standard"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for outcome in ["none", "A1 B1", "A1 ", "B1 "] {
        assert!(text.contains(outcome), "{outcome} missing:\n{text}");
    }
    let eff = text.lines().find(|l| l.starts_with("efficiency ")).unwrap();
    let closed = text.lines().find(|l| l.starts_with("closed-form efficiency ")).unwrap();
    assert_eq!(eff.split_whitespace().last(), closed.split_whitespace().last());
}

#[test]
fn domain_errors_exit_with_2() {
    let o = psub(&["run", "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
    assert_eq!(psub(&["run", "--t", "-0.1"]).status.code(), Some(2));
    assert_eq!(psub(&["run", "--n", "0"]).status.code(), Some(2));
    assert_eq!(psub(&["run", "--scheme", "greedy"]).status.code(), Some(2));
    assert_eq!(psub(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(psub(&["sweep", "--n-from", "3", "--n-to", "2"]).status.code(), Some(2));
    assert_eq!(psub(&["sweep", "--t-step", "0"]).status.code(), Some(2));
    assert_eq!(psub(&["loci", "--n-to", "65"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_a_grid_point() {
    let o = psub(&["verify", "--lambda", "0.32", "--n", "3", "--t", "0.9"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("OK: all deltas below 1e-9"));
}

#[test]
fn verify_reports_a_truncated_run_as_a_mismatch() {
    // Cutoff 3 drops enough of the λ = 0.32 state to break the closed forms.
    let o = psub(&["verify", "--lambda", "0.32", "--n", "2", "--t", "0.7", "--cutoff", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn verify_refuses_oversized_dense_runs() {
    let o = psub(&["verify", "--lambda", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dense oracle"), "{}", stderr(&o));
}

#[test]
fn loci_csv_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = psub(&["loci", "--lambdas", "0.15,0.32", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("scheme,lambda,n,t,efficiency,is_locus\n"));
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().count(), 1 + 2 * 10);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn single_locus_is_a_two_line_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let o = psub(&["loci", "--lambdas", "0.2", "--n-from", "4", "--n-to", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("standard,0.2,4,"));
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_psub"))
        .args(["sweep", "--n-to", "2", "--t-min", "0.5", "--t-step", "0.1"])
        .env("PSUB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    // T = 0.5, 0.6, ..., 0.9 for N = 1, 2
    assert_eq!(text.lines().count(), 1 + 2 * 5);
}

#[test]
fn transparent_sweep_is_all_zero() {
    let o = psub(&["sweep", "--t-min", "1", "--t-max", "1", "--t-step", "0.1", "--n-to", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(&fields[3..], ["1", "0", "true"]);
    }
}

#[test]
fn plot_script_needs_a_file_and_is_written_next_to_it() {
    assert_eq!(psub(&["loci", "--n-to", "2", "--plot-script", "p.py"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("loci.csv");
    let script = dir.path().join("plot.py");
    let o = psub(&[
        "loci",
        "--n-to",
        "2",
        "--out",
        csv.to_str().unwrap(),
        "--plot-script",
        script.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&script).unwrap();
    assert!(text.contains(csv.to_str().unwrap()));
    assert!(text.contains("import matplotlib"));
}

#[test]
fn unwritable_output_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csv");
    let o = psub(&["loci", "--n-to", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("x.csv"));
}

#[test]
fn monte_carlo_is_seeded() {
    let args = ["mc", "--lambda", "0.2", "--n", "1", "--t", "0.8", "--trials", "100000", "--seed", "7"];
    let a = psub(&args);
    let b = psub(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("chi-square"));
    let c = psub(&["mc", "--lambda", "0.2", "--n", "1", "--t", "0.8", "--trials", "100000", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn help_lists_every_flag() {
    let cases: [(&str, &[&str]); 5] = [
        ("run", &["--lambda", "--n", "--t", "--scheme", "--tail-epsilon", "--cutoff", "--k-max", "--out", "--out-dir"]),
        ("sweep", &["--lambda", "--scheme", "--n-from", "--n-to", "--t-min", "--t-max", "--t-step", "--out", "--plot-script"]),
        ("loci", &["--lambdas", "--scheme", "--n-from", "--n-to", "--out", "--plot-script"]),
        ("verify", &["--lambda", "--n", "--t", "--scheme", "--tail-epsilon", "--cutoff"]),
        ("mc", &["--lambda", "--n", "--t", "--scheme", "--trials", "--seed"]),
    ];
    for (cmd, flags) in cases {
        let o = psub(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for flag in flags {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
        assert!(text.contains("PSUB_OUT_DIR"));
    }
}
