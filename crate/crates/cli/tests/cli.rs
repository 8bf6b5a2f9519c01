use std::fs;
use std::process::{Command, Output};

use regefg::runner::{parse_csv, read_csv, CSV_HEADER};

fn solve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solve"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn writes_csv_to_stdout() {
    let out = solve(&[
        "--game",
        "kuhn",
        "--algo",
        "reg-cfr",
        "--iters",
        "20",
        "--log-every",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = parse_csv(&text, "stdout").unwrap();
    assert_eq!(
        records.iter().map(|r| r.iter).collect::<Vec<_>>(),
        [5, 10, 15, 20]
    );
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = solve(&[
            "--game",
            "kuhn",
            "--algo",
            "reg-dogda",
            "--tau",
            "0.1",
            "--tau-mode",
            "adaptive",
            "--eta",
            "0.1",
            "--iters",
            "300",
            "--ref-tol",
            "1e-9",
            "--ref-eta",
            "0.05",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (a, b) = (fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
    assert_eq!(a, b);
    let records = read_csv(&paths[0]).unwrap();
    assert_eq!(records.len(), 300);
    assert!(records
        .iter()
        .all(|r| r.dist_ref_l2.is_finite() && r.wall_ns == 0));
}

#[test]
fn matrix_game_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("pennies.txt");
    fs::write(&matrix, "1,-1\n-1,1\n").unwrap();
    let (csv, plot) = (dir.path().join("run.csv"), dir.path().join("plot.py"));
    let out = solve(&[
        "--game",
        matrix.to_str().unwrap(),
        "--algo",
        "cfr-plus",
        "--tau",
        "0",
        "--iters",
        "50",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(read_csv(&csv).unwrap().len(), 50);
    assert!(fs::read_to_string(&plot).unwrap().contains("run.csv"));
}

#[test]
fn batch_runs_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let outs: Vec<_> = (0..3)
        .map(|i| dir.path().join(format!("run{i}.csv")))
        .collect();
    let entries: Vec<String> = ["reg-domwu", "reg-cfr", "cfr"]
        .iter()
        .zip(&outs)
        .map(|(algo, out)| {
            format!(
                r#"{{"game": "kuhn", "algo": "{algo}", "tau0": 0.05, "iters": 40, "tau_mode": "fixed", "log_every": 10, "out": {:?}}}"#,
                out.to_str().unwrap()
            )
        })
        .collect();
    let batch = dir.path().join("batch.json");
    fs::write(&batch, format!("[{}]", entries.join(","))).unwrap();
    let out = solve(&["--batch", batch.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for p in &outs {
        assert_eq!(read_csv(p).unwrap().len(), 4);
    }
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["--iters", "0"],
        vec!["--algo", "reg-cfr", "--gamma", "0.6"],
        vec!["--tau-mode", "adaptive", "--tau", "0"],
        vec!["--algo", "nope"],
        vec!["--eta", "fast"],
        vec!["--game", "/nonexistent/matrix.txt"],
        vec!["--plot", "plot.py"],
    ] {
        let out = solve(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch.json");
    fs::write(&batch, r#"[{"game": "kuhn", "algo": "cfr", "tau0": 0, "iters": 5, "tau_mode": "fixed", "bogus": 1}]"#)
        .unwrap();
    assert_eq!(
        solve(&["--batch", batch.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn unmet_reference_tolerance_exits_with_three() {
    let out = solve(&[
        "--game",
        "kuhn",
        "--algo",
        "reg-domwu",
        "--iters",
        "5",
        "--ref-tol",
        "1e-12",
        "--ref-max-iters",
        "100",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("no convergence"));
}
