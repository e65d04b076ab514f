use std::process::{Command, Output};

use bell_asym::{parse_game, parse_strategy};
use bell_asym_core::{builtin_game, evaluate_eve_value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bell-asym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_builtin(dir: &tempfile::TempDir, name: &str) -> String {
    let o = run(&["builtin", name]);
    assert!(o.status.success());
    let path = dir.path().join(format!("{name}.game"));
    std::fs::write(&path, stdout(&o)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn builtin_output_parses_back() {
    for name in ["chsh", "i3322"] {
        let text = stdout(&run(&["builtin", name]));
        assert!(text.starts_with(&format!("# {name}: ")));
        assert_eq!(parse_game(&text).unwrap(), builtin_game(name).unwrap());
    }
}

#[test]
fn bound_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let chsh = write_builtin(&dir, "chsh");
    let o = run(&["bound", &chsh]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("classical_bound: 0.5\n"), "{out}");
    assert!(out.contains("alice_responses: ") && out.contains("bob_responses: "));
    let o = run(&["bound", &chsh, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["classical_bound"], 0.5);
}

#[test]
fn sweep_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_builtin(&dir, "i3322");
    let out = dir.path().join("curve.csv");
    let o = run(&[
        "sweep",
        &game,
        "--steps",
        "21",
        "--heights",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "xi_x,xi_y,r_xy,r_yx,delta,d_a,d_b");
    assert_eq!(lines.len(), 22);
    assert_eq!(lines[1], "0,0,0.375,0.375,0,0,0");
    assert!(
        lines[21].starts_with("1,0,0.6875,0.5625,0.125,"),
        "{}",
        lines[21]
    );
}

#[test]
fn sweep_is_bit_stable() {
    let a = stdout(&run(&[
        "sweep",
        "builtin:i3322",
        "--steps",
        "6",
        "--heights",
        "3",
    ]));
    let b = stdout(&run(&[
        "sweep",
        "builtin:i3322",
        "--steps",
        "6",
        "--heights",
        "3",
    ]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 7);
}

#[test]
fn two_param_sweep_and_json() {
    let o = run(&[
        "sweep",
        "builtin:chsh",
        "--steps",
        "3",
        "--heights",
        "3",
        "--two-param",
        "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["delta"] == 0.0));
}

#[test]
fn steps_below_two_rejected() {
    let o = run(&["sweep", "builtin:chsh", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("steps"));
}

#[test]
fn adv_bound_budget_range() {
    let dir = tempfile::tempdir().unwrap();
    let chsh = write_builtin(&dir, "chsh");
    let o = run(&["adv-bound", &chsh, "--xi-x", "2.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn adv_bound_with_oracle_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.txt");
    let o = run(&[
        "adv-bound",
        "builtin:i3322",
        "--xi-x",
        "1",
        "--oracle",
        "--restarts",
        "1",
        "--witness-out",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("bound: 0.6875\n"), "{out}");
    assert!(out.contains("oracle: "));
    let e = parse_strategy(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    let g = builtin_game("i3322").unwrap();
    assert!((evaluate_eve_value(&g, &e).unwrap() - 0.6875).abs() < 1e-9);
}

#[test]
fn check_symmetry_reports() {
    let o = run(&["check-symmetry", "builtin:chsh"]);
    assert_eq!(stdout(&o), "transpose_invariant: true\n");
    let o = run(&["check-symmetry", "builtin:i3322", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["transpose_invariant"], false);
    assert!(v["first_differing_entry"].is_array());
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "builtin:chsh",
        "--xi-x",
        "0.5",
        "--xi-y",
        "0",
        "--shots",
        "100000",
        "--seed",
        "3",
    ];
    let a = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&run(&args)));
    assert!(stdout(&a).contains("analytic_value: 0.75\n"));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.game");
    std::fs::write(
        &bad,
        "settings A=2 B=2\noutcomes A=2 B=2\ncoeff 0 0 5 0 1\n",
    )
    .unwrap();
    let o = run(&["bound", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let missing = dir.path().join("nope.game");
    assert_eq!(
        run(&["bound", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["bound", "builtin:ghz"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "builtin:chsh", "--xi-x", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn non_uniform_marginals_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("skew.game");
    std::fs::write(
        &path,
        "settings A=2 B=2\noutcomes A=2 B=2\nmarginal A 0.25 0.75\ncoeff 0 0 0 0 1\ncoeff 1 1 1 1 1\n",
    )
    .unwrap();
    let o = run(&["adv-bound", path.to_str().unwrap(), "--xi-x", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("not validated"));
}
