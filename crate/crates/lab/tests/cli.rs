use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shiftsign"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shiftsign-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn shift_scan_is_byte_identical_across_runs() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for out in [&a, &b] {
        let status = bin()
            .args(["shift-scan", "--seed", "7", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("# theta:"));
    assert!(!text.contains('\r'));
}

#[test]
fn different_seeds_change_the_output() {
    let (a, b) = (scratch("s1.csv"), scratch("s2.csv"));
    for (seed, out) in [("1", &a), ("2", &b)] {
        bin().args(["margin-scan", "--seed", seed, "--out"]).arg(out).status().unwrap();
    }
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_file_is_read() {
    let cfg = scratch("scan.cfg");
    let out = scratch("from_config.csv");
    std::fs::write(
        &cfg,
        format!(
            "# small scan\nscenario = shift-scan\ndim = 16\nk = 4\nthetas = 9\ndepths = exact, 3\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let status = bin().arg("shift-scan").arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    // comment, header, 2 depths x 9 thetas
    assert_eq!(text.lines().count(), 2 + 18);
}

#[test]
fn usage_errors_exit_with_two() {
    let missing = bin().args(["shift-scan", "/nonexistent/config.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "dim = 16\nbogus_key = 1\n").unwrap();
    let unknown_key = bin().arg("shift-scan").arg(&cfg).output().unwrap();
    assert_eq!(unknown_key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown_key.stderr).contains("bogus_key"));

    let unknown_flag = bin().args(["shift-scan", "--frobnicate"]).output().unwrap();
    assert_eq!(unknown_flag.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown_flag.stderr).contains("Usage"));

    let no_command = bin().output().unwrap();
    assert_eq!(no_command.status.code(), Some(2));

    std::fs::write(&cfg, "scenario = muller\n").unwrap();
    let wrong_scenario = bin().arg("shift-scan").arg(&cfg).output().unwrap();
    assert_eq!(wrong_scenario.status.code(), Some(2));
}

#[test]
fn failed_scenario_checks_exit_with_one() {
    // Gradient descent started on a saddle with a loose tolerance stops
    // there, violating the scenario's terminal-index check.
    let cfg = scratch("fail.cfg");
    let out = scratch("fail.csv");
    std::fs::write(
        &cfg,
        format!(
            "starts = 0.212487 0.292988\nrealizations = gradient_descent\ngrad_tol = 0.1\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let status = bin().arg("muller").arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn selftest_subset_prints_one_line_per_criterion() {
    let out = bin().args(["selftest", "--only", "3,4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("criterion  3 [PASS]"));
    assert!(lines[1].starts_with("criterion  4 [PASS]"));
}
