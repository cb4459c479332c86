use std::process::Command;

use momentum_qc::cli::RunManifest;

fn mlad(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mlad"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn expand_not0_three_lines() {
    let (code, out, _) = mlad(&["expand", "NOT0"]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().collect::<Vec<_>>(),
        ["F(1/2)", "W+(1/2,0)", "F(1/2)"]
    );
}

#[test]
fn expand_rr3_matches_report_count() {
    let (_, out, _) = mlad(&["expand", "RR3"]);
    let (_, json, _) = mlad(&["verify", "RR3", "--json"]);
    let reports: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(
        out.lines().count() as u64,
        reports[0]["primitive_count"].as_u64().unwrap()
    );
}

#[test]
fn expand_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.seq");
    std::fs::write(&path, "").unwrap();
    let (code, out, _) = mlad(&["expand", path.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
    let (code, out, _) = mlad(&["expand", ""]);
    assert_eq!((code, out.as_str()), (0, ""));
}

#[test]
fn expand_file_with_comment_and_def() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.seq");
    std::fs::write(&path, "# two flips\ndef N = NOT(0)\nN . N\n").unwrap();
    let (code, out, _) = mlad(&["expand", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn expand_errors() {
    let (code, _, err) = mlad(&["expand", "F(1) . NOPE"]);
    assert_eq!(code, 2);
    assert!(err.contains("NOPE"));
}

#[test]
fn verify_exit_codes() {
    let (code, out, _) = mlad(&["verify", "NOT0"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS NOT0"));
    assert!(out.contains("fidelity 1.000000000"));
    assert_eq!(mlad(&["verify", "BOGUS"]).0, 2);
    assert_eq!(mlad(&["verify", "--bogus-flag"]).0, 2);
}

#[test]
fn verify_all_lists_every_row() {
    let (code, out, _) = mlad(&["verify", "--all"]);
    assert_eq!(out.lines().count(), 16);
    for sw in ["SW3_23", "SW3_34", "SW3_45"] {
        let line = out.lines().find(|l| l.contains(sw)).unwrap();
        assert!(line.contains("diagonal"), "{line}");
    }
    // exit status follows the reports
    let failing = out.lines().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(code, if failing == 0 { 0 } else { 1 });
}

#[test]
fn verify_json_array() {
    let (_, json, _) = mlad(&["verify", "--all", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 16);
}

#[test]
fn simulate_zero_cycles_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let (code, _, err) = mlad(&[
        "simulate",
        "--atoms",
        "1",
        "--cycles",
        "0",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("cycle,bin_center,probability_density\n"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("0,")));
    let manifest: RunManifest = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("flat.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest.seed, 42);
    assert_eq!(manifest.config.cycles, 0);
    assert!(manifest.outputs.contains(&csv));
}

#[test]
fn simulate_is_reproducible_across_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_mlad"))
            .args([
                "simulate", "--atoms", "200", "--cycles", "2", "--seed", "9", "--record", "1,2",
            ])
            .arg("--out")
            .arg(&path)
            .env("MLAD_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv", "1"), run("b.csv", "3"));
}

#[test]
fn simulate_usage_and_io_errors() {
    assert_eq!(
        mlad(&["simulate", "--out", "x.csv", "--decay", "sideways"]).0,
        2
    );
    assert_eq!(mlad(&["simulate", "--atoms", "0", "--out", "x.csv"]).0, 2);
    assert_eq!(
        mlad(&[
            "simulate",
            "--cycles",
            "1",
            "--record",
            "5",
            "--atoms",
            "1",
            "--out",
            "/nonexistent/x.csv"
        ])
        .0,
        2
    );
    assert_eq!(
        mlad(&[
            "simulate",
            "--atoms",
            "1",
            "--cycles",
            "0",
            "--out",
            "/nonexistent/dir/x.csv"
        ])
        .0,
        3
    );
}
