//! End-to-end checks of the `cpnet` binary: exit codes, stream discipline
//! and output formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpnet"))
}

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata")
        .join(name)
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn reduce_prints_the_surviving_leaf() {
    let out = run(&[
        "reduce",
        testdata("fig_definition.el").to_str().unwrap(),
        testdata("fig_definition.cps").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "4");
}

#[test]
fn check_reports_class_flags_for_networks() {
    let out = run(&["check", testdata("fig_definition.el").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("tree-child=false"), "{text}");
    assert!(text.contains("leaves=4"), "{text}");
}

#[test]
fn check_classifies_sequence_files() {
    let out = run(&["check", testdata("fig_definition.cps").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("cps"), "{}", stdout(&out));

    let out = run(&["check", testdata("fig_ric_sf.cps").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("tcs"), "{}", stdout(&out));

    let bad = tmp("bad.cps");
    fs::write(&bad, "1 2\n3 4\n").unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("not-a-cps"), "{}", stdout(&out));
}

#[test]
fn cyclic_input_exits_two_with_a_one_line_reason() {
    let path = tmp("cyclic.el");
    fs::write(&path, "a b\nb a\n").unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.starts_with("error: "), "{err}");
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(stdout(&out).is_empty());
}

#[test]
fn smallest_cps_prints_the_published_sequence() {
    let out = run(&[
        "smallest-cps",
        testdata("fig_smallest.el").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "1 2\n3 2\n3 4\n4 5\n2 5\n");
}

#[test]
fn generate_is_deterministic_and_subnet_contains_pipeline_agrees() {
    let a = run(&["generate", "--leaves", "6", "--retics", "3", "--seed", "11"]);
    let b = run(&["generate", "--leaves", "6", "--retics", "3", "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));

    let seq = tmp("pipe.cps");
    fs::write(&seq, stdout(&a)).unwrap();
    let sub = tmp("pipe_sub.cps");
    let out = run(&[
        "subnet",
        seq.to_str().unwrap(),
        "--retics",
        "1",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    fs::write(&sub, stdout(&out)).unwrap();

    let big = tmp("pipe_big.el");
    let small = tmp("pipe_small.el");
    for (src, dst) in [(&seq, &big), (&sub, &small)] {
        let out = run(&["build", src.to_str().unwrap(), "--class", "1a2b"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        fs::write(dst, stdout(&out)).unwrap();
    }

    let fast = run(&["contains", big.to_str().unwrap(), small.to_str().unwrap()]);
    assert_eq!(code(&fast), 0, "{}", stderr(&fast));
    assert_eq!(stdout(&fast).trim(), "yes");
    let oracle = run(&[
        "oracle",
        "subnetwork",
        big.to_str().unwrap(),
        small.to_str().unwrap(),
    ]);
    assert_eq!(code(&oracle), 0, "{}", stderr(&oracle));
}

#[test]
fn build_writes_both_formats_and_they_parse_back() {
    let seq = testdata("fig_smallest.cps");
    let el = run(&["build", seq.to_str().unwrap(), "--class", "1a2b"]);
    assert_eq!(code(&el), 0, "{}", stderr(&el));
    let nwk = run(&[
        "build",
        seq.to_str().unwrap(),
        "--class",
        "1a2b",
        "--format",
        "enewick",
    ]);
    assert_eq!(code(&nwk), 0, "{}", stderr(&nwk));
    assert!(stdout(&nwk).trim_end().ends_with(';'), "{}", stdout(&nwk));

    let el_path = tmp("built.el");
    let nwk_path = tmp("built.nwk");
    fs::write(&el_path, stdout(&el)).unwrap();
    fs::write(&nwk_path, stdout(&nwk)).unwrap();
    let out = run(&[
        "isomorphic",
        el_path.to_str().unwrap(),
        nwk_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn isomorphic_class_mode_needs_a_class() {
    let a = testdata("fig_smallest.el");
    let out = run(&[
        "isomorphic",
        a.to_str().unwrap(),
        a.to_str().unwrap(),
        "--mode",
        "class",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--class"), "{}", stderr(&out));
}

#[test]
fn contains_rejects_non_tree_child_hosts() {
    let net = testdata("fig_definition.el");
    let out = run(&["contains", net.to_str().unwrap(), net.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("tree-child"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn unknown_flags_exit_two() {
    let out = run(&["check", "--frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_enumerate_lists_sequences_one_per_line() {
    let out = run(&[
        "oracle",
        "enumerate",
        testdata("fig_smallest.el").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().count() > 1);
    assert!(text.lines().all(|l| l.split(' ').all(|p| p.contains(','))));
    assert!(stderr(&out).contains("minimal sequences"));
}

#[test]
fn bench_emits_the_fixed_header_and_deterministic_instances() {
    let args = [
        "bench",
        "--grid-min",
        "10",
        "--grid-max",
        "20",
        "--grid-step",
        "10",
        "--replicates",
        "1",
        "--runs",
        "1",
    ];
    let a = run(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,r,r_prime,kind,result,seconds,seed"));
    // axis {10,20}: 3 (r, r') combos per n, 2 kinds, 1 replicate.
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);

    let b = run(&args);
    let strip = |t: &str| {
        t.lines()
            .skip(1)
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(5); // seconds varies between runs
                f.join(",")
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&text), strip(&stdout(&b)));
    for line in text.lines().skip(1) {
        let kind = line.split(',').nth(3).unwrap();
        let result = line.split(',').nth(4).unwrap();
        if kind == "yes" {
            assert_eq!(result, "yes", "{line}");
        }
    }
}

#[test]
fn bench_json_is_three_well_formed_fit_reports() {
    let out = run(&[
        "bench",
        "--grid-min",
        "10",
        "--grid-max",
        "30",
        "--grid-step",
        "10",
        "--replicates",
        "1",
        "--runs",
        "1",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    let splits: Vec<&str> = reports
        .iter()
        .map(|r| r["split"].as_str().unwrap())
        .collect();
    assert_eq!(splits, ["all", "yes", "no"]);
    for r in reports {
        assert!(r["r_squared"].as_f64().unwrap() <= 1.0);
        assert!(r["slope_leaves"].is_number());
    }
}

#[test]
fn bench_csv_goes_to_a_file_with_out() {
    let path = tmp("bench_out.csv");
    let out = run(&[
        "bench",
        "--grid-min",
        "10",
        "--grid-max",
        "10",
        "--grid-step",
        "10",
        "--replicates",
        "1",
        "--runs",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,r,r_prime,kind,result,seconds,seed\n"));
    assert_eq!(text.lines().count(), 3);
}
