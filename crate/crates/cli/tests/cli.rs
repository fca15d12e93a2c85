use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpl"))
        .args(args)
        .env_remove("CPL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn disjointness_n8_passes_at_48_bits() {
    let o = cpl(&[
        "encode-verify", "--protocol", "disjointness", "--ds", "bitset", "--n", "8", "--w", "8", "--seed", "7",
    ]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert_eq!(value(&out, "length_bits"), Some("48"));
    assert_eq!(value(&out, "entropy_bits"), Some("8"));
    assert_eq!(value(&out, "result"), Some("PASS"));
    assert_eq!(value(&out, "config.seed"), Some("7"));
}

#[test]
fn factorize_ones_exhaustive_finds_four_wires() {
    let o = cpl(&["factorize", "--input", &fixture("ones2x2.mat"), "--mode", "exhaustive", "--s-max", "2"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert_eq!(value(&out, "wires"), Some("4"));
    assert_eq!(value(&out, "s"), Some("1"));
    assert!(out.contains("V:\n1 2\n11\nQ:\n2 1\n1\n1\n"), "{out}");
}

#[test]
fn grid_lines_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("grid3.mat");
    let o = cpl(&["gen-operator", "grid-lines", "--p", "3", "--output", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    let o = cpl(&["analyze", "--input", s(&m)]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert_eq!(value(&out, "pairwise_max"), Some("1"));
    assert_eq!(value(&out, "row_weight_min"), Some("3"));
    assert_eq!(value(&out, "row_weight_max"), Some("3"));
    assert_eq!(value(&out, "trace_identity"), Some("true"));
    // the written operator matches the shipped fixture
    assert_eq!(std::fs::read_to_string(&m).unwrap(), std::fs::read_to_string(fixture("grid3.mat")).unwrap());
}

#[test]
fn gen_operator_without_output_prints_matrix() {
    let o = cpl(&["gen-operator", "prefix-sum", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), std::fs::read_to_string(fixture("prefix8.mat")).unwrap());
}

#[test]
fn reports_are_byte_identical_per_seed() {
    let runs = [
        vec!["simulate", "--ds", "bitset", "--n", "10", "--trace"],
        vec!["check", "--ds", "register", "--trials", "8"],
        vec!["encode-verify", "--protocol", "indexing", "--ds", "register", "--hex"],
        vec!["encode-verify", "--protocol", "matmul", "--d", "3", "--trials", "4"],
        vec!["analyze", "--input", "PLACEHOLDER"],
    ];
    let plane = fixture("plane.geo");
    for mut args in runs {
        if let Some(a) = args.iter_mut().find(|a| **a == "PLACEHOLDER") {
            *a = &plane;
        }
        args.extend(["--seed", "11"]);
        let (a, b) = (cpl(&args), cpl(&args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    }
}

#[test]
fn threads_do_not_change_results() {
    let f = fixture("identity4.mat");
    let one = stdout(&cpl(&["factorize", "--input", &f, "--mode", "exhaustive", "--s-max", "4"]));
    let four = stdout(
        &Command::new(env!("CARGO_BIN_EXE_cpl"))
            .args(["factorize", "--input", &f, "--mode", "exhaustive", "--s-max", "4"])
            .env("CPL_THREADS", "4")
            .output()
            .unwrap(),
    );
    assert_eq!(value(&four, "config.threads"), Some("4"));
    assert_eq!(value(&one, "wires"), Some("8"));
    let strip = |r: &str| r.lines().filter(|l| !l.starts_with("config.threads")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&one), strip(&four));
}

#[test]
fn copy_cell_check_fails_naming_the_cell() {
    let o = cpl(&["check", "--ds", "copy-cell"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{out}");
    assert_eq!(value(&out, "query.result"), Some("PASS"));
    assert_eq!(value(&out, "update.result"), Some("FAIL"));
    let v = value(&out, "update.violation").unwrap();
    assert!(v.contains("cell=@2") && v.contains("depends_on=@1"), "{v}");
}

#[test]
fn binary_search_queries_are_adaptive() {
    let out = stdout(&cpl(&["check", "--ds", "binary-search", "--n", "8"]));
    assert_eq!(value(&out, "query.result"), Some("FAIL"));
    assert!(value(&out, "query.violation").unwrap().starts_with("address_divergence"));
}

#[test]
fn dropped_insert_is_reported_as_fail() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("s.set");
    // 2 is in S, so losing its insert changes an answer
    let text = cpl_core::problems::DisjointnessInstance::new(8, [2, 5]).unwrap().to_text();
    std::fs::write(&set, text).unwrap();
    let o = cpl(&["encode-verify", "--protocol", "disjointness", "--input", s(&set), "--drop-update", "2"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{out}");
    assert!(value(&out, "failure").unwrap().contains("insert {2}"), "{out}");
    assert_eq!(value(&out, "config.drop_update"), Some("2"));
}

#[test]
fn compile_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (v, q, c) = (dir.path().join("v.mat"), dir.path().join("q.mat"), dir.path().join("c.d2"));
    let o = cpl(&["compile", "--to", "ds", "--circuit", &fixture("xor2.d2"), "--v", s(&v), "--q", s(&q)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = cpl(&["compile", "--to", "circuit", "--v", s(&v), "--q", s(&q), "--circuit", s(&c)]);
    let out = stdout(&o);
    assert_eq!(value(&out, "roundtrip"), Some("true"));
    assert_eq!(value(&out, "bounds_hold"), Some("true"));
    let again = cpl_core::circuits::Depth2Circuit::parse_text(&std::fs::read_to_string(&c).unwrap()).unwrap();
    let orig = cpl_core::circuits::Depth2Circuit::parse_text(&std::fs::read_to_string(fixture("xor2.d2")).unwrap()).unwrap();
    assert_eq!(again, orig);
}

#[test]
fn matmul_naive_circuit_audit() {
    let out = stdout(&cpl(&["encode-verify", "--protocol", "matmul", "--d", "4", "--trials", "4"]));
    assert_eq!(value(&out, "audit.wires"), Some("192"));
    assert_eq!(value(&out, "audit.size_bound"), Some("64"));
    assert_eq!(value(&out, "audit.pairwise_disjoint"), Some("true"));
    assert_eq!(value(&out, "result"), Some("PASS"));
}

#[test]
fn parse_errors_name_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mat");
    std::fs::write(&bad, "2 3\n101\n1a0\n").unwrap();
    let o = cpl(&["analyze", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3, column 2"), "{err}");

    let geo = dir.path().join("bad.geo");
    std::fs::write(&geo, "DIM 2\nPOINT 0 0\nBOX 0 1 0\n").unwrap();
    let o = cpl(&["gen-operator", "incidence", "--input", s(&geo)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 3"));
}

#[test]
fn exhaustive_below_rank_fails() {
    let o = cpl(&["factorize", "--input", &fixture("identity4.mat"), "--mode", "exhaustive", "--s-max", "3"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{out}");
    assert_eq!(value(&out, "rank"), Some("4"));
}
