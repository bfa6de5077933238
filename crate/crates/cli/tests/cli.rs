use std::io::Write;
use std::path::Path;
use std::process::Command;

use p4sparse_cli::{run, EXIT_ALREADY_EDGE, EXIT_BUDGET, EXIT_NOT_P4_SPARSE, EXIT_OK, EXIT_USAGE};
use tempfile::NamedTempFile;

const SPIDER_THIN_K3: &str = "6 6\n0 1\n0 2\n1 2\n0 3\n1 4\n2 5\n";
const TWO_K2: &str = "4 2\n0 1\n2 3\n";
const P4: &str = "4 3\n0 1\n1 2\n2 3\n";
const C5: &str = "5 5\n0 1\n1 2\n2 3\n3 4\n4 0\n";

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("p4sparse").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

#[test]
fn complete_thin_spider_clique_to_stable() {
    let f = file(SPIDER_THIN_K3);
    assert_eq!(
        cli(&["complete", path(&f), "0", "4"]),
        (EXIT_OK, "2\n".into(), String::new())
    );
}

#[test]
fn complete_two_k2() {
    let f = file(TWO_K2);
    let (code, out, _) = cli(&["complete", path(&f), "0", "2", "--edges"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "1\n0 2\n"));
}

#[test]
fn oracle_matches_complete() {
    for (text, u, v) in [
        (P4, "0", "3"),
        (P4, "0", "2"),
        (SPIDER_THIN_K3, "3", "4"),
        (TWO_K2, "1", "3"),
    ] {
        let f = file(text);
        let (c1, ours, _) = cli(&["complete", path(&f), u, v]);
        let (c2, truth, _) = cli(&["oracle", path(&f), u, v]);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
        assert_eq!(ours, truth, "{u} {v}");
    }
}

#[test]
fn verify_reports_every_check() {
    let f = file(SPIDER_THIN_K3);
    let (code, out, _) = cli(&["complete", path(&f), "3", "4", "--verify"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "3\nverify tree ok\nverify definition ok\nverify oracle ok\n"
    );
}

#[test]
fn verify_skips_oracle_on_large_input() {
    let (_, gen, _) = cli(&["gen", "30", "4"]);
    let f = file(&gen);
    let g = p4sparse::Graph::parse(&gen).unwrap();
    let (u, v) = g.non_edges().next().unwrap().endpoints();
    let (code, out, _) = cli(&[
        "complete",
        path(&f),
        &u.to_string(),
        &v.to_string(),
        "--verify",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify tree ok"));
    assert!(out.contains("verify definition skipped"));
    assert!(out.contains("verify oracle skipped"));
}

#[test]
fn recognize_both_outcomes() {
    let f = file(P4);
    assert_eq!(cli(&["recognize", path(&f)]).1, "p4-sparse\n");
    let f = file(C5);
    let (code, out, _) = cli(&["recognize", path(&f)]);
    assert_eq!(
        (code, out.as_str()),
        (EXIT_NOT_P4_SPARSE, "not-p4-sparse five 0 1 2 3 4\n")
    );
}

#[test]
fn tree_prints_text_and_dot() {
    let f = file(P4);
    assert_eq!(cli(&["tree", path(&f)]).1, "(2 thin [s0:k1 s3:k2])\n");
    let (code, dot, _) = cli(&["tree", path(&f), "--dot"]);
    assert_eq!(code, EXIT_OK);
    assert!(dot.starts_with("graph "));
}

#[test]
fn exit_codes() {
    let f = file(C5);
    let (code, _, err) = cli(&["complete", path(&f), "0", "2"]);
    assert_eq!(code, EXIT_NOT_P4_SPARSE);
    assert!(err.starts_with("error: "));

    let f = file("3 2\n0 1\n1 x\n");
    let (code, _, err) = cli(&["complete", path(&f), "0", "2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 3"), "{err}");

    assert_eq!(
        cli(&["complete", "/nonexistent/graph.txt", "0", "1"]).0,
        EXIT_USAGE
    );
    assert_eq!(cli(&["frobnicate"]).0, EXIT_USAGE);
    let f = file(P4);
    assert_eq!(cli(&["complete", path(&f), "0", "9"]).0, EXIT_USAGE);
    assert_eq!(cli(&["complete", path(&f), "0", "1"]).0, EXIT_ALREADY_EDGE);
    assert_eq!(cli(&["oracle", path(&f), "1", "2"]).0, EXIT_ALREADY_EDGE);
}

#[test]
fn oracle_budget_is_loud() {
    let f = file(SPIDER_THIN_K3);
    let (code, _, err) = cli(&["oracle", path(&f), "3", "4", "--max-extra", "1"]);
    assert_eq!(code, EXIT_BUDGET);
    assert!(err.contains("error: "));
    let (_, gen, _) = cli(&["gen", "12", "1"]);
    let f = file(&gen);
    let g = p4sparse::Graph::parse(&gen).unwrap();
    let (u, v) = g.non_edges().next().unwrap().endpoints();
    assert_eq!(
        cli(&["oracle", path(&f), &u.to_string(), &v.to_string()]).0,
        EXIT_BUDGET
    );
}

#[test]
fn gen_is_deterministic_and_p4_sparse() {
    let a = cli(&["gen", "25", "9"]);
    assert_eq!(a, cli(&["gen", "25", "9"]));
    let f = file(&a.1);
    assert_eq!(cli(&["recognize", path(&f)]).1, "p4-sparse\n");
    assert_eq!(cli(&["gen", "0", "1"]).0, EXIT_USAGE);
}

#[test]
fn bench_prints_a_summary() {
    let (code, out, _) = cli(&["bench", "60", "3", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().filter(|l| l.contains(" query=")).count(), 8);
    assert!(out.lines().any(|l| l.starts_with("ratio ")));
    assert_eq!(cli(&["bench", "2", "3", "4"]).0, EXIT_USAGE);
}

#[test]
fn binary_exit_status() {
    let bin = Path::new(env!("CARGO_BIN_EXE_p4sparse"));
    let f = file(C5);
    let status = Command::new(bin)
        .args(["recognize", path(&f)])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_NOT_P4_SPARSE));
    let f = file(TWO_K2);
    let out = Command::new(bin)
        .args(["complete", path(&f), "0", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1\n");
    let out = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
}
