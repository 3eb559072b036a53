use std::fs;
use std::path::{Path, PathBuf};

use fggppl::cli::{run, EXIT_DIVERGENT, EXIT_FRONTEND, EXIT_IO, EXIT_MISMATCH, EXIT_OK};
use fggppl::fixtures::{PCFG_PARAMS, PCFG_SOURCE};
use tempfile::TempDir;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn fggppl(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("fggppl").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn pcfg(dir: &TempDir) -> (String, String) {
    (write(dir.path(), "pcfg.ppl", PCFG_SOURCE), write(dir.path(), "pcfg.json", PCFG_PARAMS))
}

#[test]
fn infer_prints_the_start_weights() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let r = fggppl(&["infer", &src, "--params", &params]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("status: converged"));
    assert!(r.out.contains("S(unit) = 0.999999999"), "{}", r.out);
}

#[test]
fn compile_is_deterministic_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let a = fggppl(&["compile", &src, "--params", &params]);
    let b = fggppl(&["compile", &src, "--params", &params]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.out, b.out);

    let out = dir.path().join("g.json");
    let r = fggppl(&["compile", &src, "--params", &params, "--out", out.to_str().unwrap()]);
    assert!(r.out.contains("3 rules"), "{}", r.out);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.json.provenance.json")).unwrap()).unwrap();
    assert_eq!(side.as_array().unwrap().len(), 3);

    let direct = fggppl(&["infer", &src, "--params", &params]);
    let loaded = fggppl(&["infer", out.to_str().unwrap()]);
    assert_eq!(direct.out, loaded.out);
}

#[test]
fn iteration_limit_shows_partial_weights() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let r = fggppl(&["infer", &src, "--params", &params, "--max-iter", "1", "--all"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("not converged"));
    assert!(r.out.contains("d(S, unit) = 0.7"), "{}", r.out);
}

#[test]
fn syntax_errors_exit_two_with_a_position() {
    let dir = TempDir::new().unwrap();
    let src = write(dir.path(), "bad.ppl", "let x = in x");
    let r = fggppl(&["compile", &src]);
    assert_eq!(r.code, EXIT_FRONTEND);
    assert!(r.err.contains("1:9"), "{}", r.err);
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(fggppl(&["infer"]).code, EXIT_IO);
    assert_eq!(fggppl(&["infer", "/nonexistent/x.ppl"]).code, EXIT_IO);
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    assert_eq!(fggppl(&["infer", &src, "--params", &params, "--passes", "fold"]).code, EXIT_IO);
    assert_eq!(fggppl(&["--help"]).code, EXIT_OK);
}

#[test]
fn divergence_exits_three() {
    let dir = TempDir::new().unwrap();
    let src = write(dir.path(), "pcfg.ppl", PCFG_SOURCE);
    let params = write(dir.path(), "p.json", r#"{"params": {"p": {"S": {"inl a": 0.2, "inr (S, S)": 1.8}}}}"#);
    let r = fggppl(&["infer", &src, "--params", &params]);
    assert_eq!(r.code, EXIT_DIVERGENT);
    assert!(r.out.contains("partial results"));
    assert_eq!(fggppl(&["compare", &src, "--params", &params, "--depth", "2"]).code, EXIT_DIVERGENT);
}

#[test]
fn compare_agrees_and_catches_a_corrupted_grammar() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let r = fggppl(&["compare", &src, "--params", &params, "--depth", "4"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("0.9152227"), "{}", r.out);
    assert!(r.out.ends_with("ok\n"));

    let good = fggppl(&["compile", &src, "--params", &params]).out;
    let mut j: serde_json::Value = serde_json::from_str(&good).unwrap();
    let factors = j["factors"].as_object_mut().unwrap();
    let table = factors.values_mut().find(|f| f.to_string().contains("0.7")).unwrap();
    let bumped = table.to_string().replace("0.7", "0.6");
    *table = serde_json::from_str(&bumped).unwrap();
    let bad = write(dir.path(), "bad.json", &j.to_string());
    let r = fggppl(&["compare", &src, "--params", &params, "--fgg", &bad]);
    assert_eq!(r.code, EXIT_MISMATCH, "{}{}", r.out, r.err);
    let same = write(dir.path(), "good.json", &good);
    assert_eq!(fggppl(&["compare", &src, "--params", &params, "--fgg", &same]).code, EXIT_OK);
}

#[test]
fn enumerate_lists_trees() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let r = fggppl(&["enumerate", &src, "--params", &params, "--depth", "3"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.ends_with("2 trees, total 0.847\n"), "{}", r.out);
    let r = fggppl(&["enumerate", &src, "--params", &params, "--depth", "3", "--nonterminal", "d"]);
    assert!(r.out.contains("5 trees"), "{}", r.out);
    assert_eq!(fggppl(&["enumerate", &src, "--params", &params, "--nonterminal", "nope"]).code, EXIT_IO);
}

#[test]
fn render_formats() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let dot = fggppl(&["render", &src, "--params", &params]).out;
    assert_eq!(dot.matches("digraph ").count(), 3);
    let tex = fggppl(&["render", &src, "--params", &params, "--format", "latex"]).out;
    assert!(tex.starts_with("\\documentclass"));
    assert_eq!(tex.matches("\\begin{tikzpicture}").count(), 3);
    let json = fggppl(&["render", &src, "--params", &params, "--format", "json"]).out;
    assert!(serde_json::from_str::<serde_json::Value>(&json).is_ok());
    let out = dir.path().join("g.dot");
    assert_eq!(fggppl(&["render", &src, "--params", &params, "--out", out.to_str().unwrap()]).code, EXIT_OK);
    assert_eq!(fs::read_to_string(out).unwrap(), dot);
}

#[test]
fn pass_selection_changes_the_grammar_not_the_answer() {
    let dir = TempDir::new().unwrap();
    let (src, params) = pcfg(&dir);
    let none = fggppl(&["compile", &src, "--params", &params, "--passes", "none"]).out;
    let all = fggppl(&["compile", &src, "--params", &params]).out;
    assert!(none.len() > all.len());
    let a = fggppl(&["infer", &src, "--params", &params, "--passes", "none"]).out;
    let b = fggppl(&["infer", &src, "--params", &params, "--passes", "prune,inline"]).out;
    let last = |s: &str| s.lines().last().unwrap().to_string();
    assert_eq!(last(&a)[..16], last(&b)[..16]);
}

#[test]
fn grammar_files_run_directly() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/programs/pcfg.fgg.json");
    let r = fggppl(&["infer", path, "--max-iter", "1"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("not converged"));
    assert!(r.out.ends_with("X = 0.7\n"), "{}", r.out);
    let r = fggppl(&["infer", path]);
    assert!(r.out.contains("status: converged"));
    assert!(r.out.ends_with("X = 0.999999999898\n"), "{}", r.out);
}
