use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use fggppl::fixtures::{CKY_PARAMS, PCFG_PARAMS, PCFGW_SOURCE, PCFG_SOURCE};
use fggppl_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fggppl_last_error()) }.to_string_lossy().into_owned()
}

fn compile(src: &str, params: &str, passes: u8) -> *mut FggpplGrammar {
    let (s, p) = (cstr(src), cstr(params));
    let mut g = ptr::null_mut();
    let st = unsafe { fggppl_compile(s.as_ptr(), p.as_ptr(), passes, &mut g) };
    assert_eq!(st, FggpplStatus::Ok, "{}", last_error());
    g
}

fn start_weight(g: *const FggpplGrammar, max_iter: usize) -> (FggpplStatus, f64, usize) {
    let mut t = ptr::null_mut();
    let mut iters = 0;
    let st = unsafe { fggppl_infer(g, 1e-10, max_iter, &mut t, &mut iters) };
    let mut w = 0.0;
    assert_eq!(unsafe { fggppl_tensor_get(t, 0, &mut w) }, FggpplStatus::Ok);
    unsafe { fggppl_tensor_free(t) };
    (st, w, iters)
}

#[test]
fn compile_and_solve_the_string_program() {
    let g = compile(PCFGW_SOURCE, CKY_PARAMS, 0b1111);
    let mut n = 0;
    assert_eq!(unsafe { fggppl_grammar_rule_count(g, &mut n) }, FggpplStatus::Ok);
    assert_eq!(n, 3);
    let (st, w, _) = start_weight(g, 10_000);
    assert_eq!(st, FggpplStatus::Ok);
    assert!((w - 0.6).abs() < 1e-12);
    unsafe { fggppl_grammar_free(g) };
}

#[test]
fn json_round_trip_keeps_the_weights() {
    let g = compile(PCFG_SOURCE, PCFG_PARAMS, 0b1111);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fggppl_grammar_to_json(g, &mut json) }, FggpplStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { fggppl_grammar_from_json(json, &mut h) }, FggpplStatus::Ok);
    assert_eq!(start_weight(g, 10_000).1.to_bits(), start_weight(h, 10_000).1.to_bits());
    unsafe {
        fggppl_string_free(json);
        fggppl_grammar_free(g);
        fggppl_grammar_free(h);
    }
}

#[test]
fn iteration_limit_is_reported() {
    let g = compile(PCFG_SOURCE, PCFG_PARAMS, 0b1111);
    let (st, _, iters) = start_weight(g, 3);
    assert_eq!(st, FggpplStatus::NotConverged);
    assert_eq!(iters, 3);
    unsafe { fggppl_grammar_free(g) };
}

#[test]
fn divergence_is_reported_with_a_partial_result() {
    let params = r#"{"params": {"p": {"S": {"inl a": 0.2, "inr (S, S)": 1.8}}}}"#;
    let g = compile(PCFG_SOURCE, params, 0b1111);
    let (st, w, _) = start_weight(g, 10_000);
    assert_eq!(st, FggpplStatus::Divergent);
    assert!(w.is_finite() || w.is_infinite());
    assert!(last_error().contains("diverged"));
    unsafe { fggppl_grammar_free(g) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut g = ptr::null_mut();
    let bad = cstr("let x = in x");
    assert_eq!(unsafe { fggppl_compile(bad.as_ptr(), ptr::null(), 15, &mut g) }, FggpplStatus::Frontend);
    assert!(last_error().contains("1:9"), "{}", last_error());
    assert!(g.is_null());
    assert_eq!(unsafe { fggppl_compile(ptr::null(), ptr::null(), 15, &mut g) }, FggpplStatus::NullArgument);
    let junk = cstr("{\"rules\": 3}");
    assert_eq!(unsafe { fggppl_grammar_from_json(junk.as_ptr(), &mut g) }, FggpplStatus::InvalidGrammar);
    let mut x = 0.0;
    let g = compile("true", "{}", 15);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { fggppl_infer(g, 1e-10, 100, &mut t, ptr::null_mut()) }, FggpplStatus::Ok);
    assert_eq!(unsafe { fggppl_tensor_get(t, 99, &mut x) }, FggpplStatus::OutOfRange);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fggppl_tensor_to_json(t, &mut s) }, FggpplStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    assert_eq!(text, r#"[{"values":[{"bool":true}],"weight":1.0}]"#);
    unsafe {
        fggppl_string_free(s);
        fggppl_tensor_free(t);
        fggppl_grammar_free(g);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/fggppl.h");
    for name in [
        "fggppl_compile",
        "fggppl_grammar_from_json",
        "fggppl_grammar_to_json",
        "fggppl_grammar_rule_count",
        "fggppl_infer",
        "fggppl_tensor_len",
        "fggppl_tensor_get",
        "fggppl_tensor_to_json",
        "fggppl_grammar_free",
        "fggppl_tensor_free",
        "fggppl_string_free",
        "fggppl_last_error",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct FggpplGrammar FggpplGrammar;"));
}

#[test]
fn header_is_valid_c() {
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "include/fggppl.h"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
