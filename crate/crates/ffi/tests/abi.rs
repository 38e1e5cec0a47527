use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use wk_ffi::*;

fn fixture(name: &str) -> CString {
    let path = format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    wk_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(wk_last_error()).to_str().unwrap().to_string()
}

unsafe fn automaton(name: &str) -> *mut WkAutomaton {
    let mut a = ptr::null_mut();
    assert_eq!(wk_automaton_parse(fixture(name).as_ptr(), &mut a), WkStatus::Ok);
    a
}

#[test]
fn evaluates_and_decides_the_first_example() {
    unsafe {
        let l = automaton("intro1_left.wa");
        let r = automaton("intro1_right.wa");
        assert_eq!(wk_automaton_num_states(l), 4);
        let mut out = ptr::null_mut();
        let st = wk_automaton_eval(l, c("{s0:1}").as_ptr(), c("abcbc").as_ptr(), &mut out);
        assert_eq!(st, WkStatus::Ok);
        assert_eq!(take(out), "72");

        let mut eq = false;
        let mut witness = ptr::null_mut();
        let st = wk_automaton_equiv(l, c("{s0:1}").as_ptr(), r, c("{t0:1}").as_ptr(), &mut eq, &mut witness);
        assert_eq!(st, WkStatus::Ok);
        assert!(eq);
        assert!(witness.is_null());

        let p = automaton("intro1_perturbed.wa");
        let st = wk_automaton_equiv(p, c("{s0:1}").as_ptr(), r, c("{t0:1}").as_ptr(), &mut eq, &mut witness);
        assert_eq!(st, WkStatus::Ok);
        assert!(!eq);
        assert_eq!(take(witness), "abc 14 12");

        let mut dot = ptr::null_mut();
        assert_eq!(wk_automaton_render(l, true, &mut dot), WkStatus::Ok);
        assert!(take(dot).starts_with("digraph"));

        for a in [l, r, p] {
            wk_automaton_free(a);
        }
    }
}

#[test]
fn expressions_round_trip() {
    unsafe {
        let mut e = ptr::null_mut();
        let src = c("mu x. a.(1 * x) + a.(2 * x) + out(1)");
        assert_eq!(wk_expr_parse(src.as_ptr(), WkSemiring::Integers, &mut e), WkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(wk_expr_to_string(e, true, &mut s), WkStatus::Ok);
        assert_eq!(take(s), "mu x. out(1) + a.(3 * x)");
        assert_eq!(wk_expr_eval(e, ptr::null(), c("aa").as_ptr(), &mut s), WkStatus::Ok);
        assert_eq!(take(s), "9");

        let mut aut = ptr::null_mut();
        assert_eq!(wk_expr_to_automaton(e, ptr::null(), &mut aut), WkStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(wk_automaton_to_expr(aut, c("q0").as_ptr(), &mut back), WkStatus::Ok);
        let mut eq = false;
        assert_eq!(wk_expr_equiv(e, back, ptr::null(), &mut eq, ptr::null_mut()), WkStatus::Ok);
        assert!(eq);
        wk_expr_free(back);
        wk_automaton_free(aut);
        wk_expr_free(e);
    }
}

#[test]
fn oversized_expressions_are_refused() {
    unsafe {
        let l = automaton("intro1_left.wa");
        let mut e = ptr::null_mut();
        assert_eq!(wk_automaton_to_expr(l, c("s0").as_ptr(), &mut e), WkStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(wk_expr_to_string(e, false, &mut out), WkStatus::TooLarge);
        assert!(out.is_null());
        assert!(last_error().contains("over the limit"));
        assert_eq!(wk_expr_to_string(e, true, &mut out), WkStatus::Ok);
        assert!(take(out).starts_with("mu "));
        wk_expr_free(e);
        wk_automaton_free(l);
    }
}

#[test]
fn proofs_and_errors() {
    unsafe {
        let mut trace = ptr::null_mut();
        assert_eq!(wk_check_proof(fixture("example1.proof").as_ptr(), 4, &mut trace), WkStatus::Ok);
        assert!(take(trace).contains("ufix"));

        let bad = c("level bisim\nsemiring integers\nstart a.(2 * out(3))\nstep root D3\nend a.(1 * out(6))\n");
        assert_eq!(wk_check_proof(bad.as_ptr(), 0, ptr::null_mut()), WkStatus::Proof);
        assert!(last_error().contains("level lang"));

        let mut e = ptr::null_mut();
        assert_eq!(wk_expr_parse(c("a.(").as_ptr(), WkSemiring::Integers, &mut e), WkStatus::Syntax);
        assert!(e.is_null());
        assert_eq!(wk_expr_parse(ptr::null(), WkSemiring::Integers, &mut e), WkStatus::NullArgument);

        let l = automaton("intro1_left.wa");
        let mut out = ptr::null_mut();
        assert_eq!(wk_automaton_eval(l, c("{s0:1}").as_ptr(), c("z").as_ptr(), &mut out), WkStatus::Domain);
        let mut expr_out = ptr::null_mut();
        let st = wk_automaton_eval(l, c("{s0:1}").as_ptr(), c("a").as_ptr(), ptr::null_mut());
        assert_eq!(st, WkStatus::NullArgument);
        assert_eq!(wk_automaton_to_expr(l, c("nope").as_ptr(), &mut expr_out), WkStatus::Syntax);
        wk_automaton_free(l);

        // A successful call clears the message.
        let mut e = ptr::null_mut();
        assert_eq!(wk_expr_parse(c("zero").as_ptr(), WkSemiring::Boolean, &mut e), WkStatus::Ok);
        assert!(wk_last_error().is_null());
        wk_expr_free(e);
    }
}

#[test]
fn boolean_automata_need_the_boolean_path() {
    unsafe {
        let nfa = c("semiring boolean\nalphabet a\nstate p output 0\nstate q output 1\n\
                     trans p a 1 p\ntrans p a 1 q\n");
        let mut a = ptr::null_mut();
        assert_eq!(wk_automaton_parse(nfa.as_ptr(), &mut a), WkStatus::Ok);
        let mut eq = true;
        let st = wk_automaton_equiv(a, c("{p:1}").as_ptr(), a, c("{q:1}").as_ptr(), &mut eq, ptr::null_mut());
        assert_eq!(st, WkStatus::Ok);
        assert!(!eq);
        wk_automaton_free(a);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(format!("{}/include/wk.h", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let src = std::fs::read_to_string(format!("{}/src/lib.rs", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from wk.h");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = format!("{}/include/wk.h", env!("CARGO_MANIFEST_DIR"));
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", &header]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
