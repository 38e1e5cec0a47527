//! C ABI for `wk-core`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Strings returned through out
//! parameters are heap allocated and released with [`wk_string_free`].
//! Every function returns a [`WkStatus`]; on failure the message is
//! available from [`wk_last_error`] on the same thread.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wk_core::automaton::{format_word, parse_word};
use wk_core::equivalence::{decide_equiv, decide_expr_equiv, Verdict};
use wk_core::kleene::{automaton_to_expr, expr_to_automaton};
use wk_core::proof::{check_derivation, parse_script, semantic_audit};
use wk_core::{normalize, DerivativeEval, Error, Expr, ExprParser, Semiring, WeightedAutomaton};

/// Largest expression, counted as a tree, that [`wk_expr_to_string`] renders.
pub const WK_MAX_NODES: usize = 1_000_000;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Domain = 4,
    Capability = 5,
    Proof = 6,
    Other = 7,
    Panic = 8,
    TooLarge = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WkSemiring {
    Boolean = 0,
    Naturals = 1,
    Integers = 2,
    Rationals = 3,
}

impl From<WkSemiring> for Semiring {
    fn from(s: WkSemiring) -> Self {
        match s {
            WkSemiring::Boolean => Semiring::Boolean,
            WkSemiring::Naturals => Semiring::Naturals,
            WkSemiring::Integers => Semiring::Integers,
            WkSemiring::Rationals => Semiring::Rationals,
        }
    }
}

/// A weighted automaton.
pub struct WkAutomaton(WeightedAutomaton);

/// A μ-expression together with its semiring.
pub struct WkExpr {
    expr: Expr,
    semiring: Semiring,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WkStatus {
    match e {
        Error::Syntax { .. } | Error::InvalidWeight { .. } | Error::UndeclaredState(_) | Error::DuplicateState(_) => {
            WkStatus::Syntax
        }
        Error::DomainMismatch { .. }
        | Error::UnsupportedSemiring { .. }
        | Error::UnsupportedEmbedding(_)
        | Error::UnknownLetter(_)
        | Error::AlphabetMismatch(_) => WkStatus::Domain,
        Error::Capability { .. } => WkStatus::Capability,
        Error::Proof { .. } => WkStatus::Proof,
        Error::TooLarge { .. } => WkStatus::TooLarge,
        _ => WkStatus::Other,
    }
}

struct Fail(WkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording failures and converting panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WkStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            WkStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(WkStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(WkStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(WkStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(WkStatus::NullArgument, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

fn letters(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

/// Alphabet from a nullable string, or the letters of `exprs`.
unsafe fn alphabet_or(p: *const c_char, exprs: &[&Expr]) -> Result<Vec<String>, Fail> {
    if p.is_null() {
        let set: BTreeSet<String> = exprs.iter().flat_map(|e| e.letters()).collect();
        Ok(set.into_iter().collect())
    } else {
        Ok(letters(text(p, "alphabet")?))
    }
}

fn witness(v: Verdict) -> (bool, *mut c_char) {
    match v {
        Verdict::Equivalent => (true, ptr::null_mut()),
        Verdict::Counterexample { word, left, right } => {
            (false, c_string(format!("{} {left} {right}", format_word(&word))))
        }
    }
}

/// The message of the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an automaton in the text format.
///
/// # Safety
/// `src` must be a valid C string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_parse(src: *const c_char, out: *mut *mut WkAutomaton) -> WkStatus {
    guard(|| {
        let aut = WeightedAutomaton::parse(text(src, "src")?)?;
        put(out, Box::into_raw(Box::new(WkAutomaton(aut))), "out")
    })
}

/// # Safety
/// `aut` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_free(aut: *mut WkAutomaton) {
    if !aut.is_null() {
        drop(Box::from_raw(aut));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `aut` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_num_states(aut: *const WkAutomaton) -> usize {
    aut.as_ref().map_or(0, |a| a.0.num_states())
}

/// Weight of `word` from configuration `start` (e.g. `{s0:1}`), as text.
///
/// # Safety
/// Pointers must be valid; `out` receives a string for [`wk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_eval(
    aut: *const WkAutomaton,
    start: *const c_char,
    word: *const c_char,
    out: *mut *mut c_char,
) -> WkStatus {
    guard(|| {
        let a = &handle(aut, "aut")?.0;
        let cfg = a.parse_configuration(text(start, "start")?)?;
        let w = parse_word(text(word, "word")?, a.alphabet())?;
        put(out, c_string(a.eval_word(&cfg, &w)?.to_string()), "out")
    })
}

/// Canonical text (`as_dot` false) or Graphviz DOT (`as_dot` true).
///
/// # Safety
/// Pointers must be valid; `out` receives a string for [`wk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_render(aut: *const WkAutomaton, as_dot: bool, out: *mut *mut c_char) -> WkStatus {
    guard(|| {
        let a = &handle(aut, "aut")?.0;
        let s = if as_dot { a.to_dot() } else { a.to_text() };
        put(out, c_string(s), "out")
    })
}

/// Decides language equivalence of two configurations. On a difference,
/// `witness` (if non-null) receives `"<word> <left> <right>"`.
///
/// # Safety
/// Pointers must be valid; `witness` may be null.
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_equiv(
    left: *const WkAutomaton,
    left_start: *const c_char,
    right: *const WkAutomaton,
    right_start: *const c_char,
    equivalent: *mut bool,
    witness_out: *mut *mut c_char,
) -> WkStatus {
    guard(|| {
        let (l, r) = (&handle(left, "left")?.0, &handle(right, "right")?.0);
        let sl = l.parse_configuration(text(left_start, "left_start")?)?;
        let sr = r.parse_configuration(text(right_start, "right_start")?)?;
        let (eq, w) = witness(decide_equiv(l, &sl, r, &sr)?);
        put(equivalent, eq, "equivalent")?;
        if witness_out.is_null() {
            wk_string_free(w);
        } else {
            witness_out.write(w);
        }
        Ok(())
    })
}

/// Expression for a named state by elimination of the state variables.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle for [`wk_expr_free`].
#[no_mangle]
pub unsafe extern "C" fn wk_automaton_to_expr(
    aut: *const WkAutomaton,
    state: *const c_char,
    out: *mut *mut WkExpr,
) -> WkStatus {
    guard(|| {
        let a = &handle(aut, "aut")?.0;
        let e = automaton_to_expr(a, a.state_id(text(state, "state")?)?)?;
        let h = WkExpr {
            expr: e,
            semiring: a.semiring(),
        };
        put(out, Box::into_raw(Box::new(h)), "out")
    })
}

/// Parses an expression; open expressions are allowed.
///
/// # Safety
/// `src` must be a valid C string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wk_expr_parse(src: *const c_char, semiring: WkSemiring, out: *mut *mut WkExpr) -> WkStatus {
    guard(|| {
        let s = Semiring::from(semiring);
        let expr = ExprParser::new(s).parse(text(src, "src")?)?;
        put(out, Box::into_raw(Box::new(WkExpr { expr, semiring: s })), "out")
    })
}

/// # Safety
/// `e` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wk_expr_free(e: *mut WkExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Surface text of the expression, normalized if `canonical`. Fails with
/// [`WkStatus::TooLarge`] past [`WK_MAX_NODES`] nodes written out.
///
/// # Safety
/// Pointers must be valid; `out` receives a string for [`wk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn wk_expr_to_string(e: *const WkExpr, canonical: bool, out: *mut *mut c_char) -> WkStatus {
    guard(|| {
        let e = handle(e, "e")?;
        let s = if canonical {
            normalize(&e.expr, e.semiring).expr().render(WK_MAX_NODES)?
        } else {
            e.expr.render(WK_MAX_NODES)?
        };
        put(out, c_string(s), "out")
    })
}

/// Weight of `word` under a closed expression. `alphabet` (letters separated
/// by spaces) may be null, in which case the letters of `e` are used.
///
/// # Safety
/// Pointers must be valid except `alphabet`, which may be null.
#[no_mangle]
pub unsafe extern "C" fn wk_expr_eval(
    e: *const WkExpr,
    alphabet: *const c_char,
    word: *const c_char,
    out: *mut *mut c_char,
) -> WkStatus {
    guard(|| {
        let e = handle(e, "e")?;
        let letters = alphabet_or(alphabet, &[&e.expr])?;
        let w = parse_word(text(word, "word")?, &letters)?;
        let weight = DerivativeEval::new(e.semiring).eval(&e.expr, &w)?;
        put(out, c_string(weight.to_string()), "out")
    })
}

/// Automaton of the derivatives of `e`; its start state is `q0`.
///
/// # Safety
/// Pointers must be valid except `alphabet`, which may be null.
#[no_mangle]
pub unsafe extern "C" fn wk_expr_to_automaton(
    e: *const WkExpr,
    alphabet: *const c_char,
    out: *mut *mut WkAutomaton,
) -> WkStatus {
    guard(|| {
        let e = handle(e, "e")?;
        let letters = alphabet_or(alphabet, &[&e.expr])?;
        let s = expr_to_automaton(&e.expr, e.semiring, &letters)?;
        put(out, Box::into_raw(Box::new(WkAutomaton(s.automaton))), "out")
    })
}

/// Decides language equivalence of two closed expressions over the same
/// semiring. On a difference, `witness` (if non-null) receives
/// `"<word> <left> <right>"`.
///
/// # Safety
/// `alphabet` and `witness_out` may be null; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wk_expr_equiv(
    e1: *const WkExpr,
    e2: *const WkExpr,
    alphabet: *const c_char,
    equivalent: *mut bool,
    witness_out: *mut *mut c_char,
) -> WkStatus {
    guard(|| {
        let (a, b) = (handle(e1, "e1")?, handle(e2, "e2")?);
        if a.semiring != b.semiring {
            return Err(Error::DomainMismatch {
                left: a.semiring,
                right: b.semiring,
            }
            .into());
        }
        let letters = alphabet_or(alphabet, &[&a.expr, &b.expr])?;
        let (eq, w) = witness(decide_expr_equiv(&a.expr, &b.expr, a.semiring, &letters)?);
        put(equivalent, eq, "equivalent")?;
        if witness_out.is_null() {
            wk_string_free(w);
        } else {
            witness_out.write(w);
        }
        Ok(())
    })
}

/// Checks a derivation script and, if `audit_len > 0`, audits it on all
/// words up to that length. A rejected derivation returns `Proof`;
/// `trace_out` (if non-null) receives the replay trace on success.
///
/// # Safety
/// `script` must be a valid C string; `trace_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn wk_check_proof(script: *const c_char, audit_len: usize, trace_out: *mut *mut c_char) -> WkStatus {
    guard(|| {
        let d = parse_script(text(script, "script")?)?;
        let replay = check_derivation(&d)?;
        if audit_len > 0 {
            let report = semantic_audit(&d, audit_len)?;
            if let Some((label, word, l, r)) = report.failures.first() {
                return Err(Fail(
                    WkStatus::Proof,
                    format!("audit failed at step {label}: {} weighs {l} and {r}", format_word(word)),
                ));
            }
        }
        if !trace_out.is_null() {
            trace_out.write(c_string(replay.trace.join("\n")));
        }
        Ok(())
    })
}
