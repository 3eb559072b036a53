//! C interface. Grammars and tensors are opaque handles owned by the caller
//! and released with the matching `_free` function. Every entry point
//! returns an [`FggpplStatus`]; on failure [`fggppl_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fggppl::fgg::{self, Fgg};
use fggppl::frontend::Params;
use fggppl::inference::{SolveOptions, Solver, Status};
use fggppl::tensor::WeightTensor;
use fggppl::PassSet;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FggpplStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Syntax, scope, domain or parameter error in a program.
    Frontend = 3,
    /// Malformed or invalid grammar JSON.
    InvalidGrammar = 4,
    /// Weights exceeded the divergence bound; the partial result is returned.
    Divergent = 5,
    /// The iteration limit was reached; the last iterate is returned.
    NotConverged = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// A compiled or loaded grammar.
pub struct FggpplGrammar {
    fgg: Fgg,
}

/// A weight table over the start symbol's attachment domains.
pub struct FggpplTensor {
    tensor: WeightTensor,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let c = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<FggpplStatus, (FggpplStatus, String)>) -> FggpplStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            FggpplStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FggpplStatus, String)> {
    if p.is_null() {
        return Err((FggpplStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (FggpplStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn null(what: &str) -> (FggpplStatus, String) {
    (FggpplStatus::NullArgument, format!("{what} is null"))
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fggppl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Compiles `source` under `params_json` (may be null). `passes` is a bit
/// set: 1 prune, 2 inline, 4 compose, 8 contract.
///
/// # Safety
/// `source` and a non-null `params_json` must be NUL-terminated strings;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_compile(
    source: *const c_char,
    params_json: *const c_char,
    passes: u8,
    out: *mut *mut FggpplGrammar,
) -> FggpplStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let src = text(source, "source")?;
        let params = if params_json.is_null() {
            Params::empty()
        } else {
            Params::from_str(text(params_json, "params_json")?).map_err(|e| (FggpplStatus::Frontend, e.to_string()))?
        };
        let cu = fggppl::compile(src, &params, PassSet::from_bits(passes))
            .map_err(|e| (FggpplStatus::Frontend, e.to_string()))?;
        *out = Box::into_raw(Box::new(FggpplGrammar { fgg: cu.fgg }));
        Ok(FggpplStatus::Ok)
    })
}

/// Parses and validates a grammar in the JSON interchange format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_grammar_from_json(json: *const c_char, out: *mut *mut FggpplGrammar) -> FggpplStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = fgg::json::from_str(text(json, "json")?).map_err(|e| (FggpplStatus::InvalidGrammar, e.to_string()))?;
        if let Some(d) = fgg::validate(&g).first() {
            return Err((FggpplStatus::InvalidGrammar, d.to_string()));
        }
        *out = Box::into_raw(Box::new(FggpplGrammar { fgg: g }));
        Ok(FggpplStatus::Ok)
    })
}

/// Serializes a grammar; release the string with [`fggppl_string_free`].
///
/// # Safety
/// `g` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_grammar_to_json(g: *const FggpplGrammar, out: *mut *mut c_char) -> FggpplStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("grammar"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CString::new(fgg::json::to_string_pretty(&g.fgg)).expect("JSON has no NUL");
        *out = s.into_raw();
        Ok(FggpplStatus::Ok)
    })
}

/// # Safety
/// `g` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_grammar_rule_count(g: *const FggpplGrammar, out: *mut usize) -> FggpplStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("grammar"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.fgg.rules.len();
        Ok(FggpplStatus::Ok)
    })
}

/// Solves for the start symbol. On `Divergent` and `NotConverged` the last
/// iterate is still stored in `out`. `iterations` may be null.
///
/// # Safety
/// `g` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_infer(
    g: *const FggpplGrammar,
    tol: f64,
    max_iter: usize,
    out: *mut *mut FggpplTensor,
    iterations: *mut usize,
) -> FggpplStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("grammar"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(tol > 0.0) {
            return Err((FggpplStatus::OutOfRange, "tol must be positive".into()));
        }
        let solver = Solver::new(&g.fgg).map_err(|e| (FggpplStatus::InvalidGrammar, e.to_string()))?;
        let state = solver.solve(&SolveOptions { tol, max_iter, ..SolveOptions::default() });
        if !iterations.is_null() {
            *iterations = state.iteration;
        }
        *out = Box::into_raw(Box::new(FggpplTensor { tensor: state.tau[&g.fgg.start].clone() }));
        match state.status {
            Status::Converged => Ok(FggpplStatus::Ok),
            Status::MaxIter => {
                set_error(format!("not converged after {} iterations", state.iteration));
                Ok(FggpplStatus::NotConverged)
            }
            Status::Divergent => {
                set_error(format!("weights diverged at iteration {}", state.iteration));
                Ok(FggpplStatus::Divergent)
            }
        }
    })
}

/// Number of entries.
///
/// # Safety
/// `t` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_tensor_len(t: *const FggpplTensor, out: *mut usize) -> FggpplStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = t.tensor.len();
        Ok(FggpplStatus::Ok)
    })
}

/// Entry `index` in row-major order.
///
/// # Safety
/// `t` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_tensor_get(t: *const FggpplTensor, index: usize, out: *mut f64) -> FggpplStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let x = t.tensor.data().get(index).ok_or_else(|| {
            (FggpplStatus::OutOfRange, format!("index {index} out of range for {} entries", t.tensor.len()))
        })?;
        *out = *x;
        Ok(FggpplStatus::Ok)
    })
}

/// Entries with their value tuples as a JSON array of `{"values": [...], "weight": w}`.
///
/// # Safety
/// `t` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fggppl_tensor_to_json(t: *const FggpplTensor, out: *mut *mut c_char) -> FggpplStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rows: Vec<serde_json::Value> = t
            .tensor
            .entries()
            .map(|(vals, w)| {
                serde_json::json!({
                    "values": vals.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
                    "weight": w,
                })
            })
            .collect();
        let s = CString::new(serde_json::Value::Array(rows).to_string()).expect("JSON has no NUL");
        *out = s.into_raw();
        Ok(FggpplStatus::Ok)
    })
}

/// # Safety
/// `g` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fggppl_grammar_free(g: *mut FggpplGrammar) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `t` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fggppl_tensor_free(t: *mut FggpplTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn fggppl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
