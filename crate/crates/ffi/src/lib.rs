//! C ABI over the `regint` engine.
//!
//! Expressions and values are opaque heap handles; every fallible call
//! returns a [`RegintStatus`] and writes its result through an out-pointer.
//! On failure the message is available from [`regint_last_error`] until the
//! next failing call on the same thread. Strings returned by this library
//! must be released with [`regint_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use regint::coeff::CoeffPoly;
use regint::expr::Expr;
use regint::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegintStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Index = 4,
    NotElliptic = 5,
    NotQuasiElliptic = 6,
    NotAlmostElliptic = 7,
    Unsupported = 8,
    Failed = 9,
    Panic = 10,
}

/// Engine selector for [`regint_reg`], passed as its integer value.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegintEngine {
    Iterated = 0,
    Forests = 1,
    Chains = 2,
    Hae = 3,
}

/// A parsed expression.
pub struct RegintExpr(Expr);

/// An exact value in `Q[I, E2, E4, E6, Y]`.
pub struct RegintValue(CoeffPoly);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RegintStatus {
    match e {
        Error::Syntax { .. } => RegintStatus::Syntax,
        Error::IndexError(_) | Error::InvalidIndex(_) => RegintStatus::Index,
        Error::NotElliptic(_) => RegintStatus::NotElliptic,
        Error::NotQuasiElliptic(_) => RegintStatus::NotQuasiElliptic,
        Error::NotAlmostElliptic => RegintStatus::NotAlmostElliptic,
        Error::UnsupportedInput(_) | Error::UnsupportedGenerator(_) => RegintStatus::Unsupported,
        _ => RegintStatus::Failed,
    }
}

/// Runs `f`, storing its error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (RegintStatus, String)>) -> RegintStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RegintStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RegintStatus::Panic
        }
    }
}

fn lift(e: Error) -> (RegintStatus, String) {
    (status_of(&e), format!("error[{}]: {e}", e.code()))
}

fn null() -> (RegintStatus, String) {
    (RegintStatus::NullPointer, "null pointer argument".into())
}

unsafe fn expr_ref<'a>(p: *const RegintExpr) -> Result<&'a Expr, (RegintStatus, String)> {
    p.as_ref().map(|e| &e.0).ok_or_else(null)
}

/// Computes into `out`, refusing a null `out` before doing any work.
unsafe fn put_value(
    out: *mut *mut RegintValue,
    f: impl FnOnce() -> Result<CoeffPoly, (RegintStatus, String)>,
) -> Result<(), (RegintStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(RegintValue(f()?)));
    Ok(())
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Parses `src`. `n` is the number of points, or 0 to use the largest index.
///
/// # Safety
/// `src` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regint_expr_parse(src: *const c_char, n: usize, out: *mut *mut RegintExpr) -> RegintStatus {
    guard(|| {
        if src.is_null() || out.is_null() {
            return Err(null());
        }
        let s = CStr::from_ptr(src)
            .to_str()
            .map_err(|_| (RegintStatus::InvalidUtf8, "input is not UTF-8".into()))?;
        let e = regint::parse_with_arity(s, (n > 0).then_some(n)).map_err(lift)?;
        *out = Box::into_raw(Box::new(RegintExpr(e)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from [`regint_expr_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn regint_expr_free(e: *mut RegintExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Canonical text form; null on a null handle.
///
/// # Safety
/// `e` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn regint_expr_render(e: *const RegintExpr) -> *mut c_char {
    match e.as_ref() {
        Some(e) => to_c(e.0.canonical().render()),
        None => ptr::null_mut(),
    }
}

/// Number of points the expression lives on.
///
/// # Safety
/// `e` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn regint_expr_arity(e: *const RegintExpr) -> usize {
    e.as_ref().map_or(0, |e| e.0.arity())
}

/// Regularized integral over all points; `engine` is a [`RegintEngine`] value.
///
/// # Safety
/// `e` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regint_reg(e: *const RegintExpr, engine: u32, out: *mut *mut RegintValue) -> RegintStatus {
    guard(|| {
        let e = expr_ref(e)?;
        put_value(out, || match engine {
            x if x == RegintEngine::Iterated as u32 => regint::reg_default(e).map_err(lift),
            x if x == RegintEngine::Forests as u32 => regint::reg_via_forests(e).map_err(lift),
            x if x == RegintEngine::Chains as u32 => regint::reg_via_chains(e).map_err(lift),
            x if x == RegintEngine::Hae as u32 => regint::reg_via_hae(e).map_err(lift),
            x => Err((RegintStatus::Unsupported, format!("unknown engine {x}"))),
        })
    })
}

/// Ordered A-cycle integral; `order[0]` is integrated first.
///
/// # Safety
/// `e` must be a live handle, `order` must point to `len` bytes and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regint_acycle(
    e: *const RegintExpr,
    order: *const u8,
    len: usize,
    out: *mut *mut RegintValue,
) -> RegintStatus {
    guard(|| {
        let e = expr_ref(e)?;
        if order.is_null() && len > 0 {
            return Err(null());
        }
        let sigma = if len == 0 { &[][..] } else { std::slice::from_raw_parts(order, len) };
        put_value(out, || regint::ordered_acycle(e, sigma).map_err(lift))
    })
}

/// Average of the ordered A-cycle integrals over all orders.
///
/// # Safety
/// `e` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regint_acycle_average(e: *const RegintExpr, out: *mut *mut RegintValue) -> RegintStatus {
    guard(|| {
        let e = expr_ref(e)?;
        put_value(out, || regint::average_acycle(e).map_err(lift))
    })
}

/// Drops every term containing `Y`.
///
/// # Safety
/// `v` must be a live value handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regint_value_holomorphic_limit(v: *const RegintValue, out: *mut *mut RegintValue) -> RegintStatus {
    guard(|| {
        let v = v.as_ref().ok_or_else(null)?;
        put_value(out, || Ok(v.0.holomorphic_limit()))
    })
}

/// Text form, e.g. `I^2*E2/12 - Y`.
///
/// # Safety
/// `v` must be a live value handle or null.
#[no_mangle]
pub unsafe extern "C" fn regint_value_render(v: *const RegintValue) -> *mut c_char {
    match v.as_ref() {
        Some(v) => to_c(v.0.render()),
        None => ptr::null_mut(),
    }
}

/// Text form in the basis `I, E2hat, E4, E6`; null if the value is not of
/// that form (see [`regint_last_error`]).
///
/// # Safety
/// `v` must be a live value handle or null.
#[no_mangle]
pub unsafe extern "C" fn regint_value_render_almost_holomorphic(v: *const RegintValue) -> *mut c_char {
    let Some(v) = v.as_ref() else {
        return ptr::null_mut();
    };
    match v.0.to_almost_holomorphic() {
        Ok(h) => to_c(h.render_with("E2hat")),
        Err(e) => {
            set_error(format!("error[{}]: {e}", e.code()));
            ptr::null_mut()
        }
    }
}

/// Nonzero when the value is exactly zero.
///
/// # Safety
/// `v` must be a live value handle or null.
#[no_mangle]
pub unsafe extern "C" fn regint_value_is_zero(v: *const RegintValue) -> i32 {
    v.as_ref().map_or(0, |v| v.0.is_zero() as i32)
}

/// Nonzero when both values are equal.
///
/// # Safety
/// Both arguments must be live value handles or null.
#[no_mangle]
pub unsafe extern "C" fn regint_value_equal(a: *const RegintValue, b: *const RegintValue) -> i32 {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => (a.0 == b.0) as i32,
        _ => 0,
    }
}

/// # Safety
/// `v` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn regint_value_free(v: *mut RegintValue) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Message of the last failure on this thread, or null. Owned by the
/// library; valid until the next failing call.
#[no_mangle]
pub extern "C" fn regint_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn regint_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn regint_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
