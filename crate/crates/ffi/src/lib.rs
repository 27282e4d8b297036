//! C ABI over turtleglyph.
//!
//! Models are opaque `TgModel` handles. Every call returns a `TgStatus`;
//! strings handed back to the caller are NUL-terminated UTF-8 owned by the
//! library and released with `tg_string_free`. On failure the message is
//! available from `tg_last_error` until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use turtleglyph::envelope::{equivalence_envelope, query_envelope};
use turtleglyph::layout::{layout_tree, layout_turtleback};
use turtleglyph::render::{render_tree, render_turtleback, render_turtleback_chord, Style};
use turtleglyph::verify::check_equivalence;
use turtleglyph::{evaluate, parse_model, parse_query, Error, EventTree};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Validation = 4,
    /// The condition of a query has probability zero.
    ZeroCondition = 5,
    Runtime = 6,
    /// A bug: the library panicked. The handle should not be reused.
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgDiagram {
    Turtleback = 0,
    /// Turtleback with the root split by a straight chord; the root must
    /// have exactly two events.
    TurtlebackChord = 1,
    Tree = 2,
}

/// Opaque parsed and validated model.
pub struct TgModel {
    tree: EventTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TgStatus {
    match e {
        Error::Syntax(_) | Error::InvalidName(_) => TgStatus::Syntax,
        Error::Validation(_) => TgStatus::Validation,
        Error::ZeroCondition => TgStatus::ZeroCondition,
        _ => TgStatus::Runtime,
    }
}

/// Runs `f`, recording any error or panic for `tg_last_error`.
fn guard(f: impl FnOnce() -> Result<(), TgStatus>) -> TgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal error".into());
            TgStatus::Internal
        }
    }
}

fn fail(e: Error) -> TgStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, TgStatus> {
    if p.is_null() {
        set_error("null argument".into());
        return Err(TgStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        TgStatus::InvalidUtf8
    })
}

unsafe fn model_ref<'a>(m: *const TgModel) -> Result<&'a TgModel, TgStatus> {
    m.as_ref().ok_or_else(|| {
        set_error("null model".into());
        TgStatus::NullArgument
    })
}

unsafe fn hand_out(out: *mut *mut c_char, s: String) -> Result<(), TgStatus> {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(TgStatus::NullArgument);
    }
    let c = CString::new(s).map_err(|_| {
        set_error("output contains NUL".into());
        TgStatus::Internal
    })?;
    *out = c.into_raw();
    Ok(())
}

/// Parses and validates a model. On success `*out` owns a new handle.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_model_parse(src: *const c_char, out: *mut *mut TgModel) -> TgStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return Err(TgStatus::NullArgument);
        }
        *out = ptr::null_mut();
        let text = read_str(src)?;
        let tree = parse_model(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(TgModel { tree }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from `tg_model_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tg_model_free(model: *mut TgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of leaf atoms in the model, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tg_model_leaf_count(model: *const TgModel) -> usize {
    model
        .as_ref()
        .map_or(0, |m| turtleglyph::leaves(&m.tree).len())
}

// Doc comments land in the C header, where a star-slash would end the comment.
/// Evaluates a query such as `P(L/S)` and writes its JSON envelope.
///
/// # Safety
/// `model` must be a live handle, `query` a NUL-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_query_json(
    model: *const TgModel,
    query: *const c_char,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let m = model_ref(model)?;
        let q = parse_query(read_str(query)?).map_err(|e| fail(e.into()))?;
        let r = evaluate(&m.tree, &q).map_err(fail)?;
        hand_out(out, query_envelope(&m.tree, &q, &r).to_json())
    })
}

/// Renders an SVG document on a square canvas of `size` pixels.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_render_svg(
    model: *const TgModel,
    kind: TgDiagram,
    size: u32,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let m = model_ref(model)?;
        let style = Style {
            canvas_size: size,
            ..Style::default()
        };
        let rendered = match kind {
            TgDiagram::Turtleback => layout_turtleback(&m.tree).and_then(|l| render_turtleback(&l, &style)),
            TgDiagram::TurtlebackChord => {
                layout_turtleback(&m.tree).and_then(|l| render_turtleback_chord(&l, &style))
            }
            TgDiagram::Tree => layout_tree(&m.tree).and_then(|l| render_tree(&l, &style)),
        }
        .map_err(fail)?;
        hand_out(out, rendered.svg)
    })
}

/// Checks that every region's area equals its path product and writes the
/// report envelope.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_check_json(model: *const TgModel, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let m = model_ref(model)?;
        let layout = layout_turtleback(&m.tree).map_err(fail)?;
        let report = check_equivalence(&m.tree, &layout).map_err(fail)?;
        hand_out(out, equivalence_envelope(&m.tree, &report).to_json())
    })
}

/// Frees a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library.
#[no_mangle]
pub extern "C" fn tg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn tg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
