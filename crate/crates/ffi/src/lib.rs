//! C interface to `tubelog`.
//!
//! Forms and blueprints are opaque handles created by `tl_*` constructors and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`TlStatus`]; the message of the most recent failure on the calling
//! thread is available from [`tl_last_error`]. Strings handed out by the
//! library are released with [`tl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tubelog::blueprint::{assemble_surface, SurfaceBlueprint};
use tubelog::json::{to_canonical, AnalyzeDoc, BlueprintDoc};
use tubelog::petals::PetalSet;
use tubelog::pipeline::{self, Analysis, RunConfig};
use tubelog::ratform::{sample, RationalForm};
use tubelog::{Error, C64};

/// Result codes. The non-zero values of the command-line exit codes are
/// reused for the matching failures.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    InvalidInput = 1,
    NonGeneric = 2,
    Numerical = 3,
    NullPointer = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Opaque analyzed rational form.
pub struct TlForm {
    analysis: Analysis,
}

/// Opaque surface blueprint together with the data needed to serialize it.
pub struct TlBlueprint {
    analysis: Analysis,
    petals: PetalSet,
    blueprint: SurfaceBlueprint,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> TlStatus {
    match e {
        Error::Syntax { .. } | Error::InvalidInput(_) | Error::Json(_) | Error::Io(_) => TlStatus::InvalidInput,
        Error::NotRegularAtInfinity { .. } | Error::PoleNotSimple(_) | Error::NonGeneric(_) => TlStatus::NonGeneric,
        Error::Numerical { .. } | Error::Invariant { .. } => TlStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (TlStatus, String)>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            TlStatus::Panic
        }
    }
}

fn lift(e: Error) -> (TlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (TlStatus, String) {
    (TlStatus::NullPointer, "null pointer argument".to_string())
}

fn give_string(text: String, out: *mut *mut c_char) -> Result<(), (TlStatus, String)> {
    let c = CString::new(text).map_err(|_| (TlStatus::Numerical, "interior NUL in output".to_string()))?;
    // SAFETY: caller passes a valid out-pointer, checked non-null by callers.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn new_form(form: RationalForm, tol: f64) -> Result<*mut TlForm, (TlStatus, String)> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err((TlStatus::InvalidInput, format!("tolerance must be positive, got {tol}")));
    }
    let analysis = pipeline::analyze(form, tol).map_err(lift)?;
    Ok(Box::into_raw(Box::new(TlForm { analysis })))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses an expression in `z`, a JSON coefficient document, or
/// `random:<n>` (drawn from `seed`) and analyzes it with genericity
/// tolerance `tol`.
///
/// # Safety
/// `input` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_form_parse(input: *const c_char, seed: u64, tol: f64, out: *mut *mut TlForm) -> TlStatus {
    guard(|| {
        if input.is_null() || out.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(input)
            .to_str()
            .map_err(|_| (TlStatus::InvalidInput, "input is not UTF-8".to_string()))?;
        let form = pipeline::load_form(text, seed).map_err(lift)?;
        *out = new_form(form, tol)?;
        Ok(())
    })
}

/// Builds `sum residues[j] / (z - poles[j])` from `n` poles and residues,
/// each given as interleaved `re, im` pairs (`2 n` doubles).
///
/// # Safety
/// `poles` and `residues` must point to `2 n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_form_from_residues(
    poles: *const f64,
    residues: *const f64,
    n: usize,
    tol: f64,
    out: *mut *mut TlForm,
) -> TlStatus {
    guard(|| {
        if poles.is_null() || residues.is_null() || out.is_null() {
            return Err(null());
        }
        let read = |p: *const f64| -> Vec<C64> {
            std::slice::from_raw_parts(p, 2 * n).chunks(2).map(|c| C64::new(c[0], c[1])).collect()
        };
        let form = sample::from_poles_and_residues(&read(poles), &read(residues))
            .ok_or_else(|| (TlStatus::InvalidInput, "poles and residues do not define a form".to_string()))?;
        *out = new_form(form, tol)?;
        Ok(())
    })
}

/// # Safety
/// `form` must come from a `tl_form_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tl_form_free(form: *mut TlForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// Number of finite poles, or 0 for a null handle.
///
/// # Safety
/// `form` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_form_degree(form: *const TlForm) -> usize {
    form.as_ref().map_or(0, |f| f.analysis.form.n())
}

/// Number of distinct finite zeroes, or 0 for a null handle.
///
/// # Safety
/// `form` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_form_zero_count(form: *const TlForm) -> usize {
    form.as_ref().map_or(0, |f| f.analysis.form.zeroes.len())
}

/// 1 when every genericity condition holds, 0 otherwise.
///
/// # Safety
/// `form` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_form_is_generic(form: *const TlForm) -> i32 {
    form.as_ref().map_or(0, |f| i32::from(f.analysis.genericity.is_generic()))
}

/// Pole `j` and its residue.
///
/// # Safety
/// `form` must be a live handle; the four out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_form_pole(
    form: *const TlForm,
    j: usize,
    pole_re: *mut f64,
    pole_im: *mut f64,
    residue_re: *mut f64,
    residue_im: *mut f64,
) -> TlStatus {
    guard(|| {
        let f = form.as_ref().ok_or_else(null)?;
        if pole_re.is_null() || pole_im.is_null() || residue_re.is_null() || residue_im.is_null() {
            return Err(null());
        }
        let form = &f.analysis.form;
        if j >= form.n() {
            return Err((TlStatus::OutOfRange, format!("pole index {j} out of range for degree {}", form.n())));
        }
        *pole_re = form.poles[j].re;
        *pole_im = form.poles[j].im;
        *residue_re = form.residues[j].re;
        *residue_im = form.residues[j].im;
        Ok(())
    })
}

/// Canonical JSON of poles, residues, zeroes and the genericity report.
///
/// # Safety
/// `form` must be a live handle and `out` valid; free the string with
/// [`tl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tl_form_analyze_json(form: *const TlForm, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let f = form.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let doc = AnalyzeDoc::new(&f.analysis.form, &f.analysis.genericity);
        give_string(to_canonical(&doc).map_err(lift)?, out)
    })
}

/// Runs petals, geodesic tree and assembly. `mesh_resolution` of 0 selects
/// the default. Non-generic forms fail with `TL_STATUS_NON_GENERIC`.
///
/// # Safety
/// `form` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_build(form: *const TlForm, mesh_resolution: usize, out: *mut *mut TlBlueprint) -> TlStatus {
    guard(|| {
        let f = form.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let mut config = RunConfig { tol: f.analysis.genericity.tol, ..RunConfig::default() };
        if mesh_resolution != 0 {
            config.mesh_resolution = mesh_resolution;
        }
        config.validate().map_err(lift)?;
        let analysis = f.analysis.clone();
        let petals = pipeline::petals(&analysis).map_err(lift)?;
        let tree = pipeline::tree(&analysis.form, &petals, config.mesh_resolution).map_err(lift)?;
        let blueprint = assemble_surface(&analysis.form, &petals, &tree.tree).map_err(lift)?;
        *out = Box::into_raw(Box::new(TlBlueprint { analysis, petals, blueprint }));
        Ok(())
    })
}

/// # Safety
/// `bp` must come from [`tl_blueprint_build`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_free(bp: *mut TlBlueprint) {
    if !bp.is_null() {
        drop(Box::from_raw(bp));
    }
}

/// Number of polygon sides, or 0 for a null handle.
///
/// # Safety
/// `bp` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_side_count(bp: *const TlBlueprint) -> usize {
    bp.as_ref().map_or(0, |b| b.blueprint.polygon.sides.len())
}

/// Side `i` of the developed polygon as a complex vector.
///
/// # Safety
/// `bp` must be a live handle; `re` and `im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_side(bp: *const TlBlueprint, i: usize, re: *mut f64, im: *mut f64) -> TlStatus {
    guard(|| {
        let b = bp.as_ref().ok_or_else(null)?;
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        let sides = &b.blueprint.polygon.sides;
        let side = sides
            .get(i)
            .ok_or_else(|| (TlStatus::OutOfRange, format!("side index {i} out of range for {} sides", sides.len())))?;
        *re = side.vector.re;
        *im = side.vector.im;
        Ok(())
    })
}

/// Hexagon case (1 or 2) for degree four, 0 when undecided or for other
/// degrees.
///
/// # Safety
/// `bp` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_hexagon_case(bp: *const TlBlueprint) -> i32 {
    bp.as_ref().and_then(|b| b.blueprint.hexagon.as_ref()).map_or(0, |h| i32::from(h.case))
}

/// 1 when every invariant check of the blueprint passed, 0 otherwise.
///
/// # Safety
/// `bp` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_checks_pass(bp: *const TlBlueprint) -> i32 {
    bp.as_ref().map_or(0, |b| i32::from(b.blueprint.all_checks_pass()))
}

/// Canonical blueprint JSON, identical to the command-line output.
///
/// # Safety
/// `bp` must be a live handle and `out` valid; free the string with
/// [`tl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tl_blueprint_json(bp: *const TlBlueprint, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let b = bp.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let doc = BlueprintDoc::new(&b.analysis.form, &b.analysis.genericity, &b.petals, &b.blueprint);
        give_string(to_canonical(&doc).map_err(lift)?, out)
    })
}

/// # Safety
/// `s` must be a string returned by this library, or NULL.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
