//! C ABI over `npwigner`.
//!
//! Kernels are opaque handles. Every call returns an [`NpwStatus`]; on failure
//! the message is available from [`npw_last_error`] on the same thread.
//! Strings handed out by the library are released with [`npw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use npwigner::fock::{BasisWindow, FockOperator};
use npwigner::kernel::{export_kernel, import_kernel, KernelModel, Variant, WignerKernel};
use npwigner::verify::{full_report, Tolerances, VerifyConfig};
use npwigner::wigner::{wigner_of_state, NRange, ThetaGrid};
use npwigner::Error;
use num_complex::Complex64 as C64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NpwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    WindowExceeded = 3,
    Domain = 4,
    NotDensity = 5,
    Parse = 6,
    Numeric = 7,
    Panic = 8,
}

/// Opaque kernel handle.
pub struct NpwKernel {
    inner: WignerKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NpwStatus {
    match e {
        Error::InvalidArgument(_) | Error::Index { .. } | Error::WindowMismatch { .. } => NpwStatus::InvalidArgument,
        Error::WindowExceeded { .. } | Error::NRange { .. } => NpwStatus::WindowExceeded,
        Error::Domain(_) => NpwStatus::Domain,
        Error::NotDensity(_) => NpwStatus::NotDensity,
        Error::Parse(_) => NpwStatus::Parse,
        Error::CutoffTooSmall { .. } | Error::InvalidSpectrum(_) | Error::Aliasing { .. } => NpwStatus::Numeric,
    }
}

fn guard<F: FnOnce() -> Result<(), (NpwStatus, String)>>(f: F) -> NpwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NpwStatus::Ok
        }
        Ok(Err((s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            NpwStatus::Panic
        }
    }
}

fn lib(e: Error) -> (NpwStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NpwStatus, String) {
    (NpwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NpwStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (NpwStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn hand_out(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the thread.
#[no_mangle]
pub extern "C" fn npw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn npw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn npw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Kernel with base matrix on [n_min, n_max]; `variant` is one of w1, w2, w3, s1, s2.
///
/// # Safety
/// `variant` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_new(variant: *const c_char, n_min: i64, n_max: i64, out: *mut *mut NpwKernel) -> NpwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let v: Variant = read_str(variant, "variant")?.parse().map_err(lib)?;
        let w = BasisWindow::new(n_min, n_max).map_err(lib)?;
        let k = WignerKernel::build(v, w).map_err(lib)?;
        *out = Box::into_raw(Box::new(NpwKernel { inner: k }));
        Ok(())
    })
}

/// Smallest kernel serving states on [s_min, s_max] for every n in [n_lo, n_hi].
///
/// # Safety
/// As for [`npw_kernel_new`].
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_for_states(
    variant: *const c_char,
    s_min: i64,
    s_max: i64,
    n_lo: i64,
    n_hi: i64,
    out: *mut *mut NpwKernel,
) -> NpwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let v: Variant = read_str(variant, "variant")?.parse().map_err(lib)?;
        let w = BasisWindow::new(s_min, s_max).map_err(lib)?;
        let k = WignerKernel::for_states(v, w, n_lo, n_hi).map_err(lib)?;
        *out = Box::into_raw(Box::new(NpwKernel { inner: k }));
        Ok(())
    })
}

/// # Safety
/// `kern` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_free(kern: *mut NpwKernel) {
    if !kern.is_null() {
        drop(Box::from_raw(kern));
    }
}

/// Base window of the kernel.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_window(kern: *const NpwKernel, n_min: *mut i64, n_max: *mut i64) -> NpwStatus {
    guard(|| {
        let k = kern.as_ref().ok_or_else(|| null("kernel"))?;
        if n_min.is_null() || n_max.is_null() {
            return Err(null("output"));
        }
        let w = k.inner.window();
        *n_min = w.n_min;
        *n_max = w.n_max;
        Ok(())
    })
}

/// ⟨k|Ŵ(n,θ)|ℓ⟩.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_element(
    kern: *const NpwKernel,
    k: i64,
    l: i64,
    n: i64,
    theta: f64,
    re: *mut f64,
    im: *mut f64,
) -> NpwStatus {
    guard(|| {
        let kn = kern.as_ref().ok_or_else(|| null("kernel"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let z = kn.inner.element(k, l, n, theta).map_err(lib)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Text export of the base matrix plus `samples` replay tuples; free with [`npw_string_free`].
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_export(kern: *const NpwKernel, samples: usize, out: *mut *mut c_char) -> NpwStatus {
    guard(|| {
        let k = kern.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = hand_out(export_kernel(&k.inner, samples));
        Ok(())
    })
}

/// Kernel from a text export.
///
/// # Safety
/// `text` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn npw_kernel_import(text: *const c_char, out: *mut *mut NpwKernel) -> NpwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let imp = import_kernel(read_str(text, "text")?).map_err(lib)?;
        *out = Box::into_raw(Box::new(NpwKernel { inner: imp.kernel }));
        Ok(())
    })
}

/// W(n,θ) for a density matrix on [s_min, s_max].
///
/// `rho_re`/`rho_im` are row-major dim×dim; `out` receives (n_hi−n_lo+1)×n_theta values,
/// row n, column θ-node.
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn npw_wigner(
    kern: *const NpwKernel,
    s_min: i64,
    s_max: i64,
    rho_re: *const f64,
    rho_im: *const f64,
    n_lo: i64,
    n_hi: i64,
    thetas: *const f64,
    n_theta: usize,
    out: *mut f64,
) -> NpwStatus {
    guard(|| {
        let k = kern.as_ref().ok_or_else(|| null("kernel"))?;
        if rho_re.is_null() || rho_im.is_null() || thetas.is_null() || out.is_null() {
            return Err(null("buffer"));
        }
        let w = BasisWindow::new(s_min, s_max).map_err(lib)?;
        let d = w.dim();
        let re = std::slice::from_raw_parts(rho_re, d * d);
        let im = std::slice::from_raw_parts(rho_im, d * d);
        let rho = FockOperator::from_fn(w, |a, b| {
            let (i, j) = ((a - s_min) as usize, (b - s_min) as usize);
            C64::new(re[i * d + j], im[i * d + j])
        });
        let nr = NRange::new(n_lo, n_hi).map_err(lib)?;
        let grid = ThetaGrid::from_nodes(std::slice::from_raw_parts(thetas, n_theta).to_vec());
        let g = wigner_of_state(&k.inner, &rho, nr, &grid).map_err(lib)?;
        let dst = std::slice::from_raw_parts_mut(out, nr.len() * n_theta);
        for (slot, v) in dst.iter_mut().zip(g.values.iter()) {
            *slot = *v;
        }
        Ok(())
    })
}

/// Condition report as JSON; `matches` is set to 1 when every verdict is as expected.
/// A non-positive `tol` keeps the default thresholds.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn npw_verify(
    variant: *const c_char,
    n_min: i64,
    n_max: i64,
    seed: u64,
    tol: f64,
    json: *mut *mut c_char,
    matches: *mut i32,
) -> NpwStatus {
    guard(|| {
        if json.is_null() || matches.is_null() {
            return Err(null("output"));
        }
        let v: Variant = read_str(variant, "variant")?.parse().map_err(lib)?;
        let w = BasisWindow::new(n_min, n_max).map_err(lib)?;
        let cfg = VerifyConfig {
            seed,
            tolerances: if tol > 0.0 { Tolerances::uniform(tol) } else { Tolerances::default() },
            ..VerifyConfig::default()
        };
        let r = full_report(v, w, &cfg).map_err(lib)?;
        *matches = r.matches_expected() as i32;
        *json = hand_out(r.to_json());
        Ok(())
    })
}
