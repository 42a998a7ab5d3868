use std::f64::consts::TAU;
use std::ffi::{c_char, CStr, CString};
use std::process::Command;
use std::ptr;

use npwigner_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(npw_last_error()) }.to_str().unwrap().to_owned()
}

fn new_kernel(v: &str, lo: i64, hi: i64) -> *mut NpwKernel {
    let mut k = ptr::null_mut();
    let s = unsafe { npw_kernel_new(cstr(v).as_ptr(), lo, hi, &mut k) };
    assert_eq!(s, NpwStatus::Ok, "{}", last_error());
    k
}

fn element(k: *const NpwKernel, a: i64, b: i64, n: i64, t: f64) -> (NpwStatus, f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    let s = unsafe { npw_kernel_element(k, a, b, n, t, &mut re, &mut im) };
    (s, re, im)
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(npw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn kernel_lifecycle_and_elements() {
    let k = new_kernel("s1", -8, 8);
    let (mut lo, mut hi) = (0, 0);
    assert_eq!(unsafe { npw_kernel_window(k, &mut lo, &mut hi) }, NpwStatus::Ok);
    assert_eq!((lo, hi), (-8, 8));
    let (s, re, im) = element(k, 1, 1, 1, 0.3);
    assert_eq!(s, NpwStatus::Ok);
    assert!((re - 1.0 / TAU).abs() < 1e-15 && im.abs() < 1e-15);
    assert!(last_error().is_empty());
    let (s, ..) = element(k, 40, 0, 0, 0.0);
    assert_eq!(s, NpwStatus::WindowExceeded);
    assert!(!last_error().is_empty());
    unsafe { npw_kernel_free(k) };
}

#[test]
fn for_states_covers_the_requested_range() {
    let mut k = ptr::null_mut();
    let s = unsafe { npw_kernel_for_states(cstr("w2").as_ptr(), -4, 4, -10, 10, &mut k) };
    assert_eq!(s, NpwStatus::Ok);
    assert_eq!(element(k, 4, -4, 10, 0.2).0, NpwStatus::Ok);
    unsafe { npw_kernel_free(k) };
}

#[test]
fn null_pointers_are_reported() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { npw_kernel_new(ptr::null(), 0, 4, &mut k) }, NpwStatus::NullPointer);
    assert!(k.is_null());
    assert!(last_error().contains("variant"));
    assert_eq!(unsafe { npw_kernel_new(cstr("w1").as_ptr(), 0, 4, ptr::null_mut()) }, NpwStatus::NullPointer);
    assert_eq!(element(ptr::null(), 0, 0, 0, 0.0).0, NpwStatus::NullPointer);
    let real = new_kernel("w1", -2, 2);
    let mut re = 0.0;
    assert_eq!(unsafe { npw_kernel_element(real, 0, 0, 0, 0.0, &mut re, ptr::null_mut()) }, NpwStatus::NullPointer);
    unsafe {
        npw_kernel_free(real);
        npw_kernel_free(ptr::null_mut());
        npw_string_free(ptr::null_mut());
    }
}

#[test]
fn argument_errors_map_to_codes() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { npw_kernel_new(cstr("w9").as_ptr(), 0, 4, &mut k) }, NpwStatus::Parse);
    assert_eq!(unsafe { npw_kernel_new(cstr("w1").as_ptr(), 4, 0, &mut k) }, NpwStatus::InvalidArgument);
    assert_eq!(unsafe { npw_kernel_import(cstr("not a kernel").as_ptr(), &mut k) }, NpwStatus::Parse);
    assert!(k.is_null());
}

#[test]
fn export_import_roundtrip() {
    let k = new_kernel("w3", -6, 6);
    let mut text: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { npw_kernel_export(k, 8, &mut text) }, NpwStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { npw_kernel_import(text, &mut back) }, NpwStatus::Ok);
    for (a, b, n, t) in [(0, 0, 0, 0.0), (2, -1, 1, 0.7), (-3, 2, -1, 4.1)] {
        let x = element(k, a, b, n, t);
        let y = element(back, a, b, n, t);
        assert!((x.1 - y.1).abs() <= 1e-15 && (x.2 - y.2).abs() <= 1e-15);
    }
    unsafe {
        npw_string_free(text);
        npw_kernel_free(k);
        npw_kernel_free(back);
    }
}

#[test]
fn wigner_of_a_number_state() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { npw_kernel_for_states(cstr("s1").as_ptr(), 0, 5, 0, 5, &mut k) }, NpwStatus::Ok);
    let d = 6usize;
    let mut re = vec![0.0; d * d];
    let im = vec![0.0; d * d];
    re[2 * d + 2] = 1.0;
    let thetas = [0.0, 1.0, 2.0, 3.0];
    let mut out = vec![f64::NAN; 6 * thetas.len()];
    let s = unsafe { npw_wigner(k, 0, 5, re.as_ptr(), im.as_ptr(), 0, 5, thetas.as_ptr(), thetas.len(), out.as_mut_ptr()) };
    assert_eq!(s, NpwStatus::Ok, "{}", last_error());
    for (i, v) in out.iter().enumerate() {
        let expected = if i / thetas.len() == 2 { 1.0 / TAU } else { 0.0 };
        assert!((v - expected).abs() <= 1e-12);
    }
    re[2 * d + 2] = -1.0;
    let s = unsafe { npw_wigner(k, 0, 5, re.as_ptr(), im.as_ptr(), 0, 5, thetas.as_ptr(), thetas.len(), out.as_mut_ptr()) };
    assert_eq!(s, NpwStatus::NotDensity);
    unsafe { npw_kernel_free(k) };
}

#[test]
fn verify_reports_json() {
    let mut json: *mut c_char = ptr::null_mut();
    let mut matches = -1;
    let s = unsafe { npw_verify(cstr("w2").as_ptr(), -6, 6, 42, 0.0, &mut json, &mut matches) };
    assert_eq!(s, NpwStatus::Ok, "{}", last_error());
    assert_eq!(matches, 1);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"variant\"") && text.contains("w2"));
    unsafe { npw_string_free(json) };
    let s = unsafe { npw_verify(cstr("w2").as_ptr(), -6, 6, 42, 1e-300, &mut json, &mut matches) };
    assert_eq!(s, NpwStatus::Ok);
    assert_eq!(matches, 0);
    unsafe { npw_string_free(json) };
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/npwigner.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["npw_kernel_new", "npw_kernel_element", "npw_wigner", "npw_verify", "npw_last_error", "NpwKernel"] {
        assert!(text.contains(sym), "{sym}");
    }
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return (int)NPW_STATUS_OK; }}\n")).unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output() {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler; header syntax not checked"),
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("npw-abi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
