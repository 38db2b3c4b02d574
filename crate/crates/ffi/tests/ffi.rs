use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use tubelog_ffi::*;

fn parse(input: &str, seed: u64) -> (TlStatus, *mut TlForm) {
    let text = CString::new(input).unwrap();
    let mut form = ptr::null_mut();
    let status = unsafe { tl_form_parse(text.as_ptr(), seed, 1e-9, &mut form) };
    (status, form)
}

fn last_error() -> String {
    let p = tl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn residues_of_the_real_cubic() {
    let (status, form) = parse("2/(z*(z-1)*(z+1))", 0);
    assert_eq!(status, TlStatus::Ok);
    unsafe {
        assert_eq!(tl_form_degree(form), 3);
        assert_eq!(tl_form_is_generic(form), 0);
        let mut found = Vec::new();
        for j in 0..3 {
            let (mut pr, mut pi, mut rr, mut ri) = (0.0, 0.0, 0.0, 0.0);
            assert_eq!(tl_form_pole(form, j, &mut pr, &mut pi, &mut rr, &mut ri), TlStatus::Ok);
            assert!(pi.abs() < 1e-12 && ri.abs() < 1e-12);
            found.push((pr.round() as i32, rr));
        }
        found.sort_by_key(|p| p.0);
        for ((p, r), (ep, er)) in found.into_iter().zip([(-1, 1.0), (0, -2.0), (1, 1.0)]) {
            assert_eq!(p, ep);
            assert!((r - er).abs() < 1e-12);
        }
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(tl_form_pole(form, 3, &mut a, &mut b, &mut c, &mut d), TlStatus::OutOfRange);

        let mut bp = ptr::null_mut();
        assert_eq!(tl_blueprint_build(form, 0, &mut bp), TlStatus::NonGeneric);
        assert!(bp.is_null());
        assert!(last_error().contains("not generic"));
        tl_form_free(form);
    }
}

#[test]
fn quartic_blueprint_through_handles() {
    let (status, form) = parse("random:4", 1);
    assert_eq!(status, TlStatus::Ok);
    unsafe {
        assert_eq!(tl_form_is_generic(form), 1);
        let mut bp = ptr::null_mut();
        assert_eq!(tl_blueprint_build(form, 20_000, &mut bp), TlStatus::Ok);
        assert_eq!(tl_blueprint_side_count(bp), 6);
        assert_eq!(tl_blueprint_checks_pass(bp), 1);
        assert!(matches!(tl_blueprint_hexagon_case(bp), 1 | 2));
        let (mut sre, mut sim) = (0.0, 0.0);
        for i in 0..6 {
            let (mut re, mut im) = (0.0, 0.0);
            assert_eq!(tl_blueprint_side(bp, i, &mut re, &mut im), TlStatus::Ok);
            sre += re;
            sim += im;
        }
        assert!(sre.hypot(sim) < 1e-8);

        let mut json = ptr::null_mut();
        assert_eq!(tl_blueprint_json(bp, &mut json), TlStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        tl_string_free(json);
        assert!(text.starts_with('{') && text.contains("\"polygon\""));

        let mut again = ptr::null_mut();
        assert_eq!(tl_blueprint_build(form, 20_000, &mut again), TlStatus::Ok);
        let mut json2 = ptr::null_mut();
        assert_eq!(tl_blueprint_json(again, &mut json2), TlStatus::Ok);
        assert_eq!(CStr::from_ptr(json2).to_str().unwrap(), text);
        tl_string_free(json2);
        tl_blueprint_free(again);
        tl_blueprint_free(bp);
        tl_form_free(form);
    }
}

#[test]
fn form_from_pole_residue_arrays() {
    let poles = [1.0, 0.0, -0.5, 0.9, -0.6, -1.0];
    let residues = [1.0, 0.2, -0.3, 0.9, -0.7, -1.1];
    let mut form = ptr::null_mut();
    unsafe {
        assert_eq!(tl_form_from_residues(poles.as_ptr(), residues.as_ptr(), 3, 1e-9, &mut form), TlStatus::Ok);
        assert_eq!(tl_form_degree(form), 3);
        assert_eq!(tl_form_zero_count(form), 1);
        let mut json = ptr::null_mut();
        assert_eq!(tl_form_analyze_json(form, &mut json), TlStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"genericity\""));
        tl_string_free(json);
        tl_form_free(form);
    }
}

#[test]
fn bad_arguments_are_reported() {
    let (status, form) = parse("1/(z-", 0);
    assert_eq!(status, TlStatus::InvalidInput);
    assert!(form.is_null());
    assert!(last_error().contains("syntax"));
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(tl_form_parse(ptr::null(), 0, 1e-9, &mut out), TlStatus::NullPointer);
        assert_eq!(tl_blueprint_build(ptr::null(), 0, &mut ptr::null_mut()), TlStatus::NullPointer);
        assert_eq!(tl_form_degree(ptr::null()), 0);
        tl_form_free(ptr::null_mut());
        tl_blueprint_free(ptr::null_mut());
        tl_string_free(ptr::null_mut());
    }
    let text = CString::new("random:4").unwrap();
    let mut form = ptr::null_mut();
    assert_eq!(unsafe { tl_form_parse(text.as_ptr(), 0, -1.0, &mut form) }, TlStatus::InvalidInput);
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/tubelog.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["tl_form_parse", "tl_blueprint_build", "tl_blueprint_json", "tl_string_free", "tl_last_error"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).output() else {
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libtubelog_ffi.a");
    assert!(lib.is_file(), "static library not built at {}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out_dir = tempfile_dir();
    let bin = out_dir.join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}{}", String::from_utf8_lossy(&run.stdout), String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("sides=6"));
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tubelog-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
