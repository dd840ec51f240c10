use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use lsc_ffi::*;

fn last_error() -> String {
    let p = lsc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn system(name: &str) -> *mut LscSystem {
    let name = CString::new(name).unwrap();
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { lsc_system_from_catalog(name.as_ptr(), &mut sys) }, LscStatus::Ok);
    sys
}

#[test]
fn catalog_round_trip() {
    let sys = system("carpet104");
    let mut n = 0usize;
    let mut passed: c_int = 0;
    let mut d = 0.0;
    unsafe {
        assert_eq!(lsc_system_map_count(sys, &mut n), LscStatus::Ok);
        assert_eq!(lsc_system_validate(sys, &mut passed), LscStatus::Ok);
        assert_eq!(lsc_system_dimension(sys, 1e-12, &mut d), LscStatus::Ok);
        lsc_system_free(sys);
    }
    assert_eq!((n, passed), (104, 1));
    assert!(d > 1.87 && d < 1.88);
    assert!(lsc_last_error_message().is_null());
}

#[test]
fn errors_are_reported() {
    let name = CString::new("nope").unwrap();
    let mut sys = std::ptr::dangling_mut::<LscSystem>();
    assert_eq!(unsafe { lsc_system_from_catalog(name.as_ptr(), &mut sys) }, LscStatus::UnknownSystem);
    assert!(sys.is_null());
    assert!(last_error().contains("nope"));

    assert_eq!(unsafe { lsc_system_from_catalog(ptr::null(), &mut sys) }, LscStatus::NullPointer);
    assert_eq!(unsafe { lsc_system_map_count(ptr::null(), ptr::null_mut()) }, LscStatus::NullPointer);

    let bad = CString::new("name x\nradicand 0\nk 1\nmap 1/2 0 0\n").unwrap();
    assert_eq!(unsafe { lsc_system_from_ifs_text(bad.as_ptr(), &mut sys) }, LscStatus::Parse);
    assert!(last_error().contains("line"));

    let sys = system("sc8");
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { lsc_graph_build(sys, 0, ptr::null(), 0, &mut g) }, LscStatus::InvalidArgument);
    let rule = CString::new("theta:x").unwrap();
    assert_eq!(unsafe { lsc_graph_build(sys, 1, rule.as_ptr(), 0, &mut g) }, LscStatus::Parse);
    unsafe { lsc_system_free(sys) };
    // freeing null is a no-op
    unsafe {
        lsc_system_free(ptr::null_mut());
        lsc_graph_free(ptr::null_mut());
    }
}

#[test]
fn graph_solves() {
    let sys = system("sc8");
    let mut g = ptr::null_mut();
    let (mut v, mut e) = (0usize, 0usize);
    let (mut r, mut inf) = (0.0, -1);
    let mut lambda = 0.0;
    let left = CString::new("edge:left").unwrap();
    let right = CString::new("edge:right").unwrap();
    let bogus = CString::new("edge:middle").unwrap();
    unsafe {
        assert_eq!(lsc_graph_build(sys, 1, ptr::null(), 0, &mut g), LscStatus::Ok);
        assert_eq!(lsc_graph_size(g, &mut v, &mut e), LscStatus::Ok);
        assert_eq!(lsc_graph_resistance(g, left.as_ptr(), right.as_ptr(), 1e-10, &mut r, &mut inf), LscStatus::Ok);
        assert_eq!(lsc_graph_poincare(g, &mut lambda), LscStatus::Ok);
        assert_eq!(
            lsc_graph_resistance(g, bogus.as_ptr(), right.as_ptr(), 1e-10, &mut r, &mut inf),
            LscStatus::Parse
        );
        lsc_graph_free(g);
        lsc_system_free(sys);
    }
    assert_eq!((v, e), (8, 8));
    assert_eq!(inf, 0);
    // 8-cycle with uniform weights: 1/(8(2 - 2cos(pi/4)))
    let expected = 1.0 / (8.0 * (2.0 - 2.0 * (std::f64::consts::PI / 4.0).cos()));
    assert!((lambda - expected).abs() < 1e-8, "{lambda}");
}

#[test]
fn certificate_buffer_protocol() {
    let sys = system("carpet104");
    let mut needed = 0usize;
    let status = unsafe { lsc_claims_certificate(sys, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(status, LscStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    let status = unsafe { lsc_claims_certificate(sys, buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(status, LscStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(text.contains("witness 26250 > 26244\n"));
    assert!(text.ends_with("verdict contradiction\n"));
    unsafe { lsc_system_free(sys) };
}

#[test]
fn header_lists_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lsc.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 13);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

/// Compiles and runs a small C client against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_client() {
    let lib = target_dir().join("liblsc_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no archive at {} or no C compiler", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "lsc.h"
int main(void) {
    LscSystem *sys = NULL;
    if (lsc_system_from_catalog("sc8", &sys) != LSC_STATUS_OK) return 1;
    LscGraph *g = NULL;
    if (lsc_graph_build(sys, 2, "unit", 0, &g) != LSC_STATUS_OK) return 2;
    double r = 0; int inf = 0;
    if (lsc_graph_resistance(g, "edge:left", "edge:right", 1e-10, &r, &inf) != LSC_STATUS_OK) return 3;
    if (lsc_system_from_catalog("bogus", &sys) != LSC_STATUS_UNKNOWN_SYSTEM) return 4;
    if (strstr(lsc_last_error_message(), "bogus") == NULL) return 5;
    printf("%.12f\n", r);
    lsc_graph_free(g);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("client");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to compile");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exit {:?}", out.status);
    let r: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((r - 1.657261410788).abs() < 1e-9, "{r}");
}
