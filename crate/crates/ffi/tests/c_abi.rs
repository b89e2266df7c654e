use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use s2m_ffi::*;

fn free_problem(json: Option<&str>) -> *mut S2mProblem {
    let json = json.map(|j| CString::new(j).unwrap());
    let mut p = ptr::null_mut();
    let s = unsafe { s2m_problem_new(0.0, 1.0, json.as_ref().map_or(ptr::null(), |j| j.as_ptr()), 0, &mut p) };
    assert_eq!(s, S2mStatus::Ok);
    p
}

fn last_error() -> String {
    let p = s2m_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn eigenvalues_of_free_problem() {
    let p = free_problem(None);
    let mut out = [0.0; 5];
    assert_eq!(unsafe { s2m_dirichlet_eigenvalues(p, 5, out.as_mut_ptr(), out.len()) }, S2mStatus::Ok);
    for (k, v) in out.iter().enumerate() {
        let exact = ((k + 1) as f64 * std::f64::consts::PI).powi(2);
        assert!((v - exact).abs() <= 1e-10 * exact);
    }
    assert_eq!(unsafe { s2m_dirichlet_eigenvalues(p, 6, out.as_mut_ptr(), out.len()) }, S2mStatus::BufferTooSmall);
    assert!(last_error().contains("need 6"));
    unsafe { s2m_problem_free(p) };
}

#[test]
fn split_multiplicities() {
    let p = free_problem(Some(r#"{"type":"zero"}"#));
    let mut values = [0.0; 8];
    let mut mult = [0u8; 8];
    let mut written = 0usize;
    let s = unsafe { s2m_split_eigenvalues(p, 0.5, 6, values.as_mut_ptr(), mult.as_mut_ptr(), 8, &mut written) };
    assert_eq!(s, S2mStatus::Ok);
    assert_eq!(written, 3);
    assert_eq!(&mult[..3], &[2, 2, 2]);
    let exact = (2.0 * std::f64::consts::PI).powi(2);
    assert!((values[0] - exact).abs() <= 1e-9 * exact);
    unsafe { s2m_problem_free(p) };
}

#[test]
fn bad_inputs_give_codes() {
    let mut p = ptr::null_mut();
    let json = CString::new("{\"type\":\"nope\"}").unwrap();
    assert_eq!(unsafe { s2m_problem_new(0.0, 1.0, json.as_ptr(), 0, &mut p) }, S2mStatus::Parse);
    assert_eq!(unsafe { s2m_problem_new(1.0, 0.0, ptr::null(), 0, &mut p) }, S2mStatus::InvalidArgument);
    assert_eq!(unsafe { s2m_problem_new(0.0, 1.0, ptr::null(), 0, ptr::null_mut()) }, S2mStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { s2m_green_diag(ptr::null(), -1.0, 0.5, &mut v) }, S2mStatus::NullPointer);
}

#[test]
fn green_pole_is_reported() {
    let p = free_problem(None);
    let mut g = 0.0;
    let pi2 = std::f64::consts::PI.powi(2);
    assert_eq!(unsafe { s2m_green_diag(p, pi2, 0.5, &mut g) }, S2mStatus::PoleProximity);
    assert_eq!(unsafe { s2m_green_diag(p, 0.0, 0.5, &mut g) }, S2mStatus::Ok);
    assert!((g - 0.25).abs() < 1e-9);
    unsafe { s2m_problem_free(p) };
}

#[test]
fn reconstruction_through_handles() {
    let mut pair = ptr::null_mut();
    assert_eq!(unsafe { s2m_pair_new_free(0.0, 1.0, 0.3, 4000, &mut pair) }, S2mStatus::Ok);
    for method in [S2M_METHOD_LIMIT, S2M_METHOD_RATIO] {
        let mut c = 0.0;
        assert_eq!(unsafe { s2m_pair_normalization(pair, method, &mut c) }, S2mStatus::Ok);
        assert!((c - 0.21).abs() < 1e-3 * 0.21, "{c}");
        for k in 1..=4 {
            let (mut esq, mut tail) = (0.0, 0.0);
            assert_eq!(unsafe { s2m_pair_esq(pair, k, method, &mut esq, &mut tail) }, S2mStatus::Ok);
            let exact = 2.0 * (k as f64 * std::f64::consts::PI * 0.3).sin().powi(2);
            assert!((esq - exact).abs() <= 1e-3 * exact, "k={k} {esq} {exact}");
            assert!(tail >= 0.0);
        }
    }
    let mut esq = 0.0;
    assert_eq!(unsafe { s2m_pair_esq(pair, 1, 5, &mut esq, ptr::null_mut()) }, S2mStatus::InvalidArgument);
    unsafe { s2m_pair_free(pair) };
}

#[test]
fn computed_pair_for_linear_potential() {
    let p = free_problem(Some(r#"{"type":"polynomial","coeffs":[0,1]}"#));
    let mut pair = ptr::null_mut();
    assert_eq!(unsafe { s2m_pair_new(p, 0.5, 400, &mut pair) }, S2mStatus::Ok);
    let (mut by_limit, mut by_ratio) = (0.0, 0.0);
    unsafe {
        assert_eq!(s2m_pair_esq(pair, 1, S2M_METHOD_LIMIT, &mut by_limit, ptr::null_mut()), S2mStatus::Ok);
        assert_eq!(s2m_pair_esq(pair, 1, S2M_METHOD_RATIO, &mut by_ratio, ptr::null_mut()), S2mStatus::Ok);
        s2m_pair_free(pair);
        s2m_problem_free(p);
    }
    assert!((by_limit - by_ratio).abs() < 1e-3, "{by_limit} {by_ratio}");
}

#[test]
fn matrix_components() {
    let re = [2.0, 1.0, 1.0, 2.0];
    let mut out = [0.0; 4];
    let mut generic = [9u8; 4];
    let s = unsafe { s2m_matrix_components(2, re.as_ptr(), ptr::null(), out.as_mut_ptr(), generic.as_mut_ptr(), 4) };
    assert_eq!(s, S2mStatus::Ok);
    assert_eq!(generic, [1; 4]);
    for v in out {
        assert!((v - 0.5).abs() < 1e-12);
    }
    let diag = [1.0, 0.0, 0.0, 1.0];
    let s = unsafe { s2m_matrix_components(2, diag.as_ptr(), ptr::null(), out.as_mut_ptr(), generic.as_mut_ptr(), 4) };
    assert_eq!(s, S2mStatus::Ok);
    assert_eq!(generic, [0; 4]);
    assert!(out.iter().all(|v| v.is_nan()));
    let skew = [0.0, 1.0, -1.0, 0.0];
    let im = [0.0, 1.0, 1.0, 0.0];
    let s = unsafe { s2m_matrix_components(2, skew.as_ptr(), im.as_ptr(), out.as_mut_ptr(), ptr::null_mut(), 4) };
    assert_eq!(s, S2mStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(s2m_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/s2m.h")).unwrap();
    let source = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct S2mProblem S2mProblem;"));
    assert!(header.contains("S2M_STATUS_POLE_PROXIMITY = 5"));
}

fn static_lib() -> Option<PathBuf> {
    // tests/<name> lives in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libs2m_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_header() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not built; skipping C link check");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping C link check");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("examples/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
