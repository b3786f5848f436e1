use std::ffi::{CStr, CString};
use std::ptr;

use udp6_ffi::*;

const EX1: &str = r#"{"q": 100, "a1": 32, "a2": 33, "a3": 37, "a4": 22, "b1": 53, "b2": 65, "b3": 8, "b4": 4}"#;

fn params(json: &str) -> *mut Udp6Params {
    let s = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { udp6_params_from_json(s.as_ptr(), &mut p) }, Udp6Status::Ok);
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(udp6_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn evolve_and_export() {
    let p = params(EX1);
    let mut holds = false;
    assert_eq!(unsafe { udp6_check_constraint(p, &mut holds) }, Udp6Status::Ok);
    assert!(holds);

    let (y, z) = (CString::new("43").unwrap(), CString::new("40").unwrap());
    let mut b = ptr::null_mut();
    let st = unsafe { udp6_evolve(p, 0, -1, y.as_ptr(), -1, z.as_ptr(), -1, 2, 0, &mut b) };
    assert_eq!(st, Udp6Status::Ok);
    assert_eq!(unsafe { udp6_branches_count(b) }, 1);
    assert!(!unsafe { udp6_branches_truncated(b) });

    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { udp6_branches_to_csv(b, 0, &mut csv) }, Udp6Status::Ok);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_owned();
    assert_eq!(
        text,
        "m,sy,Y,sz,Z\n-1,-1,16,-1,-55\n0,-1,43,-1,40\n1,-1,122,-1,-28\n2,-1,133,-1,61\n"
    );

    let mut nfail = 99;
    assert_eq!(unsafe { udp6_verify_csv(p, csv, &mut nfail) }, Udp6Status::Ok);
    assert_eq!(nfail, 0);
    let bad = CString::new(text.replace("122", "121")).unwrap();
    assert_eq!(unsafe { udp6_verify_csv(p, bad.as_ptr(), &mut nfail) }, Udp6Status::Ok);
    assert!(nfail > 0);

    let mut none = ptr::null_mut();
    assert_eq!(unsafe { udp6_branches_to_csv(b, 5, &mut none) }, Udp6Status::OutOfRange);
    assert!(none.is_null());

    unsafe {
        udp6_string_free(csv);
        udp6_branches_free(b);
        udp6_params_free(p);
    }
}

#[test]
fn error_codes() {
    let bad = CString::new(EX1.replace("\"b4\": 4", "\"b4\": 5")).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { udp6_params_from_json(bad.as_ptr(), &mut p) }, Udp6Status::Ok);
    let (y, z) = (CString::new("43").unwrap(), CString::new("40").unwrap());
    let mut b = ptr::null_mut();
    let st = unsafe { udp6_evolve(p, 0, -1, y.as_ptr(), -1, z.as_ptr(), -1, 2, 0, &mut b) };
    assert_eq!(st, Udp6Status::Constraint);
    assert!(b.is_null());
    assert!(last_error().contains("B1+B2+A3+A4"));

    let st = unsafe { udp6_evolve(p, 0, 2, y.as_ptr(), -1, z.as_ptr(), -1, 2, 0, &mut b) };
    assert_eq!(st, Udp6Status::InvalidArgument);
    unsafe { udp6_params_free(p) };

    let junk = CString::new("{\"q\": 1}").unwrap();
    assert_eq!(
        unsafe { udp6_params_from_json(junk.as_ptr(), &mut p) },
        Udp6Status::Parse
    );
    assert!(p.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { udp6_params_from_json(ptr::null(), &mut p) },
        Udp6Status::NullPointer
    );
    assert_eq!(unsafe { udp6_branches_count(ptr::null()) }, 0);
    unsafe {
        udp6_params_free(ptr::null_mut());
        udp6_string_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_error() {
    let junk = CString::new("nope").unwrap();
    let mut p = ptr::null_mut();
    assert_ne!(unsafe { udp6_params_from_json(junk.as_ptr(), &mut p) }, Udp6Status::Ok);
    assert!(!last_error().is_empty());
    let p = params(EX1);
    assert!(last_error().is_empty());
    unsafe { udp6_params_free(p) };
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/udp6.h")).unwrap();
    for name in [
        "UDP6_H",
        "typedef struct Udp6Params Udp6Params",
        "typedef struct Udp6BranchSet Udp6BranchSet",
        "UDP6_STATUS_OK = 0",
        "UDP6_STATUS_CONSTRAINT",
        "udp6_params_from_json",
        "udp6_params_free",
        "udp6_check_constraint",
        "udp6_evolve",
        "udp6_branches_count",
        "udp6_branches_truncated",
        "udp6_branches_to_csv",
        "udp6_branches_free",
        "udp6_verify_csv",
        "udp6_string_free",
        "udp6_last_error_message",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}
