//! C ABI for the exact commutator-factorization library.
//!
//! Matrices, certificates and reports cross the boundary as JSON strings in
//! the same canonical encodings the CLI uses; parsed certificates are held
//! behind an opaque handle. Every returned string is heap-allocated and must
//! be released with `ordk_string_free`; handles with `ordk_cert_free`.
//! Return codes mirror the CLI exit codes.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ordk::commfact::Certificate;
use ordk::error::Error;
use ordk::job::{run_factor, run_verify, Mode};
use ordk::jsonio;
use ordk::ring::make_ring;

pub const ORDK_OK: i32 = 0;
pub const ORDK_VERIFY_FAILED: i32 = 1;
pub const ORDK_PARSE_ERROR: i32 = 2;
pub const ORDK_PRECONDITION: i32 = 3;
pub const ORDK_INTERNAL: i32 = 4;
pub const ORDK_NULL_ARGUMENT: i32 = 5;
pub const ORDK_PANIC: i32 = 6;

/// Opaque parsed certificate.
pub struct OrdkCert {
    cert: Certificate,
}

fn set_out(slot: *mut *mut c_char, text: String) {
    if slot.is_null() {
        return;
    }
    let c = CString::new(text).unwrap_or_else(|_| CString::new("invalid utf-8").unwrap());
    unsafe { *slot = c.into_raw() };
}

fn clear_out(slot: *mut *mut c_char) {
    if !slot.is_null() {
        unsafe { *slot = ptr::null_mut() };
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

fn error_code(e: &Error) -> i32 {
    e.exit_code()
}

fn guard<F: FnOnce() -> i32>(out_message: *mut *mut c_char, f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_out(out_message, "internal panic".into());
            ORDK_PANIC
        }
    }
}

/// Factors a matrix and writes the certificate JSON to `out_cert_json`.
///
/// `mode` is "ut", "sl" or "vk"; `ring` is "Q", "Fp:<p>" or "cyclo:<m>";
/// `window` 0 picks the default verification window. On error a diagnostic
/// is written to `out_message`.
#[no_mangle]
pub extern "C" fn ordk_factor(
    mode: *const c_char,
    ring: *const c_char,
    k: u32,
    matrix_json: *const c_char,
    window: u32,
    out_cert_json: *mut *mut c_char,
    out_message: *mut *mut c_char,
) -> i32 {
    clear_out(out_cert_json);
    clear_out(out_message);
    guard(out_message, || {
        let (Some(mode), Some(ring), Some(matrix)) = (unsafe { read_str(mode) }, unsafe {
            read_str(ring)
        }, unsafe { read_str(matrix_json) }) else {
            set_out(out_message, "null or non-utf8 argument".into());
            return ORDK_NULL_ARGUMENT;
        };
        let inner = || -> Result<String, Error> {
            let mode = Mode::from_str(mode)?;
            let ctx = parse_ring(ring, k)?;
            let value: serde_json::Value =
                serde_json::from_str(matrix).map_err(|e| Error::Parse(e.to_string()))?;
            let win = if window == 0 { None } else { Some(window as usize) };
            let outcome = run_factor(mode, &ctx, &value, win)?;
            Ok(jsonio::canonical_string(&jsonio::cert_to_value(&outcome.cert)))
        };
        match inner() {
            Ok(json) => {
                set_out(out_cert_json, json);
                ORDK_OK
            }
            Err(e) => {
                set_out(out_message, e.to_string());
                error_code(&e)
            }
        }
    })
}

fn parse_ring(s: &str, k: u32) -> Result<ordk::ring::RingCtx, Error> {
    use ordk::ring::RingKind;
    let kind = if s == "Q" {
        RingKind::Rationals
    } else if let Some(p) = s.strip_prefix("Fp:") {
        RingKind::PrimeField(p.parse().map_err(|_| Error::Parse(format!("bad ring {s:?}")))?)
    } else if let Some(m) = s.strip_prefix("cyclo:") {
        RingKind::Cyclotomic(m.parse().map_err(|_| Error::Parse(format!("bad ring {s:?}")))?)
    } else {
        return Err(Error::Parse(format!("unknown ring {s:?}")));
    };
    make_ring(kind, k)
}

/// Verifies a certificate JSON against a matrix JSON; the verification
/// report goes to `out_report_json`. Returns 0 when every check passes and
/// 1 when the replay fails a check.
#[no_mangle]
pub extern "C" fn ordk_verify(
    cert_json: *const c_char,
    matrix_json: *const c_char,
    window: u32,
    out_report_json: *mut *mut c_char,
    out_message: *mut *mut c_char,
) -> i32 {
    clear_out(out_report_json);
    clear_out(out_message);
    guard(out_message, || {
        let (Some(cert), Some(matrix)) =
            (unsafe { read_str(cert_json) }, unsafe { read_str(matrix_json) })
        else {
            set_out(out_message, "null or non-utf8 argument".into());
            return ORDK_NULL_ARGUMENT;
        };
        let inner = || -> Result<(String, bool), Error> {
            let cv: serde_json::Value =
                serde_json::from_str(cert).map_err(|e| Error::Parse(e.to_string()))?;
            let cert = jsonio::cert_from_value(&cv)?;
            let mv: serde_json::Value =
                serde_json::from_str(matrix).map_err(|e| Error::Parse(e.to_string()))?;
            let win = if window == 0 { None } else { Some(window as usize) };
            let (report, _) = run_verify(&cert, &mv, win)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            Ok((json, report.all_pass()))
        };
        match inner() {
            Ok((json, pass)) => {
                set_out(out_report_json, json);
                if pass {
                    ORDK_OK
                } else {
                    ORDK_VERIFY_FAILED
                }
            }
            Err(e) => {
                set_out(out_message, e.to_string());
                error_code(&e)
            }
        }
    })
}

/// Parses a certificate into an opaque handle, or returns null with a
/// diagnostic in `out_message`.
#[no_mangle]
pub extern "C" fn ordk_cert_parse(
    cert_json: *const c_char,
    out_message: *mut *mut c_char,
) -> *mut OrdkCert {
    clear_out(out_message);
    let result = catch_unwind(AssertUnwindSafe(|| {
        let Some(cert) = (unsafe { read_str(cert_json) }) else {
            set_out(out_message, "null or non-utf8 argument".into());
            return ptr::null_mut();
        };
        let inner = || -> Result<Certificate, Error> {
            let cv: serde_json::Value =
                serde_json::from_str(cert).map_err(|e| Error::Parse(e.to_string()))?;
            jsonio::cert_from_value(&cv)
        };
        match inner() {
            Ok(cert) => Box::into_raw(Box::new(OrdkCert { cert })),
            Err(e) => {
                set_out(out_message, e.to_string());
                ptr::null_mut()
            }
        }
    }));
    result.unwrap_or(ptr::null_mut())
}

/// Releases a certificate handle. Null is ignored.
#[no_mangle]
pub extern "C" fn ordk_cert_free(cert: *mut OrdkCert) {
    if !cert.is_null() {
        drop(unsafe { Box::from_raw(cert) });
    }
}

/// Number of commutators in the certificate word, or -1 on null input.
#[no_mangle]
pub extern "C" fn ordk_cert_word_len(cert: *const OrdkCert) -> i64 {
    if cert.is_null() {
        return -1;
    }
    unsafe { &*cert }.cert.word.len() as i64
}

/// The order parameter k, or 0 on null input.
#[no_mangle]
pub extern "C" fn ordk_cert_k(cert: *const OrdkCert) -> u32 {
    if cert.is_null() {
        return 0;
    }
    unsafe { &*cert }.cert.ctx.k()
}

/// Claimed word length recorded in the certificate, or -1 on null input.
#[no_mangle]
pub extern "C" fn ordk_cert_claimed_length(cert: *const OrdkCert) -> i64 {
    if cert.is_null() {
        return -1;
    }
    unsafe { &*cert }.cert.claimed_length as i64
}

/// Producer tag ("theorem1", "cor77", ...); free with `ordk_string_free`.
#[no_mangle]
pub extern "C" fn ordk_cert_producer(cert: *const OrdkCert) -> *mut c_char {
    if cert.is_null() {
        return ptr::null_mut();
    }
    CString::new(unsafe { &*cert }.cert.producer.as_str())
        .unwrap()
        .into_raw()
}

/// Replays a parsed certificate against a matrix JSON.
#[no_mangle]
pub extern "C" fn ordk_cert_verify(
    cert: *const OrdkCert,
    matrix_json: *const c_char,
    window: u32,
    out_report_json: *mut *mut c_char,
    out_message: *mut *mut c_char,
) -> i32 {
    clear_out(out_report_json);
    clear_out(out_message);
    guard(out_message, || {
        if cert.is_null() {
            set_out(out_message, "null certificate handle".into());
            return ORDK_NULL_ARGUMENT;
        }
        let Some(matrix) = (unsafe { read_str(matrix_json) }) else {
            set_out(out_message, "null or non-utf8 argument".into());
            return ORDK_NULL_ARGUMENT;
        };
        let cert = &unsafe { &*cert }.cert;
        let inner = || -> Result<(String, bool), Error> {
            let mv: serde_json::Value =
                serde_json::from_str(matrix).map_err(|e| Error::Parse(e.to_string()))?;
            let win = if window == 0 { None } else { Some(window as usize) };
            let (report, _) = run_verify(cert, &mv, win)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            Ok((json, report.all_pass()))
        };
        match inner() {
            Ok((json, pass)) => {
                set_out(out_report_json, json);
                if pass {
                    ORDK_OK
                } else {
                    ORDK_VERIFY_FAILED
                }
            }
            Err(e) => {
                set_out(out_message, e.to_string());
                error_code(&e)
            }
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub extern "C" fn ordk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
        ordk_string_free(p);
        s
    }

    #[test]
    fn factor_verify_and_handle_round_trip() {
        let matrix = c(r#"{"kind":"dense","n":3,"rows":[["1","2","3"],["0","1","4"],["0","0","1"]]}"#);
        let mode = c("ut");
        let ring = c("Q");
        let mut cert_json: *mut c_char = std::ptr::null_mut();
        let mut msg: *mut c_char = std::ptr::null_mut();
        let code = ordk_factor(
            mode.as_ptr(),
            ring.as_ptr(),
            2,
            matrix.as_ptr(),
            0,
            &mut cert_json,
            &mut msg,
        );
        assert_eq!(code, ORDK_OK, "{:?}", unsafe { read_str(msg) });
        let cert_text = unsafe { take(cert_json) };

        let cert_c = c(&cert_text);
        let mut report: *mut c_char = std::ptr::null_mut();
        let code = ordk_verify(cert_c.as_ptr(), matrix.as_ptr(), 0, &mut report, &mut msg);
        assert_eq!(code, ORDK_OK);
        let report_text = unsafe { take(report) };
        assert!(report_text.contains("\"pass\": true"));

        let handle = ordk_cert_parse(cert_c.as_ptr(), &mut msg);
        assert!(!handle.is_null());
        assert_eq!(ordk_cert_word_len(handle), 2);
        assert_eq!(ordk_cert_k(handle), 2);
        assert_eq!(ordk_cert_claimed_length(handle), 2);
        let producer = ordk_cert_producer(handle);
        assert_eq!(unsafe { take(producer) }, "theorem1");
        let mut report2: *mut c_char = std::ptr::null_mut();
        let code = ordk_cert_verify(handle, matrix.as_ptr(), 0, &mut report2, &mut msg);
        assert_eq!(code, ORDK_OK);
        unsafe { take(report2) };
        ordk_cert_free(handle);
    }

    #[test]
    fn error_codes() {
        let mut out: *mut c_char = std::ptr::null_mut();
        let mut msg: *mut c_char = std::ptr::null_mut();
        // parse error
        let bad = c("not json");
        let mode = c("ut");
        let ring = c("Q");
        let code = ordk_factor(mode.as_ptr(), ring.as_ptr(), 2, bad.as_ptr(), 0, &mut out, &mut msg);
        assert_eq!(code, ORDK_PARSE_ERROR);
        unsafe { take(msg) };
        // precondition: non-unitriangular input
        let nonut = c(r#"{"kind":"dense","n":2,"rows":[["2","0"],["0","1"]]}"#);
        let code = ordk_factor(mode.as_ptr(), ring.as_ptr(), 2, nonut.as_ptr(), 0, &mut out, &mut msg);
        assert_eq!(code, ORDK_PRECONDITION);
        unsafe { take(msg) };
        // null argument
        let code = ordk_factor(
            std::ptr::null(),
            ring.as_ptr(),
            2,
            nonut.as_ptr(),
            0,
            &mut out,
            &mut msg,
        );
        assert_eq!(code, ORDK_NULL_ARGUMENT);
        unsafe { take(msg) };
        // verification failure: tamper the claimed length
        let matrix = c(r#"{"kind":"dense","n":2,"rows":[["1","5"],["0","1"]]}"#);
        let code = ordk_factor(mode.as_ptr(), ring.as_ptr(), 2, matrix.as_ptr(), 0, &mut out, &mut msg);
        assert_eq!(code, ORDK_OK);
        let cert_text = unsafe { take(out) };
        let tampered = cert_text.replace("\"claimed_length\": 2", "\"claimed_length\": 7");
        let cert_c = c(&tampered);
        let mut report: *mut c_char = std::ptr::null_mut();
        let code = ordk_verify(cert_c.as_ptr(), matrix.as_ptr(), 0, &mut report, &mut msg);
        assert_eq!(code, ORDK_VERIFY_FAILED);
        unsafe { take(report) };
    }
}
