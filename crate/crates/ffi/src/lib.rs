//! C ABI for `cuspidal-atlas`.
//!
//! Every function returns a [`CaStatus`]. On failure a message is kept per
//! thread and can be read with [`ca_last_error`]. Reports are opaque handles
//! released with [`ca_report_free`]. Strings are copied into caller buffers:
//! the required size including the terminating NUL is always written to
//! `needed`, and `CA_BUFFER_TOO_SMALL` is returned if `len` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cuspidal_atlas::classify::{surface1, surface2};
use cuspidal_atlas::kinematics::IkOptions;
use cuspidal_atlas::output::report_json;
use cuspidal_atlas::{
    classify, fk, posture_count, solve_ik, CartesianPoint, ClassificationReport, DesignParams, Error, JointConfig,
    Kind, SectionPoint, Settings,
};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaStatus {
    CaOk = 0,
    CaNullPointer = 1,
    CaInvalidParams = 2,
    CaContinuum = 3,
    CaAnalysisFailed = 4,
    CaBufferTooSmall = 5,
    CaPanic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaParams {
    pub d3: f64,
    pub r2: f64,
    pub d4: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaJoints {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Opaque classification report.
pub struct CaReport {
    inner: ClassificationReport,
    json: CString,
    class: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> CaStatus {
    match e.root() {
        Error::InvalidParams(_) | Error::Config(_) => CaStatus::CaInvalidParams,
        Error::ContinuumOfSolutions { .. } | Error::DegenerateQuartic => CaStatus::CaContinuum,
        _ => CaStatus::CaAnalysisFailed,
    }
}

/// Runs `f`, recording errors and converting panics into `CaPanic`.
fn guard(f: impl FnOnce() -> Result<(), CaStatus>) -> CaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CaStatus::CaOk,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            CaStatus::CaPanic
        }
    }
}

fn fail(e: Error) -> CaStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null() -> CaStatus {
    set_error("null pointer argument");
    CaStatus::CaNullPointer
}

fn params(p: CaParams) -> Result<DesignParams, CaStatus> {
    DesignParams::new(p.d3, p.r2, p.d4).map_err(fail)
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write<T>(out: *mut T, v: T) -> Result<(), CaStatus> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` null or writable.
unsafe fn copy_str(s: &CString, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), CaStatus> {
    let bytes = s.as_bytes_with_nul();
    if !needed.is_null() {
        needed.write(bytes.len());
    }
    if len < bytes.len() {
        set_error(format!("buffer of {len} bytes, {} needed", bytes.len()));
        return Err(CaStatus::CaBufferTooSmall);
    }
    if buf.is_null() {
        return Err(null());
    }
    ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
    Ok(())
}

/// Message of the last failure on this thread; empty if none. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Classifies a manipulator with default settings.
///
/// # Safety
/// `out` must be valid for writes. The handle is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn ca_classify(p: CaParams, out: *mut *mut CaReport) -> CaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let dp = params(p)?;
        let inner = classify(&dp, &Settings::default()).map_err(fail)?;
        let json = report_json(&inner).map_err(fail)?;
        let report = CaReport {
            json: CString::new(json).unwrap_or_default(),
            class: CString::new(inner.class.clone()).unwrap_or_default(),
            inner,
        };
        out.write(Box::into_raw(Box::new(report)));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from [`ca_classify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ca_report_free(r: *mut CaReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of aspects.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_report_aspects(r: *const CaReport, out: *mut u32) -> CaStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        write(out, r.inner.aspects as u32)
    })
}

/// Number of cusp points in the workspace section.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_report_cusps(r: *const CaReport, out: *mut u32) -> CaStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        write(out, r.inner.cusps as u32)
    })
}

/// 1 for quaternary, 0 for binary.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_report_quaternary(r: *const CaReport, out: *mut i32) -> CaStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        write(out, i32::from(r.inner.kind == Kind::Quaternary))
    })
}

/// 1 when the singularity curves are generic.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_report_generic(r: *const CaReport, out: *mut i32) -> CaStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        write(out, i32::from(r.inner.generic))
    })
}

/// Class label: `binary`, `n.g` or a homotopy signature such as `2(1,0)`.
///
/// # Safety
/// `r` must be a live handle, `buf` valid for `len` bytes, `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ca_report_class(
    r: *const CaReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> CaStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        copy_str(&r.class, buf, len, needed)
    })
}

/// Full report as JSON.
///
/// # Safety
/// `r` must be a live handle, `buf` valid for `len` bytes, `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ca_report_json(
    r: *const CaReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> CaStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        copy_str(&r.json, buf, len, needed)
    })
}

/// Forward kinematics.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_fk(p: CaParams, q: CaJoints, out: *mut CaPoint) -> CaStatus {
    guard(|| {
        let dp = params(p)?;
        let x = fk(&dp, &JointConfig::new(q.theta1, q.theta2, q.theta3));
        write(out, CaPoint { x: x.x, y: x.y, z: x.z })
    })
}

/// Inverse kinematics. Writes at most `cap` solutions and their total number
/// to `count`; returns `CA_BUFFER_TOO_SMALL` if `cap` is short.
///
/// # Safety
/// `out` must be valid for `cap` elements (may be null when `cap` is 0) and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_solve_ik(
    p: CaParams,
    x: CaPoint,
    out: *mut CaJoints,
    cap: usize,
    count: *mut usize,
) -> CaStatus {
    guard(|| {
        let dp = params(p)?;
        let sols = solve_ik(&dp, &CartesianPoint::new(x.x, x.y, x.z), &IkOptions::default()).map_err(fail)?;
        write(count, sols.len())?;
        if sols.len() > cap {
            set_error(format!("{} solutions, room for {cap}", sols.len()));
            return Err(CaStatus::CaBufferTooSmall);
        }
        if sols.is_empty() {
            return Ok(());
        }
        if out.is_null() {
            return Err(null());
        }
        for (k, s) in sols.iter().enumerate() {
            out.add(k).write(CaJoints { theta1: s.theta1, theta2: s.theta2, theta3: s.theta3 });
        }
        Ok(())
    })
}

/// Distinct real IK roots at the section point `(rho, z)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_posture_count(p: CaParams, rho: f64, z: f64, out: *mut u32) -> CaStatus {
    guard(|| {
        let dp = params(p)?;
        let n = posture_count(&dp, SectionPoint::new(rho, z), 1e-6).map_err(fail)?;
        write(out, n as u32)
    })
}

/// Values of the two separating surfaces at `p`.
///
/// # Safety
/// `s1` and `s2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_surfaces(p: CaParams, s1: *mut f64, s2: *mut f64) -> CaStatus {
    guard(|| {
        let dp = params(p)?;
        write(s1, surface1(&dp))?;
        write(s2, surface2(&dp))
    })
}
