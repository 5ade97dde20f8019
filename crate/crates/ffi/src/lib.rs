//! C ABI for `cfsched`.
//!
//! Objects cross the boundary as opaque handles (`CfsChannel`, `CfsSchedule`)
//! created and released by this library. Every call returns a [`CfsStatus`];
//! results go through out-pointers. The message for the last failure on the
//! calling thread is available from [`cfs_last_error`].
//!
//! The header `include/cfsched.h` is generated at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use cfsched::bounds::{self, BoundParams};
use cfsched::rate::{self, ChannelVector, CoeffVector, Power, RateResult};
use cfsched::{coeff_search, experiments, scheduler, Error};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument: wrong length, non-finite value, k > L and so on.
    InvalidArgument = 2,
    /// Outside the domain of a formula.
    Domain = 3,
    /// Work would exceed the enumeration limits.
    Resource = 4,
    /// Caller-provided buffer is too small.
    BufferTooSmall = 5,
    /// Internal failure; the library caught a panic.
    Internal = 6,
}

/// Channel gains of a set of users.
pub struct CfsChannel(ChannelVector);

/// A chosen subset of users with its coefficient vector.
pub struct CfsSchedule(scheduler::ScheduleResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfsRateResult {
    /// Computation rate in bits per channel use; `INFINITY` when unbounded.
    pub rate: f64,
    /// MMSE scaling factor.
    pub alpha: f64,
    /// Angle between the channel and the coefficient vector, radians.
    pub angle: f64,
    /// Number of non-zero coefficients.
    pub nnz: usize,
    /// `nnz * rate`.
    pub sum_rate: f64,
}

impl From<RateResult> for CfsRateResult {
    fn from(r: RateResult) -> Self {
        CfsRateResult {
            rate: r.rate.value(),
            alpha: r.alpha,
            angle: r.angle,
            nnz: r.nnz,
            sum_rate: r.sum_rate.value(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CfsStatus {
    match e {
        Error::Usage(_) => CfsStatus::InvalidArgument,
        Error::Domain(_) => CfsStatus::Domain,
        Error::Resource(_) => CfsStatus::Resource,
        Error::Io(_) => CfsStatus::Internal,
    }
}

/// Internal control flow: either a library error or a bare status.
enum Fail {
    Lib(Error),
    Status(CfsStatus, &'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CfsStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CfsStatus::Internal
        }
    }
}

fn null() -> Fail {
    Fail::Status(CfsStatus::NullPointer, "null pointer argument")
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(null)
}

unsafe fn input<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, need: usize) -> Result<&'a mut [T], Fail> {
    if len < need {
        return Err(Fail::Status(CfsStatus::BufferTooSmall, "output buffer too small"));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

/// Message for the last failed call on this thread. Copies at most `len - 1`
/// bytes plus a terminating NUL into `buf` and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cfs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn cfs_status_str(status: CfsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        CfsStatus::Ok => b"ok\0",
        CfsStatus::NullPointer => b"null pointer\0",
        CfsStatus::InvalidArgument => b"invalid argument\0",
        CfsStatus::Domain => b"domain error\0",
        CfsStatus::Resource => b"resource limit\0",
        CfsStatus::BufferTooSmall => b"buffer too small\0",
        CfsStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}

/// Copy `len` gains into a new channel handle.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_channel_new(values: *const f64, len: usize, out_channel: *mut *mut CfsChannel) -> CfsStatus {
    guard(|| {
        let slot = out(out_channel)?;
        let h = ChannelVector::new(input(values, len)?.to_vec())?;
        *slot = Box::into_raw(Box::new(CfsChannel(h)));
        Ok(())
    })
}

/// Draw `l` i.i.d. standard normal gains from `seed`.
///
/// # Safety
/// `out_channel` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_channel_sample(l: usize, seed: u64, out_channel: *mut *mut CfsChannel) -> CfsStatus {
    guard(|| {
        let slot = out(out_channel)?;
        if l == 0 {
            return Err(Error::Usage("L must be at least 1".into()).into());
        }
        let mut rng = experiments::trial_rng(seed, experiments::stream_key("ffi", l as u64), 0);
        *slot = Box::into_raw(Box::new(CfsChannel(experiments::sample_channel(l, &mut rng))));
        Ok(())
    })
}

/// Number of users in the channel; 0 for a null handle.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfs_channel_len(channel: *const CfsChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.0.len())
}

/// Copy the gains into `values` (room for `len`).
///
/// # Safety
/// `channel` must be a live handle and `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cfs_channel_values(channel: *const CfsChannel, values: *mut f64, len: usize) -> CfsStatus {
    guard(|| {
        let h = &borrow(channel)?.0;
        output(values, len, h.len())?.copy_from_slice(h.values());
        Ok(())
    })
}

/// Release a channel. Null is ignored.
///
/// # Safety
/// `channel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cfs_channel_free(channel: *mut CfsChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Computation rate of `channel` with coefficients `a` at power `p`.
///
/// # Safety
/// `channel` must be a live handle, `a` must point to `len` integers and
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_computation_rate(
    channel: *const CfsChannel,
    a: *const i64,
    len: usize,
    p: f64,
    result: *mut CfsRateResult,
) -> CfsStatus {
    guard(|| {
        let h = &borrow(channel)?.0;
        let slot = out(result)?;
        let a = CoeffVector::new(input(a, len)?.to_vec())?;
        *slot = rate::computation_rate(h, &a, Power::new(p)?)?.into();
        Ok(())
    })
}

/// Rate-optimal integer coefficients for `channel`. `a_out` needs room for
/// `cfs_channel_len(channel)` entries.
///
/// # Safety
/// `channel` must be a live handle, `a_out` must point to `a_len` integers
/// and `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_optimal_coeff(
    channel: *const CfsChannel,
    p: f64,
    a_out: *mut i64,
    a_len: usize,
    result: *mut CfsRateResult,
) -> CfsStatus {
    guard(|| {
        let h = &borrow(channel)?.0;
        let slot = out(result)?;
        let buf = output(a_out, a_len, h.len())?;
        let (a, r) = coeff_search::optimal_coeff(h, Power::new(p)?)?;
        buf.copy_from_slice(a.values());
        *slot = r.into();
        Ok(())
    })
}

unsafe fn schedule_with(
    channel: *const CfsChannel,
    out_schedule: *mut *mut CfsSchedule,
    f: impl FnOnce(&ChannelVector) -> cfsched::Result<scheduler::ScheduleResult>,
) -> CfsStatus {
    guard(|| {
        let h = &borrow(channel)?.0;
        let slot = out(out_schedule)?;
        *slot = Box::into_raw(Box::new(CfsSchedule(f(h)?)));
        Ok(())
    })
}

/// Sorted-window scheduler: `k` users with +-1 coefficients.
///
/// # Safety
/// `channel` must be a live handle; `out_schedule` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_schedule_algorithm1(
    channel: *const CfsChannel,
    k: usize,
    p: f64,
    out_schedule: *mut *mut CfsSchedule,
) -> CfsStatus {
    schedule_with(channel, out_schedule, |h| scheduler::algorithm1(h, k, Power::new(p)?))
}

/// Exhaustive scheduler: best sum-rate over every `k`-subset and coefficient vector.
///
/// # Safety
/// `channel` must be a live handle; `out_schedule` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_schedule_oracle(
    channel: *const CfsChannel,
    k: usize,
    p: f64,
    out_schedule: *mut *mut CfsSchedule,
) -> CfsStatus {
    schedule_with(channel, out_schedule, |h| scheduler::oracle_full(h, k, Power::new(p)?))
}

/// Number of scheduled users; 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfs_schedule_len(schedule: *const CfsSchedule) -> usize {
    schedule.as_ref().map_or(0, |s| s.0.user_indices.len())
}

/// Copy user indices and coefficients (each `len` long, `len >=
/// cfs_schedule_len`) and the rates. Any output pointer may be null to skip it.
///
/// # Safety
/// `schedule` must be a live handle; non-null outputs must have room for
/// `len` elements.
#[no_mangle]
pub unsafe extern "C" fn cfs_schedule_get(
    schedule: *const CfsSchedule,
    users: *mut usize,
    coeffs: *mut i64,
    len: usize,
    rate: *mut f64,
    sum_rate: *mut f64,
) -> CfsStatus {
    guard(|| {
        let s = &borrow(schedule)?.0;
        let n = s.user_indices.len();
        if !users.is_null() {
            output(users, len, n)?.copy_from_slice(&s.user_indices);
        }
        if !coeffs.is_null() {
            output(coeffs, len, n)?.copy_from_slice(s.coeffs.values());
        }
        if let Some(r) = rate.as_mut() {
            *r = s.rate.value();
        }
        if let Some(r) = sum_rate.as_mut() {
            *r = s.sum_rate.value();
        }
        Ok(())
    })
}

/// Release a schedule. Null is ignored.
///
/// # Safety
/// `schedule` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cfs_schedule_free(schedule: *mut CfsSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Finite-`L` lower bound and upper bound on the expected sum-rate.
///
/// # Safety
/// `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfs_sumrate_bounds(
    l: u64,
    k: u32,
    p: f64,
    delta: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> CfsStatus {
    guard(|| {
        let lo = out(lower)?;
        let hi = out(upper)?;
        let p = Power::new(p)?;
        let bp = BoundParams::new(l, k, p, delta)?;
        *lo = bounds::lower_bound_sumrate(&bp)?;
        *hi = bounds::upper_bound_sumrate(l, k, p)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_strings_are_terminated() {
        for s in [CfsStatus::Ok, CfsStatus::Domain, CfsStatus::Internal] {
            let c = unsafe { std::ffi::CStr::from_ptr(cfs_status_str(s)) };
            assert!(!c.to_bytes().is_empty());
        }
    }

    #[test]
    fn error_message_roundtrip() {
        let mut ch = ptr::null_mut();
        let st = unsafe { cfs_channel_new(ptr::null(), 0, &mut ch) };
        assert_eq!(st, CfsStatus::InvalidArgument);
        assert!(ch.is_null());
        let mut buf = [0 as c_char; 8];
        let n = unsafe { cfs_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 7);
        assert_eq!(buf[7], 0);
    }
}
