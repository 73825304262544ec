//! C ABI for `qtraj`.
//!
//! Conventions:
//! * every fallible function returns a [`QtrajStatus`]; `QTRAJ_STATUS_OK` is 0;
//! * on failure, [`qtraj_last_error`] holds a message for the calling thread;
//! * objects are opaque handles created by `*_new`/`*_from_*` functions and
//!   released by the matching `*_free`, which accepts null;
//! * strings returned through `char **` are owned by the caller and released
//!   with [`qtraj_string_free`];
//! * complex vectors are passed as separate real and imaginary arrays.
//!
//! Panics never cross the boundary; they surface as `QTRAJ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qtraj::channel::KrausChannel;
use qtraj::density::DensityMatrix;
use qtraj::experiments::{run_example, ExampleOptions};
use qtraj::gap::GapSampler;
use qtraj::io::{self, ChannelFile, DensityFile};
use qtraj::linalg::{ComplexMatrix, C64};
use qtraj::measure::EmpiricalMeasure;
use qtraj::randomization::RandomizationSpec;
use qtraj::rng::stream;
use qtraj::state::ProjectiveState;
use qtraj::trajectory::{run_chain_with, ChainConfig};
use qtraj::wasserstein::{wasserstein1, wasserstein1_subsampled};
use qtraj::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtrajStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    DimensionMismatch = 5,
    InvalidChannel = 6,
    InvalidRandomization = 7,
    InvalidDensity = 8,
    InvalidState = 9,
    NotUnitary = 10,
    NotIrreducible = 11,
    OutsideSupport = 12,
    KernelHit = 13,
    SingularPushforward = 14,
    NoConvergence = 15,
    Empty = 16,
    OutOfRange = 17,
    Panic = 99,
}

impl From<&Error> for QtrajStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ZeroVector => QtrajStatus::InvalidState,
            Error::DimensionMismatch { .. } => QtrajStatus::DimensionMismatch,
            Error::NotUnitary { .. } => QtrajStatus::NotUnitary,
            Error::InvalidChannel(_) => QtrajStatus::InvalidChannel,
            Error::InvalidRandomization(_) => QtrajStatus::InvalidRandomization,
            Error::InvalidDensity(_) => QtrajStatus::InvalidDensity,
            Error::KernelHit { .. } => QtrajStatus::KernelHit,
            Error::NotIrreducible => QtrajStatus::NotIrreducible,
            Error::OutsideSupport { .. } => QtrajStatus::OutsideSupport,
            Error::SingularPushforward { .. } => QtrajStatus::SingularPushforward,
            Error::NoConvergence { .. } => QtrajStatus::NoConvergence,
            Error::Empty(_) => QtrajStatus::Empty,
            Error::Parse(_) => QtrajStatus::Parse,
            Error::Io(_) => QtrajStatus::Io,
        }
    }
}

/// A channel together with its randomization.
pub struct QtrajChannel {
    channel: KrausChannel,
    randomization: RandomizationSpec,
}

/// A finitely supported probability measure on projective space.
pub struct QtrajMeasure(EmpiricalMeasure);

/// Sampler and density of the GAP measure of a fixed density matrix.
pub struct QtrajGap(GapSampler);

struct Failure(QtrajStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(QtrajStatus::from(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into a status and the thread's
/// last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QtrajStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            QtrajStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&msg);
            QtrajStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(QtrajStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(QtrajStatus::InvalidUtf8, e.to_string()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn complex_arg(re: *const f64, im: *const f64, len: usize) -> Result<Vec<C64>, Failure> {
    if re.is_null() && len > 0 {
        return Err(null());
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let re = std::slice::from_raw_parts(re, len);
    Ok(if im.is_null() {
        re.iter().map(|&r| C64::new(r, 0.0)).collect()
    } else {
        let im = std::slice::from_raw_parts(im, len);
        re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect()
    })
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|e| Failure(QtrajStatus::Parse, e.to_string()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qtraj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qtraj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qtraj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a channel file document (JSON).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_channel_from_json(json: *const c_char, out: *mut *mut QtrajChannel) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let file: ChannelFile = serde_json::from_str(str_arg(json)?).map_err(Error::from)?;
        let loaded = file.load()?;
        *out = Box::into_raw(Box::new(QtrajChannel { channel: loaded.channel, randomization: loaded.randomization }));
        Ok(())
    })
}

/// # Safety
/// `ch` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qtraj_channel_free(ch: *mut QtrajChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Hilbert space dimension, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qtraj_channel_dim(ch: *const QtrajChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.channel.dim())
}

/// Number of Kraus operators, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qtraj_channel_rank(ch: *const QtrajChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.channel.rank())
}

/// Ergodicity report (irreducibility, period, primitivity, invariant state)
/// as a JSON string.
///
/// # Safety
/// `ch` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_channel_analyze(ch: *const QtrajChannel, out_json: *mut *mut c_char) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out_json)?;
        *out = ptr::null_mut();
        let ch = ref_arg(ch)?;
        let report = qtraj::analysis::analyze(&ch.channel);
        *out = into_c_string(serde_json::to_string(&report).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Runs one trajectory from `x0` and returns the retained states as an
/// equally weighted measure. The same `seed` reproduces the same run.
///
/// # Safety
/// `x0_re` (and `x0_im` unless null) must hold `dim` values; `out` must be
/// a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qtraj_channel_simulate(
    ch: *const QtrajChannel,
    x0_re: *const f64,
    x0_im: *const f64,
    dim: usize,
    steps: usize,
    burn_in: usize,
    thinning: usize,
    seed: u64,
    out: *mut *mut QtrajMeasure,
) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let ch = ref_arg(ch)?;
        let x0 = ProjectiveState::from_slice(&complex_arg(x0_re, x0_im, dim)?)?;
        let cfg = ChainConfig::new(steps, seed).burn_in(burn_in).thinning(thinning);
        let run = run_chain_with(&ch.channel, &ch.randomization, &x0, cfg, &mut stream(seed, 0))?;
        *out = Box::into_raw(Box::new(QtrajMeasure(EmpiricalMeasure::uniform_weights(run.states)?)));
        Ok(())
    })
}

/// Parses a measure CSV (`weight,re0,im0,...`; the weight column is optional).
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_measure_from_csv(csv: *const c_char, out: *mut *mut QtrajMeasure) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let m = io::measure_from_csv(str_arg(csv)?)?;
        *out = Box::into_raw(Box::new(QtrajMeasure(m)));
        Ok(())
    })
}

/// Serializes a measure as CSV.
///
/// # Safety
/// `m` must be a live handle and `out_csv` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_measure_to_csv(m: *const QtrajMeasure, out_csv: *mut *mut c_char) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out_csv)?;
        *out = ptr::null_mut();
        *out = into_c_string(io::measure_to_csv(&ref_arg(m)?.0)?)?;
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qtraj_measure_free(m: *mut QtrajMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of atoms, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qtraj_measure_len(m: *const QtrajMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Dimension of the atoms, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qtraj_measure_dim(m: *const QtrajMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Copies atom `index` (canonical representative) into `re`/`im`, each of
/// length `dim`, and its weight into `weight` (which may be null).
///
/// # Safety
/// `re` and `im` must hold `dim` writable values.
#[no_mangle]
pub unsafe extern "C" fn qtraj_measure_atom(
    m: *const QtrajMeasure,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    dim: usize,
    weight: *mut f64,
) -> QtrajStatus {
    guard(|| {
        let m = &ref_arg(m)?.0;
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        if index >= m.len() {
            return Err(Failure(QtrajStatus::OutOfRange, format!("atom {index} of {}", m.len())));
        }
        if dim != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), got: dim }.into());
        }
        let re = std::slice::from_raw_parts_mut(re, dim);
        let im = std::slice::from_raw_parts_mut(im, dim);
        for (k, z) in m.points()[index].rep().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        if let Some(w) = weight.as_mut() {
            *w = m.weights()[index];
        }
        Ok(())
    })
}

/// Wasserstein-1 distance under the Fubini-Study metric. With
/// `subsample == 0` the distance is exact; otherwise both measures are
/// first reduced to `subsample` atoms drawn with `seed`.
///
/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_wasserstein1(
    a: *const QtrajMeasure,
    b: *const QtrajMeasure,
    subsample: usize,
    seed: u64,
    out: *mut f64,
) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        let (a, b) = (&ref_arg(a)?.0, &ref_arg(b)?.0);
        *out = if subsample == 0 {
            wasserstein1(a, b)?
        } else {
            wasserstein1_subsampled(a, b, subsample, &mut stream(seed, 0))?
        };
        Ok(())
    })
}

/// GAP sampler for the `dim x dim` density matrix given row-major in
/// `rho_re`/`rho_im` (`rho_im` may be null for a real matrix).
///
/// # Safety
/// The arrays must hold `dim * dim` values; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_gap_new(
    rho_re: *const f64,
    rho_im: *const f64,
    dim: usize,
    out: *mut *mut QtrajGap,
) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let entries = complex_arg(rho_re, rho_im, dim * dim)?;
        let rho = ComplexMatrix::from_row_slice(dim, dim, &entries);
        *out = Box::into_raw(Box::new(QtrajGap(GapSampler::new(DensityMatrix::new(rho)?)?)));
        Ok(())
    })
}

/// GAP sampler from a density file document (JSON).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_gap_from_json(json: *const c_char, out: *mut *mut QtrajGap) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let file: DensityFile = serde_json::from_str(str_arg(json)?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(QtrajGap(GapSampler::new(file.to_density()?)?)));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qtraj_gap_free(g: *mut QtrajGap) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Density of the GAP measure at `x` with respect to the uniform measure.
///
/// # Safety
/// `x_re` (and `x_im` unless null) must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn qtraj_gap_density(
    g: *const QtrajGap,
    x_re: *const f64,
    x_im: *const f64,
    dim: usize,
    out: *mut f64,
) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        let g = &ref_arg(g)?.0;
        let x = ProjectiveState::from_slice(&complex_arg(x_re, x_im, dim)?)?;
        *out = g.gap_density(&x)?;
        Ok(())
    })
}

/// `n` independent GAP samples as an equally weighted measure.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_gap_sample(
    g: *const QtrajGap,
    n: usize,
    seed: u64,
    out: *mut *mut QtrajMeasure,
) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let m = ref_arg(g)?.0.sample_measure(n, &mut stream(seed, 0))?;
        *out = Box::into_raw(Box::new(QtrajMeasure(m)));
        Ok(())
    })
}

/// Runs a bundled experiment by CLI name and returns its verdict as JSON.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtraj_run_example(name: *const c_char, seed: u64, out_json: *mut *mut c_char) -> QtrajStatus {
    guard(|| {
        let out = out_arg(out_json)?;
        *out = ptr::null_mut();
        let verdict = run_example(str_arg(name)?.parse()?, &ExampleOptions::new(seed))?;
        *out = into_c_string(serde_json::to_string(&verdict).map_err(Error::from)?)?;
        Ok(())
    })
}
