//! C ABI over `difflat`.
//!
//! Handles are opaque boxes; every fallible entry point returns a
//! [`DifflatStatus`] and writes its result through an out-pointer. Panics
//! never cross the boundary. The header is generated into
//! `include/difflat.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use difflat::autocorr::{self, AutocorrTable, Variant};
use difflat::diffraction;
use difflat::{Complex64, Error, Lattice, LatticeVector, WeightRule, WeightedComb};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DifflatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularBasis = 3,
    DimensionMismatch = 4,
    BallTooLarge = 5,
    NotIndicator = 6,
    NotDualPoint = 7,
    OutOfRange = 8,
    Parse = 9,
    Io = 10,
    Panic = 11,
}

/// Autocorrelation variant selector; pass as `uint32_t`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DifflatVariant {
    Pair = 0,
    Single = 1,
}

fn variant_arg(v: u32) -> Result<Variant, Failure> {
    match v {
        x if x == DifflatVariant::Pair as u32 => Ok(Variant::PairInWindow),
        x if x == DifflatVariant::Single as u32 => Ok(Variant::SingleWindow),
        other => Err(invalid(format!("unknown variant {other}"))),
    }
}

pub struct DifflatLattice(Lattice);
pub struct DifflatComb(WeightedComb);
pub struct DifflatAutocorr(AutocorrTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> DifflatStatus {
    match err.root() {
        Error::SingularBasis { .. } | Error::InvalidBasis(_) => DifflatStatus::SingularBasis,
        Error::DimensionMismatch { .. } | Error::RuleDimensionMismatch { .. } => DifflatStatus::DimensionMismatch,
        Error::BallTooLarge { .. } => DifflatStatus::BallTooLarge,
        Error::NotAnIndicatorComb { .. } | Error::DensityNotHalf { .. } => DifflatStatus::NotIndicator,
        Error::NotADualLatticePoint(..) => DifflatStatus::NotDualPoint,
        Error::ZRangeExceedsData { .. } | Error::NotTabulated(_) | Error::EpsilonTooLarge { .. } => {
            DifflatStatus::OutOfRange
        }
        Error::MalformedCombFile { .. } | Error::MalformedLatticeFile { .. } => DifflatStatus::Parse,
        Error::Io(_) => DifflatStatus::Io,
        _ => DifflatStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DifflatStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DifflatStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            DifflatStatus::Panic
        }
    }
}

#[derive(Debug)]
struct Failure(DifflatStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DifflatStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DifflatStatus::InvalidArgument, msg.into())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn write_complex(re: *mut f64, im: *mut f64, v: Complex64) -> Result<(), Failure> {
    // SAFETY: callers pass either null (rejected) or writable pointers.
    unsafe {
        *out(re, "re")? = v.re;
        *out(im, "im")? = v.im;
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `difflat_*` call on the same thread.
#[no_mangle]
pub extern "C" fn difflat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// ---------------------------------------------------------------- lattices

/// Builds a lattice from a row-major `dim x dim` matrix whose columns are
/// the basis vectors.
///
/// # Safety
/// `basis` must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_new(
    dim: usize,
    basis: *const f64,
    out_lattice: *mut *mut DifflatLattice,
) -> DifflatStatus {
    guard(|| {
        let target = out(out_lattice, "out_lattice")?;
        if !(1..=difflat::lattice::MAX_DIM).contains(&dim) {
            return Err(invalid(format!("dimension must be 1..=3, got {dim}")));
        }
        let values = slice_arg(basis, dim * dim, "basis")?;
        let lat = Lattice::from_row_major(dim, values)?;
        *target = Box::into_raw(Box::new(DifflatLattice(lat)));
        Ok(())
    })
}

/// Reads a lattice file (`dim n` / `basis ...`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_load(
    path: *const c_char,
    out_lattice: *mut *mut DifflatLattice,
) -> DifflatStatus {
    guard(|| {
        let target = out(out_lattice, "out_lattice")?;
        let lat = Lattice::load(str_arg(path, "path")?)?;
        *target = Box::into_raw(Box::new(DifflatLattice(lat)));
        Ok(())
    })
}

/// # Safety
/// `lattice` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_free(lattice: *mut DifflatLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Dimension of the lattice; 0 for NULL.
///
/// # Safety
/// `lattice` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_dim(lattice: *const DifflatLattice) -> usize {
    lattice.as_ref().map_or(0, |l| l.0.dim())
}

/// # Safety
/// `lattice` must be a live handle; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_density(lattice: *const DifflatLattice, out_value: *mut f64) -> DifflatStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(lattice, "lattice")?.0.density();
        Ok(())
    })
}

/// # Safety
/// `lattice` must be a live handle; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_packing_radius(
    lattice: *const DifflatLattice,
    out_value: *mut f64,
) -> DifflatStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(lattice, "lattice")?.0.packing_radius();
        Ok(())
    })
}

/// Deep-hole estimate of the covering radius on a grid of `grid` points per axis.
///
/// # Safety
/// `lattice` must be a live handle; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_covering_radius(
    lattice: *const DifflatLattice,
    grid: usize,
    out_value: *mut f64,
) -> DifflatStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(lattice, "lattice")?.0.covering_radius_estimate(grid)?;
        Ok(())
    })
}

/// Copies the row-major basis matrix into `buf`, which holds `len` doubles
/// (at least `dim * dim`).
///
/// # Safety
/// `lattice` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_basis(
    lattice: *const DifflatLattice,
    buf: *mut f64,
    len: usize,
) -> DifflatStatus {
    guard(|| {
        let values = handle(lattice, "lattice")?.0.basis_row_major();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < values.len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", values.len())));
        }
        std::slice::from_raw_parts_mut(buf, values.len()).copy_from_slice(&values);
        Ok(())
    })
}

/// New handle for the dual lattice.
///
/// # Safety
/// `lattice` must be a live handle; `out_lattice` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_lattice_dual(
    lattice: *const DifflatLattice,
    out_lattice: *mut *mut DifflatLattice,
) -> DifflatStatus {
    guard(|| {
        let target = out(out_lattice, "out_lattice")?;
        let dual = handle(lattice, "lattice")?.0.dual();
        *target = Box::into_raw(Box::new(DifflatLattice(dual)));
        Ok(())
    })
}

// ------------------------------------------------------------------- combs

fn parse_params(text: &str) -> Result<Vec<(String, String)>, Failure> {
    text.split([',', ';', ' '])
        .filter(|t| !t.trim().is_empty())
        .map(|t| match t.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(invalid(format!("expected key=value in params, got `{t}`"))),
        })
        .collect()
}

/// Tabulates `rule` inside the open ball of radius `radius`.
///
/// `params` is a comma-separated `key=value` list such as `"p=0.3,seed=42"`;
/// it may be NULL or empty.
///
/// # Safety
/// `lattice` must be a live handle; strings NUL-terminated; `out_comb` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_generate(
    lattice: *const DifflatLattice,
    rule: *const c_char,
    params: *const c_char,
    radius: f64,
    out_comb: *mut *mut DifflatComb,
) -> DifflatStatus {
    guard(|| {
        let target = out(out_comb, "out_comb")?;
        let lat = &handle(lattice, "lattice")?.0;
        let params = if params.is_null() {
            Vec::new()
        } else {
            parse_params(str_arg(params, "params")?)?
        };
        let rule = WeightRule::from_params(str_arg(rule, "rule")?, &params)?;
        let comb = WeightedComb::generate(&rule, lat, radius)?;
        *target = Box::into_raw(Box::new(DifflatComb(comb)));
        Ok(())
    })
}

/// # Safety
/// `path` NUL-terminated; `out_comb` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_load(path: *const c_char, out_comb: *mut *mut DifflatComb) -> DifflatStatus {
    guard(|| {
        let target = out(out_comb, "out_comb")?;
        let comb = WeightedComb::load(str_arg(path, "path")?)?;
        *target = Box::into_raw(Box::new(DifflatComb(comb)));
        Ok(())
    })
}

/// # Safety
/// `comb` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_save(comb: *const DifflatComb, path: *const c_char) -> DifflatStatus {
    guard(|| {
        handle(comb, "comb")?.0.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `comb` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_free(comb: *mut DifflatComb) {
    if !comb.is_null() {
        drop(Box::from_raw(comb));
    }
}

/// Number of nonzero weights; 0 for NULL.
///
/// # Safety
/// `comb` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_len(comb: *const DifflatComb) -> usize {
    comb.as_ref().map_or(0, |c| c.0.len())
}

/// Cutoff radius of the tabulation; NaN for NULL.
///
/// # Safety
/// `comb` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_radius(comb: *const DifflatComb) -> f64 {
    comb.as_ref().map_or(f64::NAN, |c| c.0.cutoff_radius())
}

/// Weight at the lattice point with coordinates `coords` (`dim` entries).
///
/// # Safety
/// `comb` must be a live handle; `coords` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_weight(
    comb: *const DifflatComb,
    coords: *const i64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DifflatStatus {
    guard(|| {
        let c = &handle(comb, "comb")?.0;
        let v = LatticeVector::new(slice_arg(coords, c.dim(), "coords")?);
        write_complex(out_re, out_im, c.weight(&v))
    })
}

/// Empirical density `sum w / vol(B_r)`.
///
/// # Safety
/// `comb` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_density(
    comb: *const DifflatComb,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DifflatStatus {
    guard(|| write_complex(out_re, out_im, handle(comb, "comb")?.0.empirical_density()))
}

/// Complement `1 - w` of an indicator comb.
///
/// # Safety
/// `comb` must be a live handle; `out_comb` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_comb_complement(
    comb: *const DifflatComb,
    out_comb: *mut *mut DifflatComb,
) -> DifflatStatus {
    guard(|| {
        let target = out(out_comb, "out_comb")?;
        let c = handle(comb, "comb")?.0.complement()?;
        *target = Box::into_raw(Box::new(DifflatComb(c)));
        Ok(())
    })
}

// ---------------------------------------------------------- autocorrelation

/// One coefficient `nu(z)` averaged over the window of radius `window`.
///
/// # Safety
/// `comb` must be a live handle; `z` must hold `dim` values; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_autocorr_coefficient(
    comb: *const DifflatComb,
    window: f64,
    z: *const i64,
    variant: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DifflatStatus {
    guard(|| {
        let c = &handle(comb, "comb")?.0;
        let z = LatticeVector::new(slice_arg(z, c.dim(), "z")?);
        let v = autocorr::coefficient(c, window, &z, variant_arg(variant)?)?;
        write_complex(out_re, out_im, v)
    })
}

/// Table of all coefficients with `|z| <= z_max` over the full cutoff window.
///
/// # Safety
/// `comb` must be a live handle; `out_table` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_autocorr_table(
    comb: *const DifflatComb,
    z_max: f64,
    variant: u32,
    out_table: *mut *mut DifflatAutocorr,
) -> DifflatStatus {
    guard(|| {
        let target = out(out_table, "out_table")?;
        let t = autocorr::autocorrelation(&handle(comb, "comb")?.0, z_max, variant_arg(variant)?)?;
        *target = Box::into_raw(Box::new(DifflatAutocorr(t)));
        Ok(())
    })
}

/// Number of tabulated coefficients; 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn difflat_autocorr_len(table: *const DifflatAutocorr) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Looks up `nu(z)`; `DIFFLAT_STATUS_OUT_OF_RANGE` if `z` is not tabulated.
///
/// # Safety
/// `table` must be a live handle; `z` must hold `dim` values; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_autocorr_get(
    table: *const DifflatAutocorr,
    z: *const i64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DifflatStatus {
    guard(|| {
        let t = &handle(table, "table")?.0;
        let z = LatticeVector::new(slice_arg(z, t.dim(), "z")?);
        let v = t.get(&z).ok_or_else(|| Error::NotTabulated(z.display(t.dim())))?;
        write_complex(out_re, out_im, v)
    })
}

/// # Safety
/// `table` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn difflat_autocorr_free(table: *mut DifflatAutocorr) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

// -------------------------------------------------------------- diffraction

/// `S_r(k) = sum w(t) exp(-2 pi i k.t)` at the Cartesian point `k`.
///
/// # Safety
/// `comb` must be a live handle; `k` must hold `dim` values; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_exp_sum(
    comb: *const DifflatComb,
    k: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DifflatStatus {
    guard(|| {
        let c = &handle(comb, "comb")?.0;
        let v = diffraction::exp_sum(c, slice_arg(k, c.dim(), "k")?)?;
        write_complex(out_re, out_im, v)
    })
}

/// `D_r(k) = |S_r(k)|^2 / vol(B_r)`.
///
/// # Safety
/// `comb` must be a live handle; `k` must hold `dim` values; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_intensity(comb: *const DifflatComb, k: *const f64, out_value: *mut f64) -> DifflatStatus {
    guard(|| {
        let c = &handle(comb, "comb")?.0;
        *out(out_value, "out_value")? = diffraction::intensity(c, slice_arg(k, c.dim(), "k")?)?;
        Ok(())
    })
}

/// `D_r(k)` damped by a unit-mass Gaussian profile of width `sigma`.
///
/// # Safety
/// `comb` must be a live handle; `k` must hold `dim` values; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_profiled_intensity(
    comb: *const DifflatComb,
    k: *const f64,
    sigma: f64,
    out_value: *mut f64,
) -> DifflatStatus {
    guard(|| {
        let c = &handle(comb, "comb")?.0;
        *out(out_value, "out_value")? = diffraction::profiled_intensity(c, slice_arg(k, c.dim(), "k")?, sigma)?;
        Ok(())
    })
}

/// Bragg estimate `|S_r(k*) / vol(B_r)|^2` at the dual lattice point with
/// dual-basis coordinates `kstar`.
///
/// # Safety
/// `comb` must be a live handle; `kstar` must hold `dim` values; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn difflat_bragg_estimate(
    comb: *const DifflatComb,
    kstar: *const i64,
    out_value: *mut f64,
) -> DifflatStatus {
    guard(|| {
        let c = &handle(comb, "comb")?.0;
        let k = LatticeVector::new(slice_arg(kstar, c.dim(), "kstar")?);
        *out(out_value, "out_value")? = diffraction::bragg_estimate(c, &k)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_split() {
        let p = parse_params("p=0.3, seed=42").unwrap();
        assert_eq!(p, vec![("p".into(), "0.3".into()), ("seed".into(), "42".into())]);
        assert!(parse_params("").unwrap().is_empty());
        assert!(parse_params("p").is_err());
    }

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(
            status_of(&Error::MalformedLatticeFile { line: 1, message: String::new() }),
            DifflatStatus::Parse
        );
        assert_eq!(status_of(&Error::NotADualLatticePoint("x".into(), 0.1)), DifflatStatus::NotDualPoint);
    }
}
