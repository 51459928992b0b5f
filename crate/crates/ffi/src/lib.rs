//! C interface to the `wqed` library.
//!
//! Every function returns a [`WqedStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`wqed_last_error_message`]. Panics are caught at the boundary and
//! reported as [`WqedStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wqed::adiabatic::{
    evolve_pure, schedule_from_gap, AdiabaticProblem, EvolveOptions, InitialState, Path, Schedule, ScheduleKind,
    DEFAULT_EXCITED, DEFAULT_GRID,
};
use wqed::berry::{berry_phase, pair_sites, BerryOptions, PairKind};
use wqed::couplings::{build_coupling_matrix, Bandgap, Boundary, CouplingMatrix, EffectiveCouplings, MatrixOptions, Pair};
use wqed::eigen::EigenOptions;
use wqed::spectra::sector_energy_tables;
use wqed::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WqedStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A solver did not converge, a gap closed, or a similar numerical failure.
    Numerical = 3,
    /// The problem is too large for the requested method.
    TooLarge = 4,
    /// A Rust panic was caught at the boundary; the library state is intact.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WqedBandgap {
    Lower = 0,
    Middle = 1,
    Upper = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WqedPair {
    AB = 0,
    BA = 1,
    AA = 2,
    BB = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WqedPairKind {
    Intra = 0,
    Inter = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WqedSchedule {
    Uniform = 0,
    Hs = 1,
    MinMatrixElement = 2,
}

/// Opaque coupling matrix of an `N`-spin chain.
pub struct WqedCouplings {
    inner: CouplingMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(WqedStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NoConvergence { .. }
            | Error::QuadratureFailure { .. }
            | Error::GapCollapse { .. }
            | Error::DegeneracyMismatch { .. }
            | Error::ZeroOverlap(_)
            | Error::SingularOverlap(_)
            | Error::GaplessPath { .. }
            | Error::IntegratorFailure(_) => WqedStatus::Numerical,
            Error::DimensionOverflow { .. } => WqedStatus::TooLarge,
            _ => WqedStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WqedStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WqedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WqedStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            WqedStatus::Panic
        }
    }
}

unsafe fn handle<'a>(h: *const WqedCouplings) -> Result<&'a CouplingMatrix, Fail> {
    h.as_ref().map(|h| &h.inner).ok_or_else(|| null("couplings handle"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn bandgap(b: WqedBandgap) -> Bandgap {
    match b {
        WqedBandgap::Lower => Bandgap::Lower,
        WqedBandgap::Middle => Bandgap::Middle,
        WqedBandgap::Upper => Bandgap::Upper,
    }
}

fn effective(b: WqedBandgap, xi: f64, dimerization: f64) -> Result<EffectiveCouplings, Fail> {
    let c = match b {
        WqedBandgap::Middle => EffectiveCouplings::new(Bandgap::Middle, xi, dimerization, 1.0, 1)?,
        _ => EffectiveCouplings::outer(bandgap(b), xi, dimerization)?,
    };
    Ok(c)
}

/// Message of the last failed call on this thread, or null after a
/// successful call. The pointer stays valid until the next call into the
/// library from the same thread.
#[no_mangle]
pub extern "C" fn wqed_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn wqed_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Effective coupling `J_n^{pair}` in units of `J~` (middle gap with positive detuning sign).
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn wqed_coupling_constant(
    bandgap: WqedBandgap,
    xi: f64,
    dimerization: f64,
    n: u32,
    pair: WqedPair,
    out: *mut f64,
) -> WqedStatus {
    guard(|| {
        let c = effective(bandgap, xi, dimerization)?;
        let pair = match pair {
            WqedPair::AB => Pair::AB,
            WqedPair::BA => Pair::BA,
            WqedPair::AA => Pair::AA,
            WqedPair::BB => Pair::BB,
        };
        put(out, c.coupling_constant(n, pair))
    })
}

/// Builds the coupling matrix of `n` spins. Free it with [`wqed_couplings_free`].
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn wqed_couplings_new(
    bandgap: WqedBandgap,
    xi: f64,
    dimerization: f64,
    n: usize,
    periodic: bool,
    out: *mut *mut WqedCouplings,
) -> WqedStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let c = effective(bandgap, xi, dimerization)?;
        let boundary = if periodic { Boundary::Pbc } else { Boundary::Obc };
        let inner = build_coupling_matrix(&c, n, boundary, MatrixOptions { n_max: None, allow_truncation: true })?;
        out.write(Box::into_raw(Box::new(WqedCouplings { inner })));
        Ok(())
    })
}

/// Releases a handle from [`wqed_couplings_new`]. Null is ignored.
///
/// # Safety
/// `h` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wqed_couplings_free(h: *mut WqedCouplings) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
#[no_mangle]
pub unsafe extern "C" fn wqed_couplings_size(h: *const WqedCouplings, out: *mut usize) -> WqedStatus {
    guard(|| put(out, handle(h)?.size()))
}

/// Entry `J_ij`.
///
/// # Safety
/// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
#[no_mangle]
pub unsafe extern "C" fn wqed_couplings_get(h: *const WqedCouplings, i: usize, j: usize, out: *mut f64) -> WqedStatus {
    guard(|| {
        let cm = handle(h)?;
        let n = cm.size();
        if i >= n || j >= n {
            return Err(Fail(WqedStatus::InvalidArgument, format!("site ({i}, {j}) outside a chain of {n}")));
        }
        put(out, cm.get(i, j))
    })
}

/// Lowest energy of every magnetization sector at angle `theta`, written
/// to `out[n_up]` for `n_up = 0..=N`. `len` must be at least `N + 1`.
///
/// # Safety
/// `h` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn wqed_sector_energies(
    h: *const WqedCouplings,
    theta: f64,
    out: *mut f64,
    len: usize,
) -> WqedStatus {
    guard(|| {
        let cm = handle(h)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len < cm.size() + 1 {
            return Err(Fail(WqedStatus::InvalidArgument, format!("buffer of {len} for {} sectors", cm.size() + 1)));
        }
        let table = sector_energy_tables(cm, &[theta], &EigenOptions::default())?.pop().expect("one angle");
        std::slice::from_raw_parts_mut(out, len)[..table.energies.len()].copy_from_slice(&table.energies);
        Ok(())
    })
}

/// Berry phase in `[0, 2 pi)` of the `d`-fold ground multiplet under a
/// twist of one bond (periodic chains only).
///
/// # Safety
/// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
#[no_mangle]
pub unsafe extern "C" fn wqed_berry_phase(
    h: *const WqedCouplings,
    n_up: usize,
    theta: f64,
    kind: WqedPairKind,
    d: usize,
    out: *mut f64,
) -> WqedStatus {
    guard(|| {
        let cm = handle(h)?;
        let kind = match kind {
            WqedPairKind::Intra => PairKind::Intra,
            WqedPairKind::Inter => PairKind::Inter,
        };
        let r = berry_phase(cm, n_up, theta, pair_sites(cm.size(), kind), d, &BerryOptions::default())?;
        put(out, r.gamma)
    })
}

/// Infidelity of the adiabatic preparation of the `n_up` ground state over
/// total time `total_time`, starting from the lowest Ising configuration.
///
/// # Safety
/// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
#[no_mangle]
pub unsafe extern "C" fn wqed_adiabatic_infidelity(
    h: *const WqedCouplings,
    n_up: usize,
    schedule: WqedSchedule,
    total_time: f64,
    out: *mut f64,
) -> WqedStatus {
    guard(|| {
        let cm = handle(h)?;
        let problem = AdiabaticProblem::new(cm, n_up, Path::simple(), None)?;
        let kind = match schedule {
            WqedSchedule::Uniform => None,
            WqedSchedule::Hs => Some(ScheduleKind::Hs),
            WqedSchedule::MinMatrixElement => Some(ScheduleKind::MinMatrixElement),
        };
        let schedule = match kind {
            None => Schedule::uniform(),
            Some(k) => schedule_from_gap(&problem, k, DEFAULT_GRID, DEFAULT_EXCITED, &EigenOptions::default())?,
        };
        let run = evolve_pure(&problem, &schedule, total_time, &InitialState::LowestIsing, &[], &EvolveOptions::default())?;
        put(out, run.infidelity)
    })
}
