//! C interface to the magnetoatom solver.
//!
//! Systems are opaque handles created by `ma_system_*` and released with
//! `ma_system_free`. Every call returns an `MaStatus`; on failure the message
//! is kept per thread and can be copied out with `ma_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use magnetoatom::oracle::{self, CoulombTreatment, EigenOptions, GridSpec, Localization};
use magnetoatom::perturbation::energy_coefficients;
use magnetoatom::potential;
use magnetoatom::units::derive_system;
use magnetoatom::variational::{optimize, Classification, Strategy};
use magnetoatom::{Error, FieldConfig, SystemSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRegime = 3,
    NotConverged = 4,
    GridTooLarge = 5,
    UnsupportedOrder = 6,
    /// A panic was caught at the boundary.
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaClass {
    Centered = 0,
    Decentered = 1,
    Mixed = 2,
}

/// Opaque two-particle system.
pub struct MaSystem {
    inner: SystemSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MaVariational {
    /// Hartree.
    pub energy: f64,
    pub rho_mean: f64,
    pub d: f64,
    /// One of `MaClass`.
    pub classification: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MaOracle {
    /// Extrapolated energy in Hartree.
    pub energy: f64,
    pub tolerance: f64,
    /// Energy on the finest grid.
    pub finest: f64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> MaStatus {
    match err {
        Error::OutOfRegime { .. } | Error::DegenerateField | Error::NotBracketed { .. } => MaStatus::OutOfRegime,
        Error::NotConverged(_) | Error::Quadrature(_) => MaStatus::NotConverged,
        Error::GridTooLarge { .. } => MaStatus::GridTooLarge,
        Error::UnsupportedOrder(..) => MaStatus::UnsupportedOrder,
        _ => MaStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into a status.
fn guard<F>(f: F) -> MaStatus
where
    F: FnOnce() -> Result<(), MaStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MaStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside the solver".into());
            MaStatus::Internal
        }
    }
}

fn fail(err: Error) -> MaStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> MaStatus {
    set_error(format!("{what} is null"));
    MaStatus::NullPointer
}

unsafe fn system<'a>(sys: *const MaSystem) -> Result<&'a SystemSpec, MaStatus> {
    sys.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), MaStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed(spec: SystemSpec) -> *mut MaSystem {
    Box::into_raw(Box::new(MaSystem { inner: spec }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ma_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ma_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Charge `e` and masses in electron units. Pass `m2 = INFINITY` for a static partner.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ma_system_new(e: f64, m1: f64, m2: f64, out: *mut *mut MaSystem) -> MaStatus {
    guard(|| {
        let m2 = if m2 == f64::INFINITY { None } else { Some(m2) };
        let spec = derive_system(e, m1, m2).map_err(fail)?;
        store(out, boxed(spec))
    })
}

/// Finite-mass hydrogen.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ma_system_hydrogen(out: *mut *mut MaSystem) -> MaStatus {
    guard(|| store(out, boxed(SystemSpec::hydrogen())))
}

/// Positronium.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ma_system_positronium(out: *mut *mut MaSystem) -> MaStatus {
    guard(|| store(out, boxed(SystemSpec::positronium())))
}

/// # Safety
/// `sys` must be null or a handle from `ma_system_*` that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn ma_system_free(sys: *mut MaSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ma_system_reduced_mass(sys: *const MaSystem, out: *mut f64) -> MaStatus {
    guard(|| store(out, system(sys)?.reduced_mass()))
}

/// Perturbation coefficient of `B^n P^k` in internal units.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ma_pt_coefficient(sys: *const MaSystem, n: u32, k: u32, out: *mut f64) -> MaStatus {
    guard(|| {
        let table = energy_coefficients(system(sys)?);
        let v = table.value(n, k).ok_or_else(|| fail(Error::UnsupportedOrder(n, k)))?;
        store(out, v)
    })
}

/// Momentum above which the magnetic well exists, at effective field `b_eff`.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ma_p_saddle(sys: *const MaSystem, b_eff: f64, out: *mut f64) -> MaStatus {
    guard(|| {
        let s = system(sys)?;
        let f = FieldConfig::new(s, b_eff, 0.0, 0.0).map_err(fail)?;
        store(out, potential::p_saddle(s, f.b_int).map_err(fail)?)
    })
}

/// Optimized variational ground state with the default search strategy.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ma_variational(
    sys: *const MaSystem,
    b_eff: f64,
    p_eff: f64,
    out: *mut MaVariational,
) -> MaStatus {
    guard(|| {
        let s = system(sys)?;
        let f = FieldConfig::new(s, b_eff, p_eff, 0.0).map_err(fail)?;
        let r = optimize(None, s, &f, &Strategy::default()).map_err(fail)?;
        let class = match r.classification {
            Classification::Centered => MaClass::Centered,
            Classification::Decentered => MaClass::Decentered,
            Classification::Mixed => MaClass::Mixed,
        };
        store(
            out,
            MaVariational {
                energy: r.energy,
                rho_mean: r.rho_mean,
                d: r.params.d,
                classification: class as i32,
            },
        )
    })
}

/// Finite-difference ground state on an `n × n` grid and `levels − 1`
/// refinements. `magnetic` places the grid on the outer well.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ma_oracle(
    sys: *const MaSystem,
    b_eff: f64,
    p_eff: f64,
    d: f64,
    n: usize,
    levels: usize,
    magnetic: bool,
    out: *mut MaOracle,
) -> MaStatus {
    guard(|| {
        let s = system(sys)?;
        let f = FieldConfig::new(s, b_eff, p_eff, d).map_err(fail)?;
        let place = if magnetic { Localization::Magnetic } else { Localization::Coulomb };
        let grid = GridSpec::auto(s, &f, n, place, CoulombTreatment::Calibrated).map_err(fail)?;
        let run = oracle::run(s, &f, &grid, levels, &EigenOptions::default()).map_err(fail)?;
        let last = run.levels.last().expect("at least one level");
        store(
            out,
            MaOracle {
                energy: run.energy(),
                tolerance: run.tolerance(),
                finest: last.energy,
                converged: run.levels.iter().all(|l| l.converged),
            },
        )
    })
}

/// Parse a `key = value` config into a system handle; field keys are ignored.
///
/// # Safety
/// `text` must be a NUL-terminated string, `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ma_system_from_config(text: *const c_char, out: *mut *mut MaSystem) -> MaStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("config text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(Error::Config("config is not UTF-8".into())))?;
        let cfg = magnetoatom::config::RunConfig::parse(text).map_err(fail)?;
        store(out, boxed(cfg.system))
    })
}
