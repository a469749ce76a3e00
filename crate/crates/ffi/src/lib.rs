//! C ABI over `billiard_fem`.
//!
//! Every fallible call returns a [`BfStatus`]. On failure a message is kept per
//! thread and can be read with [`bf_last_error_message`]. Handles are opaque and
//! must be released with the matching `*_free` function. State indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use billiard_fem::analysis::{exact_spectrum, write_atomic};
use billiard_fem::eigensolve::SolverOpts;
use billiard_fem::field::{self, GridSpec, RenderMode, StripAxis};
use billiard_fem::geometry::{Region, RegionSpec};
use billiard_fem::mesh::MeshParams;
use billiard_fem::pipeline::{run_pipeline, Solution, Stage, StageError};
use billiard_fem::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Mesh = 4,
    Assembly = 5,
    Solve = 6,
    NoConvergence = 7,
    OutOfRange = 8,
    Unsupported = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfStripAxis {
    Vertical = 0,
    Horizontal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfRenderMode {
    Psi = 0,
    Density = 1,
}

/// Discretization and solver settings.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfSolveParams {
    /// Upper bound on triangle area.
    pub h: f64,
    /// Boundary chord tolerance; zero or negative selects `sqrt(h) / 10`.
    pub chord_tolerance: f64,
    /// Element order, 1 or 2.
    pub order: u32,
    pub num_states: usize,
    pub rel_residual_tol: f64,
}

/// Opaque region handle.
pub struct BfRegion(Region);

/// Opaque handle to a meshed region and its computed spectrum.
pub struct BfSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(BfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidSpec(_) | Error::Parse(_) => BfStatus::Parse,
            Error::NoConvergence { .. } => BfStatus::NoConvergence,
            Error::UnsupportedRegionForOracle(_) => BfStatus::Unsupported,
            Error::OutOfValidityWindow(_) => BfStatus::OutOfRange,
            Error::Io(_) => BfStatus::Io,
            _ => BfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<StageError> for Failure {
    fn from(e: StageError) -> Self {
        let msg = e.to_string();
        let status = match (&e.source, e.stage) {
            (Error::NoConvergence { .. }, _) => BfStatus::NoConvergence,
            (Error::InvalidParams(_), _) => BfStatus::InvalidArgument,
            (_, Stage::Mesh) => BfStatus::Mesh,
            (_, Stage::Assembly) => BfStatus::Assembly,
            (_, Stage::Solve) => BfStatus::Solve,
        };
        Failure(status, msg)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(BfStatus::Io, e.to_string())
    }
}

fn fail(status: BfStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            BfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(BfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(BfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(BfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(BfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Copies `src` into `buf`, which must hold at least `src.len()` values.
/// `written` (may be null) receives the required length in every case.
unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize, written: *mut usize) -> Result<(), Failure> {
    if let Some(w) = written.as_mut() {
        *w = src.len();
    }
    if len < src.len() {
        return Err(fail(BfStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len())));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(fail(BfStatus::NullPointer, "buffer is null"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

fn state(sol: &Solution, index: usize) -> Result<&billiard_fem::eigensolve::EigenPair, Failure> {
    sol.spectrum.pairs.get(index).ok_or_else(|| {
        fail(BfStatus::OutOfRange, format!("state index {index} out of range (have {})", sol.spectrum.len()))
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Defaults: `h = 1e-3`, default chord tolerance, P2, 16 states, tolerance `1e-9`.
#[no_mangle]
pub extern "C" fn bf_solve_params_default() -> BfSolveParams {
    BfSolveParams { h: 1e-3, chord_tolerance: 0.0, order: 2, num_states: 16, rel_residual_tol: 1e-9 }
}

/// Parses a region spec such as `"stadium"` or `"circle r=1"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `region` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_region_new(spec: *const c_char, region: *mut *mut BfRegion) -> BfStatus {
    guard(|| {
        let slot = out(region, "region")?;
        *slot = ptr::null_mut();
        let spec: RegionSpec = c_str(spec, "spec")?.parse()?;
        *slot = Box::into_raw(Box::new(BfRegion(Region::new(spec)?)));
        Ok(())
    })
}

/// # Safety
/// `region` must come from [`bf_region_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn bf_region_free(region: *mut BfRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Exact area of the region.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_region_area(region: *const BfRegion, area: *mut f64) -> BfStatus {
    guard(|| {
        *out(area, "area")? = deref(region, "region")?.0.area();
        Ok(())
    })
}

/// Whether `(x, y)` lies inside the region.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_region_contains(region: *const BfRegion, x: f64, y: f64, inside: *mut bool) -> BfStatus {
    guard(|| {
        let r = deref(region, "region")?;
        *out(inside, "inside")? = r.0.contains(billiard_fem::geometry::Point2::new(x, y));
        Ok(())
    })
}

/// Closed-form wavenumbers of the first `len` levels, repeated by multiplicity.
/// Only circles, equilateral triangles and rectangles are supported.
///
/// # Safety
/// `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bf_exact_wavenumbers(region: *const BfRegion, buf: *mut f64, len: usize) -> BfStatus {
    guard(|| {
        let r = deref(region, "region")?;
        let ks: Vec<f64> = exact_spectrum(&r.0, len)?.iter().map(|l| l.k).take(len).collect();
        copy_out(&ks, buf, len, ptr::null_mut())
    })
}

/// Meshes, assembles and solves for the lowest `params.num_states` levels.
///
/// # Safety
/// `region` and `params` must be valid; `solution` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_solve(
    region: *const BfRegion,
    params: *const BfSolveParams,
    solution: *mut *mut BfSolution,
) -> BfStatus {
    guard(|| {
        let slot = out(solution, "solution")?;
        *slot = ptr::null_mut();
        let r = deref(region, "region")?;
        let p = deref(params, "params")?;
        let order = u8::try_from(p.order).map_err(|_| fail(BfStatus::InvalidArgument, "order must be 1 or 2"))?;
        let mut mesh = MeshParams::new(p.h);
        if p.chord_tolerance > 0.0 {
            mesh = mesh.with_chord_tolerance(p.chord_tolerance);
        }
        let opts = SolverOpts { rel_residual_tol: p.rel_residual_tol, ..SolverOpts::new(p.num_states) };
        opts.validate()?;
        let sol = run_pipeline(&r.0, mesh, order, &opts)?;
        *slot = Box::into_raw(Box::new(BfSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from [`bf_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_free(solution: *mut BfSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of computed states.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_len(solution: *const BfSolution, len: *mut usize) -> BfStatus {
    guard(|| {
        *out(len, "len")? = deref(solution, "solution")?.0.spectrum.len();
        Ok(())
    })
}

/// Number of interior degrees of freedom, the length of each coefficient vector.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_n_dof(solution: *const BfSolution, n_dof: *mut usize) -> BfStatus {
    guard(|| {
        *out(n_dof, "n_dof")? = deref(solution, "solution")?.0.disc.n_dof();
        Ok(())
    })
}

/// Whether inertia confirmed that no level below the last one was missed.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_certified(solution: *const BfSolution, certified: *mut bool) -> BfStatus {
    guard(|| {
        *out(certified, "certified")? = deref(solution, "solution")?.0.spectrum.inertia_verified;
        Ok(())
    })
}

/// Copies all wavenumbers in ascending order. `written` receives the count.
///
/// # Safety
/// `buf` must hold `len` values; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_wavenumbers(
    solution: *const BfSolution,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> BfStatus {
    guard(|| copy_out(&deref(solution, "solution")?.0.spectrum.wavenumbers(), buf, len, written))
}

/// Eigenvalue `lambda = k^2` and relative residual of one state.
///
/// # Safety
/// `solution` must be valid; either output may be null.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_eigenvalue(
    solution: *const BfSolution,
    index: usize,
    lambda: *mut f64,
    residual: *mut f64,
) -> BfStatus {
    guard(|| {
        let p = state(&deref(solution, "solution")?.0, index)?;
        if let Some(l) = lambda.as_mut() {
            *l = p.lambda;
        }
        if let Some(r) = residual.as_mut() {
            *r = p.residual;
        }
        Ok(())
    })
}

/// Copies the mass-normalized coefficient vector of one state.
///
/// # Safety
/// `buf` must hold `len` values; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_coefficients(
    solution: *const BfSolution,
    index: usize,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> BfStatus {
    guard(|| copy_out(&state(&deref(solution, "solution")?.0, index)?.coeffs, buf, len, written))
}

/// Inverse participation ratio `Area * integral of |psi|^4`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_ipr(solution: *const BfSolution, index: usize, ipr: *mut f64) -> BfStatus {
    guard(|| {
        let sol = &deref(solution, "solution")?.0;
        let slot = out(ipr, "ipr")?;
        *slot = field::ipr(&sol.disc, &state(sol, index)?.coeffs)?;
        Ok(())
    })
}

/// Probability inside a central strip whose width is the fraction `width` of the
/// bounding box along `axis`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_strip_mass(
    solution: *const BfSolution,
    index: usize,
    axis: BfStripAxis,
    width: f64,
    mass: *mut f64,
) -> BfStatus {
    guard(|| {
        let sol = &deref(solution, "solution")?.0;
        let slot = out(mass, "mass")?;
        let axis = match axis {
            BfStripAxis::Vertical => StripAxis::Vertical,
            BfStripAxis::Horizontal => StripAxis::Horizontal,
        };
        *slot = field::strip_mass(&sol.disc, &state(sol, index)?.coeffs, axis, width)?;
        Ok(())
    })
}

/// Rasterizes one state over the region's bounding box and writes a binary PGM.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bf_solution_render_pgm(
    solution: *const BfSolution,
    index: usize,
    nx: usize,
    ny: usize,
    mode: BfRenderMode,
    path: *const c_char,
) -> BfStatus {
    guard(|| {
        let sol = &deref(solution, "solution")?.0;
        let path = c_str(path, "path")?;
        let coeffs = &state(sol, index)?.coeffs;
        let grid = field::evaluate_eigenfunction(&sol.disc, coeffs, &GridSpec::covering(&sol.disc, nx, ny)?)?;
        let mode = match mode {
            BfRenderMode::Psi => RenderMode::Psi,
            BfRenderMode::Density => RenderMode::Density,
        };
        write_atomic(Path::new(path), &field::render_pgm(&grid, mode))?;
        Ok(())
    })
}
