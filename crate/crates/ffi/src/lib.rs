//! C ABI over `bifi-core`.
//!
//! Every entry point returns a [`BifiStatus`]. On failure the message is kept
//! per thread and can be read with [`bifi_last_error_message`]. Objects are
//! handed out as opaque pointers and released with the matching `_free`.
//! Output arrays are caller-allocated; their capacity is passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use bifi_core::bifidelity::{select_points, BiFiSurrogate, SnapshotSet};
use bifi_core::config::{from_overrides, parse_config, Overrides};
use bifi_core::experiments::{run_test, ExperimentReport, TestPreset};
use bifi_core::fields::ParamVector;
use bifi_core::quadrature::gauss_legendre_unit;
use bifi_core::solvers::{hf_solve, lf_solve};
use bifi_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BifiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    BufferTooSmall = 4,
    Stability = 5,
    Diverged = 6,
    Degenerate = 7,
    Config = 8,
    Io = 9,
    Panic = 10,
}

/// Test preset handle.
pub struct BifiPreset(TestPreset);

/// Bi-fidelity surrogate handle.
pub struct BifiSurrogate(BiFiSurrogate);

/// Experiment report handle, with the config echo written next to it.
pub struct BifiReport {
    report: ExperimentReport,
    echo: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BifiStatus {
    match e {
        Error::InvalidArgument(_) | Error::Invariant(_) => BifiStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => BifiStatus::DimensionMismatch,
        Error::Stability { .. } => BifiStatus::Stability,
        Error::Diverged { .. } => BifiStatus::Diverged,
        Error::DegenerateSample(_) | Error::SurrogateConstruction(_) => BifiStatus::Degenerate,
        Error::Sample { source, .. } | Error::Phase { source, .. } => status_of(source),
        Error::Config(_) => BifiStatus::Config,
        Error::Io(_) => BifiStatus::Io,
    }
}

struct Fail(BifiStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: BifiStatus, msg: &str) -> Result<T, Fail> {
    Err(Fail(status, msg.to_string()))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BifiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BifiStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            BifiStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(BifiStatus::NullPointer, what);
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(
    p: *mut f64,
    cap: usize,
    need: usize,
    what: &str,
) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return fail(BifiStatus::NullPointer, what);
    }
    if cap < need {
        return Err(Fail(
            BifiStatus::BufferTooSmall,
            format!("{what}: capacity {cap}, need {need}"),
        ));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .map_or_else(|| fail(BifiStatus::NullPointer, what), Ok)
}

unsafe fn rows(p: *const f64, count: usize, len: usize, what: &str) -> Result<Vec<Vec<f64>>, Fail> {
    let flat = input(p, count * len, what)?;
    Ok(flat.chunks(len.max(1)).map(<[f64]>::to_vec).collect())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn bifi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bifi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in preset 1-5.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bifi_preset_new(id: u32, out: *mut *mut BifiPreset) -> BifiStatus {
    guard(|| {
        if out.is_null() {
            return fail(BifiStatus::NullPointer, "out");
        }
        let id = u8::try_from(id)
            .map_err(|_| Fail(BifiStatus::InvalidArgument, format!("preset {id}")))?;
        let p = TestPreset::by_id(id)?;
        *out = Box::into_raw(Box::new(BifiPreset(p)));
        Ok(())
    })
}

/// Preset from a TOML run config, using the same keys as the command line tool.
///
/// # Safety
/// `toml` must be a NUL-terminated UTF-8 string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bifi_preset_from_toml(
    toml: *const c_char,
    out: *mut *mut BifiPreset,
) -> BifiStatus {
    guard(|| {
        if toml.is_null() || out.is_null() {
            return fail(BifiStatus::NullPointer, "toml or out");
        }
        let src = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Fail(BifiStatus::Config, e.to_string()))?;
        let cfg = parse_config(src, &Overrides::default())?;
        *out = Box::into_raw(Box::new(BifiPreset(cfg.preset)));
        Ok(())
    })
}

/// Replaces the Knudsen number by a constant.
///
/// # Safety
/// `preset` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn bifi_preset_set_epsilon(
    preset: *mut BifiPreset,
    epsilon: f64,
) -> BifiStatus {
    guard(|| {
        let p = preset
            .as_mut()
            .ok_or(Fail(BifiStatus::NullPointer, "preset".into()))?;
        let mut next = p.0.clone().with_epsilon(epsilon);
        next.epsilon.validate()?;
        std::mem::swap(&mut p.0, &mut next);
        Ok(())
    })
}

/// Parameter dimension and the high- and low-fidelity cell counts.
///
/// # Safety
/// `preset` must be live; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn bifi_preset_shape(
    preset: *const BifiPreset,
    dimension: *mut usize,
    hf_cells: *mut usize,
    lf_cells: *mut usize,
) -> BifiStatus {
    guard(|| {
        let p = &handle(preset, "preset")?.0;
        for (dst, v) in [
            (dimension, p.dimension),
            (hf_cells, p.hf.cells),
            (lf_cells, p.lf.cells),
        ] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(())
    })
}

/// Releases a preset. Null is ignored.
///
/// # Safety
/// `preset` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bifi_preset_free(preset: *mut BifiPreset) {
    if !preset.is_null() {
        drop(Box::from_raw(preset));
    }
}

unsafe fn solve(
    preset: *const BifiPreset,
    z: *const f64,
    z_len: usize,
    out: *mut f64,
    out_len: usize,
    hf: bool,
) -> BifiStatus {
    guard(|| {
        let p = &handle(preset, "preset")?.0;
        let z = ParamVector::new(input(z, z_len, "z")?.to_vec())?;
        let (cfg, cells) = if hf {
            (p.hf_config()?, p.hf.cells)
        } else {
            (p.lf_config()?, p.lf.cells)
        };
        let dst = output(out, out_len, cells, "out")?;
        let u = if hf {
            hf_solve(&cfg, &z, &p.initial)?
        } else {
            lf_solve(&cfg, &z, &p.initial)?
        };
        dst.copy_from_slice(&u);
        Ok(())
    })
}

/// Kinetic solve at `z`; writes `rbar` on the high-fidelity grid.
///
/// # Safety
/// `z` holds `z_len` values and `out` has room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn bifi_solve_hf(
    preset: *const BifiPreset,
    z: *const f64,
    z_len: usize,
    out: *mut f64,
    out_len: usize,
) -> BifiStatus {
    solve(preset, z, z_len, out, out_len, true)
}

/// Two-velocity solve at `z`; writes `rho` on the low-fidelity grid.
///
/// # Safety
/// `z` holds `z_len` values and `out` has room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn bifi_solve_lf(
    preset: *const BifiPreset,
    z: *const f64,
    z_len: usize,
    out: *mut f64,
    out_len: usize,
) -> BifiStatus {
    solve(preset, z, z_len, out, out_len, false)
}

/// `m`-point Gauss-Legendre rule on (0,1) with weights summing to one.
///
/// # Safety
/// `nodes` and `weights` each have room for `m` values.
#[no_mangle]
pub unsafe extern "C" fn bifi_gauss_legendre(
    m: usize,
    nodes: *mut f64,
    weights: *mut f64,
) -> BifiStatus {
    guard(|| {
        let q = gauss_legendre_unit(m)?;
        output(nodes, m, m, "nodes")?.copy_from_slice(q.nodes());
        output(weights, m, m, "weights")?.copy_from_slice(q.weights());
        Ok(())
    })
}

fn snapshot_set(vectors: Vec<Vec<f64>>, ip_weight: f64) -> Result<SnapshotSet, Fail> {
    let params = vec![ParamVector::zeros(1); vectors.len()];
    Ok(SnapshotSet::new(vectors, params, ip_weight)?)
}

/// Greedy point selection on `count` row-major snapshots of length `len`.
/// Writes up to `n_max` indices and pivots and the number selected.
///
/// # Safety
/// `snapshots` holds `count * len` values; `indices` and `pivots` have room
/// for `n_max`; `selected` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bifi_select_points(
    snapshots: *const f64,
    count: usize,
    len: usize,
    ip_weight: f64,
    n_max: usize,
    tol: f64,
    indices: *mut usize,
    pivots: *mut f64,
    selected: *mut usize,
) -> BifiStatus {
    guard(|| {
        if indices.is_null() || selected.is_null() {
            return fail(BifiStatus::NullPointer, "indices or selected");
        }
        let set = snapshot_set(rows(snapshots, count, len, "snapshots")?, ip_weight)?;
        let sel = select_points(&set, n_max, tol)?;
        let k = sel.indices.len();
        output(pivots, n_max, k, "pivots")?.copy_from_slice(&sel.pivots);
        slice::from_raw_parts_mut(indices, k).copy_from_slice(&sel.indices);
        *selected = k;
        Ok(())
    })
}

/// Surrogate from `n` paired snapshots, row-major, low fidelity of length
/// `lf_len` and high fidelity of length `hf_len`.
///
/// # Safety
/// The snapshot arrays hold `n * lf_len` and `n * hf_len` values; `out` is
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bifi_surrogate_build(
    lf: *const f64,
    hf: *const f64,
    n: usize,
    lf_len: usize,
    hf_len: usize,
    lf_weight: f64,
    hf_weight: f64,
    out: *mut *mut BifiSurrogate,
) -> BifiStatus {
    guard(|| {
        if out.is_null() {
            return fail(BifiStatus::NullPointer, "out");
        }
        let l = snapshot_set(rows(lf, n, lf_len, "lf")?, lf_weight)?;
        let h = snapshot_set(rows(hf, n, hf_len, "hf")?, hf_weight)?;
        *out = Box::into_raw(Box::new(BifiSurrogate(BiFiSurrogate::build(l, h)?)));
        Ok(())
    })
}

/// High-fidelity approximation from one low-fidelity profile.
///
/// # Safety
/// `u_lf` holds `lf_len` values and `out` has room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn bifi_surrogate_reconstruct(
    surrogate: *const BifiSurrogate,
    u_lf: *const f64,
    lf_len: usize,
    out: *mut f64,
    out_len: usize,
) -> BifiStatus {
    guard(|| {
        let s = &handle(surrogate, "surrogate")?.0;
        let u = s.reconstruct_from_lf(input(u_lf, lf_len, "u_lf")?)?;
        output(out, out_len, u.len(), "out")?.copy_from_slice(&u);
        Ok(())
    })
}

/// Weighted mean of reconstructions over `count` row-major low-fidelity
/// profiles. Weights are normalized by their sum.
///
/// # Safety
/// `u_lf` holds `count * lf_len` values, `weights` holds `count`, and `out`
/// has room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn bifi_surrogate_mean(
    surrogate: *const BifiSurrogate,
    u_lf: *const f64,
    count: usize,
    lf_len: usize,
    weights: *const f64,
    out: *mut f64,
    out_len: usize,
) -> BifiStatus {
    guard(|| {
        let s = &handle(surrogate, "surrogate")?.0;
        let profiles = rows(u_lf, count, lf_len, "u_lf")?;
        let w = input(weights, count, "weights")?;
        let recon = profiles
            .iter()
            .map(|u| s.reconstruct_from_lf(u))
            .collect::<Result<Vec<_>, _>>()?;
        let mean = bifi_core::bifidelity::weighted_mean(&recon, w)?;
        output(out, out_len, mean.len(), "out")?.copy_from_slice(&mean);
        Ok(())
    })
}

/// Number of snapshots in the surrogate, 0 for null.
///
/// # Safety
/// `surrogate` is null or live.
#[no_mangle]
pub unsafe extern "C" fn bifi_surrogate_len(surrogate: *const BifiSurrogate) -> usize {
    surrogate.as_ref().map_or(0, |s| s.0.len())
}

/// Releases a surrogate. Null is ignored.
///
/// # Safety
/// `surrogate` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bifi_surrogate_free(surrogate: *mut BifiSurrogate) {
    if !surrogate.is_null() {
        drop(Box::from_raw(surrogate));
    }
}

/// Full pipeline for a preset on the global worker pool.
///
/// # Safety
/// `preset` must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bifi_run_test(
    preset: *const BifiPreset,
    out: *mut *mut BifiReport,
) -> BifiStatus {
    guard(|| {
        if out.is_null() {
            return fail(BifiStatus::NullPointer, "out");
        }
        let p = &handle(preset, "preset")?.0;
        let mut cfg = from_overrides(&Overrides::default())?;
        cfg.preset = p.clone();
        cfg.n_list = (1..=p.n).collect();
        let report = run_test(p)?;
        *out = Box::into_raw(Box::new(BifiReport {
            report,
            echo: cfg.canonical(),
        }));
        Ok(())
    })
}

/// Errors of the bi-fidelity and low-fidelity statistics and the surrogate
/// size actually used. Null out pointers are skipped.
///
/// # Safety
/// `report` must be live.
#[no_mangle]
pub unsafe extern "C" fn bifi_report_errors(
    report: *const BifiReport,
    e_mean: *mut f64,
    e_std: *mut f64,
    lf_e_mean: *mut f64,
    lf_e_std: *mut f64,
    n_effective: *mut usize,
) -> BifiStatus {
    guard(|| {
        let r = &handle(report, "report")?.report;
        for (dst, v) in [
            (e_mean, r.e_mean),
            (e_std, r.e_std),
            (lf_e_mean, r.lf_e_mean),
            (lf_e_std, r.lf_e_std),
        ] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        if !n_effective.is_null() {
            *n_effective = r.n_effective;
        }
        Ok(())
    })
}

/// Writes the config echo and the CSV files of a report into `dir`.
///
/// # Safety
/// `report` must be live and `dir` a NUL-terminated UTF-8 path.
#[no_mangle]
pub unsafe extern "C" fn bifi_report_write(
    report: *const BifiReport,
    dir: *const c_char,
) -> BifiStatus {
    guard(|| {
        let r = handle(report, "report")?;
        if dir.is_null() {
            return fail(BifiStatus::NullPointer, "dir");
        }
        let dir = CStr::from_ptr(dir)
            .to_str()
            .map_err(|e| Fail(BifiStatus::InvalidArgument, e.to_string()))?;
        r.report.write(Path::new(dir), &r.echo)?;
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bifi_report_free(report: *mut BifiReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
