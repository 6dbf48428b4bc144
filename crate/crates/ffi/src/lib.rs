//! C ABI for the m3d-noc evaluator and optimizer.
//!
//! Objects are opaque handles created by `m3d_*_new`/`m3d_*_load` style
//! functions and released with the matching `m3d_*_free`. Every fallible
//! function returns an [`M3dStatus`]; on failure `m3d_last_error` describes
//! the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use m3d_noc::io::{load_traffic_csv, read_design_dir, write_design_dir};
use m3d_noc::model::{
    validate_design, Design, DesignKind, GridSpec, LinkTier, ProcessParams, RouterConfig, StageKind,
    StageTier, TierAssignment, TrafficMatrix,
};
use m3d_noc::route::{evaluate, EvalResult};
use m3d_noc::search::{pa_optimize_from, po_baseline, po_optimize, Problem, SearchConfig};
use m3d_noc::topogen::{gen_mesh, gen_smallworld, gen_traffic, SmallWorldSpec, TrafficKind, TrafficSpec};
use m3d_noc::Error;

/// Result codes. The non-zero values match the command-line exit codes where
/// they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M3dStatus {
    Ok = 0,
    Internal = 1,
    Validation = 2,
    Infeasible = 3,
    NullArgument = 4,
    Panic = 5,
}

/// Which optimizer to run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M3dMode {
    ProcessAware = 0,
    ProcessOblivious = 1,
}

/// Latency (ps), energy (pJ) and their product.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct M3dEval {
    pub latency_ps: f64,
    pub energy_pj: f64,
    pub edp: f64,
}

impl From<EvalResult> for M3dEval {
    fn from(r: EvalResult) -> Self {
        M3dEval {
            latency_ps: r.latency,
            energy_pj: r.energy,
            edp: r.edp,
        }
    }
}

/// A topology, core placement and tier assignment.
pub struct M3dDesign {
    inner: Design,
}

/// Core-to-core traffic weights.
pub struct M3dTraffic {
    inner: TrafficMatrix,
}

/// Process and router parameters.
pub struct M3dParams {
    process: ProcessParams,
    router: RouterConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> M3dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => M3dStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer passed as `{what}`"));
            M3dStatus::NullArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            match e.exit_code() {
                2 => M3dStatus::Validation,
                3 => M3dStatus::Infeasible,
                _ => M3dStatus::Internal,
            }
        }
        Err(_) => {
            set_last_error("panic inside m3d-noc".into());
            M3dStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidParam(format!("`{what}` is not valid UTF-8")))?)
}

unsafe fn path_arg(p: *const c_char, what: &'static str) -> FfiResult<PathBuf> {
    str_arg(p, what).map(PathBuf::from)
}

unsafe fn write_out<T>(out: *mut *mut T, value: T, what: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn grid(x: u32, y: u32, z: u32, hop_pitch_mm: f64) -> FfiResult<GridSpec> {
    Ok(GridSpec::new(x, y, z, hop_pitch_mm)?)
}

fn baseline(topology: m3d_noc::model::Topology, kind: DesignKind) -> Design {
    let n = topology.num_routers();
    let links = topology.links.len();
    po_baseline(&Design {
        tiers: TierAssignment::uniform(n, links, StageTier::Mt, LinkTier::Bottom),
        topology,
        kind,
    })
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn m3d_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn m3d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default calibration with the given variation parameters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_params_new(alpha: f64, beta: f64, gamma: f64, out: *mut *mut M3dParams) -> M3dStatus {
    guard(|| {
        let process = ProcessParams::default().with_variation(alpha, beta, gamma);
        process.check()?;
        write_out(
            out,
            M3dParams {
                process,
                router: RouterConfig::default(),
            },
            "out",
        )
    })
}

/// Process parameters from a JSON object; missing fields take their defaults.
///
/// # Safety
/// `json` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_params_from_json(json: *const c_char, out: *mut *mut M3dParams) -> M3dStatus {
    guard(|| {
        let process: ProcessParams = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        process.check()?;
        write_out(
            out,
            M3dParams {
                process,
                router: RouterConfig::default(),
            },
            "out",
        )
    })
}

/// # Safety
/// `params` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn m3d_params_free(params: *mut M3dParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// 3D mesh with process-oblivious tiers.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_mesh(x: u32, y: u32, z: u32, hop_pitch_mm: f64, out: *mut *mut M3dDesign) -> M3dStatus {
    guard(|| {
        let t = gen_mesh(&grid(x, y, z, hop_pitch_mm)?)?;
        write_out(out, M3dDesign { inner: baseline(t, DesignKind::Mesh) }, "out")
    })
}

/// Small-world topology with the default link budget and process-oblivious tiers.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_smallworld(
    x: u32,
    y: u32,
    z: u32,
    hop_pitch_mm: f64,
    seed: u64,
    out: *mut *mut M3dDesign,
) -> M3dStatus {
    guard(|| {
        let spec = SmallWorldSpec {
            seed,
            ..Default::default()
        };
        let t = gen_smallworld(&grid(x, y, z, hop_pitch_mm)?, &spec)?;
        write_out(out, M3dDesign { inner: baseline(t, DesignKind::SmallWorld) }, "out")
    })
}

/// Reads a design directory.
///
/// # Safety
/// `dir` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_load(dir: *const c_char, out: *mut *mut M3dDesign) -> M3dStatus {
    guard(|| {
        let d = read_design_dir(path_arg(dir, "dir")?)?;
        write_out(out, M3dDesign { inner: d }, "out")
    })
}

/// Writes a design directory, creating it if needed.
///
/// # Safety
/// `design` must be a live handle and `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_save(design: *const M3dDesign, dir: *const c_char) -> M3dStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let dir = path_arg(dir, "dir")?;
        std::fs::create_dir_all(&dir).map_err(|e| Error::InvalidParam(format!("{}: {e}", dir.display())))?;
        Ok(write_design_dir(&dir, &d.inner)?)
    })
}

/// `M3D_STATUS_VALIDATION` with the violations in `m3d_last_error` when the
/// design is invalid.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_validate(design: *const M3dDesign) -> M3dStatus {
    guard(|| {
        let report = validate_design(&borrow(design, "design")?.inner);
        if report.ok() {
            Ok(())
        } else {
            Err(Error::Invalid(report).into())
        }
    })
}

/// Number of routers, or 0 for NULL.
///
/// # Safety
/// `design` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_num_routers(design: *const M3dDesign) -> usize {
    design.as_ref().map_or(0, |d| d.inner.topology.num_routers())
}

/// Number of links, or 0 for NULL.
///
/// # Safety
/// `design` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_num_links(design: *const M3dDesign) -> usize {
    design.as_ref().map_or(0, |d| d.inner.topology.links.len())
}

/// Stage counts over all routers and stage kinds: `counts[0]` bottom-tier,
/// `counts[1]` top-tier, `counts[2]` multitier. `top_links` receives the
/// number of top-tier links.
///
/// # Safety
/// `design` must be a live handle, `counts` must point to 3 writable values
/// and `top_links` to one.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_tier_counts(
    design: *const M3dDesign,
    counts: *mut usize,
    top_links: *mut usize,
) -> M3dStatus {
    guard(|| {
        let d = &borrow(design, "design")?.inner;
        if counts.is_null() {
            return Err(Failure::Null("counts"));
        }
        if top_links.is_null() {
            return Err(Failure::Null("top_links"));
        }
        let c = d.tiers.stage_counts(&StageKind::ALL);
        ptr::copy_nonoverlapping(c.as_ptr(), counts, 3);
        *top_links = d.tiers.top_links();
        Ok(())
    })
}

/// # Safety
/// `design` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn m3d_design_free(design: *mut M3dDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// All-zero traffic over `n` cores.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_traffic_new(n: usize, out: *mut *mut M3dTraffic) -> M3dStatus {
    guard(|| {
        write_out(
            out,
            M3dTraffic {
                inner: TrafficMatrix::zeros(n),
            },
            "out",
        )
    })
}

/// Sets the weight from core `src` to core `dst`.
///
/// # Safety
/// `traffic` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn m3d_traffic_set(traffic: *mut M3dTraffic, src: usize, dst: usize, weight: f64) -> M3dStatus {
    guard(|| {
        let t = traffic.as_mut().ok_or(Failure::Null("traffic"))?;
        Ok(t.inner.set(src, dst, weight)?)
    })
}

/// Reads `src,dst,weight` CSV for `n` cores.
///
/// # Safety
/// `path` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_traffic_load_csv(path: *const c_char, n: usize, out: *mut *mut M3dTraffic) -> M3dStatus {
    guard(|| {
        let tm = load_traffic_csv(path_arg(path, "path")?, n)?;
        write_out(out, M3dTraffic { inner: tm }, "out")
    })
}

/// Synthetic traffic whose weight decays as `distance^-exponent`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_traffic_distance_decay(
    x: u32,
    y: u32,
    z: u32,
    exponent: f64,
    out: *mut *mut M3dTraffic,
) -> M3dStatus {
    guard(|| {
        let spec = TrafficSpec {
            kind: TrafficKind::DistanceDecay { exponent },
            seed: 0,
        };
        let tm = gen_traffic(&grid(x, y, z, 1.0)?, &spec)?;
        write_out(out, M3dTraffic { inner: tm }, "out")
    })
}

/// # Safety
/// `traffic` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn m3d_traffic_free(traffic: *mut M3dTraffic) {
    if !traffic.is_null() {
        drop(Box::from_raw(traffic));
    }
}

/// Evaluates latency, energy and EDP of a design.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m3d_evaluate(
    design: *const M3dDesign,
    traffic: *const M3dTraffic,
    params: *const M3dParams,
    out: *mut M3dEval,
) -> M3dStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let t = borrow(traffic, "traffic")?;
        let p = borrow(params, "params")?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = evaluate(&d.inner, &t.inner, &p.process, &p.router)?.into();
        Ok(())
    })
}

/// Optimizes a design with the default search settings and `seed`. The
/// process-aware mode starts from the process-oblivious result. The returned
/// design must be released with `m3d_design_free`.
///
/// # Safety
/// Handles must be live; `out_design` and `out_eval` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn m3d_optimize(
    design: *const M3dDesign,
    traffic: *const M3dTraffic,
    params: *const M3dParams,
    mode: M3dMode,
    seed: u64,
    out_design: *mut *mut M3dDesign,
    out_eval: *mut M3dEval,
) -> M3dStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let t = borrow(traffic, "traffic")?;
        let p = borrow(params, "params")?;
        if out_design.is_null() {
            return Err(Failure::Null("out_design"));
        }
        let eval = out_eval.as_mut().ok_or(Failure::Null("out_eval"))?;
        let problem = Problem {
            start: d.inner.clone(),
            traffic: t.inner.clone(),
            process: p.process,
            router: p.router,
        };
        let cfg = SearchConfig {
            seed,
            ..Default::default()
        };
        let po = po_optimize(&problem, &cfg)?;
        let best = match mode {
            M3dMode::ProcessOblivious => po,
            M3dMode::ProcessAware => pa_optimize_from(&po.best, &problem, &cfg)?,
        };
        *eval = best.best_eval.into();
        write_out(out_design, M3dDesign { inner: best.best }, "out_design")
    })
}
