//! C ABI for folkreg.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns a
//! [`FolkregStatus`]; on failure [`folkreg_last_error`] describes the cause.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`folkreg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use folkreg::graph::{random_bounded_degree_graph, random_host, DenseGraph, PartiteHost};
use folkreg::harness::{run_pipeline, PipelineConfig, PipelineReport};
use folkreg::ratio::Density;
use folkreg::turan::{max_kp_free_oracle, turan_bound};
use folkreg::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FolkregStatus {
    Ok = 0,
    Argument = 1,
    State = 2,
    Capacity = 3,
    Precondition = 4,
    Infeasible = 5,
    NotFound = 6,
    Parse = 7,
    Diagnostic = 8,
    NullPointer = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

/// A multipartite host, possibly edge-colored.
pub struct FolkregHost {
    inner: PartiteHost,
}

/// A plain graph, used as the embedding target.
pub struct FolkregGraph {
    inner: DenseGraph,
}

/// Outcome of a pipeline run.
pub struct FolkregReport {
    inner: PipelineReport,
}

/// Pipeline settings. The host supplies the part count and part size.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FolkregPipelineConfig {
    pub delta: usize,
    pub epsilon_num: u64,
    pub epsilon_den: u64,
    pub m: usize,
    pub sample_trials: usize,
    pub max_rounds: usize,
    pub class_size_floor: usize,
    pub retries: usize,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FolkregStatus {
    match e {
        Error::Argument(_) => FolkregStatus::Argument,
        Error::State(_) => FolkregStatus::State,
        Error::Capacity(_) => FolkregStatus::Capacity,
        Error::Precondition(_) => FolkregStatus::Precondition,
        Error::Infeasible(_) => FolkregStatus::Infeasible,
        Error::NotFound(_) => FolkregStatus::NotFound,
        Error::Parse { .. } => FolkregStatus::Parse,
        Error::Diagnostic(_) => FolkregStatus::Diagnostic,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `body`, turning errors and panics into a status plus a stored message.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> FolkregStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FolkregStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FolkregStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("input text is not valid UTF-8".into());
            FolkregStatus::InvalidUtf8
        }
        Err(_) => {
            set_error("internal panic".into());
            FolkregStatus::Panic
        }
    }
}

unsafe fn text_arg<'a>(text: *const c_char) -> Result<&'a str, Fail> {
    if text.is_null() {
        return Err(Fail::Null("text"));
    }
    CStr::from_ptr(text).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = CString::new(s).map_err(|_| Fail::Utf8)?.into_raw();
    Ok(())
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn folkreg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn folkreg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `(C(p,2) - 1) k²`.
#[no_mangle]
pub extern "C" fn folkreg_turan_bound(p: u64, k: u64) -> u64 {
    turan_bound(p, k)
}

/// Exhaustive maximum of a `K_p`-free subgraph of `K_p(k)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_turan_oracle(p: usize, k: usize, out: *mut u64) -> FolkregStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        *out = max_kp_free_oracle(p, k)?;
        Ok(())
    })
}

/// Random complete `p`-partite host with `r` uniformly random edge colors.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_host_random(
    p: usize,
    part_size: usize,
    r: usize,
    seed: u64,
    out: *mut *mut FolkregHost,
) -> FolkregStatus {
    guard(|| {
        let inner = random_host(p, part_size, r, seed)?;
        put(out, FolkregHost { inner })
    })
}

/// Parses the `partite` host text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_host_parse(text: *const c_char, out: *mut *mut FolkregHost) -> FolkregStatus {
    guard(|| {
        let inner = PartiteHost::parse(text_arg(text)?)?;
        put(out, FolkregHost { inner })
    })
}

/// Writes the host in its text format.
///
/// # Safety
/// `host` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_host_to_text(host: *const FolkregHost, out: *mut *mut c_char) -> FolkregStatus {
    guard(|| {
        let text = get(host, "host")?.inner.to_text()?;
        put_string(out, text)
    })
}

/// Number of vertices of the host, 0 for null.
///
/// # Safety
/// `host` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn folkreg_host_vertex_count(host: *const FolkregHost) -> usize {
    host.as_ref().map_or(0, |h| h.inner.n())
}

/// # Safety
/// `host` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn folkreg_host_free(host: *mut FolkregHost) {
    if !host.is_null() {
        drop(Box::from_raw(host));
    }
}

/// Random graph on `n` vertices with maximum degree at most `max_degree`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_graph_random(
    n: usize,
    max_degree: usize,
    seed: u64,
    out: *mut *mut FolkregGraph,
) -> FolkregStatus {
    guard(|| {
        let inner = random_bounded_degree_graph(n, max_degree, seed);
        put(out, FolkregGraph { inner })
    })
}

/// Parses the `graph <n> <m>` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_graph_parse(text: *const c_char, out: *mut *mut FolkregGraph) -> FolkregStatus {
    guard(|| {
        let inner = DenseGraph::parse(text_arg(text)?)?;
        put(out, FolkregGraph { inner })
    })
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn folkreg_graph_free(graph: *mut FolkregGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Library defaults for the given maximum degree and seed.
#[no_mangle]
pub extern "C" fn folkreg_pipeline_config_default(delta: usize, seed: u64) -> FolkregPipelineConfig {
    let cfg = PipelineConfig::new(delta, 2, 2, 1, Density::new(1, 10), seed);
    FolkregPipelineConfig {
        delta,
        epsilon_num: *cfg.epsilon.numer(),
        epsilon_den: *cfg.epsilon.denom(),
        m: cfg.m,
        sample_trials: cfg.sample_trials,
        max_rounds: cfg.max_rounds,
        class_size_floor: cfg.class_size_floor,
        retries: cfg.retries,
        seed,
    }
}

/// Runs the pipeline. Stage failures still yield a report (check
/// [`folkreg_report_success`]); only invalid inputs return an error status.
///
/// # Safety
/// `host`, `target` and `config` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_pipeline_run(
    host: *const FolkregHost,
    target: *const FolkregGraph,
    config: *const FolkregPipelineConfig,
    out: *mut *mut FolkregReport,
) -> FolkregStatus {
    guard(|| {
        let host = &get(host, "host")?.inner;
        let target = &get(target, "target")?.inner;
        let c = get(config, "config")?;
        if c.epsilon_den == 0 {
            return Err(Error::Argument("epsilon denominator is zero".into()).into());
        }
        let part_size = host.part_size(0);
        let r = host.colors().unwrap_or(1);
        let mut cfg = PipelineConfig::new(
            c.delta,
            r,
            host.p(),
            part_size,
            Density::new(c.epsilon_num, c.epsilon_den),
            c.seed,
        );
        cfg.m = c.m;
        cfg.sample_trials = c.sample_trials;
        cfg.max_rounds = c.max_rounds;
        cfg.class_size_floor = c.class_size_floor;
        cfg.retries = c.retries;
        let inner = run_pipeline(host, target, &cfg)?;
        put(out, FolkregReport { inner })
    })
}

/// Whether the report holds a verified embedding; false for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn folkreg_report_success(report: *const FolkregReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.success)
}

/// Color of the embedded copy, or -1 when there is none.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn folkreg_report_color(report: *const FolkregReport) -> i64 {
    report
        .as_ref()
        .and_then(|r| r.inner.color())
        .map_or(-1, |c| c as i64)
}

/// Writes the report text; with `timings` false all stage times print as 0.
///
/// # Safety
/// `report` must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn folkreg_report_to_text(
    report: *const FolkregReport,
    timings: bool,
    out: *mut *mut c_char,
) -> FolkregStatus {
    guard(|| {
        let text = get(report, "report")?.inner.to_text(timings);
        put_string(out, text)
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn folkreg_report_free(report: *mut FolkregReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
