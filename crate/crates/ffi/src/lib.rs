//! C ABI for `votebalance`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns a [`VbStatus`]; on failure [`vb_last_error_message`] describes
//! what went wrong on the calling thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::slice;

use votebalance::analysis::{detect_mediation, RatioBasis};
use votebalance::extract::{build_network, parse_vote_records, AgreementScheme, ExtractionConfig, InputFormat};
use votebalance::formats;
use votebalance::imbalance::{cc_imbalance, relative_imbalance, srcc_imbalance};
use votebalance::solver::{ils_solve, SolveResult, SolverParams};
use votebalance::{Error, Partition, ProblemKind, SignedGraph};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    InvalidData = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VbProblem {
    Cc = 0,
    Srcc = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VbScheme {
    V1 = 0,
    V2 = 1,
}

/// Solver settings; start from `vb_solver_params_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VbSolverParams {
    pub problem: VbProblem,
    /// Cluster count for `Srcc`, ignored for `Cc`.
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub max_no_improve: usize,
    /// Seconds; zero or negative means no limit.
    pub time_limit_seconds: f64,
    pub perturbation_strength: f64,
    pub construction_alpha: f64,
    pub restarts: usize,
    pub threads: usize,
}

/// Opaque signed graph.
pub struct VbGraph(SignedGraph);

/// Opaque partition.
pub struct VbPartition(Partition);

/// Opaque solver result.
pub struct VbSolveResult(SolveResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

struct Failure(VbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::UnknownVote { .. } | Error::Csv(_) | Error::Json(_) => VbStatus::ParseError,
            Error::InvalidParameter(_) | Error::InvalidMove(_) | Error::TooLarge { .. } => VbStatus::InvalidArgument,
            Error::Io { .. } => VbStatus::Io,
            _ => VbStatus::InvalidData,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(VbStatus::InvalidArgument, message.into())
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VbStatus {
    match panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            VbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            VbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure(VbStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out_ptr<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut()
        .ok_or_else(|| Failure(VbStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn c_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(VbStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(VbStatus::ParseError, format!("`{name}` is not UTF-8")))
}

unsafe fn array<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure(VbStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// Message for the last failed call on this thread; empty after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn vb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn vb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ------------------------------------------------------------------ graph

/// Parses the plain-text graph format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_from_text(text: *const c_char, out: *mut *mut VbGraph) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let graph = formats::parse_graph(c_str(text, "text")?)?;
        *out = Box::into_raw(Box::new(VbGraph(graph)));
        Ok(())
    })
}

/// Builds a graph on `n` anonymous vertices from `m` edges given as
/// parallel arrays.
///
/// # Safety
/// `us`, `vs` and `weights` must each point to `m` readable elements.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_from_edges(
    n: usize,
    us: *const usize,
    vs: *const usize,
    weights: *const f64,
    m: usize,
    out: *mut *mut VbGraph,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (us, vs, ws) = (array(us, m, "us")?, array(vs, m, "vs")?, array(weights, m, "weights")?);
        let edges = (0..m).map(|i| (us[i], vs[i], ws[i]));
        let graph = SignedGraph::from_weighted_edges(n, edges)?;
        *out = Box::into_raw(Box::new(VbGraph(graph)));
        Ok(())
    })
}

/// Extracts the agreement graph from roll-call CSV text.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_from_votes_csv(
    csv: *const c_char,
    scheme: VbScheme,
    threshold: f64,
    out: *mut *mut VbGraph,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = parse_vote_records(c_str(csv, "csv")?.as_bytes(), InputFormat::Csv)?;
        let scheme = match scheme {
            VbScheme::V1 => AgreementScheme::V1HalfAgreement,
            VbScheme::V2 => AgreementScheme::V2AbsenceOfOpinion,
        };
        let config = ExtractionConfig::new(scheme).with_threshold(threshold);
        let graph = build_network(&data.records, &data.deputies, &config)?;
        *out = Box::into_raw(Box::new(VbGraph(graph)));
        Ok(())
    })
}

/// Writes the graph in the plain-text format; free with `vb_string_free`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_to_text(graph: *const VbGraph, out: *mut *mut c_char) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = formats::write_graph(&deref(graph, "graph")?.0)?;
        *out = CString::new(text).map_err(|_| invalid("graph text contains NUL"))?.into_raw();
        Ok(())
    })
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_vertex_count(graph: *const VbGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_edge_count(graph: *const VbGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `graph` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn vb_graph_free(graph: *mut VbGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

// -------------------------------------------------------------- partition

/// Partition from arbitrary labels, relabeled densely by first appearance.
///
/// # Safety
/// `labels` must point to `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_partition_from_labels(
    labels: *const usize,
    n: usize,
    out: *mut *mut VbPartition,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let partition = Partition::from_labels(array(labels, n, "labels")?)?;
        *out = Box::into_raw(Box::new(VbPartition(partition)));
        Ok(())
    })
}

/// Number of labelled vertices, or 0 for a null handle.
///
/// # Safety
/// `partition` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_partition_len(partition: *const VbPartition) -> usize {
    partition.as_ref().map_or(0, |p| p.0.len())
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `partition` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_partition_cluster_count(partition: *const VbPartition) -> usize {
    partition.as_ref().map_or(0, |p| p.0.k())
}

/// Copies the labels into `buffer`, which must hold `vb_partition_len`
/// elements.
///
/// # Safety
/// `buffer` must point to `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn vb_partition_labels(
    partition: *const VbPartition,
    buffer: *mut usize,
    len: usize,
) -> VbStatus {
    guard(|| {
        let labels = deref(partition, "partition")?.0.labels();
        if len != labels.len() {
            return Err(invalid(format!("buffer holds {len} labels, partition has {}", labels.len())));
        }
        if len > 0 {
            if buffer.is_null() {
                return Err(Failure(VbStatus::NullPointer, "`buffer` is null".into()));
            }
            slice::from_raw_parts_mut(buffer, len).copy_from_slice(labels);
        }
        Ok(())
    })
}

/// # Safety
/// `partition` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn vb_partition_free(partition: *mut VbPartition) {
    if !partition.is_null() {
        drop(Box::from_raw(partition));
    }
}

// -------------------------------------------------------------- imbalance

/// CC imbalance: negative weight inside clusters plus positive weight
/// between them.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_cc_imbalance(
    graph: *const VbGraph,
    partition: *const VbPartition,
    out: *mut f64,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = cc_imbalance(&deref(graph, "graph")?.0, &deref(partition, "partition")?.0)?;
        Ok(())
    })
}

/// Symmetric relaxed imbalance.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_srcc_imbalance(
    graph: *const VbGraph,
    partition: *const VbPartition,
    out: *mut f64,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = srcc_imbalance(&deref(graph, "graph")?.0, &deref(partition, "partition")?.0)?.total;
        Ok(())
    })
}

/// Writes one flag per cluster (1 = mediator) into `flags`, which must
/// hold `vb_partition_cluster_count` bytes.
///
/// # Safety
/// Handles must be live; `flags` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn vb_detect_mediation(
    graph: *const VbGraph,
    partition: *const VbPartition,
    threshold: f64,
    flags: *mut u8,
    len: usize,
) -> VbStatus {
    guard(|| {
        let partition = &deref(partition, "partition")?.0;
        if len != partition.k() {
            return Err(invalid(format!("buffer holds {len} flags, partition has {} clusters", partition.k())));
        }
        let verdicts = detect_mediation(&deref(graph, "graph")?.0, partition, threshold, RatioBasis::Weight)?;
        if flags.is_null() {
            return Err(Failure(VbStatus::NullPointer, "`flags` is null".into()));
        }
        let out = slice::from_raw_parts_mut(flags, len);
        for (slot, verdict) in out.iter_mut().zip(&verdicts) {
            *slot = u8::from(verdict.is_mediator);
        }
        Ok(())
    })
}

// ----------------------------------------------------------------- solver

/// Library defaults for `problem` (and `k` for the relaxed problem).
#[no_mangle]
pub extern "C" fn vb_solver_params_default(problem: VbProblem, k: usize) -> VbSolverParams {
    let kind = match problem {
        VbProblem::Cc => ProblemKind::Cc,
        VbProblem::Srcc => ProblemKind::Srcc { k },
    };
    let p = SolverParams::new(kind);
    VbSolverParams {
        problem,
        k,
        seed: p.seed,
        max_iterations: p.max_iterations,
        max_no_improve: p.max_no_improve,
        time_limit_seconds: 0.0,
        perturbation_strength: p.perturbation_strength,
        construction_alpha: p.construction_alpha,
        restarts: p.restarts,
        threads: p.threads,
    }
}

/// Runs iterated local search.
///
/// # Safety
/// `graph` and `params` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_solve(
    graph: *const VbGraph,
    params: *const VbSolverParams,
    out: *mut *mut VbSolveResult,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let graph = &deref(graph, "graph")?.0;
        let p = deref(params, "params")?;
        let problem = match p.problem {
            VbProblem::Cc => ProblemKind::Cc,
            VbProblem::Srcc => ProblemKind::Srcc { k: p.k },
        };
        let params = SolverParams {
            problem,
            seed: p.seed,
            max_iterations: p.max_iterations,
            max_no_improve: p.max_no_improve,
            time_limit_seconds: (p.time_limit_seconds > 0.0).then_some(p.time_limit_seconds),
            perturbation_strength: p.perturbation_strength,
            construction_alpha: p.construction_alpha,
            restarts: p.restarts,
            threads: p.threads,
            ..SolverParams::new(problem)
        };
        *out = Box::into_raw(Box::new(VbSolveResult(ils_solve(graph, &params)?)));
        Ok(())
    })
}

/// Best objective value, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_solve_result_value(result: *const VbSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.best_value)
}

/// Imbalance as a percentage of total absolute weight.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_solve_result_relative_imbalance(
    graph: *const VbGraph,
    result: *const VbSolveResult,
    out: *mut f64,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = relative_imbalance(&deref(graph, "graph")?.0, &deref(result, "result")?.0.breakdown)?;
        Ok(())
    })
}

/// Copies the best partition into a new handle.
///
/// # Safety
/// `result` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_solve_result_partition(
    result: *const VbSolveResult,
    out: *mut *mut VbPartition,
) -> VbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let partition = deref(result, "result")?.0.best_partition.clone();
        *out = Box::into_raw(Box::new(VbPartition(partition)));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn vb_solve_result_free(result: *mut VbSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
