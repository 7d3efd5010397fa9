//! C interface to `bdscore`.
//!
//! Datasets and DAGs are opaque handles created by `bds_*_new`/`bds_*_load`
//! functions and released with the matching `_free`. Every fallible function
//! returns a [`BdsStatus`] and writes its result through an out-pointer; on
//! failure, `bds_last_error_message` describes the error for the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bdscore::analysis::bayes_factor;
use bdscore::entropy::{log_me_score, mixture_expected_entropy};
use bdscore::learn::{hill_climb, HillClimbOptions};
use bdscore::scores::{total_score, BicPenalty};
use bdscore::{AlphaSpec, Dag, Dataset, Error, PriorKind, Score};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    MissingData = 5,
    Domain = 6,
    PriorSupport = 7,
    Size = 8,
    Panic = 9,
}

/// Score family selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdsScoreKind {
    Bdeu = 0,
    Bds = 1,
    Bdj = 2,
    K2 = 3,
    Bdla = 4,
    /// BIC with `q (r - 1)` free parameters.
    Bic = 5,
    /// BIC with the effective number of parameters.
    BicEffective = 6,
}

/// A score choice. `alpha` is the imaginary sample size (BDeu, BDs, BDla);
/// `bdla_levels` is the BDla half-width `L`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BdsScoreSpec {
    pub kind: BdsScoreKind,
    pub alpha: f64,
    pub bdla_levels: u32,
}

/// Opaque dataset handle.
pub struct BdsDataset(Dataset);

/// Opaque DAG handle.
pub struct BdsDag(Dag);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(BdsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => BdsStatus::Io,
            Error::Format(_) => BdsStatus::Format,
            Error::MissingData { .. } => BdsStatus::MissingData,
            Error::Argument(_) => BdsStatus::InvalidArgument,
            Error::Domain(_) => BdsStatus::Domain,
            Error::PriorSupport(_) => BdsStatus::PriorSupport,
            Error::Size(_) => BdsStatus::Size,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BdsStatus::NullPointer, format!("`{what}` is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(BdsStatus::InvalidArgument, msg.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BdsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BdsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_owned());
            BdsStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn to_score(spec: &BdsScoreSpec) -> Score {
    let kind = match spec.kind {
        BdsScoreKind::Bdeu => PriorKind::BDeu,
        BdsScoreKind::Bds => PriorKind::BDs,
        BdsScoreKind::Bdj => PriorKind::BDJ,
        BdsScoreKind::K2 => PriorKind::K2,
        BdsScoreKind::Bdla => PriorKind::BDla,
        BdsScoreKind::Bic => return Score::Bic(BicPenalty::Literal),
        BdsScoreKind::BicEffective => return Score::Bic(BicPenalty::Effective),
    };
    Score::Bd(AlphaSpec {
        bdla_levels: spec.bdla_levels,
        ..AlphaSpec::new(kind, spec.alpha)
    })
}

fn to_alpha_spec(spec: &BdsScoreSpec) -> Result<AlphaSpec, Failure> {
    match to_score(spec) {
        Score::Bd(s) => Ok(s),
        Score::Bic(_) => Err(invalid("this function needs a Bayesian Dirichlet score")),
    }
}

fn to_indices(values: &[u32]) -> Vec<usize> {
    values.iter().map(|&v| v as usize).collect()
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a categorical CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_dataset_load_csv(
    path: *const c_char,
    has_header: bool,
    out: *mut *mut BdsDataset,
) -> BdsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| invalid("path is not valid UTF-8"))?;
        let data = Dataset::load_csv(path, has_header)?;
        unsafe { write_out(out, Box::into_raw(Box::new(BdsDataset(data))), "out") }
    })
}

/// Builds a dataset from integer codes, row-major `n_rows × n_vars`.
/// Variables are named `V1..Vn`.
///
/// # Safety
/// `cardinalities` must hold `n_vars` values and `codes` `n_rows * n_vars`.
#[no_mangle]
pub unsafe extern "C" fn bds_dataset_from_codes(
    n_vars: usize,
    cardinalities: *const u32,
    n_rows: usize,
    codes: *const u32,
    out: *mut *mut BdsDataset,
) -> BdsStatus {
    guard(|| {
        let cards = unsafe { slice(cardinalities, n_vars, "cardinalities")? };
        let len = n_rows
            .checked_mul(n_vars)
            .ok_or_else(|| invalid("n_rows * n_vars overflows"))?;
        let codes = unsafe { slice(codes, len, "codes")? };
        let names: Vec<String> = (1..=n_vars).map(|i| format!("V{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let rows: Vec<Vec<usize>> = if n_vars == 0 {
            vec![Vec::new(); n_rows]
        } else {
            codes.chunks(n_vars).map(to_indices).collect()
        };
        let data = Dataset::from_codes(&name_refs, &to_indices(cards), &rows)?;
        unsafe { write_out(out, Box::into_raw(Box::new(BdsDataset(data))), "out") }
    })
}

/// Number of variables; 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_dataset_n_vars(data: *const BdsDataset) -> usize {
    unsafe { data.as_ref() }.map_or(0, |d| d.0.n_vars())
}

/// Number of rows; 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_dataset_n_rows(data: *const BdsDataset) -> usize {
    unsafe { data.as_ref() }.map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `data` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bds_dataset_free(data: *mut BdsDataset) {
    if !data.is_null() {
        drop(unsafe { Box::from_raw(data) });
    }
}

/// Builds a DAG from `n_arcs` `(parent, child)` pairs stored flat in `arcs`.
///
/// # Safety
/// `arcs` must hold `2 * n_arcs` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_dag_new(
    n_nodes: usize,
    arcs: *const u32,
    n_arcs: usize,
    out: *mut *mut BdsDag,
) -> BdsStatus {
    guard(|| {
        let len = n_arcs
            .checked_mul(2)
            .ok_or_else(|| invalid("n_arcs overflows"))?;
        let flat = unsafe { slice(arcs, len, "arcs")? };
        let pairs: Vec<(usize, usize)> = flat
            .chunks(2)
            .map(|p| (p[0] as usize, p[1] as usize))
            .collect();
        let dag = Dag::from_arcs(n_nodes, &pairs)?;
        unsafe { write_out(out, Box::into_raw(Box::new(BdsDag(dag))), "out") }
    })
}

/// Number of arcs; 0 for NULL.
///
/// # Safety
/// `dag` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_dag_arc_count(dag: *const BdsDag) -> usize {
    unsafe { dag.as_ref() }.map_or(0, |g| g.0.arc_count())
}

/// Copies up to `capacity` arcs as flat `(parent, child)` pairs into `buf`
/// (which must hold `2 * capacity` values) and returns the total arc count.
///
/// # Safety
/// `dag` must be a live handle; `buf` must be NULL or hold `2 * capacity` values.
#[no_mangle]
pub unsafe extern "C" fn bds_dag_arcs(dag: *const BdsDag, buf: *mut u32, capacity: usize) -> usize {
    let Some(g) = (unsafe { dag.as_ref() }) else {
        return 0;
    };
    let arcs = g.0.arcs();
    if !buf.is_null() {
        for (i, &(p, c)) in arcs.iter().take(capacity).enumerate() {
            unsafe {
                buf.add(2 * i).write(p as u32);
                buf.add(2 * i + 1).write(c as u32);
            }
        }
    }
    arcs.len()
}

/// # Safety
/// `dag` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bds_dag_free(dag: *mut BdsDag) {
    if !dag.is_null() {
        drop(unsafe { Box::from_raw(dag) });
    }
}

unsafe fn family<'a>(
    data: *const BdsDataset,
    child: usize,
    parents: *const u32,
    n_parents: usize,
) -> Result<(&'a Dataset, bdscore::LocalCounts), Failure> {
    let data = unsafe { as_ref(data, "data")? };
    if child >= data.0.n_vars() {
        return Err(invalid(format!("child {child} out of range")));
    }
    let parents = to_indices(unsafe { slice(parents, n_parents, "parents")? });
    let counts = data.0.counts(child, &parents)?;
    Ok((&data.0, counts))
}

/// Log score of `child` given `parents`.
///
/// # Safety
/// Handles must be live; `parents` must hold `n_parents` values; `spec` and `out` non-NULL.
#[no_mangle]
pub unsafe extern "C" fn bds_local_log_score(
    data: *const BdsDataset,
    child: usize,
    parents: *const u32,
    n_parents: usize,
    spec: *const BdsScoreSpec,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        let (_, counts) = unsafe { family(data, child, parents, n_parents)? };
        let score = to_score(unsafe { as_ref(spec, "spec")? });
        score.validate()?;
        let v = score.local(&counts)?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Total log score of `dag`.
///
/// # Safety
/// Handles must be live; `spec` and `out` non-NULL.
#[no_mangle]
pub unsafe extern "C" fn bds_total_log_score(
    data: *const BdsDataset,
    dag: *const BdsDag,
    spec: *const BdsScoreSpec,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        let data = unsafe { as_ref(data, "data")? };
        let dag = unsafe { as_ref(dag, "dag")? };
        let score = to_score(unsafe { as_ref(spec, "spec")? });
        let total = total_score(&data.0, &dag.0, &score)?;
        unsafe { write_out(out, total.total, "out") }
    })
}

/// Posterior expected conditional entropy of `child` given `parents`
/// (BDla: posterior-weighted over the grid).
///
/// # Safety
/// As for [`bds_local_log_score`].
#[no_mangle]
pub unsafe extern "C" fn bds_expected_entropy(
    data: *const BdsDataset,
    child: usize,
    parents: *const u32,
    n_parents: usize,
    spec: *const BdsScoreSpec,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        let (_, counts) = unsafe { family(data, child, parents, n_parents)? };
        let spec = to_alpha_spec(unsafe { as_ref(spec, "spec")? })?;
        let v = mixture_expected_entropy(&counts, &spec)?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Natural log of the ME score (expected entropy times marginal likelihood).
///
/// # Safety
/// As for [`bds_local_log_score`].
#[no_mangle]
pub unsafe extern "C" fn bds_log_me_score(
    data: *const BdsDataset,
    child: usize,
    parents: *const u32,
    n_parents: usize,
    spec: *const BdsScoreSpec,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        let (_, counts) = unsafe { family(data, child, parents, n_parents)? };
        let spec = to_alpha_spec(unsafe { as_ref(spec, "spec")? })?;
        let v = log_me_score(&counts, &spec)?;
        unsafe { write_out(out, v, "out") }
    })
}

/// `ln BD(G-) - ln BD(G+)` for DAGs that differ in one parent set.
///
/// # Safety
/// Handles must be live; `spec` and `out` non-NULL.
#[no_mangle]
pub unsafe extern "C" fn bds_log_bayes_factor(
    data: *const BdsDataset,
    g_minus: *const BdsDag,
    g_plus: *const BdsDag,
    spec: *const BdsScoreSpec,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        let data = unsafe { as_ref(data, "data")? };
        let minus = unsafe { as_ref(g_minus, "g_minus")? };
        let plus = unsafe { as_ref(g_plus, "g_plus")? };
        let spec = to_alpha_spec(unsafe { as_ref(spec, "spec")? })?;
        let v = bayes_factor(&data.0, &minus.0, &plus.0, &spec)?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Greedy hill climbing from the empty graph. Writes a new DAG handle to
/// `out_dag` and its total log score to `out_score`.
///
/// # Safety
/// `data` must be live; `spec`, `out_dag` and `out_score` non-NULL.
#[no_mangle]
pub unsafe extern "C" fn bds_hill_climb(
    data: *const BdsDataset,
    spec: *const BdsScoreSpec,
    max_parents: usize,
    max_iter: usize,
    out_dag: *mut *mut BdsDag,
    out_score: *mut f64,
) -> BdsStatus {
    guard(|| {
        let data = unsafe { as_ref(data, "data")? };
        let score = to_score(unsafe { as_ref(spec, "spec")? });
        if out_dag.is_null() || out_score.is_null() {
            return Err(null("out_dag/out_score"));
        }
        let result = hill_climb(
            &data.0,
            &score,
            HillClimbOptions {
                max_parents,
                max_iter,
            },
        )?;
        unsafe {
            out_score.write(result.score);
            out_dag.write(Box::into_raw(Box::new(BdsDag(result.dag))));
        }
        Ok(())
    })
}
