//! C ABI for the `ppfs` feature selector.
//!
//! Every fallible call returns a [`PpfsStatus`]; on failure the message is
//! available from [`ppfs_last_error_message`] on the same thread. Datasets and
//! reports are opaque handles released with their `_free` function. Strings
//! returned by the library are released with [`ppfs_string_free`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ppfs::model::LearnerSpec;
use ppfs::ppi::PpiConfig;
use ppfs::selector::{FoldMode, PpfsConfig, SelectionReport, ShrinkMode};
use ppfs::stats::WilcoxonOptions;
use ppfs::{Dataset, Error, TaskKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    InvalidData = 4,
    Io = 5,
    Degenerate = 6,
    OutOfRange = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpfsTask {
    Classification = 0,
    Regression = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpfsFoldMode {
    Subset = 0,
    Complement = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpfsShrinkMode {
    Improved = 0,
    Restart = 1,
}

/// Selector configuration. Start from [`ppfs_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PpfsConfigC {
    pub copies: usize,
    pub folds: usize,
    pub alpha: f64,
    pub test_fraction: f64,
    pub seed: u64,
    /// 0 means unlimited.
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub exact_max: usize,
    pub fold_mode: PpfsFoldMode,
    pub shrink_mode: PpfsShrinkMode,
}

/// Opaque dataset handle.
pub struct PpfsDataset(Dataset);

/// Opaque selection report handle.
pub struct PpfsReport(SelectionReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> PpfsStatus {
    match e {
        Error::Io { .. } => PpfsStatus::Io,
        Error::Csv(_) | Error::InvalidData(_) => PpfsStatus::InvalidData,
        Error::Config(_) => PpfsStatus::InvalidConfig,
        Error::InvalidArgument(_) => PpfsStatus::InvalidArgument,
        Error::Degenerate(_) => PpfsStatus::Degenerate,
    }
}

fn fail(status: PpfsStatus, msg: impl Into<String>) -> PpfsStatus {
    set_error(msg);
    status
}

/// Runs `f`, recording its error and converting panics into [`PpfsStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), PpfsStatus>) -> PpfsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpfsStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PpfsStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lift<T>(r: ppfs::Result<T>) -> Result<T, PpfsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), PpfsStatus> {
    if p.is_null() {
        Err(fail(PpfsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PpfsStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PpfsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn task_of(t: PpfsTask) -> TaskKind {
    match t {
        PpfsTask::Classification => TaskKind::Classification,
        PpfsTask::Regression => TaskKind::Regression,
    }
}

fn ppi_config(c: &PpfsConfigC) -> PpiConfig {
    PpiConfig {
        copies: c.copies,
        test_fraction: c.test_fraction,
        learner: LearnerSpec {
            max_depth: (c.max_depth > 0).then_some(c.max_depth),
            min_samples_split: c.min_samples_split,
            min_samples_leaf: c.min_samples_leaf,
            ..LearnerSpec::default()
        },
        alpha: c.alpha,
        seed: c.seed,
        wilcoxon: WilcoxonOptions { exact_max: c.exact_max },
    }
}

fn ppfs_config(c: &PpfsConfigC) -> PpfsConfig {
    PpfsConfig {
        ppi: ppi_config(c),
        folds: c.folds,
        fold_mode: match c.fold_mode {
            PpfsFoldMode::Subset => FoldMode::Subset,
            PpfsFoldMode::Complement => FoldMode::Complement,
        },
        shrink_mode: match c.shrink_mode {
            PpfsShrinkMode::Improved => ShrinkMode::Improved,
            PpfsShrinkMode::Restart => ShrinkMode::Restart,
        },
        seed: c.seed,
    }
}

/// Library defaults: B = 10, no aggregation, alpha = 0.05, 80/20 splits.
#[no_mangle]
pub extern "C" fn ppfs_config_default() -> PpfsConfigC {
    let d = PpfsConfig::default();
    PpfsConfigC {
        copies: d.ppi.copies,
        folds: d.folds,
        alpha: d.ppi.alpha,
        test_fraction: d.ppi.test_fraction,
        seed: d.seed,
        max_depth: d.ppi.learner.max_depth.unwrap_or(0),
        min_samples_split: d.ppi.learner.min_samples_split,
        min_samples_leaf: d.ppi.learner.min_samples_leaf,
        exact_max: d.ppi.wilcoxon.exact_max,
        fold_mode: PpfsFoldMode::Subset,
        shrink_mode: PpfsShrinkMode::Improved,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next library call on this thread; do not free.
#[no_mangle]
pub extern "C" fn ppfs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a headed CSV file. Text columns become categorical.
///
/// # Safety
/// `path` and `target` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_dataset_load_csv(
    path: *const c_char,
    target: *const c_char,
    task: PpfsTask,
    out: *mut *mut PpfsDataset,
) -> PpfsStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = str_arg(path, "path")?;
        let target = str_arg(target, "target")?;
        let ds = lift(ppfs::load_csv(path, target, task_of(task), &HashMap::new()))?;
        *out = Box::into_raw(Box::new(PpfsDataset(ds)));
        Ok(())
    })
}

/// Builds a dataset from a row-major `n_rows x n_cols` continuous matrix.
/// Feature names are `x0`, `x1`, ...
///
/// # Safety
/// `values` must hold `n_rows * n_cols` doubles, `target` `n_rows` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_dataset_from_rows(
    values: *const f64,
    n_rows: usize,
    n_cols: usize,
    target: *const f64,
    task: PpfsTask,
    out: *mut *mut PpfsDataset,
) -> PpfsStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(values, "values")?;
        non_null(target, "target")?;
        let len = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| fail(PpfsStatus::InvalidArgument, "matrix size overflows"))?;
        let values = std::slice::from_raw_parts(values, len);
        let target = std::slice::from_raw_parts(target, n_rows).to_vec();
        let columns = (0..n_cols).map(|j| (0..n_rows).map(|i| values[i * n_cols + j]).collect()).collect();
        let ds = lift(Dataset::from_columns(columns, target, task_of(task)))?;
        *out = Box::into_raw(Box::new(PpfsDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ppfs_dataset_free(ds: *mut PpfsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Row count, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfs_dataset_rows(ds: *const PpfsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_rows())
}

/// Feature count, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfs_dataset_features(ds: *const PpfsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_features())
}

/// Runs feature selection.
///
/// # Safety
/// `ds` must be a live handle, `cfg` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_select(
    ds: *const PpfsDataset,
    cfg: *const PpfsConfigC,
    out: *mut *mut PpfsReport,
) -> PpfsStatus {
    guard(|| {
        non_null(ds, "dataset")?;
        non_null(cfg, "config")?;
        non_null(out, "out")?;
        let report = lift(ppfs::select(&(*ds).0, &ppfs_config(&*cfg)))?;
        *out = Box::into_raw(Box::new(PpfsReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ppfs_report_free(report: *mut PpfsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of selected features, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfs_report_selected_count(report: *const PpfsReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.selected_indices.len())
}

/// Column index of the `k`-th selected feature (ascending order).
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_report_selected_index(
    report: *const PpfsReport,
    k: usize,
    out: *mut usize,
) -> PpfsStatus {
    guard(|| {
        non_null(report, "report")?;
        non_null(out, "out")?;
        let sel = &(*report).0.selected_indices;
        let idx = sel.get(k).ok_or_else(|| {
            fail(PpfsStatus::OutOfRange, format!("selected index {k} out of range (count {})", sel.len()))
        })?;
        *out = *idx;
        Ok(())
    })
}

/// Report as JSON. `include_timings = false` drops wall-clock fields.
/// Release the string with [`ppfs_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_report_to_json(
    report: *const PpfsReport,
    include_timings: bool,
    out: *mut *mut c_char,
) -> PpfsStatus {
    guard(|| {
        non_null(report, "report")?;
        non_null(out, "out")?;
        let r = &(*report).0;
        let json = if include_timings {
            r.to_json()
        } else {
            r.without_timings().to_json()
        };
        *out = CString::new(json)
            .map_err(|_| fail(PpfsStatus::InvalidData, "report contains a NUL byte"))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ppfs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// One-sided paired Wilcoxon signed-rank p-value for `b - a > 0`.
///
/// # Safety
/// `a` and `b` must hold `n` doubles; `p_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_wilcoxon_one_sided(
    a: *const f64,
    b: *const f64,
    n: usize,
    p_value: *mut f64,
) -> PpfsStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(p_value, "p_value")?;
        let r = lift(ppfs::wilcoxon_one_sided(
            std::slice::from_raw_parts(a, n),
            std::slice::from_raw_parts(b, n),
        ))?;
        *p_value = r.p_value;
        Ok(())
    })
}

/// Permutation independence test of `feature` given `conditioning` columns.
///
/// # Safety
/// `ds` must be a live handle, `cfg` readable, `conditioning` must hold
/// `n_conditioning` indices (may be null when zero), `p_value` writable.
#[no_mangle]
pub unsafe extern "C" fn ppfs_ppi_test(
    ds: *const PpfsDataset,
    feature: usize,
    conditioning: *const usize,
    n_conditioning: usize,
    cfg: *const PpfsConfigC,
    p_value: *mut f64,
) -> PpfsStatus {
    guard(|| {
        non_null(ds, "dataset")?;
        non_null(cfg, "config")?;
        non_null(p_value, "p_value")?;
        let cond: &[usize] = if n_conditioning == 0 {
            &[]
        } else {
            non_null(conditioning, "conditioning")?;
            std::slice::from_raw_parts(conditioning, n_conditioning)
        };
        let outcome = lift(ppfs::ppi_test(&(*ds).0, feature, cond, &ppi_config(&*cfg)))?;
        *p_value = outcome.p_value;
        Ok(())
    })
}
