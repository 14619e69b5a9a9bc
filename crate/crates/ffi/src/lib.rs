//! C ABI over `npeo`.
//!
//! Every fallible function returns an [`NpeoStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`npeo_last_error`]. Score sets and calibrations are opaque
//! handles released with their `_free` function.
//!
//! Cell-indexed arrays use the order `(0,a), (0,b), (1,a), (1,b)`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use npeo::oracle::OracleErrors;
use npeo::{
    bayes_oracle, calibrate, np_eo_oracle, np_oracle, np_oracle_shared, np_order, Calibration, Error, GaussianGroupModel,
    Group, GroupScores, Label, Method, NpEoConfig, OracleSolution, PerCell,
};

/// Result code of every fallible call; `NPEO_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Too few class-0 scores for the requested `alpha` and `delta`.
    Infeasible = 3,
    OutOfRange = 4,
    NoViablePair = 5,
    EmptyCandidates = 6,
    EmptyCell = 7,
    RootNotBracketed = 8,
    NonMonotone = 9,
    Io = 10,
    Parse = 11,
    /// A Rust panic was caught at the boundary.
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpeoMethod {
    Op = 0,
    Mp = 1,
    NpOnly = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpeoGroup {
    A = 0,
    B = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpeoOracleKind {
    Bayes = 0,
    /// Likelihood-ratio NP oracle with per-group thresholds.
    Np = 1,
    /// Best single threshold shared by both groups.
    NpShared = 2,
    NpEo = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeoConfig {
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Type I margin of the multiple-pivot method.
    pub eta: f64,
    pub use_half_delta: bool,
}

/// Flat view of a calibration. Orders are 1-based; when `has_orders` is
/// false (NP-only) the order and pair fields are zero or NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeoCalibrationSummary {
    pub threshold_a: f64,
    pub threshold_b: f64,
    pub pivot_a: f64,
    pub pivot_b: f64,
    pub pivot_order_a: usize,
    pub pivot_order_b: usize,
    pub l_a: usize,
    pub l_b: usize,
    pub has_orders: bool,
    pub order_a: usize,
    pub order_b: usize,
    pub violation_prob: f64,
    pub empirical_type2: f64,
    pub pivot_pairs: usize,
    pub pivot_pairs_searched: usize,
}

/// Univariate Gaussian group model; arrays are cell-indexed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeoGaussianModel {
    pub mean: [f64; 4],
    pub variance: [f64; 4],
    /// Joint probabilities `P(S = s, Y = y)`, summing to 1.
    pub prob: [f64; 4],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpeoOracleSolution {
    pub threshold_a: f64,
    pub threshold_b: f64,
    pub r0: f64,
    pub r1: f64,
    pub r0_a: f64,
    pub r0_b: f64,
    pub r1_a: f64,
    pub r1_b: f64,
    pub l1: f64,
    pub eo_binding: bool,
}

/// Left-out scores, one sorted sequence per cell.
pub struct NpeoScores(GroupScores);

/// Outcome of [`npeo_calibrate`].
pub struct NpeoCalibration(Calibration);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: NpeoStatus,
    message: String,
}

impl Failure {
    fn new(status: NpeoStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::EmptyCell { .. } => NpeoStatus::EmptyCell,
            Error::Infeasible { .. } => NpeoStatus::Infeasible,
            Error::OutOfRange { .. } => NpeoStatus::OutOfRange,
            Error::NoViablePair { .. } => NpeoStatus::NoViablePair,
            Error::EmptyCandidates { .. } => NpeoStatus::EmptyCandidates,
            Error::RootNotBracketed(_) => NpeoStatus::RootNotBracketed,
            Error::NonMonotoneLikelihoodRatio { .. } => NpeoStatus::NonMonotone,
            Error::Parse { .. } | Error::InvalidGroupOrLabel { .. } => NpeoStatus::Parse,
            Error::Io(_) => NpeoStatus::Io,
            Error::DegenerateLabels | Error::InvalidConfig(_) => NpeoStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NpeoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NpeoStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NpeoStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::new(NpeoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn scores_arg(p: *const f64, len: usize, what: &str) -> Result<Vec<f64>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len).to_vec())
}

impl NpeoConfig {
    fn to_config(self) -> Result<NpEoConfig, Failure> {
        let cfg = NpEoConfig::new(self.alpha, self.delta, self.epsilon, self.gamma)
            .with_eta(self.eta)
            .with_half_delta(self.use_half_delta);
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<NpeoGroup> for Group {
    fn from(g: NpeoGroup) -> Self {
        match g {
            NpeoGroup::A => Group::A,
            NpeoGroup::B => Group::B,
        }
    }
}

fn solution(s: &OracleSolution) -> NpeoOracleSolution {
    let OracleErrors { r0, r1, r0_a, r0_b, r1_a, r1_b, l1 } = s.errors;
    NpeoOracleSolution {
        threshold_a: s.thresholds.a,
        threshold_b: s.thresholds.b,
        r0,
        r1,
        r0_a,
        r0_b,
        r1_a,
        r1_b,
        l1,
        eo_binding: s.eo_binding,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn npeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failed call on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn npeo_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library's string
/// outputs that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn npeo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fills `out` with the library defaults (`alpha` 0.1, `delta` 0.05,
/// `epsilon` 0.2, `gamma` 0.05, `eta` 0.005, full `delta`).
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_config_default(out: *mut NpeoConfig) -> NpeoStatus {
    guard(|| {
        let d = NpEoConfig::default();
        *out_ref(out, "out")? = NpeoConfig {
            alpha: d.alpha,
            delta: d.delta,
            epsilon: d.epsilon,
            gamma: d.gamma,
            eta: d.eta,
            use_half_delta: d.use_half_delta,
        };
        Ok(())
    })
}

/// Smallest order `k` whose binomial tail at level `alpha` is at most
/// `delta`.
///
/// # Safety
/// `out_k` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_np_order(n: usize, alpha: f64, delta: f64, out_k: *mut usize) -> NpeoStatus {
    guard(|| {
        let out = out_ref(out_k, "out_k")?;
        if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0) || n == 0 {
            return Err(Failure::new(NpeoStatus::InvalidArgument, "need n >= 1 and alpha, delta in (0, 1)"));
        }
        *out = np_order(n, alpha, delta)?;
        Ok(())
    })
}

/// Copies four score arrays into a new handle. A NULL array is allowed only
/// with length zero, which then fails with `NPEO_STATUS_EMPTY_CELL`.
///
/// # Safety
/// Each non-NULL array must hold at least its stated number of doubles;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_scores_new(
    a0: *const f64,
    n_a0: usize,
    b0: *const f64,
    n_b0: usize,
    a1: *const f64,
    n_a1: usize,
    b1: *const f64,
    n_b1: usize,
    out: *mut *mut NpeoScores,
) -> NpeoStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cells = PerCell([
            scores_arg(a0, n_a0, "a0")?,
            scores_arg(b0, n_b0, "b0")?,
            scores_arg(a1, n_a1, "a1")?,
            scores_arg(b1, n_b1, "b1")?,
        ]);
        *out = Box::into_raw(Box::new(NpeoScores(GroupScores::new(cells)?)));
        Ok(())
    })
}

/// # Safety
/// `scores` must be NULL or a handle from [`npeo_scores_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npeo_scores_free(scores: *mut NpeoScores) {
    if !scores.is_null() {
        drop(Box::from_raw(scores));
    }
}

/// Calibrates group thresholds from `scores`.
///
/// # Safety
/// `scores` must be a live handle, `config` a valid pointer and `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_calibrate(
    scores: *const NpeoScores,
    config: *const NpeoConfig,
    method: NpeoMethod,
    out: *mut *mut NpeoCalibration,
) -> NpeoStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let scores = in_ref(scores, "scores")?;
        let cfg = in_ref(config, "config")?.to_config()?;
        let method = match method {
            NpeoMethod::Op => Method::Op,
            NpeoMethod::Mp => Method::Mp,
            NpeoMethod::NpOnly => Method::NpOnly,
        };
        *out = Box::into_raw(Box::new(NpeoCalibration(calibrate(method, &scores.0, &cfg)?)));
        Ok(())
    })
}

/// # Safety
/// `cal` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_calibration_summary(cal: *const NpeoCalibration, out: *mut NpeoCalibrationSummary) -> NpeoStatus {
    guard(|| {
        let c = &in_ref(cal, "cal")?.0;
        let (has_orders, order_a, order_b) = c.orders.map_or((false, 0, 0), |o| (true, o.a, o.b));
        let (violation_prob, empirical_type2) = c.pair.map_or((f64::NAN, f64::NAN), |p| (p.violation_prob, p.empirical_type2));
        *out_ref(out, "out")? = NpeoCalibrationSummary {
            threshold_a: c.thresholds.a,
            threshold_b: c.thresholds.b,
            pivot_a: c.pivots.a,
            pivot_b: c.pivots.b,
            pivot_order_a: c.pivot_orders.a,
            pivot_order_b: c.pivot_orders.b,
            l_a: c.l_counts[0],
            l_b: c.l_counts[1],
            has_orders,
            order_a,
            order_b,
            violation_prob,
            empirical_type2,
            pivot_pairs: c.pivot_pairs,
            pivot_pairs_searched: c.pivot_pairs_searched,
        };
        Ok(())
    })
}

/// Predicted label (0 or 1) of `score` in `group`: 1 iff the score is
/// strictly above the group threshold.
///
/// # Safety
/// `cal` must be a live handle and `out_label` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_calibration_predict(
    cal: *const NpeoCalibration,
    group: NpeoGroup,
    score: f64,
    out_label: *mut i32,
) -> NpeoStatus {
    guard(|| {
        let c = &in_ref(cal, "cal")?.0;
        let label = c.thresholds.predict_score(group.into(), score);
        *out_ref(out_label, "out_label")? = i32::from(label == Label::One);
        Ok(())
    })
}

/// The calibration as a JSON document; free it with [`npeo_string_free`].
///
/// # Safety
/// `cal` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_calibration_to_json(cal: *const NpeoCalibration, out: *mut *mut c_char) -> NpeoStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let c = &in_ref(cal, "cal")?.0;
        let text = serde_json::to_string(c).map_err(|e| Failure::new(NpeoStatus::InvalidArgument, e.to_string()))?;
        *out = CString::new(text).map_err(|e| Failure::new(NpeoStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `cal` must be NULL or a handle from [`npeo_calibrate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npeo_calibration_free(cal: *mut NpeoCalibration) {
    if !cal.is_null() {
        drop(Box::from_raw(cal));
    }
}

/// Reads a model description file (TOML with `mean`, `variance` and `prob`
/// tables keyed `a0, b0, a1, b1`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_model_load(path: *const c_char, out: *mut NpeoGaussianModel) -> NpeoStatus {
    guard(|| {
        let path = CStr::from_ptr(in_ref(path, "path")?)
            .to_str()
            .map_err(|e| Failure::new(NpeoStatus::InvalidArgument, e.to_string()))?;
        let m = GaussianGroupModel::load(path)?;
        let arr = |v: &npeo::CellValues<f64>| v.to_per_cell().0;
        *out_ref(out, "out")? = NpeoGaussianModel { mean: arr(&m.mean), variance: arr(&m.variance), prob: arr(&m.prob) };
        Ok(())
    })
}

/// Solves one population oracle. `alpha` is ignored by `BAYES` and
/// `epsilon` is used only by `NP_EO`.
///
/// # Safety
/// `model` must be a valid pointer and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn npeo_oracle(
    model: *const NpeoGaussianModel,
    kind: NpeoOracleKind,
    alpha: f64,
    epsilon: f64,
    out: *mut NpeoOracleSolution,
) -> NpeoStatus {
    guard(|| {
        let m = in_ref(model, "model")?;
        let model = GaussianGroupModel::new(PerCell(m.mean), PerCell(m.variance), PerCell(m.prob))?;
        let s = match kind {
            NpeoOracleKind::Bayes => bayes_oracle(&model)?,
            NpeoOracleKind::Np => np_oracle(&model, alpha)?,
            NpeoOracleKind::NpShared => np_oracle_shared(&model, alpha)?,
            NpeoOracleKind::NpEo => np_eo_oracle(&model, alpha, epsilon)?,
        };
        *out_ref(out, "out")? = solution(&s);
        Ok(())
    })
}
