//! C interface to `qmdisc`.
//!
//! Every function returns a [`QmdStatus`]; results go through out-pointers.
//! On failure the out-pointers are left untouched and a message is kept per
//! thread, readable with [`qmd_last_error_message`]. Panics never cross the
//! boundary; they surface as [`QmdStatus::Internal`].
//!
//! Experiments and curve tables are opaque handles owned by the caller and
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qmdisc::convexity;
use qmdisc::geometry::MeasurementPair;
use qmdisc::oracle::{self, OptimizeOptions};
use qmdisc::simulator::{self, CoincidenceCounts, ExperimentConfig, ImperfectionModel};
use qmdisc::strategies::{self, ProbabilityGrid, StrategyPoint};
use qmdisc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the domain of the quantity.
    Domain = 2,
    /// Operator normalization or positivity violated.
    Validation = 3,
    /// Vanishing denominator.
    Singularity = 4,
    /// Finite-difference stencil crosses a branch boundary.
    BranchCrossing = 5,
    /// Oracle result not certified; the best point is still written.
    NonConvergence = 6,
    EmptyCounts = 7,
    Config = 8,
    Io = 9,
    Internal = 10,
}

impl From<&Error> for QmdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => QmdStatus::Domain,
            Error::Validation { .. } => QmdStatus::Validation,
            Error::Singularity { .. } => QmdStatus::Singularity,
            Error::BranchCrossing { .. } => QmdStatus::BranchCrossing,
            Error::EmptyCounts => QmdStatus::EmptyCounts,
            Error::Config(_) => QmdStatus::Config,
            Error::Io(_) => QmdStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmdStrategyPoint {
    pub p_success: f64,
    pub p_error: f64,
    pub p_inconclusive: f64,
}

impl From<StrategyPoint> for QmdStrategyPoint {
    fn from(p: StrategyPoint) -> Self {
        Self { p_success: p.p_success, p_error: p.p_error, p_inconclusive: p.p_inconclusive }
    }
}

/// Mirror of the simulator's imperfection model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmdImperfections {
    pub phase_noise_sigma_rad: f64,
    pub eta_d0: f64,
    pub eta_d1: f64,
    pub eta_da: f64,
    pub eta_db: f64,
    pub eta_di: f64,
    pub singlet_visibility: f64,
    pub splitter_imbalance: f64,
}

impl From<ImperfectionModel> for QmdImperfections {
    fn from(m: ImperfectionModel) -> Self {
        Self {
            phase_noise_sigma_rad: m.phase_noise_sigma_rad,
            eta_d0: m.eta_d0,
            eta_d1: m.eta_d1,
            eta_da: m.eta_da,
            eta_db: m.eta_db,
            eta_di: m.eta_di,
            singlet_visibility: m.singlet_visibility,
            splitter_imbalance: m.splitter_imbalance,
        }
    }
}

impl From<QmdImperfections> for ImperfectionModel {
    fn from(m: QmdImperfections) -> Self {
        Self {
            phase_noise_sigma_rad: m.phase_noise_sigma_rad,
            eta_d0: m.eta_d0,
            eta_d1: m.eta_d1,
            eta_da: m.eta_da,
            eta_db: m.eta_db,
            eta_di: m.eta_di,
            singlet_visibility: m.singlet_visibility,
            splitter_imbalance: m.splitter_imbalance,
        }
    }
}

/// Coincidence counts, `cells[(x*2 + i)*3 + k]` for basis `x` (M = 0, N = 1),
/// first detector `i` and second detector `k` (A = 0, B = 1, I = 2).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QmdCounts {
    pub cells: [u64; 12],
}

impl From<CoincidenceCounts> for QmdCounts {
    fn from(c: CoincidenceCounts) -> Self {
        let mut cells = [0; 12];
        for (n, v) in c.cells.iter().flatten().flatten().enumerate() {
            cells[n] = *v;
        }
        Self { cells }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmdEstimate {
    pub point: QmdStrategyPoint,
    pub sigma_success: f64,
    pub sigma_error: f64,
    pub sigma_inconclusive: f64,
    pub relative_success: f64,
    pub sigma_relative: f64,
    pub registered: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmdCurveRow {
    pub p_inc: f64,
    pub ps_entangled: f64,
    pub ps_single_optimal: f64,
    pub advantage: f64,
}

/// Opaque simulation setup.
pub struct QmdExperiment {
    config: ExperimentConfig,
}

/// Opaque table of optimal curves.
pub struct QmdCurveTable {
    rows: Vec<QmdCurveRow>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records failures and turns panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<QmdStatus, (QmdStatus, String)>) -> QmdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_last_error(msg);
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            QmdStatus::Internal
        }
    }
}

fn lift<T>(r: qmdisc::Result<T>) -> Result<T, (QmdStatus, String)> {
    r.map_err(|e| ((&e).into(), e.to_string()))
}

fn null(what: &str) -> (QmdStatus, String) {
    (QmdStatus::NullPointer, format!("{what} is null"))
}

/// Writes `v` through `out` after a null check.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<QmdStatus, (QmdStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(QmdStatus::Ok)
}

/// Length in bytes of the last error message on this thread, excluding the
/// terminating nul; 0 when there is none.
#[no_mangle]
pub extern "C" fn qmd_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (nul-terminated, truncated to
/// `len − 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn qmd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ------------------------------------------------------------- closed forms

/// Entanglement-assisted optimum at inconclusive rate `p_inc ∈ [0, cos 2θ]`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_entangled_success(theta: f64, p_inc: f64, out: *mut QmdStrategyPoint) -> QmdStatus {
    guard(|| put(out, lift(strategies::entangled_success(theta, p_inc))?.into(), "out"))
}

/// Single-qubit optimum at `p_inc ∈ [0, (1 + cos²2θ)/2]`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_single_optimal(theta: f64, p_inc: f64, out: *mut QmdStrategyPoint) -> QmdStatus {
    guard(|| put(out, lift(strategies::single_optimal(theta, p_inc))?.0.into(), "out"))
}

/// Minimum-error point `((1 + sin 2θ)/2, (1 − sin 2θ)/2, 0)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_helstrom(theta: f64, out: *mut QmdStrategyPoint) -> QmdStatus {
    guard(|| put(out, lift(strategies::helstrom_point(theta))?.into(), "out"))
}

/// Single-probe point on the `q = 0` arc.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_concave_branch(theta: f64, p_inc: f64, out: *mut QmdStrategyPoint) -> QmdStatus {
    guard(|| put(out, lift(strategies::concave_branch(theta, p_inc))?.into(), "out"))
}

/// Inconclusive rate where the convex and concave single-probe branches meet.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_boundary_pib(c: f64, out: *mut f64) -> QmdStatus {
    guard(|| put(out, lift(strategies::boundary_pib(c))?, "out"))
}

/// Inconclusive rate of the tangent point of the optimal mixture.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_tangent_pit(c: f64, out: *mut f64) -> QmdStatus {
    guard(|| put(out, lift(strategies::tangent_pit(c))?, "out"))
}

/// Entangled minus single-qubit optimum.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_advantage(theta: f64, p_inc: f64, out: *mut f64) -> QmdStatus {
    guard(|| put(out, lift(strategies::advantage(theta, p_inc))?, "out"))
}

/// `d²P_S/dP_I²` on the convex single-probe branch.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_second_derivative(c: f64, p_inc: f64, out: *mut f64) -> QmdStatus {
    guard(|| put(out, lift(convexity::second_derivative(c, p_inc))?.d2ps_dpi2, "out"))
}

/// Numerical optimum over sequential strategies (ascent method). Writes the
/// best point even when it returns `NonConvergence`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_oracle_optimize(
    theta: f64,
    p_inc: f64,
    tol: f64,
    seed: u64,
    restarts: usize,
    out: *mut QmdStrategyPoint,
) -> QmdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = lift(MeasurementPair::new(theta))?;
        let opts = OptimizeOptions { tol, seed, restarts, ..Default::default() };
        let r = lift(oracle::optimize_povm(&pair, p_inc, &opts))?;
        out.write(r.point.into());
        if r.certified {
            Ok(QmdStatus::Ok)
        } else {
            Err((QmdStatus::NonConvergence, format!("only {} restart(s) agree within tol", r.agreeing_restarts)))
        }
    })
}

// ------------------------------------------------------------- imperfections

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_imperfections_ideal(out: *mut QmdImperfections) -> QmdStatus {
    guard(|| put(out, ImperfectionModel::ideal().into(), "out"))
}

/// The bundled `preset_paperlike` noise model.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_imperfections_paperlike(out: *mut QmdImperfections) -> QmdStatus {
    guard(|| put(out, ImperfectionModel::paperlike().into(), "out"))
}

// ------------------------------------------------------------- experiment

/// Creates an ideal experiment with feed-forward enabled.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_experiment_new(
    theta: f64,
    transmittance: f64,
    trials: u64,
    seed: u64,
    out: *mut *mut QmdExperiment,
) -> QmdStatus {
    guard(|| {
        let config = ExperimentConfig {
            theta,
            transmittance,
            trials,
            seed,
            imperfections: ImperfectionModel::ideal(),
            feed_forward: true,
        };
        lift(config.validate())?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(Box::into_raw(Box::new(QmdExperiment { config })));
        Ok(QmdStatus::Ok)
    })
}

/// # Safety
/// `exp` must come from [`qmd_experiment_new`]; `imp` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn qmd_experiment_set_imperfections(
    exp: *mut QmdExperiment,
    imp: *const QmdImperfections,
) -> QmdStatus {
    guard(|| {
        let exp = exp.as_mut().ok_or_else(|| null("experiment"))?;
        let imp = imp.as_ref().ok_or_else(|| null("imperfections"))?;
        let model = ImperfectionModel::from(*imp);
        lift(model.validate())?;
        exp.config.imperfections = model;
        Ok(QmdStatus::Ok)
    })
}

/// # Safety
/// `exp` must come from [`qmd_experiment_new`].
#[no_mangle]
pub unsafe extern "C" fn qmd_experiment_set_feed_forward(exp: *mut QmdExperiment, enabled: bool) -> QmdStatus {
    guard(|| {
        let exp = exp.as_mut().ok_or_else(|| null("experiment"))?;
        exp.config.feed_forward = enabled;
        Ok(QmdStatus::Ok)
    })
}

/// Runs all trials; the counts depend only on the configuration and seed.
///
/// # Safety
/// `exp` must come from [`qmd_experiment_new`]; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn qmd_experiment_run(exp: *const QmdExperiment, out: *mut QmdCounts) -> QmdStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("experiment"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let counts = lift(simulator::run_trials(&exp.config))?;
        out.write(counts.into());
        Ok(QmdStatus::Ok)
    })
}

/// Runs all trials and estimates the probabilities from the counts.
///
/// # Safety
/// `exp` must come from [`qmd_experiment_new`]; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn qmd_experiment_estimate(exp: *const QmdExperiment, out: *mut QmdEstimate) -> QmdStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("experiment"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let counts = lift(simulator::run_trials(&exp.config))?;
        let e = lift(simulator::estimate(&counts, &exp.config.imperfections))?;
        out.write(QmdEstimate {
            point: e.point.into(),
            sigma_success: e.sigma_success,
            sigma_error: e.sigma_error,
            sigma_inconclusive: e.sigma_inconclusive,
            relative_success: e.relative_success,
            sigma_relative: e.sigma_relative,
            registered: e.registered,
        });
        Ok(QmdStatus::Ok)
    })
}

/// # Safety
/// `exp` must be null or come from [`qmd_experiment_new`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn qmd_experiment_free(exp: *mut QmdExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

// ------------------------------------------------------------- curves

/// Tabulates both optima over `start:stop:step`, clipped to `[0, cos 2θ]`
/// where the entangled curve is defined.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qmd_curve_new(
    theta: f64,
    start: f64,
    stop: f64,
    step: f64,
    out: *mut *mut QmdCurveTable,
) -> QmdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = lift(ProbabilityGrid::new(start, stop, step))?;
        let ent = lift(strategies::entangled_curve(theta, &grid))?;
        let rows = ent
            .rows()
            .iter()
            .map(|r| {
                let single = strategies::single_optimal(theta, r.p_inc)?.0.p_success;
                Ok(QmdCurveRow {
                    p_inc: r.p_inc,
                    ps_entangled: r.p_success,
                    ps_single_optimal: single,
                    advantage: r.p_success - single,
                })
            })
            .collect::<qmdisc::Result<Vec<_>>>();
        let rows = lift(rows)?;
        out.write(Box::into_raw(Box::new(QmdCurveTable { rows })));
        Ok(QmdStatus::Ok)
    })
}

/// # Safety
/// `table` must come from [`qmd_curve_new`]; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn qmd_curve_len(table: *const QmdCurveTable, out: *mut usize) -> QmdStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        put(out, t.rows.len(), "out")
    })
}

/// # Safety
/// `table` must come from [`qmd_curve_new`]; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn qmd_curve_row(table: *const QmdCurveTable, index: usize, out: *mut QmdCurveRow) -> QmdStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        let row = t
            .rows
            .get(index)
            .ok_or_else(|| (QmdStatus::Domain, format!("row {index} out of range (len {})", t.rows.len())))?;
        put(out, *row, "out")
    })
}

/// # Safety
/// `table` must be null or come from [`qmd_curve_new`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn qmd_curve_free(table: *mut QmdCurveTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}
