//! C ABI over the laboratory's experiment entry points.
//!
//! Conventions: every fallible function returns a [`ClbStatus`] and writes
//! its result through out-pointers; `CLB_OK` is zero.  On any other status
//! the out-parameters are untouched and a message is stored in thread-local
//! state, retrievable with [`clb_last_error`].  Opaque handles are created
//! and released only by this library; passing a handle to a different
//! allocator, double-freeing, or using a freed handle is undefined behavior,
//! as is passing pointers that violate a function's documented contract.

use std::cell::RefCell;
use std::os::raw::c_char;

use circulab::ensemble::{sample_matrix, SparseSample, Time, XiSpec};
use circulab::lawcheck::{default_grid, law_point};
use circulab::potential::{potential_report, u_circ, DeltaSchedule};
use circulab::process::{run_process, simulate_drift_walk, Adversary, ProcessConfig};
use circulab::quasirandom::{check_q_t, CertificateConfig, EventKind};
use circulab::Error;
use num_complex::Complex64;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClbStatus {
    ClbOk = 0,
    /// A documented precondition was violated.
    ClbErrContract = 1,
    /// An iterative numeric kernel failed to converge.
    ClbErrNumeric = 2,
    ClbErrConfig = 3,
    ClbErrIo = 4,
    /// A required pointer argument was null.
    ClbErrNullArg = 5,
    /// An enum argument was out of range.
    ClbErrBadEnum = 6,
}

/// Entry distributions for the sparse ensemble.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClbXi {
    ClbXiComplexGaussian = 0,
    ClbXiRademacher = 1,
    ClbXiUnitCircle = 2,
    ClbXiBernoulliScaled = 3,
}

/// Adversary policies for the drift walk.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClbWalkPolicy {
    ClbWalkAlwaysUp = 0,
    ClbWalkRandom = 1,
    ClbWalkStay = 2,
}

/// Opaque handle over one sampled sparse matrix.
pub struct ClbSample {
    inner: SparseSample,
}

/// Scalar summary of the potentials of one sampled instance.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ClbPotential {
    pub u_n: f64,
    pub t_n: f64,
    pub t1: f64,
    pub t2: f64,
    pub u_circ: f64,
    /// Nonzero when any potential hit a zero singular value.
    pub inf_flag: i32,
    pub minor_size: usize,
    pub top_index: usize,
}

/// Scalar summary of one incremental process run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ClbProcessSummary {
    pub r_final: usize,
    /// Twice the final height; zero means the walk grounded.
    pub h_final_twice: u64,
    pub accepted: usize,
    pub rejected: usize,
    pub acceptance_rate: f64,
    pub finite_candidate_rate: f64,
    pub u_n: f64,
    pub t_n_initial: f64,
    /// NaN when the walk did not ground.
    pub chain_slack: f64,
    pub chain_holds: i32,
    pub grounded: i32,
}

/// One certificate event verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ClbEventCheck {
    /// 0 unique-expansion, 1 row-sums, 2 entry-sizes, 3 heavy-rows,
    /// 4 intersection, 5 over-achievement-cap.
    pub event_kind: i32,
    pub verdict: i32,
    pub vacuous: i32,
    pub witness: usize,
    pub trials: usize,
}

/// Empirical spectral-law summary at one (instance, z).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ClbLawPoint {
    pub disk_mass: f64,
    pub discrepancy: f64,
    pub t1_dev: f64,
    pub t2_dev: f64,
    pub hs_bound_ok: i32,
}

/// Drift-walk Monte Carlo summary.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ClbWalk {
    pub p_grounded: f64,
    pub mean_z_final: f64,
    pub se_z_final: f64,
    pub max_mean_z: f64,
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> ClbStatus {
    match err {
        Error::ContractViolation(_) => ClbStatus::ClbErrContract,
        Error::NumericFailure { .. } => ClbStatus::ClbErrNumeric,
        Error::Config(_) => ClbStatus::ClbErrConfig,
        Error::Io(_) => ClbStatus::ClbErrIo,
    }
}

fn fail(err: Error) -> ClbStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

fn null_arg(name: &str) -> ClbStatus {
    set_error(format!("null pointer argument: {}", name));
    ClbStatus::ClbErrNullArg
}

fn xi_of(xi: ClbXi) -> XiSpec {
    match xi {
        ClbXi::ClbXiComplexGaussian => XiSpec::ComplexGaussian,
        ClbXi::ClbXiRademacher => XiSpec::Rademacher,
        ClbXi::ClbXiUnitCircle => XiSpec::UnitCircleUniform,
        ClbXi::ClbXiBernoulliScaled => XiSpec::BernoulliScaled,
    }
}

fn event_code(kind: EventKind) -> i32 {
    match kind {
        EventKind::UniqueExpansion => 0,
        EventKind::RowSums => 1,
        EventKind::EntrySizes => 2,
        EventKind::HeavyRows => 3,
        EventKind::Intersection => 4,
        EventKind::OverAchievementCap => 5,
    }
}

fn time_of(t_twice: u64) -> Time {
    if t_twice % 2 == 0 {
        Time::integer((t_twice / 2) as usize)
    } else {
        Time::half_past((t_twice / 2) as usize)
    }
}

/// Copies the last error message for this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes including the terminator) and returns the full
/// message length.  With a null or empty buffer, only the length is returned.
///
/// # Safety
///
/// `buf` must be null or valid for writes of `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn clb_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn clb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Samples an `n_rows` x `n_cols` sparse matrix with entry density `p` and
/// entry law `xi`, reproducibly from `seed`, and stores a handle in `out`.
///
/// # Safety
///
/// `out` must be valid for one pointer write.  The handle must be released
/// with [`clb_sample_free`].
#[no_mangle]
pub unsafe extern "C" fn clb_sample_new(
    n_rows: usize,
    n_cols: usize,
    p: f64,
    xi: ClbXi,
    seed: u64,
    out: *mut *mut ClbSample,
) -> ClbStatus {
    if out.is_null() {
        return null_arg("out");
    }
    match sample_matrix(n_rows, n_cols, p, &xi_of(xi), seed) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(ClbSample { inner })) };
            ClbStatus::ClbOk
        }
        Err(e) => fail(e),
    }
}

/// Releases a handle created by [`clb_sample_new`].  Null is a no-op.
///
/// # Safety
///
/// `s` must be null or a handle from [`clb_sample_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clb_sample_free(s: *mut ClbSample) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Writes the number of stored nonzero entries of `s` to `out`.
///
/// # Safety
///
/// `s` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn clb_sample_nnz(s: *const ClbSample, out: *mut usize) -> ClbStatus {
    if s.is_null() {
        return null_arg("s");
    }
    if out.is_null() {
        return null_arg("out");
    }
    unsafe { *out = (*s).inner.entries.len() };
    ClbStatus::ClbOk
}

/// Samples an n x n instance at mean degree `d` and evaluates the full and
/// truncated log potentials at z.
///
/// # Safety
///
/// `out` must be valid for one [`ClbPotential`] write.
#[no_mangle]
pub unsafe extern "C" fn clb_potential(
    n: usize,
    d: f64,
    eps: f64,
    z_re: f64,
    z_im: f64,
    xi: ClbXi,
    seed: u64,
    out: *mut ClbPotential,
) -> ClbStatus {
    if out.is_null() {
        return null_arg("out");
    }
    match potential_report(n, d, eps, Complex64::new(z_re, z_im), &xi_of(xi), seed) {
        Ok(rep) => {
            unsafe {
                *out = ClbPotential {
                    u_n: rep.u_n,
                    t_n: rep.t_n,
                    t1: rep.t1,
                    t2: rep.t2,
                    u_circ: rep.u_circ,
                    inf_flag: rep.inf_flag as i32,
                    minor_size: rep.m,
                    top_index: rep.r_top,
                };
            }
            ClbStatus::ClbOk
        }
        Err(e) => fail(e),
    }
}

/// Runs the incremental singular-value process on the top-left n x n block
/// of `s` with the two-regime acceptance schedule at `c_sched`, and writes
/// the run summary with the chain-inequality replay to `out`.
///
/// # Safety
///
/// `s` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn clb_process_run(
    s: *const ClbSample,
    n: usize,
    eps: f64,
    z_re: f64,
    z_im: f64,
    c_sched: f64,
    out: *mut ClbProcessSummary,
) -> ClbStatus {
    if s.is_null() {
        return null_arg("s");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let sample = unsafe { &(*s).inner };
    let d = sample.p * n as f64;
    let schedule = match DeltaSchedule::two_regime(n, d, c_sched) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let config = ProcessConfig { certify: None };
    match run_process(sample, n, eps, Complex64::new(z_re, z_im), &schedule, &config) {
        Ok(trace) => {
            let chain = trace.verify_chain(1e-9);
            unsafe {
                *out = ClbProcessSummary {
                    r_final: trace.r_final,
                    h_final_twice: trace.h_final_twice,
                    accepted: trace.accepted_steps,
                    rejected: trace.rejected_steps,
                    acceptance_rate: trace.acceptance_rate(),
                    finite_candidate_rate: trace.finite_candidate_rate(),
                    u_n: trace.u_n,
                    t_n_initial: trace.t_n_initial,
                    chain_slack: chain.slack.unwrap_or(f64::NAN),
                    chain_holds: chain.holds as i32,
                    grounded: (trace.h_final_twice == 0) as i32,
                };
            }
            ClbStatus::ClbOk
        }
        Err(e) => fail(e),
    }
}

/// Checks the quasi-randomness certificate events on `s` at time
/// `t_twice`/2 with threshold `beta`, writing up to `cap` event verdicts to
/// `out` and the count written to `written`.  Six slots always suffice.
///
/// # Safety
///
/// `s` must be a live handle; `out` must be valid for `cap` writes;
/// `written` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn clb_certificates(
    s: *const ClbSample,
    t_twice: u64,
    beta: f64,
    seed: u64,
    out: *mut ClbEventCheck,
    cap: usize,
    written: *mut usize,
) -> ClbStatus {
    if s.is_null() {
        return null_arg("s");
    }
    if out.is_null() {
        return null_arg("out");
    }
    if written.is_null() {
        return null_arg("written");
    }
    let mut cfg = CertificateConfig::new(beta);
    cfg.seed = seed;
    match check_q_t(unsafe { &(*s).inner }, time_of(t_twice), &cfg) {
        Ok(checks) => {
            let n = checks.len().min(cap);
            for (slot, check) in checks.iter().take(n).enumerate() {
                unsafe {
                    *out.add(slot) = ClbEventCheck {
                        event_kind: event_code(check.event),
                        verdict: check.verdict as i32,
                        vacuous: check.vacuous as i32,
                        witness: check.witness,
                        trials: check.trials,
                    };
                }
            }
            unsafe { *written = n };
            ClbStatus::ClbOk
        }
        Err(e) => fail(e),
    }
}

/// Samples an instance and summarizes its empirical spectral law against
/// the uniform disk on a `grid_cells` x `grid_cells` rectangle grid of
/// half-width `grid_limit`.
///
/// # Safety
///
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn clb_law_point(
    n: usize,
    d: f64,
    eps: f64,
    z_re: f64,
    z_im: f64,
    xi: ClbXi,
    seed: u64,
    grid_cells: usize,
    grid_limit: f64,
    out: *mut ClbLawPoint,
) -> ClbStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if grid_cells == 0 || !(grid_limit > 0.0) {
        set_error("law point: need grid_cells > 0 and grid_limit > 0");
        return ClbStatus::ClbErrContract;
    }
    let grid = default_grid(grid_cells, grid_limit);
    match law_point(n, d, eps, Complex64::new(z_re, z_im), &xi_of(xi), seed, &grid) {
        Ok(point) => {
            unsafe {
                *out = ClbLawPoint {
                    disk_mass: point.disk_mass,
                    discrepancy: point.discrepancy,
                    t1_dev: point.t1_dev,
                    t2_dev: point.t2_dev,
                    hs_bound_ok: point.hs_bound_ok as i32,
                };
            }
            ClbStatus::ClbOk
        }
        Err(e) => fail(e),
    }
}

/// Monte Carlo over the half-integer drift walk: `trials` runs of `steps`
/// steps at adversary-move probability `q`, starting height `y0_twice`/2.
///
/// # Safety
///
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn clb_drift_walk(
    steps: usize,
    q: f64,
    y0_twice: u64,
    policy: ClbWalkPolicy,
    trials: usize,
    seed: u64,
    threshold_div: usize,
    out: *mut ClbWalk,
) -> ClbStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let adversary = match policy {
        ClbWalkPolicy::ClbWalkAlwaysUp => Adversary::AlwaysUp,
        ClbWalkPolicy::ClbWalkRandom => Adversary::Random,
        ClbWalkPolicy::ClbWalkStay => Adversary::Stay,
    };
    match simulate_drift_walk(steps, q, y0_twice, adversary, trials, seed, threshold_div) {
        Ok(rep) => {
            unsafe {
                *out = ClbWalk {
                    p_grounded: rep.p_grounded,
                    mean_z_final: rep.mean_z_final,
                    se_z_final: rep.se_z_final,
                    max_mean_z: rep.max_mean_z,
                };
            }
            ClbStatus::ClbOk
        }
        Err(e) => fail(e),
    }
}

/// The circular law's log potential at z.
#[no_mangle]
pub extern "C" fn clb_u_circ(z_re: f64, z_im: f64) -> f64 {
    u_circ(Complex64::new(z_re, z_im))
}

/// Runs the library's full deterministic check battery and writes the
/// number of failing checks to `failures` (zero on a healthy build).
///
/// # Safety
///
/// `failures` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn clb_selftest(failures: *mut usize) -> ClbStatus {
    if failures.is_null() {
        return null_arg("failures");
    }
    let rows = circulab::selftest::run_all();
    unsafe { *failures = rows.iter().filter(|r| !r.pass).count() };
    ClbStatus::ClbOk
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_lifecycle_and_nnz() {
        let mut handle: *mut ClbSample = std::ptr::null_mut();
        let st = unsafe { clb_sample_new(60, 60, 0.1, ClbXi::ClbXiRademacher, 9, &mut handle) };
        assert_eq!(st, ClbStatus::ClbOk);
        let mut nnz = 0usize;
        assert_eq!(unsafe { clb_sample_nnz(handle, &mut nnz) }, ClbStatus::ClbOk);
        assert!(nnz > 0);
        unsafe { clb_sample_free(handle) };
        unsafe { clb_sample_free(std::ptr::null_mut()) };
    }

    #[test]
    fn error_paths_set_codes_and_message() {
        let mut handle: *mut ClbSample = std::ptr::null_mut();
        // p out of range is a contract violation.
        let st = unsafe { clb_sample_new(10, 10, 0.9, ClbXi::ClbXiRademacher, 1, &mut handle) };
        assert_eq!(st, ClbStatus::ClbErrContract);
        let needed = unsafe { clb_last_error(std::ptr::null_mut(), 0) };
        assert!(needed > 0);
        let mut buf = vec![0i8; needed + 1];
        let len = unsafe { clb_last_error(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(len, needed);
        let msg = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert!(msg.contains("p"), "unexpected message: {}", msg);

        let st = unsafe {
            clb_sample_new(10, 10, 0.1, ClbXi::ClbXiRademacher, 1, std::ptr::null_mut())
        };
        assert_eq!(st, ClbStatus::ClbErrNullArg);
    }

    #[test]
    fn potential_matches_library() {
        let mut out = ClbPotential {
            u_n: 0.0,
            t_n: 0.0,
            t1: 0.0,
            t2: 0.0,
            u_circ: 0.0,
            inf_flag: 0,
            minor_size: 0,
            top_index: 0,
        };
        let st = unsafe {
            clb_potential(80, 8.0, 0.1, 1.0, 0.0, ClbXi::ClbXiRademacher, 3, &mut out)
        };
        assert_eq!(st, ClbStatus::ClbOk);
        let rep = potential_report(80, 8.0, 0.1, Complex64::new(1.0, 0.0), &XiSpec::Rademacher, 3)
            .unwrap();
        assert_eq!(out.u_n, rep.u_n);
        assert_eq!(out.t1, rep.t1);
        assert_eq!(out.minor_size, rep.m);
    }

    #[test]
    fn process_run_grounds_small_instance() {
        let mut handle: *mut ClbSample = std::ptr::null_mut();
        let st = unsafe { clb_sample_new(40, 40, 0.15, ClbXi::ClbXiRademacher, 11, &mut handle) };
        assert_eq!(st, ClbStatus::ClbOk);
        let mut out = ClbProcessSummary {
            r_final: 0,
            h_final_twice: 0,
            accepted: 0,
            rejected: 0,
            acceptance_rate: 0.0,
            finite_candidate_rate: 0.0,
            u_n: 0.0,
            t_n_initial: 0.0,
            chain_slack: 0.0,
            chain_holds: 0,
            grounded: 0,
        };
        let st = unsafe { clb_process_run(handle, 40, 0.25, 1.0, 0.0, 1.0, &mut out) };
        assert_eq!(st, ClbStatus::ClbOk);
        assert_eq!(out.chain_holds, 1);
        assert!(out.accepted + out.rejected > 0);
        if out.grounded == 1 {
            assert!(out.chain_slack.is_finite());
        } else {
            assert!(out.chain_slack.is_nan());
        }
        unsafe { clb_sample_free(handle) };
    }

    #[test]
    fn certificates_write_six_slots() {
        let mut handle: *mut ClbSample = std::ptr::null_mut();
        let st = unsafe { clb_sample_new(120, 120, 0.1, ClbXi::ClbXiRademacher, 5, &mut handle) };
        assert_eq!(st, ClbStatus::ClbOk);
        let zero = ClbEventCheck { event_kind: -1, verdict: 0, vacuous: 0, witness: 0, trials: 0 };
        let mut slots = [zero; 6];
        let mut written = 0usize;
        let st = unsafe {
            clb_certificates(handle, 240, 1.0, 5, slots.as_mut_ptr(), slots.len(), &mut written)
        };
        assert_eq!(st, ClbStatus::ClbOk);
        assert!(written > 0 && written <= 6);
        let mut kinds: Vec<i32> = slots[..written].iter().map(|s| s.event_kind).collect();
        kinds.sort_unstable();
        kinds.dedup();
        assert_eq!(kinds.len(), written, "duplicate event kinds reported");
        unsafe { clb_sample_free(handle) };
    }

    #[test]
    fn walk_and_u_circ_scalars() {
        let mut out = ClbWalk { p_grounded: 0.0, mean_z_final: 0.0, se_z_final: 0.0, max_mean_z: 0.0 };
        let st = unsafe {
            clb_drift_walk(16, 0.0, 0, ClbWalkPolicy::ClbWalkAlwaysUp, 200, 1, 16, &mut out)
        };
        assert_eq!(st, ClbStatus::ClbOk);
        assert_eq!(out.p_grounded, 1.0);
        assert_eq!(clb_u_circ(0.0, 0.0), 0.5);
        assert_eq!(clb_u_circ(2.0, 0.0), -(2.0f64.ln()));
    }

    #[test]
    fn law_point_contract_checks() {
        let mut out =
            ClbLawPoint { disk_mass: 0.0, discrepancy: 0.0, t1_dev: 0.0, t2_dev: 0.0, hs_bound_ok: 0 };
        let st = unsafe {
            clb_law_point(60, 6.0, 0.1, 1.0, 0.0, ClbXi::ClbXiRademacher, 2, 0, 1.5, &mut out)
        };
        assert_eq!(st, ClbStatus::ClbErrContract);
        let st = unsafe {
            clb_law_point(60, 6.0, 0.1, 1.0, 0.0, ClbXi::ClbXiRademacher, 2, 6, 1.5, &mut out)
        };
        assert_eq!(st, ClbStatus::ClbOk);
        assert!(out.disk_mass > 0.0 && out.disk_mass <= 1.0);
    }

    #[test]
    fn selftest_reports_zero_failures() {
        let mut failures = usize::MAX;
        assert_eq!(unsafe { clb_selftest(&mut failures) }, ClbStatus::ClbOk);
        assert_eq!(failures, 0);
    }

    #[test]
    fn version_is_nul_terminated_semver() {
        let v = unsafe { std::ffi::CStr::from_ptr(clb_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
