//! The incremental singular-value process: the shifted block grows from the
//! (1-eps)n minor to the full matrix by alternating column and row
//! appensions on the half-integer time grid, and a truncated log-sum
//! acceptance rule decides when the accepted count r may follow.
//!
//! Alongside the process live its structural checks (interlacing under row
//! addition, the determinant product bound for appended rows) and the
//! abstract drift walk whose hitting probability controls h(n).

use crate::ensemble::{shift_and_scale, SparseSample, Time};
use crate::linalg::{singular_values, svd, CMat};
use crate::potential::{log_potential, minor_size, top_index, truncated_log_sum, DeltaSchedule};
use crate::quasirandom::{check_q_t, CertificateConfig, EventCheck};
use crate::rng::Stream;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Init,
    Column,
    Row,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Init => "init",
            StepKind::Column => "col",
            StepKind::Row => "row",
        }
    }
}

/// One half-step of the process.  Half-integer quantities are stored
/// doubled so the grid stays exact.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t_twice: u64,
    pub kind: StepKind,
    pub r: usize,
    pub h_twice: u64,
    pub h_star_twice: u64,
    pub accepted: bool,
    pub delta_used: f64,
    /// T at the candidate rank r+1 on the new spectrum.
    pub t_candidate: f64,
    /// T at the realized rank on the new spectrum.
    pub t_current: f64,
    /// Singular value at the realized rank (0 when past the spectrum).
    pub sigma_r: f64,
    pub min_sigma: f64,
    /// max over shared indices of sigma_i(old) - sigma_i(new); appending a
    /// row or column must push every singular value up.
    pub monotone_violation: f64,
    pub certificates: Vec<EventCheck>,
}

#[derive(Debug, Clone)]
pub struct ProcessState {
    pub t: Time,
    pub r: usize,
    pub t_current: f64,
    values: Vec<f64>,
}

impl ProcessState {
    pub fn h_twice(&self) -> u64 {
        self.t.twice() - 2 * self.r as u64
    }

    /// h with heights 0 and 1/2 both counting as grounded.
    pub fn h_star_twice(&self) -> u64 {
        let h = self.h_twice();
        if h <= 1 {
            0
        } else {
            h
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProcessConfig {
    /// When set, sampled certificate checks run at every half-step and are
    /// logged in the trace; acceptance never consults them.
    pub certify: Option<CertificateConfig>,
}

/// Full trace of one process run.
#[derive(Debug, Clone)]
pub struct ProcessTrace {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub d: f64,
    pub z: Complex64,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub r_final: usize,
    pub h_final_twice: u64,
    /// T at the initial minor, the anchor of the chain inequality.
    pub t_n_initial: f64,
    /// Log potential of the full shifted matrix.
    pub u_n: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Set when |z| leaves [d^(-1/2), d^(1/2)].
    pub regime_flag: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainCheck {
    /// Worst excess of an accepted candidate over its allowance.
    pub max_step_violation: f64,
    /// T_n + sum of accepted deltas - U_n; meaningful when the walk grounded.
    pub slack: Option<f64>,
    pub holds: bool,
}

impl ProcessTrace {
    pub fn acceptance_rate(&self) -> f64 {
        let total = self.accepted_steps + self.rejected_steps;
        if total == 0 {
            0.0
        } else {
            self.accepted_steps as f64 / total as f64
        }
    }

    /// Acceptance rate over the steps where acceptance was possible at all:
    /// a grounded walk must zigzag through candidates beyond the spectrum,
    /// and those forced rejections say nothing about the inequality.
    pub fn finite_candidate_rate(&self) -> f64 {
        let mut finite = 0usize;
        let mut accepted = 0usize;
        for rec in &self.records {
            if rec.kind != StepKind::Init && rec.t_candidate.is_finite() {
                finite += 1;
                if rec.accepted {
                    accepted += 1;
                }
            }
        }
        if finite == 0 {
            0.0
        } else {
            accepted as f64 / finite as f64
        }
    }

    /// Replays the acceptance inequalities along the trace and, when the
    /// walk grounded at r(n) = n, re-chains them into the potential bound
    /// U_n <= T_n + sum of the deltas spent on accepted steps.
    pub fn verify_chain(&self, tol: f64) -> ChainCheck {
        let mut prev_t = self.t_n_initial;
        let mut max_violation = f64::NEG_INFINITY;
        let mut delta_spent = 0.0;
        for rec in &self.records {
            if rec.kind == StepKind::Init {
                prev_t = rec.t_current;
                continue;
            }
            if rec.accepted {
                max_violation = max_violation.max(rec.t_candidate - (prev_t + rec.delta_used));
                delta_spent += rec.delta_used;
            }
            prev_t = rec.t_current;
        }
        let grounded = self.r_final == self.n;
        let slack = grounded.then(|| self.t_n_initial + delta_spent - self.u_n);
        ChainCheck {
            max_step_violation: max_violation,
            slack,
            holds: max_violation <= tol && slack.map_or(true, |s| s >= -tol),
        }
    }
}

fn monotone_violation(old: &[f64], new: &[f64]) -> f64 {
    old.iter().zip(new).map(|(o, n)| o - n).fold(f64::NEG_INFINITY, f64::max)
}

impl ProcessState {
    /// Initial state at the minor time m with r(m) = (1 - eps/4) m.
    pub fn init(
        sample: &SparseSample,
        n: usize,
        eps: f64,
        z: Complex64,
    ) -> Result<(ProcessState, StepRecord)> {
        let m = minor_size(n, eps)?;
        let r0 = top_index(m, eps);
        let d = sample.p * n as f64;
        let t = Time::integer(m);
        let block = shift_and_scale(sample, t, z, d)?;
        let values = singular_values(&block)?;
        let t_current = truncated_log_sum(&values, r0, n);
        let record = StepRecord {
            t_twice: t.twice(),
            kind: StepKind::Init,
            r: r0,
            h_twice: t.twice() - 2 * r0 as u64,
            h_star_twice: if t.twice() - 2 * r0 as u64 <= 1 { 0 } else { t.twice() - 2 * r0 as u64 },
            accepted: false,
            delta_used: 0.0,
            t_candidate: f64::NAN,
            t_current,
            sigma_r: values.get(r0 - 1).copied().unwrap_or(0.0),
            min_sigma: values.last().copied().unwrap_or(0.0),
            monotone_violation: f64::NEG_INFINITY,
            certificates: Vec::new(),
        };
        let state = ProcessState { t, r: r0, t_current, values };
        Ok((state, record))
    }

    /// One half-step: grow the block, recompute its spectrum, and accept
    /// r+1 iff the candidate truncated log-sum stays within delta of the
    /// previous value.  A candidate without a positive backing singular
    /// value is never accepted, which keeps h nonnegative even under the
    /// forced-acceptance sentinel.
    pub fn advance(
        &mut self,
        sample: &SparseSample,
        n: usize,
        z: Complex64,
        schedule: &DeltaSchedule,
        config: &ProcessConfig,
    ) -> Result<StepRecord> {
        let d = sample.p * n as f64;
        let new_t = self.t.next_half();
        if new_t.ceil() > n {
            return Err(Error::contract("advance: process already at final time"));
        }
        let kind = if self.t.is_integer() { StepKind::Column } else { StepKind::Row };
        let block = shift_and_scale(sample, new_t, z, d)?;
        let values = singular_values(&block)?;
        let mono = monotone_violation(&self.values, &values);

        let candidate_r = self.r + 1;
        let t_candidate = truncated_log_sum(&values, candidate_r, n);
        let delta = schedule.delta(candidate_r);
        let accepted = t_candidate.is_finite() && t_candidate <= self.t_current + delta;
        if accepted {
            self.r = candidate_r;
            self.t_current = t_candidate;
        } else {
            self.t_current = truncated_log_sum(&values, self.r, n);
        }
        self.t = new_t;
        self.values = values;

        let certificates = match &config.certify {
            Some(cfg) => check_q_t(sample, new_t, cfg)?,
            None => Vec::new(),
        };
        Ok(StepRecord {
            t_twice: new_t.twice(),
            kind,
            r: self.r,
            h_twice: self.h_twice(),
            h_star_twice: self.h_star_twice(),
            accepted,
            delta_used: delta,
            t_candidate,
            t_current: self.t_current,
            sigma_r: self.values.get(self.r - 1).copied().unwrap_or(0.0),
            min_sigma: self.values.last().copied().unwrap_or(0.0),
            monotone_violation: mono,
            certificates,
        })
    }
}

/// Runs the process from the minor to the full matrix and assembles the
/// trace.  `eps` must leave a nontrivial minor; |z| outside the ensemble
/// regime [d^(-1/2), d^(1/2)] only raises a flag.
pub fn run_process(
    sample: &SparseSample,
    n: usize,
    eps: f64,
    z: Complex64,
    schedule: &DeltaSchedule,
    config: &ProcessConfig,
) -> Result<ProcessTrace> {
    if sample.n_rows < n || sample.n_cols < n {
        return Err(Error::contract("run_process: sample smaller than n"));
    }
    if z.norm() == 0.0 {
        return Err(Error::contract("run_process: z must be nonzero"));
    }
    let d = sample.p * n as f64;
    let regime_flag = !(z.norm() >= d.powf(-0.5) && z.norm() <= d.powf(0.5));
    let (mut state, init_record) = ProcessState::init(sample, n, eps, z)?;
    let m = state.t.floor();
    let t_n_initial = state.t_current;
    let mut records = vec![init_record];
    let mut accepted_steps = 0;
    let mut rejected_steps = 0;
    while state.t.twice() < 2 * n as u64 {
        let rec = state.advance(sample, n, z, schedule, config)?;
        if rec.accepted {
            accepted_steps += 1;
        } else {
            rejected_steps += 1;
        }
        records.push(rec);
    }
    let u_n = log_potential(state.values(), n);
    Ok(ProcessTrace {
        n,
        m,
        eps,
        d,
        z,
        seed: sample.seed,
        r_final: state.r,
        h_final_twice: state.h_twice(),
        t_n_initial,
        u_n,
        accepted_steps,
        rejected_steps,
        regime_flag,
        records,
    })
}

/// Worst signed interlacing defect when a row is appended: requires
/// sigma_i(M') >= sigma_i(M) >= sigma_(i+1)(M') for all i.  Negative values
/// mean comfortable interlacing.
pub fn interlacing_check(m: &CMat, m_plus_row: &CMat) -> Result<f64> {
    if m_plus_row.rows() != m.rows() + 1 || m_plus_row.cols() != m.cols() {
        return Err(Error::contract("interlacing_check: shapes are not row-appended"));
    }
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m[(i, j)] != m_plus_row[(i, j)] {
                return Err(Error::contract("interlacing_check: prefix rows differ"));
            }
        }
    }
    let mut s_old = singular_values(m)?;
    let mut s_new = singular_values(m_plus_row)?;
    let k = m.rows().min(m.cols());
    s_old.resize(k, 0.0);
    s_new.resize(m_plus_row.rows().min(m_plus_row.cols()), 0.0);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..k {
        worst = worst.max(s_old[i] - s_new[i]);
        if i + 1 < s_new.len() {
            worst = worst.max(s_new[i + 1] - s_old[i]);
        }
    }
    Ok(worst)
}

/// Determinant product bound for an appended row: the top r+1 product of
/// the stacked matrix dominates ||P X^dagger|| times the top r product of
/// M, with P the projection onto the cols - r lowest right directions.
pub fn walk_row_bound_check(m: &CMat, x: &[Complex64], r: usize) -> Result<(f64, f64, f64)> {
    let cols = m.cols();
    if x.len() != cols {
        return Err(Error::contract("walk_row_bound_check: row length mismatch"));
    }
    if r >= cols {
        return Err(Error::contract("walk_row_bound_check: need r < cols"));
    }
    let stacked = {
        let mut s = CMat::zeros(m.rows() + 1, cols);
        for j in 0..cols {
            for i in 0..m.rows() {
                s[(i, j)] = m[(i, j)];
            }
            s[(m.rows(), j)] = x[j];
        }
        s
    };
    let dec = svd(m, false, true)?;
    let v = dec.v.expect("requested right vectors");
    let mut vals = dec.values.clone();
    vals.resize(cols, 0.0);
    let mut proj_sq = 0.0f64;
    for col in r..cols {
        let vc = v.col(col);
        let mut dot = Complex64::new(0.0, 0.0);
        for (a, b) in vc.iter().zip(x) {
            dot += a.conj() * b.conj();
        }
        proj_sq += dot.norm_sqr();
    }
    let mut s_new = singular_values(&stacked)?;
    s_new.resize(stacked.rows().min(cols), 0.0);
    let lhs: f64 = s_new.iter().take(r + 1).product();
    let rhs: f64 = proj_sq.sqrt() * vals.iter().take(r).product::<f64>();
    Ok((lhs, rhs, lhs - rhs))
}

/// Adversary behaviour for the drift walk when the down-drift is not in
/// force (and on the q-probability failure branch when it is).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adversary {
    AlwaysUp,
    Random,
    Stay,
    /// Deliberately steps by +2 to exercise the contract guard.
    ViolatingJump,
}

impl Adversary {
    fn step_twice(self, rng: &mut Stream) -> i64 {
        match self {
            Adversary::AlwaysUp => 2,
            Adversary::Stay => 0,
            Adversary::ViolatingJump => 4,
            Adversary::Random => match (rng.uniform() * 4.0) as usize {
                0 => -1,
                1 => 0,
                2 => 1,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DriftWalkReport {
    pub steps: usize,
    pub trials: usize,
    pub p_grounded: f64,
    pub mean_z_final: f64,
    /// Monte Carlo standard error of the final exponential moment.
    pub se_z_final: f64,
    pub max_mean_z: f64,
}

/// Simulates the half-integer drift walk: whenever Y sits at or above
/// floor((T - s)/16) it steps down 1/2 with probability 1 - q, and the
/// adversary moves (by at most +1) otherwise.  Reports the grounding
/// probability and the exponential moment Z_s = q^((T-s)/16) q^(-Y/2).
pub fn simulate_drift_walk(
    t_steps: usize,
    q: f64,
    y0_twice: u64,
    adversary: Adversary,
    trials: usize,
    seed: u64,
    threshold_div: usize,
) -> Result<DriftWalkReport> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::contract("drift walk: q must lie in [0, 1)"));
    }
    if y0_twice as f64 / 2.0 > t_steps as f64 / 8.0 {
        return Err(Error::contract("drift walk: Y0 must be at most T/8"));
    }
    if trials == 0 || threshold_div == 0 {
        return Err(Error::contract("drift walk: trials and threshold_div must be positive"));
    }
    let log2_q = if q > 0.0 { q.log2() } else { f64::NEG_INFINITY };
    let z_at = |s: usize, y_twice: u64| -> f64 {
        if q == 0.0 {
            // q^0 = 1 at the walk's ground state, 0 elsewhere.
            return if (t_steps - s) == 0 && y_twice == 0 { 1.0 } else { 0.0 };
        }
        let exponent = log2_q * ((t_steps - s) as f64 / threshold_div as f64 - y_twice as f64 / 4.0);
        exponent.clamp(-1000.0, 1000.0).exp2()
    };

    let mut grounded = 0usize;
    let mut z_sums = vec![0.0f64; t_steps + 1];
    let mut z_final_sq = 0.0f64;
    for trial in 0..trials {
        let mut rng = Stream::new(seed, "drift-walk", &[trial as u64]);
        let mut y_twice = y0_twice;
        z_sums[0] += z_at(0, y_twice);
        for s in 0..t_steps {
            let threshold_twice = 2 * ((t_steps - s) / threshold_div) as u64;
            let adversary_moves = y_twice < threshold_twice || rng.uniform() < q;
            if adversary_moves {
                let step = adversary.step_twice(&mut rng);
                if step > 2 {
                    return Err(Error::contract(format!(
                        "drift walk: adversary stepped by {} > 1",
                        step as f64 / 2.0
                    )));
                }
                y_twice = (y_twice as i64 + step).max(0) as u64;
            } else if y_twice > 0 {
                y_twice -= 1;
            }
            z_sums[s + 1] += z_at(s + 1, y_twice);
        }
        if y_twice == 0 {
            grounded += 1;
        }
        let zf = z_at(t_steps, y_twice);
        z_final_sq += zf * zf;
    }
    let nt = trials as f64;
    let mean_z_final = z_sums[t_steps] / nt;
    let var = (z_final_sq / nt - mean_z_final * mean_z_final).max(0.0);
    Ok(DriftWalkReport {
        steps: t_steps,
        trials,
        p_grounded: grounded as f64 / nt,
        mean_z_final,
        se_z_final: (var / nt).sqrt(),
        max_mean_z: z_sums.iter().map(|s| s / nt).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, XiSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rademacher_sample(n: usize, d: f64, seed: u64) -> SparseSample {
        sample_matrix(n, n, d / n as f64, &XiSpec::Rademacher, seed).unwrap()
    }

    #[test]
    fn forced_acceptance_grounds_the_walk() {
        let n = 24;
        let s = rademacher_sample(n, 6.0, 3);
        let schedule = DeltaSchedule::constant(n, f64::INFINITY).unwrap();
        let trace =
            run_process(&s, n, 0.25, c(1.0, 0.0), &schedule, &ProcessConfig::default()).unwrap();
        assert_eq!(trace.h_final_twice, 0);
        assert_eq!(trace.r_final, n);
        // Every rejection must come from a candidate beyond the spectrum.
        for rec in &trace.records {
            if rec.kind != StepKind::Init && !rec.accepted {
                assert!(rec.t_candidate.is_infinite());
            }
        }
        let chain = trace.verify_chain(1e-9);
        assert!(chain.max_step_violation <= 1e-9);
    }

    #[test]
    fn forced_rejection_freezes_r() {
        let n = 24;
        let s = rademacher_sample(n, 6.0, 3);
        let schedule = DeltaSchedule::constant(n, f64::NEG_INFINITY).unwrap();
        let trace =
            run_process(&s, n, 0.25, c(1.0, 0.0), &schedule, &ProcessConfig::default()).unwrap();
        assert_eq!(trace.accepted_steps, 0);
        let m = minor_size(n, 0.25).unwrap();
        let r0 = top_index(m, 0.25);
        assert_eq!(trace.r_final, r0);
        assert_eq!(trace.h_final_twice, 2 * (n - r0) as u64);
    }

    #[test]
    fn desk_scale_acceptance_rate() {
        let n = 60;
        let s = rademacher_sample(n, 15.0, 11);
        let schedule = DeltaSchedule::two_regime(n, 15.0, 1.0).unwrap();
        let trace =
            run_process(&s, n, 0.2, c(1.0, 0.0), &schedule, &ProcessConfig::default()).unwrap();
        assert!(
            trace.finite_candidate_rate() >= 0.8,
            "rate {} (raw {})",
            trace.finite_candidate_rate(),
            trace.acceptance_rate()
        );
        assert_eq!(trace.records.len(), 1 + 2 * (n - trace.m));
        // Half-steps strictly ordered on the half grid.
        for pair in trace.records.windows(2) {
            assert_eq!(pair[1].t_twice, pair[0].t_twice + 1);
        }
        // Appending rows and columns only pushes singular values up.
        for rec in &trace.records {
            assert!(rec.monotone_violation <= 1e-9, "push violated: {}", rec.monotone_violation);
        }
        if trace.h_final_twice == 0 {
            let chain = trace.verify_chain(1e-10);
            assert!(chain.holds, "chain check failed: {:?}", chain);
            assert!(chain.slack.unwrap() >= -1e-9);
        }
    }

    #[test]
    fn certified_run_logs_verdicts() {
        let n = 40;
        let s = rademacher_sample(n, 8.0, 5);
        let schedule = DeltaSchedule::two_regime(n, 8.0, 1.0).unwrap();
        let mut cert = CertificateConfig::new(0.5);
        cert.subset_trials = 4;
        let config = ProcessConfig { certify: Some(cert) };
        let trace = run_process(&s, n, 0.2, c(1.0, 0.0), &schedule, &config).unwrap();
        for rec in trace.records.iter().skip(1) {
            assert_eq!(rec.certificates.len(), 4);
        }
    }

    #[test]
    fn prefix_blocks_are_consistent() {
        let n = 30;
        let s = rademacher_sample(n, 6.0, 9);
        let full = s.dense_block(n, n);
        for t in [Time::integer(20), Time::half_past(20), Time::integer(25)] {
            let block = s.dense_block(t.rows(), t.cols());
            for i in 0..t.rows() {
                for j in 0..t.cols() {
                    assert_eq!(block[(i, j)], full[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn interlacing_hand_cases() {
        let zero = CMat::zeros(2, 3);
        let mut plus = CMat::zeros(3, 3);
        plus[(2, 0)] = c(1.0, 0.0);
        plus[(2, 1)] = c(2.0, 0.0);
        assert!(interlacing_check(&zero, &plus).unwrap() <= 1e-12);

        let m = CMat::diag(&[c(3.0, 0.0), c(1.0, 0.0)]);
        let mut mp = CMat::zeros(3, 2);
        mp[(0, 0)] = c(3.0, 0.0);
        mp[(1, 1)] = c(1.0, 0.0);
        mp[(2, 1)] = c(2.0, 0.0);
        // sigma(M') = (3, sqrt 5) interlaces (3, 1).
        assert!(interlacing_check(&m, &mp).unwrap() <= 1e-12);

        assert!(interlacing_check(&m, &CMat::zeros(4, 2)).is_err());
        let mut wrong = mp.clone();
        wrong[(0, 0)] = c(4.0, 0.0);
        assert!(interlacing_check(&m, &wrong).is_err());
    }

    #[test]
    fn interlacing_random_instances() {
        for seed in 0..40 {
            let mut rng = Stream::new(77, "interlace", &[seed]);
            let rows = 2 + (rng.uniform() * 6.0) as usize;
            let cols = 2 + (rng.uniform() * 6.0) as usize;
            let m = CMat::from_fn(rows, cols, |_, _| {
                c(rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0)
            });
            let mut mp = CMat::zeros(rows + 1, cols);
            for j in 0..cols {
                for i in 0..rows {
                    mp[(i, j)] = m[(i, j)];
                }
                mp[(rows, j)] = c(rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0);
            }
            let v = interlacing_check(&m, &mp).unwrap();
            assert!(v <= 1e-10, "violation {} at seed {}", v, seed);
        }
    }

    #[test]
    fn walk_row_bound_hand_case() {
        let m = CMat::diag(&[c(2.0, 0.0), c(1.0, 0.0)]);
        let x = [c(0.0, 0.0), c(3.0, 0.0)];
        let (lhs, rhs, margin) = walk_row_bound_check(&m, &x, 1).unwrap();
        assert!((lhs - 2.0 * 10f64.sqrt()).abs() < 1e-12);
        assert!((rhs - 6.0).abs() < 1e-12);
        assert!(margin >= -1e-9 * rhs);
        // Zero row: right side collapses.
        let (_, rhs, margin) = walk_row_bound_check(&m, &[c(0.0, 0.0); 2], 1).unwrap();
        assert_eq!(rhs, 0.0);
        assert!(margin >= 0.0);
    }

    #[test]
    fn walk_row_bound_random_instances() {
        for seed in 0..60 {
            let mut rng = Stream::new(78, "walk-row", &[seed]);
            let rows = 2 + (rng.uniform() * 6.0) as usize;
            let cols = 2 + (rng.uniform() * 6.0) as usize;
            let m = CMat::from_fn(rows, cols, |_, _| {
                c(rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0)
            });
            let x: Vec<Complex64> =
                (0..cols).map(|_| c(rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0)).collect();
            let r = (rng.uniform() * (cols - 1) as f64) as usize;
            let (lhs, rhs, _) = walk_row_bound_check(&m, &x, r).unwrap();
            assert!(lhs >= rhs - 1e-9 * rhs.max(1.0), "seed {}: {} < {}", seed, lhs, rhs);
        }
    }

    #[test]
    fn drift_walk_never_fails_grounds() {
        let rep = simulate_drift_walk(160, 0.0, 40, Adversary::AlwaysUp, 200, 1, 16).unwrap();
        assert_eq!(rep.p_grounded, 1.0);
    }

    #[test]
    fn drift_walk_worst_case_close_to_one() {
        let q = 2f64.powi(-20);
        let rep = simulate_drift_walk(200, q, 50, Adversary::AlwaysUp, 2_000, 2, 16).unwrap();
        assert!(rep.p_grounded >= 0.95, "grounded {}", rep.p_grounded);
        assert!(rep.mean_z_final <= 4.0 + 3.0 * rep.se_z_final, "moment {}", rep.mean_z_final);
    }

    #[test]
    fn drift_walk_policies_and_contract() {
        let q = 2f64.powi(-16);
        for pol in [Adversary::Random, Adversary::Stay] {
            let rep = simulate_drift_walk(120, q, 20, pol, 500, 3, 16).unwrap();
            assert!(rep.p_grounded > 0.9);
            assert!(rep.max_mean_z.is_finite());
        }
        let err = simulate_drift_walk(120, 0.5, 20, Adversary::ViolatingJump, 10, 3, 16);
        assert!(err.is_err());
        assert!(simulate_drift_walk(120, 1.0, 0, Adversary::Stay, 10, 3, 16).is_err());
        assert!(simulate_drift_walk(120, 0.1, 200, Adversary::Stay, 10, 3, 16).is_err());
    }
}
