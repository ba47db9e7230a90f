//! Log potentials of singular-value spectra and the acceptance schedule for
//! the step process.  All logarithms are natural.
//!
//! Throughout, a spectrum is a descending list sigma_1 >= .. >= sigma_k >= 0
//! and indices into it are 1-based in the formulas (converted internally).
//! By convention sigma_r = 0 for r beyond the list, which makes truncated
//! sums infinite rather than silently short.

use crate::ensemble::{sample_matrix, shift_and_scale, Time, XiSpec};
use crate::linalg::singular_values;
use crate::{Error, Result};
use num_complex::Complex64;

/// Log potential of the circular law: -log|z| outside the unit disk,
/// (1 - |z|^2)/2 inside; the branches agree on the circle.
pub fn u_circ(z: Complex64) -> f64 {
    let r = z.norm();
    if r >= 1.0 {
        -r.ln()
    } else {
        (1.0 - r * r) / 2.0
    }
}

/// -(1/n) sum of log sigma_j over the first `r` values (1-based count).
/// Infinite when a zero singular value enters the sum, including the case
/// r > len via the sigma = 0 convention.
pub fn truncated_log_sum(values: &[f64], r: usize, n: usize) -> f64 {
    assert!(n > 0);
    if r > values.len() {
        return f64::INFINITY;
    }
    let mut acc = 0.0;
    for &v in &values[..r] {
        if v <= 0.0 {
            return f64::INFINITY;
        }
        acc += v.ln();
    }
    -acc / n as f64
}

/// U_n: the full log potential -(1/n) sum_(j=1)^len log sigma_j.
pub fn log_potential(values: &[f64], n: usize) -> f64 {
    truncated_log_sum(values, values.len(), n)
}

/// Acceptance slack schedule delta_r, r in [1, n].
///
/// The low regime uses n^(-1) (log(n/(n-r+1)))^2 below the cutoff
/// r = n (1 - d^(-1/4)) and c_sched n^(-1) (log d)^8 (log(n/(n-r+1)))^8 at or
/// above it.  `constant` mode (any value, including +-infinity) exists for
/// forcing the process to always or never accept in tests and sweeps.
#[derive(Debug, Clone)]
pub struct DeltaSchedule {
    n: usize,
    mode: ScheduleMode,
}

#[derive(Debug, Clone)]
enum ScheduleMode {
    TwoRegime { d: f64, c_sched: f64, cutoff: f64 },
    Constant(f64),
}

impl DeltaSchedule {
    pub fn two_regime(n: usize, d: f64, c_sched: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract("schedule: n must be at least 2"));
        }
        if d <= 1.0 {
            return Err(Error::contract("schedule: d must exceed 1"));
        }
        if !(c_sched > 0.0) {
            return Err(Error::contract("schedule: c_sched must be positive"));
        }
        let cutoff = n as f64 * (1.0 - d.powf(-0.25));
        Ok(DeltaSchedule { n, mode: ScheduleMode::TwoRegime { d, c_sched, cutoff } })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract("schedule: n must be at least 2"));
        }
        if value.is_nan() {
            return Err(Error::contract("schedule: delta must not be NaN"));
        }
        Ok(DeltaSchedule { n, mode: ScheduleMode::Constant(value) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// delta_r for 1-based r <= n.
    pub fn delta(&self, r: usize) -> f64 {
        assert!((1..=self.n).contains(&r), "delta_r: r = {} out of [1, {}]", r, self.n);
        match &self.mode {
            ScheduleMode::Constant(v) => *v,
            ScheduleMode::TwoRegime { d, c_sched, cutoff } => {
                let n = self.n as f64;
                let lg = (n / (n - r as f64 + 1.0)).ln();
                if (r as f64) < *cutoff {
                    lg * lg / n
                } else {
                    c_sched * d.ln().powi(8) * lg.powi(8) / n
                }
            }
        }
    }

    /// eta_r = exp(-n delta_r); underflows to 0 deep in the high regime.
    pub fn eta(&self, r: usize) -> f64 {
        (-(self.n as f64) * self.delta(r)).exp()
    }

    /// sum of delta_r for r in [start, n], 1-based inclusive.
    pub fn tail_sum(&self, start: usize) -> f64 {
        (start.max(1)..=self.n).map(|r| self.delta(r)).sum()
    }
}

/// The two truncated potentials compared against U_n, with the index choices
/// recorded.  `t1` keeps the largest `r_top` values of the full spectrum;
/// `t2` drops the extreme `lo_index` values and pays for the rest with
/// `coeff_count` copies of log sigma_(r_top) of the minor spectrum.
#[derive(Debug, Clone, Copy)]
pub struct T1T2 {
    pub t1: f64,
    pub t2: f64,
    pub r_top: usize,
    pub lo_index: usize,
    pub coeff_count: usize,
}

/// Index bookkeeping shared by the truncated potentials: m = floor((1-eps) n)
/// rows in the minor, r_top = floor((1-eps/4) m) values kept.  Fractional
/// index bounds always round down.
pub fn minor_size(n: usize, eps: f64) -> Result<usize> {
    if !(eps >= 0.0 && eps < 1.0) {
        return Err(Error::contract("eps must be in [0, 1)"));
    }
    // eps = 0 degenerates to the full matrix: no truncation at all.
    let m = ((1.0 - eps) * n as f64).floor() as usize;
    if m < 2 {
        return Err(Error::contract("minor too small: increase n or decrease eps"));
    }
    Ok(m)
}

pub fn top_index(m: usize, eps: f64) -> usize {
    ((1.0 - eps / 4.0) * m as f64).floor() as usize
}

/// T_n: -(1/n) sum_(j<=r_top) log sigma_j of the minor spectrum.
pub fn t_n(minor_values: &[f64], n: usize, eps: f64) -> Result<f64> {
    let m = minor_size(n, eps)?;
    if minor_values.len() != m {
        return Err(Error::contract(format!(
            "t_n: expected {} minor singular values, got {}",
            m,
            minor_values.len()
        )));
    }
    Ok(truncated_log_sum(minor_values, top_index(m, eps), n))
}

/// T1 and T2 from the full (length n) and minor (length m) spectra.
///
/// T1 = -(1/n) sum_(i=1)^(r_top) log sigma_i(full).
/// T2 = -(1/n) sum_(i=lo_index)^m log sigma_i(full)
///      - (coeff_count/n) log sigma_(r_top)(minor),
/// with lo_index = 2(n - m) and coeff_count = r_top - (3m - 2n), the count
/// that makes the interlacing chain T_n <= T2 exact for rounded indices.
pub fn t1_t2(full_values: &[f64], minor_values: &[f64], n: usize, eps: f64) -> Result<T1T2> {
    let m = minor_size(n, eps)?;
    if full_values.len() != n || minor_values.len() != m {
        return Err(Error::contract(format!(
            "t1_t2: expected spectra of lengths {} and {}, got {} and {}",
            n,
            m,
            full_values.len(),
            minor_values.len()
        )));
    }
    if 3 * m < 2 * n {
        return Err(Error::contract("t1_t2: eps too large, need 3 m >= 2 n"));
    }
    let r_top = top_index(m, eps);
    if r_top == 0 {
        return Err(Error::contract("t1_t2: empty truncation"));
    }
    let lo_index = 2 * (n - m);
    let coverage = 3 * m - 2 * n;
    let coeff_count = r_top.saturating_sub(coverage);
    let t1 = truncated_log_sum(full_values, r_top, n);

    let lo = lo_index.max(1);
    let mut t2 = f64::INFINITY;
    let sigma_cut = minor_values[r_top - 1];
    if sigma_cut > 0.0 {
        let mut acc = 0.0;
        let mut finite = true;
        for &v in &full_values[lo - 1..m] {
            if v <= 0.0 {
                finite = false;
                break;
            }
            acc += v.ln();
        }
        if finite {
            t2 = -acc / n as f64 - coeff_count as f64 * sigma_cut.ln() / n as f64;
        }
    }
    Ok(T1T2 { t1, t2, r_top, lo_index, coeff_count })
}

/// Everything the potential experiment reports for one (seed, z) cell.
#[derive(Debug, Clone)]
pub struct PotentialReport {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub d: f64,
    pub eps: f64,
    pub z: Complex64,
    pub u_n: f64,
    pub t_n: f64,
    pub t1: f64,
    pub t2: f64,
    pub u_circ: f64,
    pub r_top: usize,
    pub lo_index: usize,
    pub coeff_count: usize,
    pub inf_flag: bool,
}

/// Sample Delta_n(p = d/n, xi) and evaluate all potentials at z.
pub fn potential_report(
    n: usize,
    d: f64,
    eps: f64,
    z: Complex64,
    xi: &XiSpec,
    seed: u64,
) -> Result<PotentialReport> {
    if d <= 0.0 || d > n as f64 / 2.0 {
        return Err(Error::contract("potential_report: need 0 < d <= n/2 so that p <= 1/2"));
    }
    let m = minor_size(n, eps)?;
    let p = d / n as f64;
    let sample = sample_matrix(n, n, p, xi, seed)?;
    let full = singular_values(&shift_and_scale(&sample, Time::integer(n), z, d)?)?;
    let minor = singular_values(&shift_and_scale(&sample, Time::integer(m), z, d)?)?;
    let u_n = log_potential(&full, n);
    let t_n = t_n(&minor, n, eps)?;
    let parts = t1_t2(&full, &minor, n, eps)?;
    let inf_flag = !u_n.is_finite() || !t_n.is_finite() || !parts.t1.is_finite() || !parts.t2.is_finite();
    Ok(PotentialReport {
        seed,
        n,
        m,
        d,
        eps,
        z,
        u_n,
        t_n,
        t1: parts.t1,
        t2: parts.t2,
        u_circ: u_circ(z),
        r_top: parts.r_top,
        lo_index: parts.lo_index,
        coeff_count: parts.coeff_count,
        inf_flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn u_circ_reference_values() {
        assert!((u_circ(c(0.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!(u_circ(c(1.0, 0.0)).abs() < 1e-15);
        assert!((u_circ(c(2.0, 0.0)) + 2f64.ln()).abs() < 1e-15);
        // Continuity across the circle and rotation invariance.
        let inside = u_circ(c(0.999, 0.0));
        let outside = u_circ(c(1.001, 0.0));
        assert!((inside - outside).abs() < 3e-3);
        assert!((u_circ(c(0.0, 0.7)) - u_circ(c(0.7, 0.0))).abs() < 1e-15);
    }

    #[test]
    fn delta_regimes_match_direct_recomputation() {
        let n = 1000;
        let d = 100.0;
        let sched = DeltaSchedule::two_regime(n, d, 1.0).unwrap();
        let cutoff = n as f64 * (1.0 - d.powf(-0.25));
        for r in [1usize, 10, 316, 500, 683, 684, 900, 999, 1000] {
            let nf = n as f64;
            let lg = (nf / (nf - r as f64 + 1.0)).ln();
            let want = if (r as f64) < cutoff {
                lg * lg / nf
            } else {
                d.ln().powi(8) * lg.powi(8) / nf
            };
            assert_eq!(sched.delta(r), want, "r = {}", r);
        }
        // r = 999 sits in the high regime at these parameters.
        assert!(999.0 >= cutoff);
        let lg = (1000.0f64 / 2.0).ln();
        assert_eq!(sched.delta(999), 100f64.ln().powi(8) * lg.powi(8) / 1000.0);
    }

    #[test]
    fn eta_and_tail_sum() {
        let sched = DeltaSchedule::two_regime(500, 20.0, 1.0).unwrap();
        for r in [1usize, 100, 499] {
            let eta = sched.eta(r);
            assert!((eta - (-500.0 * sched.delta(r)).exp()).abs() <= f64::EPSILON * eta.max(1.0));
        }
        let direct: f64 = (490..=500).map(|r| sched.delta(r)).sum();
        assert_eq!(sched.tail_sum(490), direct);
        // Low regime only: the tail sum over everything is finite.
        assert!(sched.tail_sum(1).is_finite());
    }

    #[test]
    fn constant_schedule_sentinels() {
        let always = DeltaSchedule::constant(100, f64::INFINITY).unwrap();
        assert_eq!(always.delta(50), f64::INFINITY);
        assert_eq!(always.eta(50), 0.0);
        let never = DeltaSchedule::constant(100, f64::NEG_INFINITY).unwrap();
        assert_eq!(never.delta(50), f64::NEG_INFINITY);
        assert!(DeltaSchedule::constant(100, f64::NAN).is_err());
    }

    #[test]
    fn truncated_sum_conventions() {
        let vals = [4.0, 2.0, 1.0];
        // -(1/2)(log 4 + log 2) = -(3/2) log 2
        let t = truncated_log_sum(&vals, 2, 2);
        assert!((t + 1.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(truncated_log_sum(&vals, 4, 2), f64::INFINITY);
        assert_eq!(truncated_log_sum(&[1.0, 0.0], 2, 2), f64::INFINITY);
        assert_eq!(truncated_log_sum(&vals, 0, 5), 0.0);
    }

    #[test]
    fn t1_t2_closed_form_on_flat_spectrum() {
        // All sigma = c: every sum collapses to a count times log c.
        let n = 40;
        let eps = 0.1;
        let m = minor_size(n, eps).unwrap();
        let cval = 0.5f64;
        let full = vec![cval; n];
        let minor = vec![cval; m];
        let parts = t1_t2(&full, &minor, n, eps).unwrap();
        let r_top = top_index(m, eps);
        let want_t1 = -(r_top as f64) * cval.ln() / n as f64;
        assert!((parts.t1 - want_t1).abs() < 1e-14);
        let lo = (2 * (n - m)).max(1);
        let count = m - lo + 1;
        let want_t2 = -((count + parts.coeff_count) as f64) * cval.ln() / n as f64;
        assert!((parts.t2 - want_t2).abs() < 1e-14);
        // Exact-chain bookkeeping.
        assert_eq!(parts.coeff_count, r_top - (3 * m - 2 * n));
    }

    #[test]
    fn potential_report_on_small_sample() {
        let rep = potential_report(60, 6.0, 0.1, c(1.0, 0.0), &XiSpec::Rademacher, 11).unwrap();
        assert_eq!(rep.m, 54);
        assert!(rep.u_circ.abs() < 1e-15);
        if !rep.inf_flag {
            // Two-sided sandwich between the truncated potentials on this instance.
            assert!(rep.t_n <= rep.t2 + 1e-10);
            let denom = (1.0 - rep.eps / 4.0) * (1.0 - rep.eps);
            assert!(rep.u_n >= rep.t1 / denom - 1e-10);
        }
    }

    #[test]
    fn schedule_rejects_bad_parameters() {
        assert!(DeltaSchedule::two_regime(1, 10.0, 1.0).is_err());
        assert!(DeltaSchedule::two_regime(100, 1.0, 1.0).is_err());
        assert!(DeltaSchedule::two_regime(100, 10.0, 0.0).is_err());
        assert!(potential_report(20, 11.0, 0.1, c(1.0, 0.0), &XiSpec::Rademacher, 0).is_err());
    }
}
