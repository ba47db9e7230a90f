//! Quasi-randomness certificates for sparse matrices: the unique-neighborhood
//! expansion event, row-sum and entry-size regularity events, and the
//! subset-growth iteration behind the spread check for almost-null vectors.
//!
//! Events are checked on the orientation the step process consumes: the
//! adjoint of the square block at integer times (the next step appends a
//! column there, which is a row of the adjoint) and the wide block itself at
//! half-integer times.

use crate::ensemble::{SparseSample, Time};
use crate::linalg::CMat;
use crate::potential::DeltaSchedule;
use crate::rng::Stream;
use crate::{Error, Result};
use num_complex::Complex64;

/// alpha(x) = (log(n/x))^(-2), the expansion density at subset size x.
pub fn alpha(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) || x >= n as f64 {
        return Err(Error::contract(format!("alpha: x = {} outside (0, n = {})", x, n)));
    }
    let lg = (n as f64 / x).ln();
    Ok(1.0 / (lg * lg))
}

/// Knobs for the certificate checks.  `beta` comes from the entry law (see
/// beta_of_xi); the constants default to the values the experiments pin.
#[derive(Debug, Clone)]
pub struct CertificateConfig {
    pub beta: f64,
    /// Lower subset-size factor in the expansion event.
    pub c_star: f64,
    /// Denominator constant in the growth function g.
    pub c_prime: f64,
    /// Big-O constant in the row-sum event.
    pub b_big_o: f64,
    /// Constant dividing the slack of the entry-size event (kept at 1).
    pub q_slack: f64,
    /// Monte Carlo subsets per size when enumeration is too large.
    pub subset_trials: usize,
    /// Enumerate all subsets when binom(cols, s) is at most this.
    pub exhaustive_limit: u64,
    /// Divisor in the over-achievement cap t - floor((n - t)/div).
    pub over_achievement_div: usize,
    pub seed: u64,
}

impl CertificateConfig {
    pub fn new(beta: f64) -> Self {
        CertificateConfig {
            beta,
            c_star: 0.25,
            c_prime: 8.0,
            b_big_o: 4.0,
            q_slack: 1.0,
            subset_trials: 64,
            exhaustive_limit: 10_000,
            over_achievement_div: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    UniqueExpansion,
    RowSums,
    EntrySizes,
    HeavyRows,
    Intersection,
    OverAchievementCap,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::UniqueExpansion => "unique-expansion",
            EventKind::RowSums => "row-sums",
            EventKind::EntrySizes => "entry-sizes",
            EventKind::HeavyRows => "heavy-rows",
            EventKind::Intersection => "intersection",
            EventKind::OverAchievementCap => "over-achievement-cap",
        }
    }
}

/// Result of one event check.  `witness` is the subset size, dyadic level or
/// grid point of the first failure (0 on pass); `trials` counts sampled
/// subsets (0 for the deterministic events); `vacuous` marks ranges that
/// were empty at these parameters.
#[derive(Debug, Clone)]
pub struct EventCheck {
    pub event: EventKind,
    pub verdict: bool,
    pub witness: usize,
    pub trials: usize,
    pub vacuous: bool,
}

impl EventCheck {
    fn pass(event: EventKind, trials: usize) -> Self {
        EventCheck { event, verdict: true, witness: 0, trials, vacuous: false }
    }

    fn fail(event: EventKind, witness: usize, trials: usize) -> Self {
        EventCheck { event, verdict: false, witness, trials, vacuous: false }
    }
}

/// The block the next process step grows: adjoint of the square block at
/// integer times, the wide block itself at half-integer times.
pub fn event_matrix(sample: &SparseSample, t: Time) -> Result<CMat> {
    let (rows, cols) = (t.rows(), t.cols());
    if rows == 0 || rows > sample.n_rows || cols > sample.n_cols {
        return Err(Error::contract(format!(
            "event_matrix: time {} out of range for {}x{} sample",
            t, sample.n_rows, sample.n_cols
        )));
    }
    let block = sample.dense_block(rows, cols);
    Ok(if t.is_integer() { block.adjoint() } else { block })
}

/// U(S) for a matrix B and a set S of column indices: the rows outside S
/// whose support meets the S-columns in exactly one entry of modulus at
/// least beta, together with the rows indexed by S whose S-columns all
/// vanish.  Returned sorted ascending.
pub fn unique_neighborhood(b: &CMat, s: &[usize], beta: f64) -> Result<Vec<usize>> {
    let cols = b.cols();
    let mut seen = vec![false; cols];
    for &j in s {
        if j >= cols {
            return Err(Error::contract(format!("unique_neighborhood: column {} out of range", j)));
        }
        if seen[j] {
            return Err(Error::contract("unique_neighborhood: duplicate column in S"));
        }
        seen[j] = true;
    }
    let mut out = Vec::new();
    for i in 0..b.rows() {
        let in_s = i < cols && seen[i];
        if in_s {
            let all_zero = s.iter().all(|&j| {
                let v = b[(i, j)];
                v.re == 0.0 && v.im == 0.0
            });
            if all_zero {
                out.push(i);
            }
        } else {
            let mut nonzero = 0usize;
            let mut last = Complex64::new(0.0, 0.0);
            for &j in s {
                let v = b[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    nonzero += 1;
                    if nonzero > 1 {
                        break;
                    }
                    last = v;
                }
            }
            if nonzero == 1 && last.norm() >= beta {
                out.push(i);
            }
        }
    }
    Ok(out)
}

fn binom_at_most(n: usize, k: usize, limit: u64) -> bool {
    // Overflow-safe: stop as soon as the running product clears the limit.
    let k = k.min(n - k.min(n));
    let mut acc: f64 = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
        if acc > limit as f64 {
            return false;
        }
    }
    acc <= limit as f64
}

/// All k-subsets of 0..n in lexicographic order, driving `f` until it says
/// stop (returns false).
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn random_subset(cols: usize, k: usize, rng: &mut Stream) -> Vec<usize> {
    // Partial Fisher-Yates on a sparse map, fine for k << cols.
    let mut swapped: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = i + (rng.uniform() * (cols - i) as f64) as usize;
        let j = j.min(cols - 1);
        let vi = *swapped.get(&i).unwrap_or(&i);
        let vj = *swapped.get(&j).unwrap_or(&j);
        out.push(vj);
        swapped.insert(j, vi);
    }
    out.sort_unstable();
    out
}

/// Size range of the expansion event at (t, r): subset sizes from
/// c_star (ceil(t) - r + 1) up to (n / 2d) log log d.
fn u_size_range(
    sample: &SparseSample,
    t: Time,
    r: usize,
    cfg: &CertificateConfig,
) -> Result<(usize, usize, f64)> {
    let n = sample.n_rows;
    let d = sample.p * n as f64;
    if d <= std::f64::consts::E {
        return Err(Error::contract("expansion event needs d > e for log log d"));
    }
    let tc = t.ceil();
    if r > tc {
        return Err(Error::contract(format!("expansion event: r = {} exceeds ceil(t) = {}", r, tc)));
    }
    let lower = (cfg.c_star * (tc - r + 1) as f64).ceil().max(1.0) as usize;
    let upper_f = n as f64 / (2.0 * d) * d.ln().ln();
    let upper = (upper_f.floor() as usize).min(t.cols());
    Ok((lower, upper, d))
}

/// Expansion event at rank r: every admissible-size subset S of columns has
/// |U(S)| >= alpha(|S|) d |S|.  Sizes run over a doubling grid; subsets are
/// enumerated when feasible and sampled otherwise.
pub fn check_event_u_r(
    sample: &SparseSample,
    t: Time,
    r: usize,
    cfg: &CertificateConfig,
) -> Result<EventCheck> {
    let b = event_matrix(sample, t)?;
    let (lower, upper, d) = u_size_range(sample, t, r, cfg)?;
    if lower > upper {
        return Ok(EventCheck {
            event: EventKind::UniqueExpansion,
            verdict: true,
            witness: 0,
            trials: 0,
            vacuous: true,
        });
    }
    let n = sample.n_rows;
    let mut sizes = Vec::new();
    let mut s = lower;
    while s < upper {
        sizes.push(s);
        s = (s * 2).max(s + 1);
    }
    sizes.push(upper);

    let mut trials_total = 0usize;
    for &size in &sizes {
        let need = alpha(n, size as f64)? * d * size as f64;
        let cols = b.cols();
        let mut failed_at: Option<usize> = None;
        if binom_at_most(cols, size, cfg.exhaustive_limit) {
            for_each_subset(cols, size, |s_idx| {
                trials_total += 1;
                let u = unique_neighborhood(&b, s_idx, cfg.beta).expect("valid subset");
                if (u.len() as f64) < need {
                    failed_at = Some(size);
                    false
                } else {
                    true
                }
            });
        } else {
            for trial in 0..cfg.subset_trials {
                let mut rng = Stream::new(
                    cfg.seed,
                    "u-event-subset",
                    &[t.twice(), r as u64, size as u64, trial as u64],
                );
                let s_idx = random_subset(cols, size, &mut rng);
                trials_total += 1;
                let u = unique_neighborhood(&b, &s_idx, cfg.beta)?;
                if (u.len() as f64) < need {
                    failed_at = Some(size);
                    break;
                }
            }
        }
        if let Some(w) = failed_at {
            return Ok(EventCheck::fail(EventKind::UniqueExpansion, w, trials_total));
        }
    }
    Ok(EventCheck::pass(EventKind::UniqueExpansion, trials_total))
}

/// Row-sum regularity: for every s, the s largest rows of the support
/// pattern average at most b_big_o (d + log(n/s)) nonzeros.
pub fn check_event_b(sample: &SparseSample, t: Time, cfg: &CertificateConfig) -> Result<EventCheck> {
    let b = event_matrix(sample, t)?;
    let n = sample.n_rows;
    let d = sample.p * n as f64;
    let mut counts: Vec<usize> = (0..b.rows())
        .map(|i| {
            (0..b.cols())
                .filter(|&j| {
                    let v = b[(i, j)];
                    v.re != 0.0 || v.im != 0.0
                })
                .count()
        })
        .collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let mut prefix = 0usize;
    for s in 1..=counts.len() {
        prefix += counts[s - 1];
        let mean = prefix as f64 / s as f64;
        let bound = cfg.b_big_o * (d + (n as f64 / s as f64).ln());
        if mean > bound {
            return Ok(EventCheck::fail(EventKind::RowSums, s, 0));
        }
    }
    Ok(EventCheck::pass(EventKind::RowSums, 0))
}

/// Entry-size regularity: on each dyadic level H in [1, n^4] at most
/// 2 d n / H^2 + (log n)^2 entries exceed 8H/beta, and no entry exceeds n^3.
pub fn check_event_q(sample: &SparseSample, t: Time, cfg: &CertificateConfig) -> Result<EventCheck> {
    let b = event_matrix(sample, t)?;
    let n = sample.n_rows as f64;
    let d = sample.p * n;
    let mut mags: Vec<f64> = Vec::with_capacity(b.rows() * b.cols());
    for j in 0..b.cols() {
        for v in b.col(j) {
            let m = v.norm();
            if m > 0.0 {
                mags.push(m);
            }
        }
    }
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if mags.first().is_some_and(|&m| m > n.powi(3)) {
        return Ok(EventCheck::fail(EventKind::EntrySizes, 0, 0));
    }
    let logn2 = n.ln() * n.ln();
    let mut h = 1.0f64;
    let mut level = 1usize;
    while h <= n.powi(4) {
        let threshold = 8.0 * h / cfg.beta;
        // mags is descending: count of entries strictly above the threshold.
        let count = mags.partition_point(|&m| m > threshold);
        let bound = (2.0 * d * n / (h * h) + logn2) / cfg.q_slack;
        if count as f64 > bound {
            return Ok(EventCheck::fail(EventKind::EntrySizes, level, 0));
        }
        h *= 2.0;
        level += 1;
    }
    Ok(EventCheck::pass(EventKind::EntrySizes, 0))
}

/// Heavy-row event: on a doubling grid of scales l <= n/2, the rows with
/// absolute sum above L/beta, L = (d n / (beta l))^5, number at most
/// alpha(l) d l / 4.  Scales beyond n/2 make the bound vacuous.
pub fn check_event_r(sample: &SparseSample, t: Time, cfg: &CertificateConfig) -> Result<EventCheck> {
    let b = event_matrix(sample, t)?;
    let n = sample.n_rows;
    let d = sample.p * n as f64;
    let sums: Vec<f64> = (0..b.rows())
        .map(|i| (0..b.cols()).map(|j| b[(i, j)].norm()).sum())
        .collect();
    let mut l = 1usize;
    while l <= n / 2 {
        let big_l = (d * n as f64 / (cfg.beta * l as f64)).powi(5);
        let cutoff = big_l / cfg.beta;
        let count = sums.iter().filter(|&&s| s > cutoff).count();
        let bound = alpha(n, l as f64)? * d * l as f64 / 4.0;
        if count as f64 > bound {
            return Ok(EventCheck::fail(EventKind::HeavyRows, l, 0));
        }
        l *= 2;
    }
    Ok(EventCheck::pass(EventKind::HeavyRows, 0))
}

/// The intersection event at rank r: expansion, row sums, entry sizes and
/// heavy rows all hold.
pub fn check_event_e(
    sample: &SparseSample,
    t: Time,
    r: usize,
    cfg: &CertificateConfig,
) -> Result<Vec<EventCheck>> {
    Ok(vec![
        check_event_u_r(sample, t, r, cfg)?,
        check_event_b(sample, t, cfg)?,
        check_event_q(sample, t, cfg)?,
        check_event_r(sample, t, cfg)?,
    ])
}

/// Largest rank the running certificate must cover at time t:
/// floor(t) - floor((n - t) / div).
pub fn cert_rank_cap(n: usize, t: Time, div: usize) -> usize {
    let tf = t.as_f64();
    let slack = ((n as f64 - tf) / div as f64).floor() as usize;
    t.floor().saturating_sub(slack)
}

/// The per-time certificate: the r-independent events once, plus the
/// expansion event at the cap rank (whose subset-size window contains every
/// smaller rank's window).
pub fn check_q_t(sample: &SparseSample, t: Time, cfg: &CertificateConfig) -> Result<Vec<EventCheck>> {
    let cap = cert_rank_cap(sample.n_rows, t, cfg.over_achievement_div).max(1);
    check_event_e(sample, t, cap.min(t.ceil()), cfg)
}

/// Growth function g and the subset-growth iteration k -> k + g(k), stopped
/// once k exceeds (n / 2d) log log d.
#[derive(Debug, Clone, Copy)]
pub struct GrowthReport {
    pub tau: usize,
    pub final_k: f64,
    /// tau / (log(n/k0))^4, reported against the configured cap.
    pub tau_ratio: f64,
}

pub fn growth_g(n: usize, d: f64, x: f64, cfg: &CertificateConfig) -> Result<f64> {
    let a = alpha(n, x)?;
    Ok((d * a * x / (cfg.c_prime * (d + (n as f64 / x).ln()))).ceil().max(1.0))
}

pub fn g_and_tau(n: usize, d: f64, k0: f64, cfg: &CertificateConfig) -> Result<GrowthReport> {
    if d <= std::f64::consts::E {
        return Err(Error::contract("g_and_tau: need d > e"));
    }
    if !(k0 >= 1.0) {
        return Err(Error::contract("g_and_tau: need k0 >= 1"));
    }
    let target = n as f64 / (2.0 * d) * d.ln().ln();
    let mut k = k0;
    let mut tau = 0usize;
    while k <= target {
        k += growth_g(n, d, k, cfg)?;
        tau += 1;
        if tau > 100_000_000 {
            return Err(Error::contract("g_and_tau: iteration failed to terminate"));
        }
    }
    let lg = (n as f64 / k0).ln().max(1e-300);
    Ok(GrowthReport { tau, final_k: k, tau_ratio: tau as f64 / lg.powi(4) })
}

/// lambda(v; x): how many coordinates have modulus at least x.
pub fn lambda_count(v: &[Complex64], x: f64) -> usize {
    v.iter().filter(|c| c.norm() >= x).count()
}

/// Moduli of v sorted descending (the v* rearrangement).
pub fn descending_moduli(v: &[Complex64]) -> Vec<f64> {
    let mut m: Vec<f64> = v.iter().map(|c| c.norm()).collect();
    m.sort_by(|a, b| b.partial_cmp(a).unwrap());
    m
}

#[derive(Debug, Clone, Copy)]
pub struct SpreadReport {
    pub lambda: usize,
    pub threshold: f64,
    pub target: f64,
    pub tau: usize,
    pub verdict: bool,
}

/// Spread check for an almost-null direction of A_(t, z): a unit vector v
/// with ||A_(t,z) v|| <= sqrt(d) eta_r must have at least (n / 2d) log log d
/// coordinates of modulus eta_r sqrt(d) / sqrt(k), k = ceil(t) - r + 1.
/// `m_shift` is the raw shifted block (entries of A, z on the diagonal,
/// no 1/sqrt(d) rescale), matching the 1 <= |z| <= d regime.
pub fn spread_check(
    m_shift: &CMat,
    v: &[Complex64],
    n: usize,
    d: f64,
    t: Time,
    r: usize,
    schedule: &DeltaSchedule,
    cfg: &CertificateConfig,
) -> Result<SpreadReport> {
    if v.len() != m_shift.cols() {
        return Err(Error::contract("spread_check: vector length mismatch"));
    }
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::contract("spread_check: v must be a unit vector"));
    }
    if r > t.ceil() || r == 0 {
        return Err(Error::contract("spread_check: r out of range"));
    }
    let eta = schedule.eta(r);
    let image = m_shift.matvec(v);
    let residual: f64 = image.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if residual > d.sqrt() * eta {
        return Err(Error::contract(format!(
            "spread_check: ||A v|| = {} exceeds sqrt(d) eta_r = {}",
            residual,
            d.sqrt() * eta
        )));
    }
    let k = (t.ceil() - r + 1) as f64;
    let threshold = eta * d.sqrt() / k.sqrt();
    let target = n as f64 / (2.0 * d) * d.ln().ln();
    let lambda = lambda_count(v, threshold);
    let k0 = (cfg.c_star * k).ceil().max(1.0);
    let growth = g_and_tau(n, d, k0, cfg)?;
    Ok(SpreadReport {
        lambda,
        threshold,
        target,
        tau: growth.tau,
        verdict: lambda as f64 >= target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, XiSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn manual_sample(n: usize, p: f64, entries: Vec<(u32, u32, Complex64)>) -> SparseSample {
        SparseSample { n_rows: n, n_cols: n, p, xi: XiSpec::Rademacher, seed: 0, entries }
    }

    #[test]
    fn unique_neighborhood_identity_is_empty() {
        let b = CMat::identity(3);
        let u = unique_neighborhood(&b, &[0], 0.5).unwrap();
        assert!(u.is_empty());
    }

    #[test]
    fn unique_neighborhood_hand_case() {
        // S = {0, 1}.  Row 0 (in S): S-columns all zero -> in U.
        // Row 1 (in S): has an entry in column 0 -> out.
        // Row 2: exactly one S-entry, large -> in U.
        // Row 3: two S-entries -> out.
        // Row 4: exactly one S-entry but below beta -> out.
        let b = CMat::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.3, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let u = unique_neighborhood(&b, &[0, 1], 0.5).unwrap();
        assert_eq!(u, vec![0, 2]);
    }

    #[test]
    fn unique_neighborhood_zero_and_dense() {
        let z = CMat::zeros(4, 4);
        assert_eq!(unique_neighborhood(&z, &[1, 2], 0.5).unwrap(), vec![1, 2]);
        let ones = CMat::from_fn(4, 4, |_, _| c(1.0, 0.0));
        // Single column: every row outside S has exactly one entry there.
        assert_eq!(unique_neighborhood(&ones, &[0], 0.5).unwrap(), vec![1, 2, 3]);
        // Two columns: no row qualifies.
        assert!(unique_neighborhood(&ones, &[0, 1], 0.5).unwrap().is_empty());
        assert!(unique_neighborhood(&ones, &[0, 0], 0.5).is_err());
        assert!(unique_neighborhood(&ones, &[9], 0.5).is_err());
    }

    #[test]
    fn alpha_exact_values() {
        let a = alpha(100, 1.0).unwrap();
        let lg = 100f64.ln();
        assert!((a - 1.0 / (lg * lg)).abs() < 1e-15);
        assert!(alpha(100, 0.0).is_err());
        assert!(alpha(100, 100.0).is_err());
    }

    #[test]
    fn growth_iteration_reference_case() {
        let cfg = CertificateConfig::new(0.5);
        let g = growth_g(10_000, 50.0, 10.0, &cfg).unwrap();
        assert_eq!(g, 1.0);
        let rep = g_and_tau(10_000, 50.0, 10.0, &cfg).unwrap();
        let target = 10_000.0 / 100.0 * 50f64.ln().ln();
        assert!(rep.final_k > target);
        assert!(rep.tau > 0);
        let cap = (10_000f64 / 10.0).ln().powi(4);
        assert!((rep.tau as f64) <= cap, "tau = {} vs cap {}", rep.tau, cap);
        assert!((rep.tau_ratio - rep.tau as f64 / cap).abs() < 1e-12);
    }

    #[test]
    fn lambda_and_rearrangement() {
        let v = [c(0.1, 0.0), c(0.0, 0.5), c(-0.3, 0.4), c(0.0, 0.0)];
        assert_eq!(lambda_count(&v, 0.5), 2);
        assert_eq!(lambda_count(&v, 0.0), 4);
        let m = descending_moduli(&v);
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
        assert!((m[3] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn row_sum_event_dense_calibration() {
        // Fully dense support: d = n, row sums all n.
        let n = 32;
        let mut entries = Vec::new();
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                entries.push((i, j, c(1.0, 0.0)));
            }
        }
        let s = manual_sample(n, 1.0, entries);
        let mut cfg = CertificateConfig::new(0.5);
        let check = check_event_b(&s, Time::integer(n), &cfg).unwrap();
        assert!(check.verdict);
        // A small constant cannot cover the all-ones pattern at s = n.
        cfg.b_big_o = 0.5;
        let check = check_event_b(&s, Time::integer(n), &cfg).unwrap();
        assert!(!check.verdict);
        assert!(check.witness >= 1);
    }

    #[test]
    fn entry_size_event_pass_and_fail() {
        let cfg = CertificateConfig::new(0.5);
        let s = sample_matrix(120, 120, 0.1, &XiSpec::Rademacher, 4).unwrap();
        assert!(check_event_q(&s, Time::integer(120), &cfg).unwrap().verdict);
        // Plant an entry beyond n^3.
        let huge = manual_sample(20, 0.1, vec![(3, 5, c(9000.0, 0.0))]);
        let check = check_event_q(&huge, Time::integer(20), &cfg).unwrap();
        assert!(!check.verdict);
    }

    #[test]
    fn heavy_row_event_pass_and_fail() {
        let cfg = CertificateConfig::new(0.5);
        let s = sample_matrix(120, 120, 0.1, &XiSpec::Rademacher, 4).unwrap();
        assert!(check_event_r(&s, Time::integer(120), &cfg).unwrap().verdict);
        let mut entries = Vec::new();
        // Column 2 of the sample is row 2 of the adjoint: one heavy row.
        for j in 0..40u32 {
            entries.push((j, 2, c(1e30, 0.0)));
        }
        let heavy = manual_sample(40, 0.2, entries);
        let check = check_event_r(&heavy, Time::integer(40), &cfg).unwrap();
        assert!(!check.verdict);
    }

    #[test]
    fn expansion_event_on_random_sample() {
        let s = sample_matrix(120, 120, 8.0 / 120.0, &XiSpec::Rademacher, 21).unwrap();
        let mut cfg = CertificateConfig::new(0.5);
        cfg.subset_trials = 16;
        cfg.seed = 5;
        let t = Time::integer(120);
        let check = check_event_u_r(&s, t, 120, &cfg).unwrap();
        assert!(check.verdict, "witness at size {}", check.witness);
        assert!(check.trials > 0);
        // Empty-size-range ranks are vacuous passes.
        let vac = check_event_u_r(&s, t, 1, &cfg).unwrap();
        assert!(vac.verdict && vac.vacuous);
    }

    #[test]
    fn rank_cap_formula() {
        assert_eq!(cert_rank_cap(100, Time::integer(84), 8), 82);
        assert_eq!(cert_rank_cap(100, Time::half_past(84), 8), 84 - 1);
        assert_eq!(cert_rank_cap(100, Time::integer(100), 8), 100);
    }

    #[test]
    fn spread_check_planted_kernel() {
        // A_t = z v v^H makes v an exact null vector of A_t - z I ... up to
        // the identity part: (A_t - zI) v = z v - z v = 0.
        let n = 64usize;
        let d = 16.0;
        let z = c(1.0, 0.0);
        let v: Vec<Complex64> = (0..n).map(|_| c(1.0 / (n as f64).sqrt(), 0.0)).collect();
        let mut m = CMat::from_fn(n, n, |i, j| z * v[i] * v[j].conj());
        for i in 0..n {
            m[(i, i)] -= z;
        }
        let schedule = DeltaSchedule::constant(n, 0.2).unwrap();
        let cfg = CertificateConfig::new(0.5);
        let r = n - 3;
        let rep = spread_check(&m, &v, n, d, Time::integer(n), r, &schedule, &cfg).unwrap();
        assert!(rep.verdict, "lambda = {} target = {}", rep.lambda, rep.target);
        assert_eq!(rep.lambda, n);
        // A concentrated vector fails the same check.
        let mut w = vec![c(0.0, 0.0); n];
        w[0] = c(1.0, 0.0);
        let mut m2 = CMat::from_fn(n, n, |i, j| z * w[i] * w[j].conj());
        for i in 0..n {
            m2[(i, i)] -= z;
        }
        let rep2 = spread_check(&m2, &w, n, d, Time::integer(n), r, &schedule, &cfg).unwrap();
        assert!(!rep2.verdict);
    }

    #[test]
    fn event_matrix_orientation() {
        let mut s = manual_sample(6, 0.1, vec![(1, 4, c(2.0, 1.0))]);
        s.n_cols = 6;
        // Integer time: adjoint, so the entry moves to (4, 1) conjugated.
        let b = event_matrix(&s, Time::integer(6)).unwrap();
        assert_eq!(b[(4, 1)], c(2.0, -1.0));
        // Half-integer time: wide block as-is.
        let b = event_matrix(&s, Time::half_past(5)).unwrap();
        assert_eq!((b.rows(), b.cols()), (5, 6));
        assert_eq!(b[(1, 4)], c(2.0, 1.0));
    }
}
