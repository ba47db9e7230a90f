//! Empirical circular-law verification: eigenvalue cloud vs the uniform
//! disk through exact rectangle masses, Ginibre reference singular-value
//! measures, and the truncated-potential convergence experiment.

use crate::ensemble::{shift_and_scale, SparseSample, Time, XiSpec};
use crate::linalg::{eigenvalues, singular_values, CMat};
use crate::potential::{potential_report, PotentialReport};
use crate::rng::Stream;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

fn sqrt_primitive(x: f64) -> f64 {
    // Antiderivative of sqrt(1 - x^2) on [-1, 1].
    let x = x.clamp(-1.0, 1.0);
    (x * (1.0 - x * x).sqrt() + x.asin()) / 2.0
}

/// Mass the circular law puts on the rectangle (-inf, s] x (-inf, t],
/// via exact circular-segment geometry.
pub fn disk_rect_mass(s: f64, t: f64) -> f64 {
    if s <= -1.0 || t <= -1.0 {
        return 0.0;
    }
    let s = s.min(1.0);
    let area = if t >= 0.0 {
        let xt = (1.0 - t.min(1.0) * t.min(1.0)).sqrt();
        let mut a = 0.0;
        // |x| >= xt: the full chord 2 sqrt(1 - x^2) fits under y <= t.
        let b1 = s.min(-xt);
        if b1 > -1.0 {
            a += 2.0 * (sqrt_primitive(b1) - sqrt_primitive(-1.0));
        }
        // |x| < xt: the chord is cut at height t.
        let b2 = s.min(xt);
        if b2 > -xt {
            a += t.min(1.0) * (b2 + xt) + sqrt_primitive(b2) - sqrt_primitive(-xt);
        }
        if s > xt {
            a += 2.0 * (sqrt_primitive(s) - sqrt_primitive(xt));
        }
        a
    } else {
        let xt = (1.0 - t * t).sqrt();
        let b = s.min(xt);
        if b > -xt {
            t * (b + xt) + sqrt_primitive(b) - sqrt_primitive(-xt)
        } else {
            0.0
        }
    };
    area / std::f64::consts::PI
}

/// Uniform grid of rectangle corners covering [-lim, lim]^2.
pub fn default_grid(k: usize, lim: f64) -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let s = -lim + 2.0 * lim * (i as f64 + 0.5) / k as f64;
            let t = -lim + 2.0 * lim * (j as f64 + 0.5) / k as f64;
            g.push((s, t));
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct EsdSummary {
    pub eigenvalues: Vec<Complex64>,
    /// (s, t, empirical CDF, circular-law mass) per grid corner.
    pub grid: Vec<(f64, f64, f64, f64)>,
    pub disk_mass: f64,
    pub discrepancy: f64,
}

/// Eigenvalue cloud of the rescaled sample against the circular law.
pub fn esd_summary(sample: &SparseSample, grid: &[(f64, f64)]) -> Result<EsdSummary> {
    if sample.n_rows != sample.n_cols {
        return Err(Error::contract("esd_summary: sample must be square"));
    }
    let n = sample.n_rows;
    let d = sample.p * n as f64;
    if d <= 0.0 {
        return Err(Error::contract("esd_summary: need pn > 0"));
    }
    let mut a = sample.to_dense();
    a = a.scale(Complex64::new(1.0 / d.sqrt(), 0.0));
    let eigs = eigenvalues(&a)?;
    let nf = n as f64;
    let disk_mass = eigs.iter().filter(|l| l.norm() <= 1.0).count() as f64 / nf;
    let mut out_grid = Vec::with_capacity(grid.len());
    let mut discrepancy = 0.0f64;
    for &(s, t) in grid {
        let cdf = eigs.iter().filter(|l| l.re <= s && l.im <= t).count() as f64 / nf;
        let law = disk_rect_mass(s, t);
        discrepancy = discrepancy.max((cdf - law).abs());
        out_grid.push((s, t, cdf, law));
    }
    Ok(EsdSummary { eigenvalues: eigs, grid: out_grid, disk_mass, discrepancy })
}

#[derive(Debug, Clone)]
pub struct GinibreReference {
    pub z: Complex64,
    pub n: usize,
    pub seeds: usize,
    /// Pooled singular values, sorted ascending.
    pub values: Vec<f64>,
    /// Support edge beyond |z|: max sigma - |z|.
    pub c_emp: f64,
    /// Largest mass([0, t)) / t over the quantile grid.
    pub small_ball_constant: f64,
    pub neg_log_raw: f64,
    /// Renormalized mean of -log sigma above the 1% quantile.
    pub neg_log_truncated: f64,
}

impl GinibreReference {
    /// Empirical quantile: smallest pooled value with mass >= q at or below.
    pub fn quantile(&self, q: f64) -> f64 {
        let len = self.values.len();
        let idx = ((q * len as f64).ceil() as usize).clamp(1, len) - 1;
        self.values[idx]
    }

    /// tau_z: the eps'-quantile of the reference measure.
    pub fn tau(&self, eps_prime: f64) -> f64 {
        self.quantile(eps_prime)
    }
}

fn complex_gaussian(rng: &mut Stream) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Reference measure: singular values of n^(-1/2) G - zI pooled over seeds,
/// G a matrix of unit-variance complex Gaussians.
pub fn ginibre_reference(n: usize, z: Complex64, seeds: &[u64]) -> Result<GinibreReference> {
    if n < 100 {
        return Err(Error::contract("ginibre_reference: need n >= 100"));
    }
    if seeds.is_empty() {
        return Err(Error::contract("ginibre_reference: need at least one seed"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut pooled = Vec::with_capacity(n * seeds.len());
    for &seed in seeds {
        let mut rng = Stream::new(seed, "ginibre", &[n as u64]);
        let mut g = CMat::from_fn(n, n, |_, _| complex_gaussian(&mut rng) * scale);
        for i in 0..n {
            g[(i, i)] -= z;
        }
        pooled.extend(singular_values(&g)?);
    }
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let len = pooled.len();
    let c_emp = pooled[len - 1] - z.norm();

    // Small-ball constant over interior quantile scales.
    let mut small_ball = 0.0f64;
    for pct in [0.01, 0.02, 0.05, 0.1, 0.2, 0.5] {
        let idx = ((pct * len as f64).ceil() as usize).clamp(1, len) - 1;
        let t = pooled[idx];
        if t > 0.0 {
            let mass = pooled.partition_point(|&v| v < t) as f64 / len as f64;
            small_ball = small_ball.max(mass / t);
        }
    }

    let neg_log_raw = -pooled.iter().map(|v| v.max(1e-300).ln()).sum::<f64>() / len as f64;
    let cut = ((0.01 * len as f64).ceil() as usize).min(len - 1);
    let rest = &pooled[cut..];
    let neg_log_truncated =
        -rest.iter().map(|v| v.max(1e-300).ln()).sum::<f64>() / rest.len() as f64;

    Ok(GinibreReference {
        z,
        n,
        seeds: seeds.len(),
        values: pooled,
        c_emp,
        small_ball_constant: small_ball,
        neg_log_raw,
        neg_log_truncated,
    })
}

/// Squared Hilbert-Schmidt mass of the full shifted matrix against the
/// 4 (|z|^2 + 1) n envelope.
pub fn hs_bound_check(sample: &SparseSample, z: Complex64) -> Result<(f64, f64, bool)> {
    let n = sample.n_rows.min(sample.n_cols);
    let d = sample.p * sample.n_rows as f64;
    let shifted = shift_and_scale(sample, Time::integer(n), z, d)?;
    let hs_sq = shifted.hs_norm_sq();
    let bound = 4.0 * (z.norm_sqr() + 1.0) * n as f64;
    Ok((hs_sq, bound, hs_sq <= bound))
}

/// One seed's worth of law checking: eigenvalue discrepancy plus the
/// truncated potentials and the Hilbert-Schmidt envelope.
#[derive(Debug, Clone)]
pub struct LawPoint {
    pub seed: u64,
    pub n: usize,
    pub d: f64,
    pub eps: f64,
    pub z: Complex64,
    pub disk_mass: f64,
    pub discrepancy: f64,
    pub t1_dev: f64,
    pub t2_dev: f64,
    pub hs_bound_ok: bool,
    pub potential: PotentialReport,
}

pub fn law_point(
    n: usize,
    d: f64,
    eps: f64,
    z: Complex64,
    xi: &XiSpec,
    seed: u64,
    grid: &[(f64, f64)],
) -> Result<LawPoint> {
    let report = potential_report(n, d, eps, z, xi, seed)?;
    let sample = crate::ensemble::sample_matrix(n, n, d / n as f64, xi, seed)?;
    let esd = esd_summary(&sample, grid)?;
    let (_, _, hs_ok) = hs_bound_check(&sample, z)?;
    Ok(LawPoint {
        seed,
        n,
        d,
        eps,
        z,
        disk_mass: esd.disk_mass,
        discrepancy: esd.discrepancy,
        t1_dev: (report.t1 - report.u_circ).abs(),
        t2_dev: (report.t2 - report.u_circ).abs(),
        hs_bound_ok: hs_ok,
        potential: report,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub points: Vec<LawPoint>,
    pub mean_t1_dev: f64,
    pub mean_t2_dev: f64,
    pub frac_t1_within: f64,
}

/// Truncated-potential convergence over seeds: T1 and T2 against the
/// circular-law potential, with the fraction of seeds landing within `tol`.
pub fn truncated_convergence_experiment(
    n: usize,
    d: f64,
    eps: f64,
    z: Complex64,
    xi: &XiSpec,
    seeds: &[u64],
    tol: f64,
    grid: &[(f64, f64)],
) -> Result<ConvergenceReport> {
    if z.norm() == 0.0 {
        return Err(Error::contract("truncated convergence: z must be nonzero"));
    }
    let mut points = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        points.push(law_point(n, d, eps, z, xi, seed, grid)?);
    }
    let len = points.len().max(1) as f64;
    let mean_t1 = points.iter().map(|p| p.t1_dev).sum::<f64>() / len;
    let mean_t2 = points.iter().map(|p| p.t2_dev).sum::<f64>() / len;
    let within = points.iter().filter(|p| p.t1_dev <= tol).count() as f64 / len;
    Ok(ConvergenceReport {
        points,
        mean_t1_dev: mean_t1,
        mean_t2_dev: mean_t2,
        frac_t1_within: within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_matrix;
    use crate::potential::u_circ;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rect_mass_reference_values() {
        assert!((disk_rect_mass(0.0, 0.0) - 0.25).abs() < 1e-12);
        assert!((disk_rect_mass(1.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((disk_rect_mass(2.0, 3.0) - 1.0).abs() < 1e-12);
        assert_eq!(disk_rect_mass(-1.0, 0.5), 0.0);
        assert_eq!(disk_rect_mass(0.5, -1.0), 0.0);
        assert!((disk_rect_mass(0.0, 1.0) - 0.5).abs() < 1e-12);
        assert!((disk_rect_mass(1.0, 0.0) - 0.5).abs() < 1e-12);
        // Central symmetry of the disk: mass(s,t) + mass(-s,-t) on open
        // versus closed half-planes agree for interior points.
        for &(s, t) in &[(0.3, -0.2), (-0.5, 0.7), (0.9, 0.1)] {
            let direct = disk_rect_mass(s, t);
            let flipped = disk_rect_mass(-s, 1.0) + disk_rect_mass(1.0, -t) - disk_rect_mass(-s, -t);
            assert!((direct - (1.0 - flipped)).abs() < 1e-12, "at ({}, {})", s, t);
        }
    }

    #[test]
    fn rect_mass_monotone() {
        let mut prev_row = vec![0.0; 21];
        for i in 0..=20 {
            let s = -1.2 + 2.4 * i as f64 / 20.0;
            let mut prev = 0.0;
            for j in 0..=20 {
                let t = -1.2 + 2.4 * j as f64 / 20.0;
                let m = disk_rect_mass(s, t);
                assert!(m >= prev - 1e-12);
                assert!(m >= prev_row[j] - 1e-12);
                prev = m;
                prev_row[j] = m;
            }
        }
    }

    #[test]
    fn rect_mass_matches_monte_carlo() {
        // Uniform disk points by rejection, reused across 20 rectangles.
        let n_pts = 1_000_000;
        let mut rng = Stream::new(424, "disk-mc", &[]);
        let mut pts = Vec::with_capacity(n_pts);
        while pts.len() < n_pts {
            let x = 2.0 * rng.uniform() - 1.0;
            let y = 2.0 * rng.uniform() - 1.0;
            if x * x + y * y <= 1.0 {
                pts.push((x, y));
            }
        }
        for rect in 0..20 {
            let mut rr = Stream::new(425, "disk-rect", &[rect]);
            let s = 2.6 * rr.uniform() - 1.3;
            let t = 2.6 * rr.uniform() - 1.3;
            let exact = disk_rect_mass(s, t);
            let hits = pts.iter().filter(|&&(x, y)| x <= s && y <= t).count();
            let est = hits as f64 / n_pts as f64;
            let sigma = (exact * (1.0 - exact) / n_pts as f64).sqrt();
            assert!(
                (est - exact).abs() <= 3.0 * sigma + 1e-9,
                "rect ({}, {}): est {} exact {}",
                s,
                t,
                est,
                exact
            );
        }
    }

    #[test]
    fn esd_zero_matrix() {
        let sample = SparseSample {
            n_rows: 12,
            n_cols: 12,
            p: 0.5,
            xi: XiSpec::Rademacher,
            seed: 0,
            entries: vec![],
        };
        let grid = default_grid(9, 1.5);
        let esd = esd_summary(&sample, &grid).unwrap();
        assert_eq!(esd.disk_mass, 1.0);
        // All eigenvalues at 0: the empirical CDF is the quadrant indicator.
        let expect = grid
            .iter()
            .map(|&(s, t)| {
                let cdf = if s >= 0.0 && t >= 0.0 { 1.0 } else { 0.0 };
                (cdf - disk_rect_mass(s, t)) as f64
            })
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!((esd.discrepancy - expect).abs() < 1e-12);
    }

    #[test]
    fn esd_desk_scale_random() {
        let n = 80;
        let s = sample_matrix(n, n, 12.0 / n as f64, &XiSpec::Rademacher, 6).unwrap();
        let esd = esd_summary(&s, &default_grid(12, 1.5)).unwrap();
        assert!(esd.disk_mass >= 0.7, "disk mass {}", esd.disk_mass);
        assert!(esd.discrepancy <= 0.35, "discrepancy {}", esd.discrepancy);
        // CDF monotone along the grid rows of equal s.
        for w in esd.grid.chunks(12) {
            for pair in w.windows(2) {
                assert!(pair[1].2 >= pair[0].2 - 1e-12);
            }
        }
    }

    #[test]
    fn ginibre_reference_basics() {
        let z = c(1.5, 0.0);
        let g = ginibre_reference(120, z, &[1, 2, 3]).unwrap();
        assert_eq!(g.values.len(), 360);
        assert!(g.values.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(g.tau(0.0), g.values[0]);
        assert!(g.c_emp > 0.0 && g.c_emp < 3.0, "support edge {}", g.c_emp);
        // Outside the disk the spectrum stays away from 0.
        assert!(g.values[0] > 0.2);
        let expect = u_circ(z);
        assert!((g.neg_log_truncated - expect).abs() < 0.15, "{} vs {}", g.neg_log_truncated, expect);
        assert!(g.small_ball_constant.is_finite());
        assert!(ginibre_reference(50, z, &[1]).is_err());
    }

    #[test]
    fn hs_envelope_holds_on_random_samples() {
        for seed in 0..10 {
            let s = sample_matrix(100, 100, 0.12, &XiSpec::Rademacher, seed).unwrap();
            let (hs, bound, ok) = hs_bound_check(&s, c(1.0, 0.0)).unwrap();
            assert!(ok, "hs {} > bound {}", hs, bound);
        }
    }

    #[test]
    fn tiny_eps_makes_t1_the_full_potential() {
        let n = 40;
        let rep = potential_report(n, 8.0, 0.0, c(1.0, 0.0), &XiSpec::Rademacher, 3).unwrap();
        assert_eq!(rep.m, n);
        assert_eq!(rep.r_top, n);
        assert!((rep.t1 - rep.u_n).abs() < 1e-12);
    }

    #[test]
    fn convergence_experiment_shapes() {
        let grid = default_grid(8, 1.5);
        let rep = truncated_convergence_experiment(
            60,
            10.0,
            0.2,
            c(1.0, 0.0),
            &XiSpec::Rademacher,
            &[1, 2, 3],
            0.5,
            &grid,
        )
        .unwrap();
        assert_eq!(rep.points.len(), 3);
        assert!(rep.mean_t1_dev.is_finite());
        assert!(rep.points.iter().all(|p| p.hs_bound_ok));
        assert!(rep.frac_t1_within >= 0.0 && rep.frac_t1_within <= 1.0);
    }
}
