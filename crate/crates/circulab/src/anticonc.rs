//! Anti-concentration toolkit: Levy concentration functions (Monte Carlo and
//! exact for discrete laws), the Kolmogorov-Rogozin sum inequality, flat
//! orthonormal bases, and projection anti-concentration experiments on
//! shifted sparse blocks.

use crate::ensemble::{sample_row, shift_raw, SparseSample, Time, XiSpec};
use crate::linalg::{svd, CMat};
use crate::potential::DeltaSchedule;
use crate::quasirandom::descending_moduli;
use crate::rng::Stream;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;

/// Monte Carlo estimate of sup_c P(|X - c| <= r).
#[derive(Debug, Clone, Copy)]
pub struct LevyEstimate {
    pub radius: f64,
    pub estimate: f64,
    pub samples: usize,
    pub center_grid_pitch: f64,
    /// estimate + 3 sigma binomial margin, clamped to 1.
    pub conservative_upper: f64,
    /// Zero radius: only exact sample collisions count.
    pub degenerate_radius: bool,
}

/// Levy concentration of a sampled complex law.  Centers run over a grid of
/// pitch r/4 spanning the empirical support; counts per center are exact, so
/// the value lower-bounds the true sup at radius r (and upper-bounds it at
/// radius 5r/4).
pub fn levy_estimate(
    sampler: impl FnMut(&mut Stream) -> Complex64,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LevyEstimate> {
    let mut sampler = sampler;
    if n_samples < 10_000 {
        return Err(Error::contract("levy_estimate: need at least 1e4 samples"));
    }
    if !(radius >= 0.0) {
        return Err(Error::contract("levy_estimate: radius must be nonnegative"));
    }
    let mut pts = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let mut rng = Stream::new(seed, "levy-sample", &[i as u64]);
        pts.push(sampler(&mut rng));
    }
    let n = n_samples as f64;
    let (estimate, pitch) = if radius == 0.0 {
        let mut mult: HashMap<(u64, u64), u32> = HashMap::new();
        let mut best = 0u32;
        for p in &pts {
            let key = (p.re.to_bits(), p.im.to_bits());
            let c = mult.entry(key).or_insert(0);
            *c += 1;
            best = best.max(*c);
        }
        (best as f64 / n, 0.0)
    } else {
        let pitch = radius / 4.0;
        let o_re = pts.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
        let o_im = pts.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
        let mut counts: HashMap<(i64, i64), u32> = HashMap::new();
        let mut best = 0u32;
        // Scatter each sample onto every grid center within distance r of it;
        // per-center totals are then exact ball counts.
        for p in &pts {
            let gx0 = ((p.re - radius - o_re) / pitch).floor() as i64;
            let gx1 = ((p.re + radius - o_re) / pitch).ceil() as i64;
            let gy0 = ((p.im - radius - o_im) / pitch).floor() as i64;
            let gy1 = ((p.im + radius - o_im) / pitch).ceil() as i64;
            for gx in gx0..=gx1 {
                for gy in gy0..=gy1 {
                    let c = Complex64::new(o_re + gx as f64 * pitch, o_im + gy as f64 * pitch);
                    if (p - c).norm() <= radius {
                        let e = counts.entry((gx, gy)).or_insert(0);
                        *e += 1;
                        best = best.max(*e);
                    }
                }
            }
        }
        (best as f64 / n, pitch)
    };
    let sigma = (estimate * (1.0 - estimate) / n).sqrt();
    Ok(LevyEstimate {
        radius,
        estimate,
        samples: n_samples,
        center_grid_pitch: pitch,
        conservative_upper: (estimate + 3.0 * sigma).min(1.0),
        degenerate_radius: radius == 0.0,
    })
}

/// Exact Levy concentration of a finite real law: the best closed window of
/// width 2r, found by sliding over the sorted atoms.
pub fn levy_exact_real(atoms: &[(f64, f64)], radius: f64) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::contract("levy_exact_real: empty atom list"));
    }
    let mut a: Vec<(f64, f64)> = atoms.to_vec();
    a.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut prefix = vec![0.0f64; a.len() + 1];
    for (i, (_, p)) in a.iter().enumerate() {
        prefix[i + 1] = prefix[i] + p;
    }
    // The optimal window can start at an atom; mass of [v_i, v_i + 2r].
    let mut best = 0.0f64;
    for i in 0..a.len() {
        let hi = a.partition_point(|x| x.0 <= a[i].0 + 2.0 * radius);
        best = best.max(prefix[hi] - prefix[i]);
    }
    Ok(best)
}

fn circumcenter(a: Complex64, b: Complex64, c: Complex64) -> Option<Complex64> {
    // Solve 2 (b - a) . x = |b|^2 - |a|^2 and the (c - a) analogue.
    let (ax, ay) = (a.re, a.im);
    let (bx, by) = (b.re, b.im);
    let (cx, cy) = (c.re, c.im);
    let d = 2.0 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
    if d.abs() < 1e-14 * (a.norm() + b.norm() + c.norm() + 1.0).powi(2) {
        return None;
    }
    let nb = bx * bx + by * by - ax * ax - ay * ay;
    let nc = cx * cx + cy * cy - ax * ax - ay * ay;
    let ux = (nb * (cy - ay) - nc * (by - ay)) / d;
    let uy = (nc * (bx - ax) - nb * (cx - ax)) / d;
    Some(Complex64::new(ux, uy))
}

/// Exact Levy concentration of a finite complex law.  The optimal closed
/// ball can be pinned by at most three atoms, so candidate centers are the
/// atoms, midpoints of pairs, and circumcenters of triples.
pub fn levy_exact_complex(atoms: &[(Complex64, f64)], radius: f64) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::contract("levy_exact_complex: empty atom list"));
    }
    let scale = atoms.iter().map(|(a, _)| a.norm()).fold(radius, f64::max) + 1.0;
    let tol = 1e-12 * scale;
    let mut centers: Vec<Complex64> = atoms.iter().map(|(a, _)| *a).collect();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let (a, b) = (atoms[i].0, atoms[j].0);
            if (a - b).norm() <= 2.0 * radius + tol {
                centers.push((a + b) / 2.0);
            }
            for k in j + 1..atoms.len() {
                if let Some(c) = circumcenter(a, b, atoms[k].0) {
                    if (a - c).norm() <= radius + tol {
                        centers.push(c);
                    }
                }
            }
        }
    }
    let mut best = 0.0f64;
    for c in centers {
        let mass: f64 =
            atoms.iter().filter(|(a, _)| (a - c).norm() <= radius + tol).map(|(_, p)| p).sum();
        best = best.max(mass);
    }
    Ok(best)
}

/// A real-valued law for the sum inequality.
#[derive(Debug, Clone)]
pub enum RealLaw {
    Rademacher,
    Constant(f64),
    Uniform(f64, f64),
    Gaussian,
    Atoms(Vec<(f64, f64)>),
}

impl RealLaw {
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            RealLaw::Rademacher => {
                if rng.uniform() < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            RealLaw::Constant(c) => *c,
            RealLaw::Uniform(a, b) => a + (b - a) * rng.uniform(),
            RealLaw::Gaussian => rng.sample(StandardNormal),
            RealLaw::Atoms(atoms) => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                atoms.last().map(|(v, _)| *v).unwrap_or(0.0)
            }
        }
    }

    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            RealLaw::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            RealLaw::Constant(c) => Some(vec![(*c, 1.0)]),
            RealLaw::Atoms(a) => Some(a.clone()),
            _ => None,
        }
    }
}

fn convolve_atoms(a: &[(f64, f64)], b: &[(f64, f64)], cap: usize) -> Option<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(a.len() * b.len());
    for (va, pa) in a {
        for (vb, pb) in b {
            out.push((va + vb, pa * pb));
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    // Merge atoms that coincide up to rounding.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for (v, p) in out {
        match merged.last_mut() {
            Some((lv, lp)) if (v - *lv).abs() <= 1e-12 * (1.0 + v.abs()) => *lp += p,
            _ => merged.push((v, p)),
        }
    }
    if merged.len() > cap {
        None
    } else {
        Some(merged)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LkrReport {
    pub lhs: f64,
    /// True when the sum's law was convolved exactly instead of sampled.
    pub lhs_exact: bool,
    pub denominator: f64,
    /// Smallest C for which lhs <= C r / denominator.
    pub c_achieved: f64,
    pub applicable: bool,
}

/// Kolmogorov-Rogozin check for a sum of independent real variables:
/// L(sum, r) <= C r / sqrt(sum_i (1 - L(xi_i, r_i)) r_i^2).  Per-term
/// concentrations are exact for discrete laws; the left side is convolved
/// exactly when the atom count stays manageable and sampled otherwise.
pub fn lkr_check(
    vars: &[RealLaw],
    radii: &[f64],
    r: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<LkrReport> {
    if vars.is_empty() || vars.len() != radii.len() {
        return Err(Error::contract("lkr_check: need one radius per variable"));
    }
    if radii.iter().any(|&ri| !(ri > 0.0) || ri > r) {
        return Err(Error::contract("lkr_check: radii must be positive and at most r"));
    }
    let mut denom_sq = 0.0;
    for (v, &ri) in vars.iter().zip(radii) {
        let term = match v.atoms() {
            Some(atoms) => levy_exact_real(&atoms, ri)?,
            None => {
                let est = levy_estimate(
                    |rng| Complex64::new(v.sample(rng), 0.0),
                    ri,
                    mc_samples.max(10_000),
                    seed ^ 0x5eed,
                )?;
                est.conservative_upper
            }
        };
        denom_sq += (1.0 - term) * ri * ri;
    }
    let denominator = denom_sq.sqrt();
    if denominator == 0.0 {
        return Ok(LkrReport {
            lhs: 1.0,
            lhs_exact: true,
            denominator,
            c_achieved: f64::INFINITY,
            applicable: false,
        });
    }
    let all_atoms: Option<Vec<Vec<(f64, f64)>>> = vars.iter().map(|v| v.atoms()).collect();
    let (lhs, lhs_exact) = match all_atoms {
        Some(lists) => {
            let mut acc = vec![(0.0, 1.0)];
            let mut ok = true;
            for l in &lists {
                match convolve_atoms(&acc, l, 200_000) {
                    Some(next) => acc = next,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                (levy_exact_real(&acc, r)?, true)
            } else {
                (mc_sum_levy(vars, r, mc_samples, seed)?, false)
            }
        }
        None => (mc_sum_levy(vars, r, mc_samples, seed)?, false),
    };
    Ok(LkrReport { lhs, lhs_exact, denominator, c_achieved: lhs * denominator / r, applicable: true })
}

fn mc_sum_levy(vars: &[RealLaw], r: f64, mc_samples: usize, seed: u64) -> Result<f64> {
    let est = levy_estimate(
        |rng| {
            let s: f64 = vars.iter().map(|v| v.sample(rng)).sum();
            Complex64::new(s, 0.0)
        },
        r,
        mc_samples.max(10_000),
        seed,
    )?;
    Ok(est.estimate)
}

/// Exact rotation dichotomy for a discrete complex entry law: at least one
/// of the real or imaginary parts of z xi spreads out at scale
/// beta |z| / sqrt(2).
pub fn rotation_dichotomy(
    atoms: &[(Complex64, f64)],
    z: Complex64,
    beta: f64,
) -> Result<(f64, f64, bool)> {
    let radius = beta * z.norm() / std::f64::consts::SQRT_2;
    let re_atoms: Vec<(f64, f64)> = atoms.iter().map(|(a, p)| ((z * a).re, *p)).collect();
    let im_atoms: Vec<(f64, f64)> = atoms.iter().map(|(a, p)| ((z * a).im, *p)).collect();
    let lre = levy_exact_real(&re_atoms, radius)?;
    let lim = levy_exact_real(&im_atoms, radius)?;
    let ok = lre.min(lim) <= 1.0 - beta / 2.0;
    Ok((lre, lim, ok))
}

/// A flat orthonormal basis of a subspace: every vector keeps at least
/// ceil(c_star k) coordinates of modulus c_star sqrt(k) / n.
#[derive(Debug, Clone)]
pub struct FlatBasis {
    pub vectors: CMat,
    pub dimension: usize,
    pub ambient: usize,
    pub achieved_flatness: f64,
    pub required_flatness: f64,
    pub attempts: usize,
    pub used_fourier_fallback: bool,
    pub ok: bool,
}

fn orthonormality_defect(v: &CMat) -> f64 {
    let g = v.adjoint().mul(v);
    let mut worst = 0.0f64;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
fn orthonormalize(m: &mut CMat) -> Result<()> {
    let k = m.cols();
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let mut dot = Complex64::new(0.0, 0.0);
                for r in 0..m.rows() {
                    dot += m[(r, i)].conj() * m[(r, j)];
                }
                for r in 0..m.rows() {
                    let correction = dot * m[(r, i)];
                    m[(r, j)] -= correction;
                }
            }
        }
        let norm: f64 = (0..m.rows()).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::contract("orthonormalize: rank-deficient input"));
        }
        for r in 0..m.rows() {
            m[(r, j)] /= norm;
        }
    }
    Ok(())
}

fn random_gaussian_mat(rows: usize, cols: usize, rng: &mut Stream) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-like random unitary: orthonormalized complex Gaussian square matrix.
fn random_unitary(k: usize, rng: &mut Stream) -> Result<CMat> {
    let mut m = random_gaussian_mat(k, k, rng);
    orthonormalize(&mut m)?;
    Ok(m)
}

/// A random k-dimensional subspace of C^n as an orthonormal column frame.
pub fn random_subspace(n: usize, k: usize, seed: u64) -> Result<CMat> {
    if k == 0 || k > n {
        return Err(Error::contract("random_subspace: need 1 <= k <= n"));
    }
    let mut rng = Stream::new(seed, "subspace", &[n as u64, k as u64]);
    let mut m = random_gaussian_mat(n, k, &mut rng);
    orthonormalize(&mut m)?;
    Ok(m)
}

fn basis_flatness(v: &CMat, c_star: f64) -> f64 {
    let k = v.cols();
    let idx = (c_star * k as f64).ceil().max(1.0) as usize;
    let mut worst = f64::INFINITY;
    for j in 0..k {
        let m = descending_moduli(v.col(j));
        worst = worst.min(m[idx - 1]);
    }
    worst
}

fn fourier_unitary(k: usize) -> CMat {
    let s = 1.0 / (k as f64).sqrt();
    CMat::from_fn(k, k, |a, b| {
        let th = 2.0 * std::f64::consts::PI * (a as f64) * (b as f64) / k as f64;
        Complex64::new(th.cos() * s, th.sin() * s)
    })
}

/// Rotate an orthonormal frame inside its own span until every basis vector
/// passes the flatness test; a discrete-Fourier rotation is the deterministic
/// fallback.  Exhausting retries is reported, not an error: it signals the
/// c_star calibration, and the best basis found is returned.
pub fn flat_basis(input: &CMat, c_star: f64, max_retries: usize, seed: u64) -> Result<FlatBasis> {
    let (n, k) = (input.rows(), input.cols());
    if k == 0 || k > n {
        return Err(Error::contract("flat_basis: need 1 <= k <= n"));
    }
    if orthonormality_defect(input) > 1e-10 {
        return Err(Error::contract("flat_basis: input frame is not orthonormal"));
    }
    let required = c_star * (k as f64).sqrt() / n as f64;
    let mut best = input.clone();
    let mut best_flat = basis_flatness(input, c_star);
    let mut attempts = 0usize;
    let mut used_fourier = false;
    if best_flat < required {
        let four = input.mul(&fourier_unitary(k));
        let f = basis_flatness(&four, c_star);
        if f > best_flat {
            best = four;
            best_flat = f;
            used_fourier = true;
        }
        for retry in 0..max_retries {
            if best_flat >= required {
                break;
            }
            attempts += 1;
            let mut rng = Stream::new(seed, "flat-rotation", &[retry as u64]);
            let u = random_unitary(k, &mut rng)?;
            let cand = input.mul(&u);
            let f = basis_flatness(&cand, c_star);
            if f > best_flat {
                best = cand;
                best_flat = f;
                used_fourier = false;
            }
        }
    }
    Ok(FlatBasis {
        vectors: best,
        dimension: k,
        ambient: n,
        achieved_flatness: best_flat,
        required_flatness: required,
        attempts,
        used_fourier_fallback: used_fourier,
        ok: best_flat >= required,
    })
}

/// Outcome of the projection anti-concentration experiment.
#[derive(Debug, Clone, Copy)]
pub struct ProjAnticonc {
    pub h: usize,
    pub sigma_r: f64,
    pub threshold: f64,
    /// sigma_r(M) <= sqrt(d) eta_r, the small-singular-value hypothesis.
    pub hypothesis_met: bool,
    pub trials: usize,
    pub freq: f64,
    /// eps + (log log d)^(-1/2), the shape the bound predicts.
    pub shape_value: f64,
    /// freq / shape_value: the constant the bound would need.
    pub implied_constant: f64,
}

/// Frequency with which a fresh sparse row, shifted by the offset w, lands
/// within sqrt(d) eta_r of the span of the h = cols - r + 1 lowest right
/// singular directions of the raw shifted block at time t.
pub fn proj_anticonc_experiment(
    sample: &SparseSample,
    t: Time,
    r: usize,
    z: Complex64,
    w: Option<&[Complex64]>,
    eps: f64,
    trials: usize,
    schedule: &DeltaSchedule,
    exp_seed: u64,
) -> Result<ProjAnticonc> {
    let n = sample.n_rows;
    let d = sample.p * n as f64;
    if !(z.norm() >= 1.0 && z.norm() <= d) {
        return Err(Error::contract(format!("proj experiment needs 1 <= |z| <= d, got {}", z.norm())));
    }
    if d <= std::f64::consts::E {
        return Err(Error::contract("proj experiment: need d > e"));
    }
    let m = shift_raw(sample, t, z)?;
    let cols = m.cols();
    if r == 0 || r > cols {
        return Err(Error::contract("proj experiment: r out of range"));
    }
    if let Some(w) = w {
        if w.len() != cols {
            return Err(Error::contract("proj experiment: offset length mismatch"));
        }
    }
    let h = cols - r + 1;
    let dec = svd(&m, false, true)?;
    let v = dec.v.expect("requested right vectors");
    let mut vals = dec.values.clone();
    vals.resize(cols, 0.0);
    let sigma_r = vals[r - 1];
    let eta = schedule.eta(r);
    let threshold = d.sqrt() * eta;
    let lo = cols - h;

    let mut hits = 0usize;
    for trial in 0..trials {
        let row = sample_row(cols, sample.p, &sample.xi, exp_seed, trial as u64);
        let mut x: Vec<Complex64> = row.iter().map(|e| e.conj()).collect();
        if let Some(w) = w {
            for (xi, wi) in x.iter_mut().zip(w) {
                *xi += wi.conj();
            }
        }
        let mut norm_sq = 0.0f64;
        for col in lo..cols {
            let vc = v.col(col);
            let mut dot = Complex64::new(0.0, 0.0);
            for (a, b) in vc.iter().zip(&x) {
                dot += a.conj() * b;
            }
            norm_sq += dot.norm_sqr();
        }
        if norm_sq.sqrt() < threshold {
            hits += 1;
        }
    }
    let freq = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    let shape_value = eps + 1.0 / d.ln().ln().sqrt();
    Ok(ProjAnticonc {
        h,
        sigma_r,
        threshold,
        hypothesis_met: sigma_r <= threshold,
        trials,
        freq,
        shape_value,
        implied_constant: freq / shape_value,
    })
}

/// Inner-product concentration for a sparse row against a vector with k
/// coordinates of modulus rho: reports the achieved constant in
/// L(<X, v>, r) <= C r / (rho sqrt(k p)).
pub fn inner_product_levy(
    n: usize,
    k: usize,
    p: f64,
    rho: f64,
    r: f64,
    xi: &XiSpec,
    mc_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if k == 0 || k > n {
        return Err(Error::contract("inner_product_levy: need 1 <= k <= n"));
    }
    let v: Vec<Complex64> = (0..k)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * (j as f64) / k as f64;
            Complex64::new(th.cos(), th.sin()) * rho
        })
        .collect();
    let xi = xi.clone();
    let est = levy_estimate(
        |rng| {
            let mut acc = Complex64::new(0.0, 0.0);
            for vj in &v {
                if rng.uniform() < p {
                    acc += xi.sample(rng) * vj.conj();
                }
            }
            acc
        },
        r,
        mc_samples,
        seed,
    )?;
    let c_achieved = est.estimate * rho * (k as f64 * p).sqrt() / r;
    Ok((est.estimate, c_achieved))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn levy_point_mass_is_one() {
        let est = levy_estimate(|_| c(2.0, 1.0), 0.3, 10_000, 7).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.conservative_upper, 1.0);
        let est = levy_estimate(|_| c(2.0, 1.0), 0.0, 10_000, 7).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert!(est.degenerate_radius);
    }

    #[test]
    fn levy_bernoulli_half() {
        let est = levy_estimate(
            |rng| if rng.uniform() < 0.5 { c(1.0, 0.0) } else { c(0.0, 0.0) },
            0.4,
            20_000,
            11,
        )
        .unwrap();
        assert!((est.estimate - 0.5).abs() < 0.02, "estimate {}", est.estimate);
        assert!(est.conservative_upper >= est.estimate);
    }

    #[test]
    fn levy_zero_radius_continuous_flagged() {
        let est = levy_estimate(|rng| c(rng.uniform(), 0.0), 0.0, 10_000, 3).unwrap();
        assert!(est.estimate <= 2.0 / 10_000.0);
        assert!(est.degenerate_radius);
    }

    #[test]
    fn exact_real_window() {
        let rad = [(-1.0, 0.5), (1.0, 0.5)];
        assert!((levy_exact_real(&rad, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((levy_exact_real(&rad, 0.99).unwrap() - 0.5).abs() < 1e-15);
        assert!((levy_exact_real(&rad, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let skew = [(0.0, 0.2), (1.0, 0.3), (3.0, 0.5)];
        assert!((levy_exact_real(&skew, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((levy_exact_real(&skew, 0.9).unwrap() - 0.5).abs() < 1e-15);
        assert!((levy_exact_real(&skew, 1.0).unwrap() - 0.8).abs() < 1e-15);
        assert!((levy_exact_real(&skew, 1.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_complex_ball() {
        let atoms = [
            (c(1.0, 0.0), 0.25),
            (c(0.0, 1.0), 0.25),
            (c(-1.0, 0.0), 0.25),
            (c(0.0, -1.0), 0.25),
        ];
        assert!((levy_exact_complex(&atoms, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((levy_exact_complex(&atoms, 0.9).unwrap() - 0.5).abs() < 1e-12);
        assert!((levy_exact_complex(&atoms, 0.5).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn lkr_single_rademacher_exact() {
        let rep = lkr_check(&[RealLaw::Rademacher], &[0.5], 0.5, 10_000, 1).unwrap();
        assert!(rep.applicable && rep.lhs_exact);
        assert!((rep.lhs - 0.5).abs() < 1e-15);
        let expect_c = 0.5 * (0.5f64 * 0.25).sqrt() / 0.5;
        assert!((rep.c_achieved - expect_c).abs() < 1e-12);
        assert!((rep.c_achieved - 0.35355339).abs() < 1e-6);
    }

    #[test]
    fn lkr_hundred_rademachers_match_binomial() {
        let vars = vec![RealLaw::Rademacher; 100];
        let radii = vec![0.5; 100];
        let rep = lkr_check(&vars, &radii, 0.5, 10_000, 1).unwrap();
        assert!(rep.lhs_exact);
        // Central binomial probability by multiplicative recurrence.
        let mut central: f64 = 1.0;
        for i in 0..50u32 {
            central *= (100 - i) as f64 / (i + 1) as f64 / 4.0;
        }
        // |window| = 1 captures exactly one atom of the lattice 2Z.
        assert!((rep.lhs - central).abs() < 1e-12, "lhs {} central {}", rep.lhs, central);
        assert!((rep.denominator - 12.5f64.sqrt()).abs() < 1e-12);
        assert!(rep.c_achieved < 1.0);
    }

    #[test]
    fn lkr_degenerate_not_applicable() {
        let rep =
            lkr_check(&[RealLaw::Constant(3.0), RealLaw::Constant(-1.0)], &[0.5, 0.5], 0.5, 10_000, 1)
                .unwrap();
        assert!(!rep.applicable);
    }

    #[test]
    fn dichotomy_holds_over_random_rotations() {
        let rad = [(c(1.0, 0.0), 0.5), (c(-1.0, 0.0), 0.5)];
        let two = [(c(0.0, 1.0), 0.25), (c(0.0, -1.0 / 3.0), 0.75)];
        // Normalize the two-point law to unit second moment first.
        let m2: f64 = two.iter().map(|(a, p)| a.norm_sqr() * p).sum();
        let two: Vec<(Complex64, f64)> = two.iter().map(|(a, p)| (a / m2.sqrt(), *p)).collect();
        for i in 0..100 {
            let mut rng = Stream::new(9, "dichotomy-z", &[i]);
            let th = 2.0 * std::f64::consts::PI * rng.uniform();
            let z = c(th.cos(), th.sin()) * (0.5 + 2.0 * rng.uniform());
            let (_, _, ok) = rotation_dichotomy(&rad, z, 0.5).unwrap();
            assert!(ok, "rademacher dichotomy failed at z = {}", z);
            let (_, _, ok) = rotation_dichotomy(&two, z, 0.4).unwrap();
            assert!(ok, "two-point dichotomy failed at z = {}", z);
        }
    }

    #[test]
    fn flat_basis_trivial_cases() {
        // Full-space identity frame: the Fourier rotation is exactly flat.
        let eye = CMat::identity(8);
        let fb = flat_basis(&eye, 0.25, 10, 1).unwrap();
        assert!(fb.ok);
        assert!(orthonormality_defect(&fb.vectors) < 1e-10);
        // Single standard basis vector passes untouched.
        let mut e1 = CMat::zeros(16, 1);
        e1[(0, 0)] = c(1.0, 0.0);
        let fb = flat_basis(&e1, 0.25, 10, 1).unwrap();
        assert!(fb.ok);
        assert_eq!(fb.attempts, 0);
        assert!((fb.vectors[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn flat_basis_random_subspace_and_span() {
        let sub = random_subspace(32, 8, 4).unwrap();
        let fb = flat_basis(&sub, 0.25, 50, 4).unwrap();
        assert!(fb.ok, "flatness {} < {}", fb.achieved_flatness, fb.required_flatness);
        assert!(orthonormality_defect(&fb.vectors) < 1e-10);
        // Same span: projectors agree.
        let p_in = sub.mul(&sub.adjoint());
        let p_out = fb.vectors.mul(&fb.vectors.adjoint());
        let diff = crate::linalg::max_abs_diff(&p_in, &p_out);
        assert!(diff < 1e-9, "projector defect {}", diff);
    }

    #[test]
    fn proj_experiment_identity_matches_empty_row_mass() {
        use crate::ensemble::sample_matrix;
        let n = 40;
        let p = 0.1;
        let s = sample_matrix(n, n, p, &XiSpec::Rademacher, 31).unwrap();
        let schedule = DeltaSchedule::constant(n, 0.2).unwrap();
        // r = 1: the projection is the identity; only the zero row passes.
        let rep = proj_anticonc_experiment(
            &s,
            Time::integer(n),
            1,
            c(1.0, 0.0),
            None,
            0.1,
            2_000,
            &schedule,
            77,
        )
        .unwrap();
        assert_eq!(rep.h, n);
        assert!(!rep.hypothesis_met);
        let expect = (1.0f64 - p).powi(n as i32);
        assert!((rep.freq - expect).abs() < 0.012, "freq {} expect {}", rep.freq, expect);
        // A huge offset kills the frequency outright.
        let w = vec![c(1000.0, 0.0); n];
        let rep = proj_anticonc_experiment(
            &s,
            Time::integer(n),
            1,
            c(1.0, 0.0),
            Some(&w),
            0.1,
            500,
            &schedule,
            78,
        )
        .unwrap();
        assert_eq!(rep.freq, 0.0);
    }

    #[test]
    fn inner_product_constant_within_calibration() {
        let k = 20;
        let rho = 1.0 / (k as f64).sqrt();
        let beta = 0.5;
        let r = beta * rho / std::f64::consts::SQRT_2 * 1.5;
        let (_, c_ach) =
            inner_product_levy(64, k, 0.3, rho, r, &XiSpec::Rademacher, 20_000, 5).unwrap();
        let c_beta = 8.0 * beta.powf(-1.5);
        assert!(c_ach <= c_beta, "achieved {} vs calibrated {}", c_ach, c_beta);
    }
}
