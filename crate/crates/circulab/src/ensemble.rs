//! Sparse random matrix ensembles: entries are delta * xi with delta ~
//! Bernoulli(p) and xi a unit-second-moment complex law.  Sampling is
//! counter-based per entry, so a sample restricted to a prefix block equals
//! the sample drawn directly at the smaller shape.

use crate::linalg::CMat;
use crate::rng::Stream;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Entry distribution with E xi = anything, E |xi|^2 = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum XiSpec {
    /// (Z1 + i Z2) / sqrt(2) with independent standard normals.
    ComplexGaussian,
    /// +-1 with equal probability.
    Rademacher,
    /// exp(i theta), theta uniform on [0, 2 pi).
    UnitCircleUniform,
    /// Two atoms a (with probability prob_a) and b; must satisfy
    /// prob_a |a|^2 + (1 - prob_a) |b|^2 = 1.
    TwoPoint { a_re: f64, a_im: f64, b_re: f64, b_im: f64, prob_a: f64 },
    /// sqrt(2) * Bernoulli(1/2): an atom at 0 and one at sqrt(2).
    BernoulliScaled,
}

impl XiSpec {
    pub fn two_point(a: Complex64, b: Complex64, prob_a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prob_a) {
            return Err(Error::contract("two-point: prob_a outside [0, 1]"));
        }
        let second = prob_a * a.norm_sqr() + (1.0 - prob_a) * b.norm_sqr();
        if (second - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!(
                "two-point: E|xi|^2 = {} but must be 1",
                second
            )));
        }
        Ok(XiSpec::TwoPoint { a_re: a.re, a_im: a.im, b_re: b.re, b_im: b.im, prob_a })
    }

    pub fn sample(&self, rng: &mut Stream) -> Complex64 {
        match self {
            XiSpec::ComplexGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            XiSpec::Rademacher => {
                if rng.uniform() < 0.5 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            XiSpec::UnitCircleUniform => {
                let theta = rng.uniform() * std::f64::consts::TAU;
                Complex64::new(theta.cos(), theta.sin())
            }
            XiSpec::TwoPoint { a_re, a_im, b_re, b_im, prob_a } => {
                if rng.uniform() < *prob_a {
                    Complex64::new(*a_re, *a_im)
                } else {
                    Complex64::new(*b_re, *b_im)
                }
            }
            XiSpec::BernoulliScaled => {
                if rng.uniform() < 0.5 {
                    Complex64::new(std::f64::consts::SQRT_2, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Atom list for exactly-known discrete laws, None for continuous ones.
    pub fn atoms(&self) -> Option<Vec<(Complex64, f64)>> {
        match self {
            XiSpec::Rademacher => Some(vec![
                (Complex64::new(1.0, 0.0), 0.5),
                (Complex64::new(-1.0, 0.0), 0.5),
            ]),
            XiSpec::TwoPoint { a_re, a_im, b_re, b_im, prob_a } => Some(vec![
                (Complex64::new(*a_re, *a_im), *prob_a),
                (Complex64::new(*b_re, *b_im), 1.0 - *prob_a),
            ]),
            XiSpec::BernoulliScaled => Some(vec![
                (Complex64::new(std::f64::consts::SQRT_2, 0.0), 0.5),
                (Complex64::new(0.0, 0.0), 0.5),
            ]),
            _ => None,
        }
    }
}

/// Times on the half-integer grid, stored as 2t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(u64);

impl Time {
    pub fn integer(k: usize) -> Self {
        Time(2 * k as u64)
    }

    /// k + 1/2.
    pub fn half_past(k: usize) -> Self {
        Time(2 * k as u64 + 1)
    }

    pub fn twice(self) -> u64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn floor(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn ceil(self) -> usize {
        ((self.0 + 1) / 2) as usize
    }

    /// Matrix shape at this time: t x t at integers, (t - 1/2) x (t + 1/2)
    /// at half-integers.
    pub fn rows(self) -> usize {
        self.floor()
    }

    pub fn cols(self) -> usize {
        self.ceil()
    }

    pub fn next_half(self) -> Time {
        Time(self.0 + 1)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::fmt::Display for Time {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

/// One drawn sparse matrix: the nonzero entries of delta_ij xi_ij, with the
/// parameters that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSample {
    pub n_rows: usize,
    pub n_cols: usize,
    pub p: f64,
    pub xi: XiSpec,
    pub seed: u64,
    /// Sorted by (row, col); values never exactly zero.
    pub entries: Vec<(u32, u32, Complex64)>,
}

/// Draw an n_rows x n_cols sample.  p may be 0 (empty matrix, test edge) but
/// not above 1/2: the ensembles of interest are sparse, and the event
/// machinery assumes it.
pub fn sample_matrix(
    n_rows: usize,
    n_cols: usize,
    p: f64,
    xi: &XiSpec,
    seed: u64,
) -> Result<SparseSample> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::contract("sample_matrix: empty shape"));
    }
    if n_rows > u32::MAX as usize || n_cols > u32::MAX as usize {
        return Err(Error::contract("sample_matrix: shape too large"));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::contract(format!(
            "sample_matrix: p = {} outside [0, 1/2]",
            p
        )));
    }
    let mut entries = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_cols {
            let mut rng = Stream::new(seed, "entry", &[i as u64, j as u64]);
            if rng.uniform() < p {
                let v = xi.sample(&mut rng);
                if v.re != 0.0 || v.im != 0.0 {
                    entries.push((i as u32, j as u32, v));
                }
            }
        }
    }
    Ok(SparseSample { n_rows, n_cols, p, xi: xi.clone(), seed, entries })
}

impl SparseSample {
    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.n_rows, self.n_cols);
        for &(i, j, v) in &self.entries {
            m[(i as usize, j as usize)] = v;
        }
        m
    }

    /// Dense top-left block of shape `rows x cols`.
    pub fn dense_block(&self, rows: usize, cols: usize) -> CMat {
        assert!(rows <= self.n_rows && cols <= self.n_cols);
        let mut m = CMat::zeros(rows, cols);
        for &(i, j, v) in &self.entries {
            if (i as usize) < rows && (j as usize) < cols {
                m[(i as usize, j as usize)] = v;
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// A_(t, z) at scale d: the dense block for time t, divided by sqrt(d), with
/// z subtracted along the (i, i) diagonal.  This equals the time-t prefix of
/// d^(-1/2) A - z I; the identity keeps its ones on (i, i) even at
/// half-integer times where the block is rectangular.
pub fn shift_and_scale(sample: &SparseSample, t: Time, z: Complex64, d: f64) -> Result<CMat> {
    if d <= 0.0 {
        return Err(Error::contract("shift_and_scale: d must be positive"));
    }
    let (rows, cols) = (t.rows(), t.cols());
    if rows == 0 {
        return Err(Error::contract("shift_and_scale: time too small"));
    }
    if rows > sample.n_rows || cols > sample.n_cols {
        return Err(Error::contract(format!(
            "shift_and_scale: time {} exceeds sample shape {}x{}",
            t, sample.n_rows, sample.n_cols
        )));
    }
    let mut m = sample.dense_block(rows, cols);
    let inv = Complex64::new(1.0 / d.sqrt(), 0.0);
    for jcol in 0..cols {
        for z_entry in m.col_mut(jcol).iter_mut() {
            *z_entry *= inv;
        }
    }
    Ok(m.sub_z_identity(z))
}

/// Raw (unscaled) shifted block A_t - z I at time t.
pub fn shift_raw(sample: &SparseSample, t: Time, z: Complex64) -> Result<CMat> {
    let (rows, cols) = (t.rows(), t.cols());
    if rows == 0 || rows > sample.n_rows || cols > sample.n_cols {
        return Err(Error::contract("shift_raw: time out of range"));
    }
    Ok(sample.dense_block(rows, cols).sub_z_identity(z))
}

/// A fresh row of length `len` from the Row ensemble (delta xi entries),
/// drawn on its own stream.
pub fn sample_row(len: usize, p: f64, xi: &XiSpec, seed: u64, row_id: u64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut rng = Stream::new(seed, "fresh-row", &[row_id, j as u64]);
        if rng.uniform() < p {
            *slot = xi.sample(&mut rng);
        }
    }
    out
}

/// Largest beta on the grid {0.05, 0.10, .., 0.95} such that the sampled
/// estimate of max_y P(|xi - y| < beta) stays below 1 - beta (with a three
/// sigma Monte Carlo allowance).  Centers y run over a beta/4-pitch grid on
/// the box spanned by the 1% and 99% quantiles of the sample cloud.
///
/// Errors if no grid point qualifies; such laws (for example a constant)
/// should be pre-composed with an independent Bernoulli(1/2) coin first.
pub fn beta_of_xi(xi: &XiSpec, seed: u64, n_samples: usize) -> Result<f64> {
    if n_samples < 1000 {
        return Err(Error::contract("beta_of_xi: need at least 1000 samples"));
    }
    let mut rng = Stream::new(seed, "beta-of-xi", &[]);
    let pts: Vec<(f64, f64)> = (0..n_samples)
        .map(|_| {
            let v = xi.sample(&mut rng);
            (v.re, v.im)
        })
        .collect();
    let mut res: Vec<f64> = pts.iter().map(|p| p.0).collect();
    res.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ims: Vec<f64> = pts.iter().map(|p| p.1).collect();
    ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |v: &[f64], frac: f64| -> f64 {
        let idx = ((v.len() - 1) as f64 * frac).round() as usize;
        v[idx]
    };
    let (re_lo, re_hi) = (q(&res, 0.01), q(&res, 0.99));
    let (im_lo, im_hi) = (q(&ims, 0.01), q(&ims, 0.99));

    for step in (1..=19).rev() {
        let beta = step as f64 * 0.05;
        let max_est = max_ball_mass(&pts, beta, (re_lo, re_hi), (im_lo, im_hi));
        let sigma = (max_est * (1.0 - max_est) / n_samples as f64).sqrt();
        if max_est <= 1.0 - beta + 3.0 * sigma {
            return Ok(beta);
        }
    }
    Err(Error::contract(
        "beta_of_xi: no grid beta qualifies; pre-compose xi with an independent Bernoulli(1/2) coin",
    ))
}

/// max over grid centers of the fraction of points within open distance
/// `beta`, computed through a bucket grid of cell size beta.
fn max_ball_mass(pts: &[(f64, f64)], beta: f64, re_range: (f64, f64), im_range: (f64, f64)) -> f64 {
    let cell = beta;
    let key = |x: f64, y: f64| -> (i64, i64) { ((x / cell).floor() as i64, (y / cell).floor() as i64) };
    let mut buckets: std::collections::HashMap<(i64, i64), Vec<(f64, f64)>> =
        std::collections::HashMap::new();
    for &(x, y) in pts {
        buckets.entry(key(x, y)).or_default().push((x, y));
    }
    let pitch = beta / 4.0;
    let count_at = |cx: f64, cy: f64| -> usize {
        let (kx, ky) = key(cx, cy);
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = buckets.get(&(kx + dx, ky + dy)) {
                    for &(x, y) in v {
                        let dr = x - cx;
                        let di = y - cy;
                        if dr * dr + di * di < beta * beta {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    };
    let mut best = 0usize;
    let nx = ((re_range.1 - re_range.0) / pitch).ceil() as usize + 1;
    let ny = ((im_range.1 - im_range.0) / pitch).ceil() as usize + 1;
    for ix in 0..nx {
        for iy in 0..ny {
            let cx = re_range.0 + ix as f64 * pitch;
            let cy = im_range.0 + iy as f64 * pitch;
            best = best.max(count_at(cx, cy));
        }
    }
    best as f64 / pts.len() as f64
}

#[derive(Serialize, Deserialize)]
struct CsvHeader {
    n: usize,
    m: usize,
    p: f64,
    xi: XiSpec,
    seed: u64,
}

impl SparseSample {
    /// Header line `# {json}` followed by `i,j,re,im` triples.  Numbers are
    /// written in shortest round-trip form, so read_csv restores the sample
    /// bit for bit.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let header = CsvHeader {
            n: self.n_rows,
            m: self.n_cols,
            p: self.p,
            xi: self.xi.clone(),
            seed: self.seed,
        };
        writeln!(w, "# {}", serde_json::to_string(&header).expect("header serializes"))?;
        writeln!(w, "i,j,re,im")?;
        for &(i, j, v) in &self.entries {
            writeln!(w, "{},{},{},{}", i, j, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv(r: &mut impl BufRead) -> Result<SparseSample> {
        let mut lines = r.lines();
        let head = lines
            .next()
            .ok_or_else(|| Error::contract("sample csv: missing header"))??;
        let json = head
            .strip_prefix("# ")
            .ok_or_else(|| Error::contract("sample csv: header must start with '# '"))?;
        let header: CsvHeader =
            serde_json::from_str(json).map_err(|e| Error::contract(format!("sample csv: bad header: {}", e)))?;
        let cols = lines
            .next()
            .ok_or_else(|| Error::contract("sample csv: missing column line"))??;
        if cols.trim() != "i,j,re,im" {
            return Err(Error::contract("sample csv: expected column line i,j,re,im"));
        }
        let mut entries = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse_err = || Error::contract(format!("sample csv: bad row '{}'", line));
            let i: u32 = it.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
            let j: u32 = it.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
            let re: f64 = it.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
            let im: f64 = it.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
            entries.push((i, j, Complex64::new(re, im)));
        }
        Ok(SparseSample {
            n_rows: header.n,
            n_cols: header.m,
            p: header.p,
            xi: header.xi,
            seed: header.seed,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let xi = XiSpec::ComplexGaussian;
        let a = sample_matrix(40, 40, 0.2, &xi, 9).unwrap();
        let b = sample_matrix(40, 40, 0.2, &xi, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_matrix(40, 40, 0.2, &xi, 10).unwrap();
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn prefix_block_equals_smaller_sample() {
        let xi = XiSpec::Rademacher;
        let big = sample_matrix(50, 50, 0.3, &xi, 123).unwrap();
        let small = sample_matrix(30, 30, 0.3, &xi, 123).unwrap();
        let big_prefix: Vec<_> = big
            .entries
            .iter()
            .filter(|&&(i, j, _)| i < 30 && j < 30)
            .cloned()
            .collect();
        assert_eq!(big_prefix, small.entries);
    }

    #[test]
    fn nonzero_count_near_expectation() {
        let s = sample_matrix(100, 100, 0.1, &XiSpec::Rademacher, 5).unwrap();
        let mean = 1000.0;
        let sd = (100.0f64 * 100.0 * 0.1 * 0.9).sqrt();
        assert!((s.nnz() as f64 - mean).abs() < 4.0 * sd, "nnz = {}", s.nnz());
    }

    #[test]
    fn p_edges() {
        assert_eq!(sample_matrix(10, 10, 0.0, &XiSpec::Rademacher, 1).unwrap().nnz(), 0);
        assert!(sample_matrix(10, 10, 0.6, &XiSpec::Rademacher, 1).is_err());
        assert!(sample_matrix(10, 10, -0.1, &XiSpec::Rademacher, 1).is_err());
    }

    #[test]
    fn second_moment_is_one() {
        for xi in [
            XiSpec::ComplexGaussian,
            XiSpec::Rademacher,
            XiSpec::UnitCircleUniform,
            XiSpec::two_point(Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.0), 0.25).unwrap(),
            XiSpec::BernoulliScaled,
        ] {
            let n = 1_000_000usize;
            let mut rng = Stream::new(77, "moment", &[]);
            let mean: f64 = (0..n).map(|_| xi.sample(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
            assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt() * 2.0, "{:?}: {}", xi, mean);
        }
    }

    #[test]
    fn two_point_requires_unit_second_moment() {
        assert!(XiSpec::two_point(Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0), 0.5).is_err());
        assert!(XiSpec::two_point(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), 0.5).is_ok());
    }

    #[test]
    fn beta_for_known_laws() {
        // Two well-separated atoms of mass 1/2 give beta = 0.5 on the grid.
        let b = beta_of_xi(&XiSpec::Rademacher, 3, 100_000).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        let b = beta_of_xi(&XiSpec::BernoulliScaled, 3, 100_000).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        // Continuous law: stable across seeds.
        let b1 = beta_of_xi(&XiSpec::ComplexGaussian, 1, 100_000).unwrap();
        let b2 = beta_of_xi(&XiSpec::ComplexGaussian, 2, 100_000).unwrap();
        assert!((b1 - b2).abs() <= 0.05 + 1e-12, "{} vs {}", b1, b2);
        assert!((0.5..=0.8).contains(&b1), "beta gaussian = {}", b1);
    }

    #[test]
    fn constant_law_has_no_beta() {
        let constant = XiSpec::two_point(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.5).unwrap();
        assert!(beta_of_xi(&constant, 1, 10_000).is_err());
    }

    #[test]
    fn shift_and_scale_small_example() {
        let xi = XiSpec::Rademacher;
        let mut s = sample_matrix(3, 3, 0.0, &xi, 0).unwrap();
        s.entries = vec![
            (0, 1, Complex64::new(2.0, 0.0)),
            (1, 0, Complex64::new(-2.0, 0.0)),
        ];
        let m = shift_and_scale(&s, Time::integer(2), Complex64::new(1.0, 0.0), 4.0).unwrap();
        // entries / 2, minus identity
        assert_eq!(m[(0, 0)], Complex64::new(-1.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 0)], Complex64::new(-1.0, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(-1.0, 0.0));
        // Half-integer time: 2 x 3 with shifts on (0,0) and (1,1).
        let m = shift_and_scale(&s, Time::half_past(2), Complex64::new(0.5, 0.0), 4.0).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 3);
        assert_eq!(m[(0, 0)], Complex64::new(-0.5, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(-0.5, 0.0));
        assert_eq!(m[(1, 2)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = sample_matrix(25, 25, 0.3, &XiSpec::ComplexGaussian, 99).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = SparseSample::read_csv(&mut &buf[..]).unwrap();
        assert_eq!(s, back);
        let mut buf2 = Vec::new();
        back.write_csv(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn time_grid_shapes() {
        let t = Time::integer(5);
        assert_eq!((t.rows(), t.cols()), (5, 5));
        assert!(t.is_integer());
        let h = t.next_half();
        assert_eq!((h.rows(), h.cols()), (5, 6));
        assert_eq!(h.to_string(), "5.5");
        assert_eq!(h.next_half(), Time::integer(6));
        assert_eq!(h.ceil(), 6);
        assert_eq!(h.as_f64(), 5.5);
    }
}
