use super::CMat;
use crate::{Error, Result};
use num_complex::Complex64;

/// Singular value decomposition a = u s v^H.
///
/// `values` is descending and nonnegative, length min(rows, cols).  When
/// requested, `u` is rows x rows and `v` is cols x cols (complete bases, so
/// the trailing columns of `v` span the kernel for wide inputs).
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    pub u: Option<CMat>,
    pub v: Option<CMat>,
}

/// Singular values only, the cheap path used by the step process.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    Ok(svd(a, false, false)?.values)
}

pub fn svd(a: &CMat, want_u: bool, want_v: bool) -> Result<Svd> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::contract("svd: empty matrix"));
    }
    if a.rows() < a.cols() {
        // a^H = v s u^H, so the roles of u and v swap.
        let dec = svd_tall(&a.adjoint(), want_v, want_u)?;
        return Ok(Svd { values: dec.values, u: dec.v, v: dec.u });
    }
    svd_tall(a, want_u, want_v)
}

/// Householder reflector H = I - 2 w w^H with H x = alpha e1, |alpha| = ||x||.
/// Returns None when x is already (0, .., 0) or a multiple of e1 with the
/// canonical phase, in which case no reflection is needed.
fn make_householder(x: &[Complex64]) -> Option<(Vec<Complex64>, Complex64)> {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
    let alpha = -phase * norm;
    let mut v: Vec<Complex64> = x.to_vec();
    v[0] -= alpha;
    let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if vnorm == 0.0 {
        return None;
    }
    for z in v.iter_mut() {
        *z /= vnorm;
    }
    Some((v, alpha))
}

/// b[r0.., c0..] <- H b[r0.., c0..] for H = I - 2 w w^H acting on rows r0...
fn apply_householder_left(b: &mut CMat, w: &[Complex64], r0: usize, c0: usize) {
    let rows = b.rows();
    for j in c0..b.cols() {
        let col = b.col_mut(j);
        let mut dot = Complex64::new(0.0, 0.0);
        for i in 0..w.len() {
            dot += w[i].conj() * col[r0 + i];
        }
        let dot2 = dot * 2.0;
        for i in 0..w.len() {
            col[r0 + i] -= dot2 * w[i];
        }
        debug_assert!(r0 + w.len() <= rows);
    }
}

/// b[r0.., c0..] <- b[r0.., c0..] H for H = I - 2 w w^H acting on cols c0...
fn apply_householder_right(b: &mut CMat, w: &[Complex64], r0: usize, c0: usize) {
    let rows = b.rows();
    let mut y = vec![Complex64::new(0.0, 0.0); rows - r0];
    for (jw, j) in (c0..c0 + w.len()).enumerate() {
        let wj = w[jw];
        let col = b.col(j);
        for i in r0..rows {
            y[i - r0] += col[i] * wj;
        }
    }
    for (jw, j) in (c0..c0 + w.len()).enumerate() {
        let wc2 = w[jw].conj() * 2.0;
        let col = b.col_mut(j);
        for i in r0..rows {
            col[i] -= y[i - r0] * wc2;
        }
    }
}

/// Real Givens rotation mapping (a, b) to (r, 0): c a + s b = r, -s a + c b = 0.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        (1.0, 0.0, a)
    } else if a == 0.0 {
        (0.0, 1.0, b)
    } else {
        let r = a.hypot(b);
        (a / r, b / r, r)
    }
}

/// cols (i, j) <- (c col_i + s col_j, -s col_i + c col_j), real coefficients.
fn rot_cols(m: &mut CMat, i: usize, j: usize, c: f64, s: f64) {
    let (ci, cj) = m.two_cols_mut(i, j);
    for k in 0..ci.len() {
        let a = ci[k];
        let b = cj[k];
        ci[k] = a * c + b * s;
        cj[k] = b * c - a * s;
    }
}

fn svd_tall(a: &CMat, want_u: bool, want_v: bool) -> Result<Svd> {
    let m = a.rows();
    let n = a.cols();
    debug_assert!(m >= n);
    let mut b = a.clone();
    let mut u = if want_u { Some(CMat::identity(m)) } else { None };
    let mut v = if want_v { Some(CMat::identity(n)) } else { None };

    // Golub-Kahan bidiagonalization by alternating left and right reflectors.
    for k in 0..n {
        let x: Vec<Complex64> = (k..m).map(|i| b[(i, k)]).collect();
        if let Some((w, _)) = make_householder(&x) {
            apply_householder_left(&mut b, &w, k, k);
            if let Some(u) = u.as_mut() {
                apply_householder_right(u, &w, 0, k);
            }
        }
        if k + 2 < n {
            let x: Vec<Complex64> = (k + 1..n).map(|j| b[(k, j)].conj()).collect();
            if let Some((w, _)) = make_householder(&x) {
                apply_householder_right(&mut b, &w, k, k + 1);
                if let Some(v) = v.as_mut() {
                    apply_householder_right(v, &w, 0, k + 1);
                }
            }
        }
    }

    // Phase out the complex bidiagonal: B = P Br Q^H with unit diagonals P, Q
    // folded into u and v, leaving Br real nonnegative.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    {
        let mut q = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let dk = b[(k, k)] * q;
            let (dabs, p) = polar(dk);
            d[k] = dabs;
            if let Some(u) = u.as_mut() {
                scale_col(u, k, p);
            }
            if let Some(v) = v.as_mut() {
                scale_col(v, k, q);
            }
            if k + 1 < n {
                let ek = b[(k, k + 1)];
                // Solve conj(p) * ek * q_next = |ek| for unit q_next.
                let (eabs, pe) = polar(ek);
                e[k] = eabs;
                q = p * pe.conj();
            }
        }
    }

    bidiag_qr(&mut d, &mut e, u.as_mut(), v.as_mut(), m, n)?;

    // Singular values are |d|; fold any sign into u.
    for k in 0..n {
        if d[k] < 0.0 {
            d[k] = -d[k];
            if let Some(u) = u.as_mut() {
                scale_col(u, k, Complex64::new(-1.0, 0.0));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let u = u.map(|mat| permute_cols(&mat, &order, m));
    let v = v.map(|mat| permute_cols(&mat, &order, n));
    Ok(Svd { values, u, v })
}

fn polar(z: Complex64) -> (f64, Complex64) {
    let r = z.norm();
    if r == 0.0 {
        (0.0, Complex64::new(1.0, 0.0))
    } else {
        (r, z / r)
    }
}

fn scale_col(m: &mut CMat, j: usize, s: Complex64) {
    for z in m.col_mut(j).iter_mut() {
        *z *= s;
    }
}

/// Columns listed in `order` first, remaining columns (beyond the value
/// count) kept in place; total column count `total`.
fn permute_cols(m: &CMat, order: &[usize], total: usize) -> CMat {
    CMat::from_fn(m.rows(), total, |i, j| {
        if j < order.len() {
            m[(i, order[j])]
        } else {
            m[(i, j)]
        }
    })
}

/// Implicit-shift QR on a real bidiagonal (d, e), rotations accumulated into
/// the complex u and v when present.
fn bidiag_qr(
    d: &mut [f64],
    e: &mut [f64],
    mut u: Option<&mut CMat>,
    mut v: Option<&mut CMat>,
    m_rows: usize,
    n_cols: usize,
) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let scale = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if scale == 0.0 {
        return Ok(());
    }
    let max_iter = 120 * n.max(8);
    let mut iter = 0;
    let mut hi = n - 1;
    'outer: while hi > 0 {
        // Deflate negligible superdiagonal entries.
        for i in 0..hi {
            if e[i].abs() <= 0.5 * eps * (d[i].abs() + d[i + 1].abs()) || e[i].abs() <= eps * eps * scale {
                e[i] = 0.0;
            }
        }
        if e[hi - 1] == 0.0 {
            hi -= 1;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NumericFailure {
                kernel: "bidiagonal qr",
                rows: m_rows,
                cols: n_cols,
                detail: format!("no convergence after {} sweeps", max_iter),
            });
        }
        let mut lo = hi - 1;
        while lo > 0 && e[lo - 1] != 0.0 {
            lo -= 1;
        }
        // A negligible diagonal stalls the shifted sweep; split it off first.
        for k in lo..hi {
            if d[k].abs() <= eps * scale {
                d[k] = 0.0;
                let mut f = e[k];
                e[k] = 0.0;
                for j in k + 1..=hi {
                    let (c, s, r) = givens(d[j], f);
                    d[j] = r;
                    if j < hi {
                        f = -s * e[j];
                        e[j] = c * e[j];
                    }
                    if let Some(u) = u.as_deref_mut() {
                        rot_cols(u, j, k, c, s);
                    }
                }
                continue 'outer;
            }
        }
        if d[hi].abs() <= eps * scale {
            d[hi] = 0.0;
            let mut f = e[hi - 1];
            e[hi - 1] = 0.0;
            for j in (lo..hi).rev() {
                let (c, s, r) = givens(d[j], f);
                d[j] = r;
                if j > lo {
                    f = -s * e[j - 1];
                    e[j - 1] = c * e[j - 1];
                }
                if let Some(v) = v.as_deref_mut() {
                    rot_cols(v, j, hi, c, s);
                }
            }
            continue 'outer;
        }

        // Wilkinson shift from the trailing 2x2 of B^T B.
        let dm = d[hi - 1];
        let dn = d[hi];
        let em = e[hi - 1];
        let emm = if hi >= 2 { e[hi - 2] } else { 0.0 };
        let t11 = dm * dm + emm * emm;
        let t12 = dm * em;
        let t22 = dn * dn + em * em;
        let delta = (t11 - t22) / 2.0;
        let root = delta.hypot(t12);
        let denom = if delta >= 0.0 { delta + root } else { delta - root };
        let mu = if denom == 0.0 { t22 } else { t22 - t12 * t12 / denom };

        let mut f = d[lo] * d[lo] - mu;
        let mut g = d[lo] * e[lo];
        for k in lo..hi {
            let (c, s, r) = givens(f, g);
            if k > lo {
                e[k - 1] = r;
            }
            f = c * d[k] + s * e[k];
            e[k] = c * e[k] - s * d[k];
            g = s * d[k + 1];
            d[k + 1] *= c;
            if let Some(v) = v.as_deref_mut() {
                rot_cols(v, k, k + 1, c, s);
            }
            let (c2, s2, r2) = givens(f, g);
            d[k] = r2;
            f = c2 * e[k] + s2 * d[k + 1];
            d[k + 1] = c2 * d[k + 1] - s2 * e[k];
            if k + 1 < hi {
                g = s2 * e[k + 1];
                e[k + 1] *= c2;
            }
            if let Some(u) = u.as_deref_mut() {
                rot_cols(u, k, k + 1, c2, s2);
            }
        }
        e[hi - 1] = f;
    }
    Ok(())
}
