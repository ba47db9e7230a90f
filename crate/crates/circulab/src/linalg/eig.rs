use super::CMat;
use crate::{Error, Result};
use num_complex::Complex64;

/// Eigenvalues of a square complex matrix via Hessenberg reduction and
/// shifted QR with complex Givens rotations.  Returned sorted by real part,
/// then imaginary part (ascending), which fixes a deterministic order for
/// reports; no eigenvectors are computed.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::contract("eigenvalues: matrix must be square"));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::contract("eigenvalues: empty matrix"));
    }
    let mut h = a.clone();
    hessenberg(&mut h);

    let eps = f64::EPSILON;
    let scale = h.max_abs().max(1e-300);
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let max_iter = 60 * n;
    let mut total_iter = 0;
    let mut stall = 0;
    loop {
        // Deflate converged trailing entries.
        loop {
            if hi == 0 {
                eig[0] = h[(0, 0)];
                break;
            }
            let sub = h[(hi, hi - 1)].norm();
            if sub <= eps * (h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm()) + eps * eps * scale {
                eig[hi] = h[(hi, hi)];
                hi -= 1;
                stall = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            if sub <= eps * (h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm()) + eps * eps * scale {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if hi == lo + 1 {
            // Solve the 2x2 block in closed form and deflate both values.
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eig[lo] = l1;
            eig[hi] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            stall = 0;
            continue;
        }

        total_iter += 1;
        if total_iter > max_iter {
            return Err(Error::NumericFailure {
                kernel: "hessenberg qr",
                rows: n,
                cols: n,
                detail: format!("no convergence after {} iterations", max_iter),
            });
        }
        // Wilkinson shift: the trailing 2x2 eigenvalue closer to h[hi, hi],
        // with an occasional exceptional shift to break symmetry stalls.
        stall += 1;
        let sigma = if stall % 12 == 0 {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let (l1, l2) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let hnn = h[(hi, hi)];
            if (l1 - hnn).norm() <= (l2 - hnn).norm() {
                l1
            } else {
                l2
            }
        };

        qr_step(&mut h, lo, hi, sigma);
    }

    eig.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(eig)
}

/// Reduce to upper Hessenberg form in place by Householder similarity.
fn hessenberg(h: &mut CMat) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut w = x;
        w[0] -= alpha;
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wn == 0.0 {
            continue;
        }
        for z in w.iter_mut() {
            *z /= wn;
        }
        // Left: rows k+1.., columns k..
        for j in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (iw, i) in (k + 1..n).enumerate() {
                dot += w[iw].conj() * h[(i, j)];
            }
            let dot2 = dot * 2.0;
            for (iw, i) in (k + 1..n).enumerate() {
                let delta = dot2 * w[iw];
                h[(i, j)] -= delta;
            }
        }
        // Right: all rows, columns k+1..
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (jw, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * w[jw];
            }
            let dot2 = dot * 2.0;
            for (jw, j) in (k + 1..n).enumerate() {
                let delta = dot2 * w[jw].conj();
                h[(i, j)] -= delta;
            }
        }
    }
}

/// Eigenvalues of [[a, b], [c, d]].
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    (half_tr + disc, half_tr - disc)
}

/// Complex Givens rotation zeroing b: [c, s; -conj(s), c] (a, b)^T = (r, 0)^T
/// with real c.
fn cgivens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let alpha = a / an;
    (an / r, alpha * b.conj() / r)
}

/// One explicit shifted QR iteration restricted to the active block.
fn qr_step(h: &mut CMat, lo: usize, hi: usize, sigma: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= sigma;
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = cgivens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + y * s;
            h[(k + 1, j)] = y * c - x * s.conj();
        }
        rots.push((c, s));
    }
    for (k, &(c, s)) in rots.iter().enumerate() {
        let k = lo + k;
        let top = (k + 1).min(hi);
        for i in lo..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = y * c - x * s;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += sigma;
    }
}
