//! Dense complex linear algebra: matrix type, SVD via Golub-Kahan
//! bidiagonalization, eigenvalues via Hessenberg + shifted QR, and the
//! projection / interlacing helpers built on top of them.

mod eig;
mod lu;
mod mat;
mod svd;

pub use eig::eigenvalues;
pub use lu::det;
pub use mat::{max_abs_diff, CMat};
pub use svd::{singular_values, svd, Svd};

use crate::Result;
use num_complex::Complex64;

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMat) -> f64 {
    a.hs_norm_sq().sqrt()
}

/// Result of projecting a vector onto a span of trailing right-singular
/// directions.  `degenerate_boundary` is set when the singular values on
/// either side of the cut are numerically tied, in which case the span
/// itself is not well defined (the norm still is, up to that tie).
#[derive(Debug, Clone, Copy)]
pub struct ProjectionNorm {
    pub value: f64,
    pub degenerate_boundary: bool,
}

/// Norm of the projection of `x` onto the span of the `h` right-singular
/// directions of `m` with smallest singular values.
///
/// Right-singular directions live in C^cols; for wide matrices the count
/// includes the null directions, so `h` may range up to `cols`.  `h = 0`
/// gives 0, `h = cols` gives the norm of `x` itself.
pub fn small_singular_projection_norm(m: &CMat, h: usize, x: &[Complex64]) -> Result<ProjectionNorm> {
    let cols = m.cols();
    if x.len() != cols {
        return Err(crate::Error::contract(format!(
            "projection: vector length {} does not match cols {}",
            x.len(),
            cols
        )));
    }
    if h > cols {
        return Err(crate::Error::contract(format!(
            "projection: h = {} exceeds number of right-singular directions {}",
            h, cols
        )));
    }
    if h == 0 {
        return Ok(ProjectionNorm { value: 0.0, degenerate_boundary: false });
    }
    // Right-singular vectors of m are the columns of v in m = u s v^H.
    let dec = svd(m, false, true)?;
    let v = dec.v.expect("svd with want_v");
    // Padded value list: sigma_r = 0 for r beyond min(rows, cols).
    let mut vals = dec.values.clone();
    vals.resize(cols, 0.0);
    let lo = cols - h;
    let degenerate_boundary = if lo == 0 {
        false
    } else {
        let scale = vals[0].max(1.0);
        (vals[lo - 1] - vals[lo]).abs() <= 1e-12 * scale
    };
    // ||P x|| = || V_small^H x || since the columns are orthonormal.
    let mut sum = 0.0;
    for j in lo..cols {
        let mut c = Complex64::new(0.0, 0.0);
        for i in 0..cols {
            c += v[(i, j)].conj() * x[i];
        }
        sum += c.norm_sqr();
    }
    Ok(ProjectionNorm { value: sum.sqrt(), degenerate_boundary })
}
