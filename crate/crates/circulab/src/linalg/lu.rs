use super::CMat;
use crate::{Error, Result};
use num_complex::Complex64;

/// Determinant via partial-pivot LU.  Independent of the SVD and eigenvalue
/// paths, which is what makes it useful as a cross-check oracle.
pub fn det(a: &CMat) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::contract("det: matrix must be square"));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut sign = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in k + 1..n {
            let mag = lu[(i, k)].norm();
            if mag > best {
                best = mag;
                piv = i;
            }
        }
        if best == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            sign = -sign;
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }
    let mut d = sign;
    for k in 0..n {
        d *= lu[(k, k)];
    }
    Ok(d)
}
