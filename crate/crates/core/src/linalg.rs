//! Thin wrappers over `faer` working on row-major buffers.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub(crate) fn to_mat(data: &[f64], rows: usize, cols: usize) -> Mat<f64> {
    debug_assert_eq!(data.len(), rows * cols);
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

pub(crate) fn from_mat(m: faer::MatRef<'_, f64>) -> Vec<f64> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Thin SVD of a row-major `rows × cols` matrix: `(U, s, Vt)` with
/// `U: rows × k`, `Vt: k × cols`, `k = min(rows, cols)`, all row-major.
pub(crate) fn svd(data: &[f64], rows: usize, cols: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = to_mat(data, rows, cols);
    let s = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let k = rows.min(cols);
    let u = from_mat(s.U());
    let vt = from_mat(s.V().transpose());
    let sv: Vec<f64> = (0..k).map(|i| s.S().column_vector()[i]).collect();
    Ok((u, sv, vt))
}

pub(crate) fn singular_values(data: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    to_mat(data, rows, cols)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))
}

pub(crate) fn singular_values_complex(m: &Mat<C64>) -> Result<Vec<f64>> {
    m.singular_values()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))
}

/// Thin QR of a row-major matrix: `(Q: rows × k, R: k × cols)`.
pub(crate) fn qr(data: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let m = to_mat(data, rows, cols);
    let f = m.qr();
    let q = from_mat(f.compute_thin_Q().as_ref());
    let r = from_mat(f.thin_R());
    (q, r)
}

/// Thin LQ of a row-major matrix: `(L: rows × k, Q: k × cols)` with `Q Qᵀ = 1`.
pub(crate) fn lq(data: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let t = transpose(data, rows, cols);
    let (q, r) = qr(&t, cols, rows);
    let k = rows.min(cols);
    (transpose(&r, k, rows), transpose(&q, cols, k))
}

pub(crate) fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = data[i * cols + j];
        }
    }
    out
}

/// Row-major product `a (n × k) · b (k × m)`.
pub(crate) fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * k);
    debug_assert_eq!(b.len(), k * m);
    if n * k * m > 32_768 {
        let c = to_mat(a, n, k) * to_mat(b, k, m);
        return from_mat(c.as_ref());
    }
    let mut c = vec![0.0; n * m];
    for i in 0..n {
        for p in 0..k {
            let x = a[i * k + p];
            if x == 0.0 {
                continue;
            }
            let brow = &b[p * m..(p + 1) * m];
            let crow = &mut c[i * m..(i + 1) * m];
            for (cj, bj) in crow.iter_mut().zip(brow) {
                *cj += x * bj;
            }
        }
    }
    c
}

/// Eigen-decomposition of a real symmetric matrix (lower triangle used).
/// Eigenvalues ascending; eigenvectors returned as columns of a faer matrix.
pub(crate) fn eigh_real(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
    let n = m.nrows();
    let vals = (0..n).map(|i| e.S().column_vector()[i]).collect();
    Ok((vals, e.U().to_owned()))
}

pub(crate) fn eigh_complex(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
    let n = m.nrows();
    let vals = (0..n).map(|i| e.S().column_vector()[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub(crate) fn eigvalsh_complex(m: &Mat<C64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))
}

/// Solves `X · P = T` for `X` (i.e. `X = T P⁻¹`) with partial-pivot LU.
/// `t` is `n × r` row-major, `p` is `r × r` row-major.
pub(crate) fn right_solve(t: &[f64], n: usize, p: &[f64], r: usize) -> Vec<f64> {
    // Pᵀ Xᵀ = Tᵀ
    let pt = to_mat(p, r, r).transpose().to_owned();
    let tt = to_mat(t, n, r).transpose().to_owned();
    let lu = pt.partial_piv_lu();
    let xt = faer::linalg::solvers::Solve::solve(&lu, &tt);
    from_mat(xt.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.5];
        let (u, s, vt) = svd(&a, 2, 3).unwrap();
        let mut us = u.clone();
        for i in 0..2 {
            for k in 0..2 {
                us[i * 2 + k] *= s[k];
            }
        }
        let back = matmul(&us, &vt, 2, 2, 3);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(s[0] >= s[1]);
    }

    #[test]
    fn lq_reconstructs() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.5];
        let (l, q) = lq(&a, 2, 3);
        let back = matmul(&l, &q, 2, 2, 3);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
        let qqt = matmul(&q, &transpose(&q, 2, 3), 2, 3, 2);
        assert!((qqt[0] - 1.0).abs() < 1e-12 && qqt[1].abs() < 1e-12);
    }

    #[test]
    fn right_solve_inverts() {
        let p = [2.0, 1.0, 0.5, 3.0];
        let t = [1.0, 0.0, 0.0, 1.0, 4.0, 4.0];
        let x = right_solve(&t, 3, &p, 2);
        let back = matmul(&x, &p, 3, 2, 2);
        for (a, b) in t.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
