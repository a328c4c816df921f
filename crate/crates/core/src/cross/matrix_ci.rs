//! Greedy full-pivot cross interpolation of a dense matrix.

/// Pivots whose magnitude falls below this fraction of the first pivot are
/// never accepted; this keeps the pivot matrix condition number under ~1e12.
pub const CONDITION_GUARD: f64 = 1e-12;

/// Outcome of [`matrix_ci`].
#[derive(Clone, Debug, PartialEq)]
pub struct CrossResult {
    /// Selected rows, in pivot order.
    pub rows: Vec<usize>,
    /// Selected columns, paired with `rows`.
    pub cols: Vec<usize>,
    /// Absolute value of each accepted pivot of the partial LU.
    pub pivots: Vec<f64>,
    /// Largest residual entry left after the last accepted pivot.
    pub error_estimate: f64,
    /// Largest entry of the input matrix.
    pub scale: f64,
}

impl CrossResult {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `error_estimate / scale`, or 0 for an all-zero matrix.
    pub fn relative_error(&self) -> f64 {
        if self.scale > 0.0 {
            self.error_estimate / self.scale
        } else {
            0.0
        }
    }
}

/// Cross interpolation of the `n_rows × n_cols` matrix given by `get`.
///
/// Every entry is evaluated once. Pivots are chosen by full pivoting on the
/// residual, ties going to the smallest `(row, col)`. Selection stops once
/// the best remaining residual is `≤ tol` times the first pivot, or after
/// `max_rank` pivots.
pub fn matrix_ci(get: impl Fn(usize, usize) -> f64, n_rows: usize, n_cols: usize, tol: f64, max_rank: usize) -> CrossResult {
    let mut a = Vec::with_capacity(n_rows * n_cols);
    for i in 0..n_rows {
        for j in 0..n_cols {
            a.push(get(i, j));
        }
    }
    matrix_ci_dense(a, n_rows, n_cols, tol, max_rank)
}

/// [`matrix_ci`] on a row-major buffer, which is used as the residual
/// workspace.
pub fn matrix_ci_dense(mut r: Vec<f64>, n_rows: usize, n_cols: usize, tol: f64, max_rank: usize) -> CrossResult {
    assert_eq!(r.len(), n_rows * n_cols, "matrix buffer has wrong length");
    let mut out = CrossResult { rows: vec![], cols: vec![], pivots: vec![], error_estimate: 0.0, scale: 0.0 };
    let argmax = |r: &[f64]| -> (usize, f64) {
        let mut best = (0, 0.0);
        for (k, v) in r.iter().enumerate() {
            if v.abs() > best.1 {
                best = (k, v.abs());
            }
        }
        best
    };
    let (mut k, mut mag) = argmax(&r);
    out.scale = mag;
    if mag == 0.0 {
        return out;
    }
    let first = mag;
    let threshold = tol.max(CONDITION_GUARD) * first;
    let limit = max_rank.min(n_rows).min(n_cols);
    loop {
        if out.rank() >= limit || (out.rank() > 0 && mag <= threshold) {
            out.error_estimate = mag;
            return out;
        }
        let (pi, pj) = (k / n_cols, k % n_cols);
        let p = r[pi * n_cols + pj];
        out.rows.push(pi);
        out.cols.push(pj);
        out.pivots.push(mag);
        let prow: Vec<f64> = r[pi * n_cols..(pi + 1) * n_cols].to_vec();
        for i in 0..n_rows {
            let f = r[i * n_cols + pj] / p;
            if f == 0.0 {
                continue;
            }
            for (x, y) in r[i * n_cols..(i + 1) * n_cols].iter_mut().zip(&prow) {
                *x -= f * y;
            }
        }
        // Exact zeros on the eliminated cross guard against roundoff picks.
        for i in 0..n_rows {
            r[i * n_cols + pj] = 0.0;
        }
        r[pi * n_cols..(pi + 1) * n_cols].iter_mut().for_each(|x| *x = 0.0);
        (k, mag) = argmax(&r);
        if mag == 0.0 {
            out.error_estimate = 0.0;
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::Rng;

    fn reconstruct(a: &[f64], n: usize, m: usize, ci: &CrossResult) -> Vec<f64> {
        let k = ci.rank();
        let mut c = vec![0.0; n * k];
        for i in 0..n {
            for (q, &j) in ci.cols.iter().enumerate() {
                c[i * k + q] = a[i * m + j];
            }
        }
        let mut p = vec![0.0; k * k];
        let mut rr = vec![0.0; k * m];
        for (q, &i) in ci.rows.iter().enumerate() {
            for (s, &j) in ci.cols.iter().enumerate() {
                p[q * k + s] = a[i * m + j];
            }
            rr[q * m..(q + 1) * m].copy_from_slice(&a[i * m..(i + 1) * m]);
        }
        let cp = linalg::right_solve(&c, n, &p, k);
        linalg::matmul(&cp, &rr, n, k, m)
    }

    #[test]
    fn identity_needs_two_pivots() {
        let ci = matrix_ci(|i, j| if i == j { 1.0 } else { 0.0 }, 2, 2, 1e-12, usize::MAX);
        assert_eq!(ci.rank(), 2);
        assert_eq!((ci.rows.clone(), ci.cols.clone()), (vec![0, 1], vec![0, 1]));
        assert_eq!(ci.error_estimate, 0.0);
    }

    #[test]
    fn rank_one_picks_max_entry() {
        let u: Vec<f64> = (0..8).map(|i| 1.0 + i as f64 * 0.3).collect();
        let v: Vec<f64> = (0..8).map(|j| (j as f64 - 3.5).cos()).collect();
        let a: Vec<f64> = (0..64).map(|k| u[k / 8] * v[k % 8]).collect();
        let ci = matrix_ci(|i, j| a[i * 8 + j], 8, 8, 1e-12, usize::MAX);
        assert_eq!(ci.rank(), 1);
        let (bi, _) = a.iter().enumerate().fold((0, 0.0), |b, (k, x)| if x.abs() > b.1 { (k, x.abs()) } else { b });
        assert_eq!((ci.rows[0], ci.cols[0]), (bi / 8, bi % 8));
        let rec = reconstruct(&a, 8, 8, &ci);
        assert!(a.iter().zip(&rec).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn random_rank_three() {
        let mut rng = crate::seed::rng(5);
        let mut a = vec![0.0; 144];
        for _ in 0..3 {
            let u: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for i in 0..12 {
                for j in 0..12 {
                    a[i * 12 + j] += u[i] * v[j];
                }
            }
        }
        let ci = matrix_ci(|i, j| a[i * 12 + j], 12, 12, 1e-12, usize::MAX);
        assert_eq!(ci.rank(), 3);
        let rec = reconstruct(&a, 12, 12, &ci);
        let err = a.iter().zip(&rec).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn zero_matrix_gives_empty_sets() {
        let ci = matrix_ci(|_, _| 0.0, 3, 4, 1e-12, 5);
        assert_eq!(ci.rank(), 0);
        assert_eq!(ci.error_estimate, 0.0);
    }

    #[test]
    fn max_rank_caps_and_reports_residual() {
        let ci = matrix_ci(|i, j| if i == j { 3.0 - i as f64 } else { 0.0 }, 3, 3, 0.0, 2);
        assert_eq!(ci.rows, vec![0, 1]);
        assert_eq!(ci.error_estimate, 1.0);
        assert!((ci.relative_error() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let ci = matrix_ci(|_, _| 2.0, 3, 3, 1e-12, usize::MAX);
        assert_eq!((ci.rows.clone(), ci.cols.clone()), (vec![0], vec![0]));
    }
}
