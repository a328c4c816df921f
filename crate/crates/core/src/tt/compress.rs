use serde::{Deserialize, Serialize};

use super::{Core, TensorTrain};
use crate::linalg;
use crate::{Error, Result};

/// Singular values below this fraction of the largest one are reported as 0.
const SPECTRUM_FLOOR: f64 = 1e-14;

/// Descending list of non-negative singular values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub(crate) fn from_raw(mut values: Vec<f64>) -> Self {
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        values.sort_by(|a, b| b.total_cmp(a));
        if let Some(&top) = values.first() {
            for v in &mut values {
                if *v < SPECTRUM_FLOOR * top {
                    *v = 0.0;
                }
            }
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `λ_i` with 1-based `i`; zero past the end.
    pub fn get(&self, i: usize) -> f64 {
        self.values.get(i - 1).copied().unwrap_or(0.0)
    }

    pub fn nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Number of leading singular values to keep: the discarded tail satisfies
/// `Σ_{i>k} s_i² ≤ tol² Σ s_i²` and `k ≤ max_rank`.
fn truncation_rank(s: &[f64], tol: f64, max_rank: usize) -> usize {
    let total: f64 = s.iter().map(|v| v * v).sum();
    let budget = tol * tol * total;
    let mut k = s.len();
    let mut tail = 0.0;
    while k > 1 {
        let next = tail + s[k - 1] * s[k - 1];
        if next > budget {
            break;
        }
        tail = next;
        k -= 1;
    }
    k.min(max_rank.max(1))
}

impl TensorTrain {
    /// Builds a train from a dense big-endian vector by a left-to-right SVD
    /// sweep. Exact for `tol = 0` and unbounded `max_rank`.
    pub fn from_dense(values: &[f64], dims: &[usize], tol: f64, max_rank: usize) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("bad dims {dims:?}")));
        }
        let total: usize = dims.iter().product();
        if values.len() != total {
            return Err(Error::DimMismatch(format!(
                "dense length {} != product of dims {total}",
                values.len()
            )));
        }
        if tol < 0.0 || max_rank == 0 {
            return Err(Error::InvalidArgument("tol must be >= 0 and max_rank >= 1".into()));
        }
        let n = dims.len();
        let mut cores = Vec::with_capacity(n);
        let mut rest = values.to_vec();
        let mut left = 1usize;
        let mut remaining = total;
        for &d in &dims[..n - 1] {
            remaining /= d;
            let rows = left * d;
            let (u, s, vt) = linalg::svd(&rest, rows, remaining)?;
            let kfull = s.len();
            let k = truncation_rank(&s, tol, max_rank);
            let mut core = Vec::with_capacity(rows * k);
            for r in 0..rows {
                core.extend_from_slice(&u[r * kfull..r * kfull + k]);
            }
            cores.push(Core::new(left, d, k, core)?);
            let mut next = Vec::with_capacity(k * remaining);
            for (r, &sv) in s.iter().enumerate().take(k) {
                next.extend(vt[r * remaining..(r + 1) * remaining].iter().map(|v| v * sv));
            }
            rest = next;
            left = k;
        }
        cores.push(Core::new(left, dims[n - 1], 1, rest)?);
        Self::new(cores)
    }

    /// Left-orthogonalizes cores `0..upto` by thin QR; the R factors are pushed
    /// into core `upto`. Ranks never grow.
    pub(crate) fn left_orthogonalize(&mut self, upto: usize) {
        for l in 0..upto {
            let c = &self.cores[l];
            let (rows, cols) = (c.left * c.phys, c.right);
            let (q, r) = linalg::qr(&c.data, rows, cols);
            let k = rows.min(cols);
            let (left, phys) = (c.left, c.phys);
            self.cores[l] = Core { left, phys, right: k, data: q };
            let nxt = &self.cores[l + 1];
            let ncols = nxt.phys * nxt.right;
            let data = linalg::matmul(&r, &nxt.data, k, cols, ncols);
            let (p, rr) = (nxt.phys, nxt.right);
            self.cores[l + 1] = Core { left: k, phys: p, right: rr, data };
        }
    }

    /// Right-orthogonalizes cores `from+1..N` by thin LQ; the L factors are
    /// pushed into core `from`.
    pub(crate) fn right_orthogonalize(&mut self, from: usize) {
        for l in (from + 1..self.len()).rev() {
            let c = &self.cores[l];
            let (rows, cols) = (c.left, c.phys * c.right);
            let (lf, q) = linalg::lq(&c.data, rows, cols);
            let k = rows.min(cols);
            let (phys, right) = (c.phys, c.right);
            self.cores[l] = Core { left: k, phys, right, data: q };
            let prv = &self.cores[l - 1];
            let prow = prv.left * prv.phys;
            let data = linalg::matmul(&prv.data, &lf, prow, rows, k);
            let (pl, pp) = (prv.left, prv.phys);
            self.cores[l - 1] = Core { left: pl, phys: pp, right: k, data };
        }
    }

    /// SVD recompression: left-to-right orthogonalization followed by a
    /// right-to-left truncating SVD sweep. The relative 2-norm error is at
    /// most `tol·√(N-1)`.
    pub fn compress_svd(&self, tol: f64, max_rank: usize) -> Result<Self> {
        if tol < 0.0 || max_rank == 0 {
            return Err(Error::InvalidArgument("tol must be >= 0 and max_rank >= 1".into()));
        }
        let mut tt = self.clone();
        let n = tt.len();
        if n == 1 {
            return Ok(tt);
        }
        tt.left_orthogonalize(n - 1);
        for l in (1..n).rev() {
            let c = &tt.cores[l];
            let (rows, cols) = (c.left, c.phys * c.right);
            let (u, s, vt) = linalg::svd(&c.data, rows, cols)?;
            let kfull = s.len();
            let k = truncation_rank(&s, tol, max_rank);
            let (phys, right) = (c.phys, c.right);
            tt.cores[l] = Core::new(k, phys, right, vt[..k * cols].to_vec())?;
            // us: rows × k
            let mut us = Vec::with_capacity(rows * k);
            for r in 0..rows {
                us.extend((0..k).map(|j| u[r * kfull + j] * s[j]));
            }
            let prv = &tt.cores[l - 1];
            let prow = prv.left * prv.phys;
            let data = linalg::matmul(&prv.data, &us, prow, rows, k);
            let (pl, pp) = (prv.left, prv.phys);
            tt.cores[l - 1] = Core::new(pl, pp, k, data)?;
        }
        Self::new(tt.cores)
    }

    /// Schmidt spectrum of the unit-normalized train across bond `bond`
    /// (between sites `bond` and `bond + 1`), via canonical forms.
    pub fn bond_spectrum(&self, bond: usize) -> Result<Spectrum> {
        let n = self.len();
        if n < 2 || bond + 1 >= n {
            return Err(Error::InvalidArgument(format!("bond {bond} invalid for {n} sites")));
        }
        let mut tt = self.clone();
        tt.left_orthogonalize(bond + 1);
        tt.right_orthogonalize(bond + 1);
        // Core bond+1 now carries all the weight with left-orthonormal
        // neighbours on the left and right-orthonormal ones on the right.
        let c = &tt.cores[bond + 1];
        let s = linalg::singular_values(&c.data, c.left, c.phys * c.right)?;
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm("tensor train has zero norm".into()));
        }
        Ok(Spectrum::from_raw(s.into_iter().map(|v| v / norm).collect()))
    }

    /// Half-cut spectrum at bond `⌊N/2⌋` (left block of `⌊N/2⌋` sites).
    pub fn halfcut_spectrum(&self) -> Result<Spectrum> {
        let n = self.len();
        if n < 2 {
            return Err(Error::InvalidArgument("half-cut spectrum needs at least 2 sites".into()));
        }
        self.bond_spectrum(n / 2 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::{flat_index, multi_indices};
    use rand::Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::seed::rng(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn ones_from_dense_is_rank_one() {
        let tt = TensorTrain::from_dense(&[1.0; 4], &[2, 2], 1e-12, usize::MAX).unwrap();
        assert_eq!(tt.ranks(), vec![1]);
        for v in tt.to_dense() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_dense_roundtrip_exact() {
        let dims = [2, 2, 2, 2, 2, 2];
        let v = random_vec(64, 3);
        let tt = TensorTrain::from_dense(&v, &dims, 0.0, usize::MAX).unwrap();
        let back = tt.to_dense();
        let err = v.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "err = {err}");
        for idx in multi_indices(&dims).step_by(7) {
            let x = tt.eval(&idx).unwrap();
            assert!((x - v[flat_index(&idx, &dims)]).abs() <= 1e-12 * v[flat_index(&idx, &dims)].abs().max(1.0));
        }
    }

    #[test]
    fn from_dense_rejects_length_mismatch() {
        assert!(matches!(
            TensorTrain::from_dense(&[1.0; 5], &[2, 2], 0.0, 4),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn compress_separable_to_rank_one() {
        // rank-4 representation of a product function: sum of 4 identical terms
        let f = TensorTrain::product(&[vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 1.0], vec![1.0, 1.5]]).unwrap();
        let mut big = f.clone();
        for _ in 0..3 {
            big = big.add(&f).unwrap();
        }
        assert_eq!(big.max_rank(), 4);
        let c = big.compress_svd(1e-12, usize::MAX).unwrap();
        assert_eq!(c.ranks(), vec![1, 1, 1]);
        for (a, b) in big.to_dense().iter().zip(c.to_dense()) {
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn lossless_compression_keeps_values() {
        let dims = [2, 3, 2, 2];
        let v = random_vec(24, 11);
        let tt = TensorTrain::from_dense(&v, &dims, 0.0, usize::MAX).unwrap();
        let c = tt.compress_svd(0.0, usize::MAX).unwrap();
        for (a, b) in tt.to_dense().iter().zip(c.to_dense()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn compression_respects_max_rank_and_error_bound() {
        let dims = [2; 8];
        let v = random_vec(256, 4);
        let tt = TensorTrain::from_dense(&v, &dims, 0.0, usize::MAX).unwrap();
        let tol = 0.3;
        let c = tt.compress_svd(tol, usize::MAX).unwrap();
        let diff: f64 = tt.to_dense().iter().zip(c.to_dense()).map(|(a, b)| (a - b) * (a - b)).sum();
        let rel = diff.sqrt() / tt.norm();
        assert!(rel <= tol * (8f64).sqrt(), "rel = {rel}");
        let capped = tt.compress_svd(0.0, 3).unwrap();
        assert!(capped.max_rank() <= 3);
    }

    #[test]
    fn product_spectrum_is_rank_one() {
        let tt = TensorTrain::ones(&[2; 6]).unwrap();
        let s = tt.halfcut_spectrum().unwrap();
        assert!((s.get(1) - 1.0).abs() < 1e-12);
        assert_eq!(s.nonzero(), 1);
    }

    #[test]
    fn spectrum_matches_dense_svd() {
        let dims = [2; 6];
        let v = random_vec(64, 21);
        let tt = TensorTrain::from_dense(&v, &dims, 0.0, usize::MAX).unwrap();
        let s = tt.halfcut_spectrum().unwrap();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let w: Vec<f64> = v.iter().map(|x| x / norm).collect();
        let direct = crate::linalg::singular_values(&w, 8, 8).unwrap();
        for (a, b) in s.values().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.sum_squares() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_rejects_zero_norm() {
        let z = TensorTrain::product(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(z.halfcut_spectrum(), Err(Error::ZeroNorm(_))));
    }
}
