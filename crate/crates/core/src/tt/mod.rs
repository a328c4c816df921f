//! Tensor-train container and exact linear-algebra operations on it.
//!
//! A [`TensorTrain`] over per-site dimensions `d₁..d_N` stores `N` real cores
//! of shape `(r_{ℓ-1}, d_ℓ, r_ℓ)` with `r₀ = r_N = 1`. Multi-indices are
//! big-endian throughout: the first site is the slowest-varying digit of a
//! flattened index.

mod compress;
pub mod io;

use std::fmt;

use crate::{Error, Result};

pub use compress::Spectrum;

/// One 3-index core, stored row-major as `data[(a * phys + i) * right + b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Core {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != left * phys * right {
            return Err(Error::InvalidTensorTrain(format!(
                "core data length {} does not match shape ({left}, {phys}, {right})",
                data.len()
            )));
        }
        Ok(Self { left, phys, right, data })
    }

    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Self { left, phys, right, data: vec![0.0; left * phys * right] }
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.left, self.phys, self.right]
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.phys + i) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, b: usize, v: f64) {
        self.data[(a * self.phys + i) * self.right + b] = v;
    }

    /// The `left × right` matrix selected by physical index `i`, row-major.
    pub fn slice(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.left * self.right);
        for a in 0..self.left {
            let start = (a * self.phys + i) * self.right;
            out.extend_from_slice(&self.data[start..start + self.right]);
        }
        out
    }
}

/// A chain of real 3-index cores.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTrain {
    dims: Vec<usize>,
    cores: Vec<Core>,
}

impl TensorTrain {
    /// Builds a tensor train, checking bond consistency, boundary ranks and
    /// finiteness.
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidTensorTrain("no cores".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(Error::InvalidTensorTrain("boundary ranks must be 1".into()));
        }
        for (l, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::InvalidTensorTrain(format!(
                    "bond {l}: right rank {} != left rank {}",
                    w[0].right, w[1].left
                )));
            }
        }
        for (l, c) in cores.iter().enumerate() {
            if c.phys == 0 || c.left == 0 || c.right == 0 {
                return Err(Error::InvalidTensorTrain(format!("core {l} has a zero dimension")));
            }
            if let Some(v) = c.data.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidTensorTrain(format!("core {l} holds non-finite entry {v}")));
            }
        }
        let dims = cores.iter().map(|c| c.phys).collect();
        Ok(Self { dims, cores })
    }

    /// Rank-1 train whose every entry is 1.
    pub fn ones(dims: &[usize]) -> Result<Self> {
        let cores = dims.iter().map(|&d| Core::new(1, d, 1, vec![1.0; d])).collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Rank-1 train `F(i) = Π_ℓ f_ℓ(i_ℓ)`.
    pub fn product(factors: &[Vec<f64>]) -> Result<Self> {
        let cores = factors
            .iter()
            .map(|f| Core::new(1, f.len(), 1, f.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Entry-wise sum; the bond ranks add.
    pub fn add(&self, other: &TensorTrain) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let n = self.len();
        if n == 1 {
            let data = self.cores[0].data.iter().zip(&other.cores[0].data).map(|(a, b)| a + b).collect();
            return Self::new(vec![Core::new(1, self.dims[0], 1, data)?]);
        }
        let mut cores = Vec::with_capacity(n);
        for l in 0..n {
            let (a, b) = (&self.cores[l], &other.cores[l]);
            let d = a.phys;
            let left = if l == 0 { 1 } else { a.left + b.left };
            let right = if l == n - 1 { 1 } else { a.right + b.right };
            let mut c = Core::zeros(left, d, right);
            let (ao_l, bo_l) = (0, if l == 0 { 0 } else { a.left });
            let (ao_r, bo_r) = (0, if l == n - 1 { 0 } else { a.right });
            for i in 0..d {
                for x in 0..a.left {
                    for y in 0..a.right {
                        c.set(ao_l + x, i, ao_r + y, a.get(x, i, y));
                    }
                }
                for x in 0..b.left {
                    for y in 0..b.right {
                        let v = c.get(bo_l + x, i, bo_r + y) + b.get(x, i, y);
                        c.set(bo_l + x, i, bo_r + y, v);
                    }
                }
            }
            cores.push(c);
        }
        Self::new(cores)
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<Core> {
        self.cores
    }

    /// Bond ranks `r₁..r_{N-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.len() - 1].iter().map(|c| c.right).collect()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// Mean bond rank (1 for a single-site train).
    pub fn mean_rank(&self) -> f64 {
        let r = self.ranks();
        if r.is_empty() {
            1.0
        } else {
            r.iter().sum::<usize>() as f64 / r.len() as f64
        }
    }

    /// Number of entries `Π d_ℓ`, saturating.
    pub fn full_size(&self) -> usize {
        self.dims.iter().fold(1usize, |acc, &d| acc.saturating_mul(d))
    }

    pub fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.len() {
            return Err(Error::IndexLength { expected: self.len(), got: idx.len() });
        }
        for (position, (&value, &dim)) in idx.iter().zip(&self.dims).enumerate() {
            if value >= dim {
                return Err(Error::IndexOutOfRange { position, value, dim });
            }
        }
        Ok(())
    }

    /// Evaluates one entry by contracting the selected slices left to right.
    pub fn eval(&self, idx: &[usize]) -> Result<f64> {
        self.check_index(idx)?;
        Ok(self.eval_unchecked(idx))
    }

    pub(crate) fn eval_unchecked(&self, idx: &[usize]) -> f64 {
        let mut v = vec![1.0];
        let mut next = Vec::new();
        for (c, &i) in self.cores.iter().zip(idx) {
            next.clear();
            next.resize(c.right, 0.0);
            for (a, &va) in v.iter().enumerate() {
                if va == 0.0 {
                    continue;
                }
                let row = &c.data[(a * c.phys + i) * c.right..(a * c.phys + i + 1) * c.right];
                for (n, r) in next.iter_mut().zip(row) {
                    *n += va * r;
                }
            }
            std::mem::swap(&mut v, &mut next);
        }
        v[0]
    }

    /// All entries in big-endian order.
    pub fn to_dense(&self) -> Vec<f64> {
        // acc: (prefix configurations) × rank
        let mut acc = vec![1.0];
        let mut rows = 1usize;
        let mut rank = 1usize;
        for c in &self.cores {
            let mut next = vec![0.0; rows * c.phys * c.right];
            for p in 0..rows {
                for a in 0..rank {
                    let x = acc[p * rank + a];
                    if x == 0.0 {
                        continue;
                    }
                    for i in 0..c.phys {
                        let src = &c.data[(a * c.phys + i) * c.right..(a * c.phys + i + 1) * c.right];
                        let dst = &mut next[(p * c.phys + i) * c.right..(p * c.phys + i + 1) * c.right];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += x * s;
                        }
                    }
                }
            }
            rows *= c.phys;
            rank = c.right;
            acc = next;
        }
        acc
    }

    /// `Σ_idx a(idx)·b(idx)` by transfer-matrix contraction.
    pub fn inner(&self, other: &TensorTrain) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        // env: ra × rb
        let mut env = vec![1.0];
        let (mut ra, mut rb) = (1usize, 1usize);
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let d = a.phys;
            let (na, nb) = (a.right, b.right);
            // tmp[(i, y), x'] = Σ_x env[x, y] a[x, i, x']
            let mut tmp = vec![0.0; d * rb * na];
            for x in 0..ra {
                for y in 0..rb {
                    let e = env[x * rb + y];
                    if e == 0.0 {
                        continue;
                    }
                    for i in 0..d {
                        let src = &a.data[(x * d + i) * na..(x * d + i + 1) * na];
                        let dst = &mut tmp[(i * rb + y) * na..(i * rb + y + 1) * na];
                        for (t, s) in dst.iter_mut().zip(src) {
                            *t += e * s;
                        }
                    }
                }
            }
            // env'[x', y'] = Σ_{i, y} tmp[(i, y), x'] b[y, i, y']
            let mut next = vec![0.0; na * nb];
            for i in 0..d {
                for y in 0..rb {
                    let brow = &b.data[(y * d + i) * nb..(y * d + i + 1) * nb];
                    for xp in 0..na {
                        let t = tmp[(i * rb + y) * na + xp];
                        if t == 0.0 {
                            continue;
                        }
                        let dst = &mut next[xp * nb..(xp + 1) * nb];
                        for (n, bv) in dst.iter_mut().zip(brow) {
                            *n += t * bv;
                        }
                    }
                }
            }
            env = next;
            ra = na;
            rb = nb;
        }
        Ok(env[0])
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|v| v.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Multiplies every entry by `factor` (applied to the first core).
    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.cores[0].data {
            *v *= factor;
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale(factor);
        self
    }
}

impl fmt::Display for TensorTrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorTrain(dims={:?}, ranks={:?})", self.dims, self.ranks())
    }
}

/// Iterates all multi-indices of `dims` in big-endian order.
pub fn multi_indices(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; dims.len()];
        for (slot, &d) in idx.iter_mut().zip(dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        idx
    })
}

/// Flattens a multi-index in big-endian order.
pub fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}
