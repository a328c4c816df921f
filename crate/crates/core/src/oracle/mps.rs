//! Complex matrix product states and their entanglement features.

use std::path::Path;

use super::{DenseState, Partition};
use crate::tt::io::{read_json, write_json, CoreFile, TtFile, FORMAT_VERSION};
use crate::tt::{Core, TensorTrain};
use crate::{Error, Result, C64};

/// Largest bond dimension accepted by the EF construction (`φ⁴` virtual
/// space per site).
pub const MAX_EF_BOND: usize = 6;

/// Imaginary residue tolerated in the realified EF cores, relative to the
/// largest entry.
const IMAG_TOL: f64 = 1e-12;

/// Complex MPS core of shape `(left, phys, right)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsCore {
    pub left: usize,
    pub phys: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl MpsCore {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if left * phys * right != data.len() || phys == 0 || left == 0 || right == 0 {
            return Err(Error::InvalidTensorTrain(format!(
                "core shape ({left},{phys},{right}) with {} entries",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidTensorTrain("non-finite core entry".into()));
        }
        Ok(Self { left, phys, right, data })
    }

    #[inline]
    pub fn get(&self, a: usize, s: usize, b: usize) -> C64 {
        self.data[(a * self.phys + s) * self.right + b]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    cores: Vec<MpsCore>,
}

impl Mps {
    pub fn new(cores: Vec<MpsCore>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidTensorTrain("MPS needs at least one core".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(Error::InvalidTensorTrain("boundary bonds must be 1".into()));
        }
        for (l, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::InvalidTensorTrain(format!("bond mismatch between cores {l} and {}", l + 1)));
            }
        }
        Ok(Self { cores })
    }

    pub fn cores(&self) -> &[MpsCore] {
        &self.cores
    }

    pub fn n_sites(&self) -> usize {
        self.cores.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.phys).collect()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1].iter().map(|c| c.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Dense amplitude vector, big-endian.
    pub fn to_dense(&self) -> Result<DenseState> {
        let mut cur = vec![C64::new(1.0, 0.0)];
        let mut left = 1;
        for c in &self.cores {
            let n = cur.len() / left;
            let mut next = vec![C64::new(0.0, 0.0); n * c.phys * c.right];
            for x in 0..n {
                for a in 0..left {
                    let v = cur[x * left + a];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..c.phys {
                        for b in 0..c.right {
                            next[(x * c.phys + s) * c.right + b] += v * c.get(a, s, b);
                        }
                    }
                }
            }
            cur = next;
            left = c.right;
        }
        DenseState::new(self.dims(), cur)
    }

    pub fn norm_sqr(&self) -> f64 {
        // ⟨ψ|ψ⟩ by transfer matrices
        let mut env = vec![C64::new(1.0, 0.0)];
        let mut left = 1;
        for c in &self.cores {
            let r = c.right;
            let mut next = vec![C64::new(0.0, 0.0); r * r];
            for a in 0..left {
                for a2 in 0..left {
                    let e = env[a * left + a2];
                    for s in 0..c.phys {
                        for b in 0..r {
                            let x = e * c.get(a, s, b);
                            for b2 in 0..r {
                                next[b * r + b2] += x * c.get(a2, s, b2).conj();
                            }
                        }
                    }
                }
            }
            env = next;
            left = r;
        }
        env[0].re
    }

    /// Reorders sites: new site `j` is old site `perm[j]`. Bonds are not
    /// preserved, so this goes through the dense state.
    pub fn permuted_dense(&self, perm: &[usize]) -> Result<DenseState> {
        let d = self.to_dense()?;
        permute_dense(&d, perm)
    }

    pub fn to_file(&self) -> TtFile {
        TtFile {
            version: FORMAT_VERSION,
            dims: self.dims(),
            cores: self
                .cores
                .iter()
                .map(|c| CoreFile {
                    shape: [c.left, c.phys, c.right],
                    data: c.data.iter().map(|z| z.re).collect(),
                    imag: Some(c.data.iter().map(|z| z.im).collect()),
                })
                .collect(),
        }
    }

    pub fn from_file(f: TtFile) -> Result<Self> {
        f.check()?;
        let cores = f
            .cores
            .into_iter()
            .map(|c| {
                let im = c.imag.unwrap_or_else(|| vec![0.0; c.data.len()]);
                let data = c.data.iter().zip(&im).map(|(&re, &im)| C64::new(re, im)).collect();
                MpsCore::new(c.shape[0], c.shape[1], c.shape[2], data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, &self.to_file())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(read_json(path)?)
    }
}

impl From<&TensorTrain> for Mps {
    fn from(tt: &TensorTrain) -> Self {
        let cores = tt
            .cores()
            .iter()
            .map(|c| MpsCore {
                left: c.left(),
                phys: c.phys(),
                right: c.right(),
                data: c.data().iter().map(|&x| C64::new(x, 0.0)).collect(),
            })
            .collect();
        Mps { cores }
    }
}

/// Site permutation of a dense state: new site `j` is old site `perm[j]`.
pub fn permute_dense(state: &DenseState, perm: &[usize]) -> Result<DenseState> {
    let l = state.n_sites();
    check_perm(perm, l)?;
    let old = state.dims();
    let new_dims: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
    let mut old_stride = vec![1usize; l];
    for i in (0..l.saturating_sub(1)).rev() {
        old_stride[i] = old_stride[i + 1] * old[i + 1];
    }
    let n = state.amps().len();
    let mut amps = Vec::with_capacity(n);
    let mut digits = vec![0usize; l];
    for _ in 0..n {
        let src: usize = digits.iter().enumerate().map(|(j, &v)| v * old_stride[perm[j]]).sum();
        amps.push(state.amps()[src]);
        for j in (0..l).rev() {
            digits[j] += 1;
            if digits[j] < new_dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    DenseState::new(new_dims, amps)
}

pub(crate) fn check_perm(perm: &[usize], l: usize) -> Result<()> {
    let mut seen = vec![false; l];
    if perm.len() != l {
        return Err(Error::InvalidArgument(format!("permutation of length {} for {l} sites", perm.len())));
    }
    for &p in perm {
        if p >= l || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Column `x` of the unitary `V` realifying the four-copy transfer space:
/// sparse list of `(row, coefficient)`.
fn realifying_basis(phi: usize) -> Vec<Vec<(usize, C64)>> {
    let n = phi.pow(4);
    let swap = |x: usize| {
        let (a1, rest) = (x / phi.pow(3), x % phi.pow(3));
        let (a2, rest) = (rest / phi.pow(2), rest % phi.pow(2));
        let (a3, a4) = (rest / phi, rest % phi);
        ((a2 * phi + a1) * phi + a4) * phi + a3
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols = vec![Vec::new(); n];
    for a in 0..n {
        let b = swap(a);
        if a == b {
            cols[a] = vec![(a, C64::new(1.0, 0.0))];
        } else if a < b {
            cols[a] = vec![(a, C64::new(h, 0.0)), (b, C64::new(h, 0.0))];
            cols[b] = vec![(a, C64::new(0.0, h)), (b, C64::new(0.0, -h))];
        }
    }
    cols
}

/// Builds the natural-basis entanglement feature of `mps` as a real tensor
/// train with bond dimension `φ⁴`, normalized so the empty mask evaluates to
/// exactly 1.
pub fn mps_ef_build(mps: &Mps) -> Result<TensorTrain> {
    if mps.max_bond() > MAX_EF_BOND {
        return Err(Error::InvalidArgument(format!(
            "bond dimension {} exceeds the supported {MAX_EF_BOND}",
            mps.max_bond()
        )));
    }
    let mut cores = Vec::with_capacity(mps.n_sites());
    let mut imag_max: f64 = 0.0;
    let mut real_max: f64 = 0.0;
    for c in mps.cores() {
        let (l, r, d) = (c.left, c.right, c.phys);
        let (l4, r4) = (l.pow(4), r.pow(4));
        let vl = realifying_basis(l);
        let vr = realifying_basis(r);
        let mut data = vec![0.0; l4 * 2 * r4];
        let mut raw = vec![C64::new(0.0, 0.0); l4 * r4];
        for bit in 0..2 {
            raw.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for s in 0..d {
                for t in 0..d {
                    let (u2, u4) = if bit == 0 { (s, t) } else { (t, s) };
                    for a1 in 0..l {
                        for a2 in 0..l {
                            for a3 in 0..l {
                                for a4 in 0..l {
                                    let row = ((a1 * l + a2) * l + a3) * l + a4;
                                    for b1 in 0..r {
                                        let x1 = c.get(a1, s, b1);
                                        for b2 in 0..r {
                                            let x2 = x1 * c.get(a2, u2, b2).conj();
                                            for b3 in 0..r {
                                                let x3 = x2 * c.get(a3, t, b3);
                                                let base = row * r4 + ((b1 * r + b2) * r + b3) * r;
                                                for b4 in 0..r {
                                                    raw[base + b4] += x3 * c.get(a4, u4, b4).conj();
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            // E' = V_l† E V_r
            for (x, colx) in vl.iter().enumerate() {
                for (y, coly) in vr.iter().enumerate() {
                    let mut z = C64::new(0.0, 0.0);
                    for &(i, vi) in colx {
                        for &(j, vj) in coly {
                            z += vi.conj() * raw[i * r4 + j] * vj;
                        }
                    }
                    imag_max = imag_max.max(z.im.abs());
                    real_max = real_max.max(z.re.abs());
                    data[(x * 2 + bit) * r4 + y] = z.re;
                }
            }
        }
        cores.push(Core::new(l4, 2, r4, data)?);
    }
    if imag_max > IMAG_TOL * real_max {
        return Err(Error::Numerical(format!(
            "EF transfer cores retain imaginary part {imag_max:e} (scale {real_max:e})"
        )));
    }
    let mut tt = TensorTrain::new(cores)?;
    let z = tt.eval(&vec![0; tt.len()])?;
    if !(z > 0.0) {
        return Err(Error::ZeroNorm("MPS has zero norm".into()));
    }
    tt.scale(1.0 / z);
    Ok(tt)
}

/// Single-mask purity by direct four-copy contraction, `O(φ⁵ d⁴)` per site.
pub fn purity_mps(mps: &Mps, p: &Partition) -> Result<f64> {
    if p.len() != mps.n_sites() {
        return Err(Error::DimMismatch(format!("mask over {} sites for a {}-site MPS", p.len(), mps.n_sites())));
    }
    if p.is_empty() || p.is_full() {
        return Ok(1.0);
    }
    let num = four_copy(mps, p);
    let den = four_copy(mps, &Partition::empty(p.len())?);
    if !(den > 0.0) {
        return Err(Error::ZeroNorm("MPS has zero norm".into()));
    }
    Ok(num / den)
}

fn four_copy(mps: &Mps, p: &Partition) -> f64 {
    let zero = C64::new(0.0, 0.0);
    let mut env = vec![C64::new(1.0, 0.0)];
    for (site, c) in mps.cores().iter().enumerate() {
        let (l, r, d) = (c.left, c.right, c.phys);
        let swap = p.contains(site);
        let mut next = vec![zero; r.pow(4)];
        // Contract one copy at a time; each step trades an `a` leg for a `b`.
        for s in 0..d {
            for t in 0..d {
                let (u2, u4) = if swap { (t, s) } else { (s, t) };
                // step 1: [a1 a2 a3 a4] -> [b1 a2 a3 a4]
                let mut t1 = vec![zero; r * l * l * l];
                for a1 in 0..l {
                    for b1 in 0..r {
                        let x = c.get(a1, s, b1);
                        for rest in 0..l * l * l {
                            t1[b1 * l * l * l + rest] += x * env[a1 * l * l * l + rest];
                        }
                    }
                }
                // step 2: [b1 a2 a3 a4] -> [b1 b2 a3 a4]
                let mut t2 = vec![zero; r * r * l * l];
                for b1 in 0..r {
                    for a2 in 0..l {
                        for b2 in 0..r {
                            let x = c.get(a2, u2, b2).conj();
                            for rest in 0..l * l {
                                t2[(b1 * r + b2) * l * l + rest] += x * t1[(b1 * l + a2) * l * l + rest];
                            }
                        }
                    }
                }
                // step 3: [b1 b2 a3 a4] -> [b1 b2 b3 a4]
                let mut t3 = vec![zero; r * r * r * l];
                for b12 in 0..r * r {
                    for a3 in 0..l {
                        for b3 in 0..r {
                            let x = c.get(a3, t, b3);
                            for a4 in 0..l {
                                t3[(b12 * r + b3) * l + a4] += x * t2[(b12 * l + a3) * l + a4];
                            }
                        }
                    }
                }
                // step 4: [b1 b2 b3 a4] -> [b1 b2 b3 b4]
                for b123 in 0..r * r * r {
                    for a4 in 0..l {
                        let v = t3[b123 * l + a4];
                        for b4 in 0..r {
                            next[b123 * r + b4] += v * c.get(a4, u4, b4).conj();
                        }
                    }
                }
            }
        }
        env = next;
    }
    env[0].re
}
