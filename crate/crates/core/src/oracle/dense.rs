use std::fs;
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::Partition;
use crate::linalg;
use crate::{Error, Result, C64};

const MAGIC: &[u8; 8] = b"EFTCIST1";

/// Pure state on `L` qudits, amplitudes in big-endian order (site 0 slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    /// `tr ρ_A²`.
    #[default]
    Renyi2,
    /// `exp(−S_vN)`.
    VonNeumann,
}

impl DenseState {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("bad local dimensions {dims:?}")));
        }
        let n = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if n != Some(amps.len()) {
            return Err(Error::DimMismatch(format!("{} amplitudes for dims {dims:?}", amps.len())));
        }
        if let Some(k) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite { index: vec![k], value: amps[k].norm() });
        }
        Ok(Self { dims, amps })
    }

    pub fn qubits(amps: Vec<C64>) -> Result<Self> {
        let l = amps.len().trailing_zeros() as usize;
        if !amps.len().is_power_of_two() || l == 0 {
            return Err(Error::DimMismatch(format!("{} is not a power of two >= 2", amps.len())));
        }
        Self::new(vec![2; l], amps)
    }

    /// `|0…0⟩`.
    pub fn product(dims: Vec<usize>) -> Result<Self> {
        let n = dims.iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); n];
        if n > 0 {
            amps[0] = C64::new(1.0, 0.0);
        }
        Self::new(dims, amps)
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm("state has zero norm".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    /// Reshapes into the `d_A × d_{A^c}` matrix with both index groups in
    /// ascending site order.
    pub fn bipartite_matrix(&self, p: &Partition) -> Result<Mat<C64>> {
        if p.len() != self.n_sites() {
            return Err(Error::DimMismatch(format!("mask over {} sites for a {}-site state", p.len(), self.n_sites())));
        }
        let l = self.n_sites();
        let mut stride = vec![1usize; l];
        for i in (0..l.saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * self.dims[i + 1];
        }
        let offsets = |sites: &[usize]| -> Vec<usize> {
            let mut offs = vec![0usize];
            for &s in sites {
                let mut next = Vec::with_capacity(offs.len() * self.dims[s]);
                for &o in &offs {
                    for v in 0..self.dims[s] {
                        next.push(o + v * stride[s]);
                    }
                }
                offs = next;
            }
            offs
        };
        let a = offsets(&p.sites());
        let b = offsets(&p.complement().sites());
        Ok(Mat::from_fn(a.len(), b.len(), |i, j| self.amps[a[i] + b[j]]))
    }

    pub fn write_bin(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_bin(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Binary layout: magic, `u32` L, `L × u32` dims, then interleaved
    /// re/im `f64`; all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.dims.len() + 16 * self.amps.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |what: &str| Error::Format(format!("state file: {what}"));
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(bad("missing magic header"));
        }
        let u32_at = |k: usize| -> Result<u32> {
            bytes
                .get(k..k + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| bad("truncated header"))
        };
        let l = u32_at(8)? as usize;
        let dims = (0..l).map(|i| u32_at(12 + 4 * i).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let body = &bytes[12 + 4 * l..];
        if body.len() % 16 != 0 {
            return Err(bad("amplitude block is not a multiple of 16 bytes"));
        }
        let amps = body
            .chunks_exact(16)
            .map(|c| {
                C64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap()))
            })
            .collect();
        Self::new(dims, amps)
    }
}

/// Purity `tr ρ_A² / (tr ρ)²` of the dense state (or `e^{−S_vN}`).
pub fn purity_dense(state: &DenseState, p: &Partition, kind: EntropyKind) -> Result<f64> {
    if p.len() != state.n_sites() {
        return Err(Error::DimMismatch(format!("mask over {} sites for a {}-site state", p.len(), state.n_sites())));
    }
    if state.norm() == 0.0 {
        return Err(Error::ZeroNorm("state has zero norm".into()));
    }
    if p.is_empty() || p.is_full() {
        return Ok(1.0);
    }
    let m = state.bipartite_matrix(p)?;
    match kind {
        EntropyKind::Renyi2 => {
            let rho = if m.nrows() <= m.ncols() { &m * m.adjoint() } else { m.adjoint() * &m };
            let n = rho.nrows();
            let mut tr = 0.0;
            let mut sq = 0.0;
            for j in 0..n {
                tr += rho[(j, j)].re;
                for i in 0..n {
                    sq += rho[(i, j)].norm_sqr();
                }
            }
            Ok(sq / (tr * tr))
        }
        EntropyKind::VonNeumann => {
            let s = linalg::singular_values_complex(&m)?;
            let total: f64 = s.iter().map(|v| v * v).sum();
            let ent: f64 = s
                .iter()
                .map(|v| v * v / total)
                .filter(|&q| q > 0.0)
                .map(|q| q * q.ln())
                .sum();
            Ok(ent.exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell_times_zero() -> DenseState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = vec![c(0.0); 8];
        a[0b000] = c(h);
        a[0b110] = c(h);
        DenseState::qubits(a).unwrap()
    }

    #[test]
    fn worked_example() {
        let s = bell_times_zero();
        let p = |m: &str| purity_dense(&s, &m.parse().unwrap(), EntropyKind::Renyi2).unwrap();
        assert!((p("100") - 0.5).abs() < 1e-14);
        assert!((p("110") - 1.0).abs() < 1e-14);
        assert!((p("001") - 1.0).abs() < 1e-14);
        assert_eq!(p("000"), 1.0);
    }

    #[test]
    fn w_state() {
        let t = 1.0 / 3f64.sqrt();
        let mut a = vec![c(0.0); 8];
        a[0b100] = c(t);
        a[0b010] = c(t);
        a[0b001] = c(t);
        let s = DenseState::qubits(a).unwrap();
        let v = purity_dense(&s, &"100".parse().unwrap(), EntropyKind::Renyi2).unwrap();
        assert!((v - 5.0 / 9.0).abs() < 1e-14);
        let vn = purity_dense(&s, &"100".parse().unwrap(), EntropyKind::VonNeumann).unwrap();
        let expect = (2.0 / 3.0 * (2.0f64 / 3.0).ln() + 1.0 / 3.0 * (1.0f64 / 3.0).ln()).exp();
        assert!((vn - expect).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_state_is_fine() {
        let mut s = bell_times_zero();
        s.amps.iter_mut().for_each(|a| *a *= 3.0);
        let v = purity_dense(&s, &"010".parse().unwrap(), EntropyKind::Renyi2).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn product_state_all_ones() {
        let s = DenseState::product(vec![3, 2, 5]).unwrap();
        for bits in 0..8 {
            let v = purity_dense(&s, &Partition::new(3, bits).unwrap(), EntropyKind::Renyi2).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_state_rejected() {
        let s = DenseState::qubits(vec![c(0.0); 4]).unwrap();
        assert!(matches!(purity_dense(&s, &"10".parse().unwrap(), EntropyKind::Renyi2), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn binary_roundtrip() {
        let s = DenseState::new(vec![3, 2], (0..6).map(|k| C64::new(k as f64, -0.5 * k as f64)).collect()).unwrap();
        let back = DenseState::from_bytes(&s.to_bytes()).unwrap();
        assert_eq!(s, back);
        assert!(DenseState::from_bytes(b"garbage!").is_err());
    }
}
