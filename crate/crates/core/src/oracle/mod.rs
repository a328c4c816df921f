//! Purity backends and the adapters turning them into cross-interpolation
//! oracles over natural, dual and fixed-size index spaces.

mod dense;
mod fermion;
mod fixed_size;
mod mps;
mod partition;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::IndexSpace;
use crate::{Error, Result};

pub use dense::{purity_dense, DenseState, EntropyKind};
pub use fermion::{purity_fermionic, reduced_density_fermionic, FermionState, MAX_FERMION_MODES};
pub use fixed_size::{fixed_size_decode, fixed_size_dims, fixed_size_encode, fixed_size_select};
pub use mps::{mps_ef_build, permute_dense, purity_mps, Mps, MpsCore, MAX_EF_BOND};
pub use partition::{dual_to_natural, natural_to_dual, DualIndex, Partition, MAX_SITES};

/// A pure-state purity function over bipartitions of `n_sites` sites.
pub trait PurityBackend: Send + Sync {
    fn n_sites(&self) -> usize;
    fn purity(&self, p: &Partition) -> Result<f64>;
}

impl<B: PurityBackend + ?Sized> PurityBackend for &B {
    fn n_sites(&self) -> usize {
        (**self).n_sites()
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        (**self).purity(p)
    }
}

impl<B: PurityBackend + ?Sized> PurityBackend for Box<B> {
    fn n_sites(&self) -> usize {
        (**self).n_sites()
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        (**self).purity(p)
    }
}

/// Dense state with a chosen entropy kind.
#[derive(Clone, Debug)]
pub struct DenseBackend {
    pub state: DenseState,
    pub kind: EntropyKind,
}

impl DenseBackend {
    pub fn new(state: DenseState) -> Self {
        Self { state, kind: EntropyKind::Renyi2 }
    }
}

impl PurityBackend for DenseBackend {
    fn n_sites(&self) -> usize {
        self.state.n_sites()
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        purity_dense(&self.state, p, self.kind)
    }
}

impl PurityBackend for DenseState {
    fn n_sites(&self) -> usize {
        DenseState::n_sites(self)
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        purity_dense(self, p, EntropyKind::Renyi2)
    }
}

impl PurityBackend for FermionState {
    fn n_sites(&self) -> usize {
        self.n_modes()
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        purity_fermionic(self, p)
    }
}

impl PurityBackend for Mps {
    fn n_sites(&self) -> usize {
        Mps::n_sites(self)
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        purity_mps(self, p)
    }
}

/// Average Haar purity `d^{−|A|} + d^{−(L−|A|)}`, clipped to 1 for the empty
/// and full masks.
pub fn purity_haar_analytic(l: usize, d: usize, p: &Partition) -> f64 {
    if p.is_empty() || p.is_full() {
        1.0
    } else {
        haar_ef_formula(l, d, p.size())
    }
}

/// Unclipped formula; a sum of two product functions of the mask.
pub fn haar_ef_formula(l: usize, d: usize, k: usize) -> f64 {
    let d = d as f64;
    d.powi(-(k as i32)) + d.powi(-((l - k) as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarAnalytic {
    pub n_sites: usize,
    pub d: usize,
    /// Pin empty/full masks to 1 (default). Without the clip the EF is an
    /// exact rank-2 tensor train.
    pub clip: bool,
}

impl HaarAnalytic {
    pub fn new(n_sites: usize, d: usize) -> Result<Self> {
        if d < 2 || n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::InvalidArgument(format!("Haar formula needs d >= 2 and 1..={MAX_SITES} sites")));
        }
        Ok(Self { n_sites, d, clip: true })
    }

    pub fn unclipped(n_sites: usize, d: usize) -> Result<Self> {
        Ok(Self { clip: false, ..Self::new(n_sites, d)? })
    }
}

impl PurityBackend for HaarAnalytic {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        check_len(p, self.n_sites)?;
        Ok(if self.clip {
            purity_haar_analytic(self.n_sites, self.d, p)
        } else {
            haar_ef_formula(self.n_sites, self.d, p.size())
        })
    }
}

/// Precomputed purities of all `2^L` masks, indexed by mask bits.
#[derive(Clone, Debug, PartialEq)]
pub struct PurityTable {
    n_sites: usize,
    values: Vec<f64>,
}

/// Largest site count for which full tables are built.
pub const MAX_TABLE_SITES: usize = 24;

impl PurityTable {
    /// Enumerates the masks containing site 0 and fills complements by the
    /// `A ↔ A^c` symmetry of pure-state purities.
    pub fn build<B: PurityBackend + ?Sized>(backend: &B) -> Result<Self> {
        let l = backend.n_sites();
        if l > MAX_TABLE_SITES {
            return Err(Error::InvalidArgument(format!("{l} sites is too many to tabulate")));
        }
        let half: Vec<u64> = (0..1u64 << (l - 1)).map(|m| (m << 1) | 1).collect();
        let vals = half
            .par_iter()
            .map(|&bits| backend.purity(&Partition::new(l, bits)?))
            .collect::<Result<Vec<f64>>>()?;
        let mut values = vec![0.0; 1 << l];
        let full = partition::full_bits(l);
        for (&bits, v) in half.iter().zip(vals) {
            values[bits as usize] = v;
            values[(!bits & full) as usize] = v;
        }
        Ok(Self { n_sites: l, values })
    }

    pub fn from_values(n_sites: usize, values: Vec<f64>) -> Result<Self> {
        if n_sites > MAX_TABLE_SITES || values.len() != 1 << n_sites {
            return Err(Error::DimMismatch(format!("{} values for {n_sites} sites", values.len())));
        }
        Ok(Self { n_sites, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values over the dual index space, big-endian in the dual bits.
    pub fn dual_values(&self) -> Vec<f64> {
        let n = self.n_sites - 1;
        (0..1usize << n)
            .map(|flat| {
                let bits: Vec<usize> = (0..n).map(|i| (flat >> (n - 1 - i)) & 1).collect();
                let p = dual_to_natural(&bits).expect("binary digits");
                self.values[p.bits() as usize]
            })
            .collect()
    }
}

impl PurityBackend for PurityTable {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        check_len(p, self.n_sites)?;
        Ok(self.values[p.bits() as usize])
    }
}

/// Backend seen through a site relabeling: new site `j` is site `perm[j]`
/// of the inner backend.
pub struct Permuted<B> {
    inner: B,
    perm: Vec<usize>,
}

impl<B: PurityBackend> Permuted<B> {
    pub fn new(inner: B, perm: Vec<usize>) -> Result<Self> {
        mps::check_perm(&perm, inner.n_sites())?;
        Ok(Self { inner, perm })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }
}

impl<B: PurityBackend> PurityBackend for Permuted<B> {
    fn n_sites(&self) -> usize {
        self.perm.len()
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        check_len(p, self.perm.len())?;
        let sites: Vec<usize> = p.sites().into_iter().map(|j| self.perm[j]).collect();
        self.inner.purity(&Partition::from_sites(self.perm.len(), &sites)?)
    }
}

fn check_len(p: &Partition, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimMismatch(format!("mask over {} sites for a {n}-site backend", p.len())));
    }
    Ok(())
}

/// Query counters. `distinct` counts backend calls (cache misses).
#[derive(Debug, Default)]
pub struct OracleStats {
    distinct: AtomicUsize,
    total: AtomicUsize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsSnapshot {
    pub distinct_queries: usize,
    pub total_queries: usize,
}

impl OracleStats {
    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            distinct_queries: self.distinct.load(Ordering::Relaxed),
            total_queries: self.total.load(Ordering::Relaxed),
        }
    }
}

/// Index basis of an EF oracle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Natural,
    #[default]
    Dual,
}

impl Basis {
    pub fn space(self, n_sites: usize) -> Result<IndexSpace> {
        match self {
            Basis::Natural => IndexSpace::binary(n_sites),
            Basis::Dual if n_sites < 2 => Err(Error::InvalidArgument("dual basis needs at least 2 sites".into())),
            Basis::Dual => IndexSpace::binary(n_sites - 1),
        }
    }

    pub fn decode(self, idx: &[usize]) -> Result<Partition> {
        match self {
            Basis::Natural => Partition::from_index(idx),
            Basis::Dual => dual_to_natural(idx),
        }
    }

    pub fn encode(self, p: &Partition) -> Vec<usize> {
        match self {
            Basis::Natural => p.to_index(),
            Basis::Dual => natural_to_dual(p).0,
        }
    }
}

/// Memoizing front-end of a backend with shared query statistics. The
/// adapters borrow it, so several learners can share one cache.
pub struct CachedOracle<B> {
    backend: B,
    stats: OracleStats,
    cache: RwLock<HashMap<u64, f64>>,
}

impl<B: PurityBackend> CachedOracle<B> {
    pub fn new(backend: B) -> Self {
        Self { backend, stats: OracleStats::default(), cache: RwLock::new(HashMap::new()) }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn n_sites(&self) -> usize {
        self.backend.n_sites()
    }

    pub fn stats(&self) -> StatsSnapshot {
        self.stats.snapshot()
    }

    pub fn purity(&self, p: &Partition) -> Result<f64> {
        check_len(p, self.n_sites())?;
        self.stats.total.fetch_add(1, Ordering::Relaxed);
        if let Some(&v) = self.cache.read().expect("cache lock").get(&p.bits()) {
            return Ok(v);
        }
        let v = self.backend.purity(p)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { index: p.to_index(), value: v });
        }
        self.stats.distinct.fetch_add(1, Ordering::Relaxed);
        self.cache.write().expect("cache lock").insert(p.bits(), v);
        Ok(v)
    }

    /// Oracle over `{0,1}^L`.
    pub fn natural(&self) -> impl Fn(&[usize]) -> Result<f64> + Sync + '_ {
        move |idx| self.purity(&Partition::from_index(idx)?)
    }

    /// Oracle over `{0,1}^{L−1}` (domain walls).
    pub fn dual(&self) -> impl Fn(&[usize]) -> Result<f64> + Sync + '_ {
        move |idx| self.purity(&dual_to_natural(idx)?)
    }

    pub fn in_basis(&self, basis: Basis) -> impl Fn(&[usize]) -> Result<f64> + Sync + '_ {
        move |idx| self.purity(&basis.decode(idx)?)
    }

    /// Oracle over the 0-based fixed-size space with dims
    /// [`fixed_size_dims`]`(pool.len(), k)`; the region is measured against
    /// its complement in the whole system.
    pub fn fixed_size<'a>(&'a self, pool: &'a [usize]) -> impl Fn(&[usize]) -> Result<f64> + Sync + 'a {
        move |idx| {
            let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            self.purity(&fixed_size_decode(&one_based, pool, self.n_sites())?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::multi_indices;
    use crate::C64;
    use rand_distr::{Distribution, StandardNormal};
    use std::collections::HashSet;

    fn random_dense(l: usize, seed: u64) -> DenseState {
        let mut r = crate::seed::rng(seed);
        let amps = (0..1usize << l)
            .map(|_| C64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)))
            .collect();
        DenseState::qubits(amps).unwrap()
    }

    #[test]
    fn haar_formula_values() {
        let p = Partition::from_sites(4, &[0, 1]).unwrap();
        assert_eq!(purity_haar_analytic(4, 2, &p), 0.5);
        assert_eq!(purity_haar_analytic(4, 2, &Partition::empty(4).unwrap()), 1.0);
        let q = Partition::from_sites(10, &[3]).unwrap();
        assert_eq!(purity_haar_analytic(10, 2, &q), 0.501953125);
        assert_eq!(haar_ef_formula(4, 2, 0), 1.0625);
    }

    #[test]
    fn z2_symmetry_and_range() {
        let b = DenseBackend::new(random_dense(6, 4));
        for bits in 0..64u64 {
            let p = Partition::new(6, bits).unwrap();
            let v = b.purity(&p).unwrap();
            let w = b.purity(&p.complement()).unwrap();
            assert!((v - w).abs() < 1e-12);
            let small = p.size().min(6 - p.size());
            assert!(v <= 1.0 + 1e-12 && v >= 0.5f64.powi(small as i32) - 1e-12);
        }
    }

    #[test]
    fn natural_and_dual_agree() {
        let o = CachedOracle::new(DenseBackend::new(random_dense(5, 1)));
        let nat = o.natural();
        let dual = o.dual();
        for x in multi_indices(&[2; 5]) {
            let p = Partition::from_index(&x).unwrap();
            assert_eq!(nat(&x).unwrap(), dual(&natural_to_dual(&p).0).unwrap());
        }
        let s = o.stats();
        assert!(s.distinct_queries <= s.total_queries);
        assert_eq!(s.distinct_queries, 32);
    }

    #[test]
    fn dual_over_product_is_constant() {
        let o = CachedOracle::new(DenseBackend::new(DenseState::product(vec![2; 4]).unwrap()));
        let f = o.dual();
        for x in multi_indices(&[2; 3]) {
            assert!((f(&x).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_size_covers_all_subsets() {
        let o = CachedOracle::new(HaarAnalytic::new(6, 2).unwrap());
        let pool: Vec<usize> = (0..6).collect();
        let f = o.fixed_size(&pool);
        let dims = fixed_size_dims(6, 3);
        let mut seen = HashSet::new();
        for x in multi_indices(&dims) {
            let one: Vec<usize> = x.iter().map(|i| i + 1).collect();
            seen.insert(fixed_size_decode(&one, &pool, 6).unwrap().bits());
            f(&x).unwrap();
        }
        assert_eq!(seen.len(), 20);
        assert_eq!(o.stats().distinct_queries, 20);
    }

    #[test]
    fn table_matches_backend() {
        let b = DenseBackend::new(random_dense(5, 2));
        let t = PurityTable::build(&b).unwrap();
        for bits in 0..32u64 {
            let p = Partition::new(5, bits).unwrap();
            assert!((t.purity(&p).unwrap() - b.purity(&p).unwrap()).abs() < 1e-12);
        }
        let dual = t.dual_values();
        assert_eq!(dual.len(), 16);
        assert_eq!(dual[0], 1.0);
    }

    #[test]
    fn permuted_backend_relabels_sites() {
        let state = random_dense(4, 3);
        let perm = vec![2, 0, 3, 1];
        let pb = Permuted::new(DenseBackend::new(state.clone()), perm.clone()).unwrap();
        let moved = DenseBackend::new(permute_dense(&state, &perm).unwrap());
        for bits in 0..16u64 {
            let p = Partition::new(4, bits).unwrap();
            assert!((pb.purity(&p).unwrap() - moved.purity(&p).unwrap()).abs() < 1e-12);
        }
    }
}
