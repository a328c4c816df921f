//! Divide-and-conquer site reordering guided by bipartite purities.
//!
//! Each level splits its pool of sites into a subset `A` of size
//! `⌊|pool|/2⌋` with (approximately) maximal purity and the rest of the
//! pool, places `A` on the left, and recurses until pools have at most two
//! sites. The split search is a rank-capped TTOpt over the fixed-size index
//! space; purities are always measured against the whole rest of the system.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::analysis::linear_fit;
use crate::cross::{ttopt_max, IndexSpace, InitialPivot, TciOptions};
use crate::oracle::{fixed_size_decode, fixed_size_dims, CachedOracle, Partition, Permuted, PurityBackend};
use crate::seed::{derive_seed, rng};
use crate::zoo::gen_random_mps;
use crate::{Error, Result};

/// A site ordering: `perm[j]` is the original site placed at position `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect() }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `inverse()[site]` is the position of `site`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (j, &p) in self.perm.iter().enumerate() {
            inv[p] = j;
        }
        inv
    }

    /// The first `c` sites in this order, as a partition of the original
    /// system.
    pub fn prefix(&self, c: usize) -> Result<Partition> {
        Partition::from_sites(self.perm.len(), &self.perm[..c])
    }
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(o: Ordering) -> Self {
        o.perm
    }
}

/// Rényi-2 entropy `−ln tr ρ_A²` of every left prefix, cuts `1..L−1`.
pub fn prefix_entropies<B: PurityBackend + ?Sized>(backend: &B, order: &Ordering) -> Result<Vec<f64>> {
    (1..order.len())
        .map(|c| {
            let p = backend.purity(&order.prefix(c)?)?;
            if !(p > 0.0) {
                return Err(Error::Numerical(format!("non-positive purity {p} at cut {c}")));
            }
            Ok((-p.ln()).max(0.0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisentangleOptions {
    pub rank_cap: usize,
    pub seed: u64,
    /// TCI settings of the split search; `seed` is replaced per split.
    pub tci: TciOptions,
}

impl Default for DisentangleOptions {
    fn default() -> Self {
        Self {
            rank_cap: 2,
            seed: 0,
            tci: TciOptions { max_sweeps: 20, initial_pivot: InitialPivot::Random, ..TciOptions::default() },
        }
    }
}

/// Result of one split search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// Chosen sites, ascending.
    pub subset: Vec<usize>,
    /// Purity of `subset` against the rest of the system (fresh call).
    pub purity: f64,
    pub n_evaluations: usize,
}

/// Searches the `k`-subsets of `pool` for the largest purity with TTOpt at
/// rank `rank_cap`. Ties among sampled maxima go to the lexicographically
/// smallest subset.
pub fn best_split<B: PurityBackend>(
    oracle: &CachedOracle<B>,
    pool: &[usize],
    k: usize,
    rank_cap: usize,
    tci: &TciOptions,
) -> Result<Split> {
    if k == 0 || k >= pool.len() {
        return Err(Error::InvalidArgument(format!("split size {k} invalid for a pool of {}", pool.len())));
    }
    let space = IndexSpace::new(fixed_size_dims(pool.len(), k))?;
    let f = oracle.fixed_size(pool);
    let res = ttopt_max(&f, &space, rank_cap, tci)?;
    let best = res.evaluations.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
    let n = oracle.n_sites();
    let subset = res
        .evaluations
        .iter()
        .filter(|e| e.1.abs() == best)
        .map(|(idx, _)| {
            let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            fixed_size_decode(&one_based, pool, n).map(|p| p.sites())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("at least one evaluation");
    let purity = oracle.backend().purity(&Partition::from_sites(n, &subset)?)?;
    Ok(Split { subset, purity, n_evaluations: res.evaluations.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisentangleReport {
    pub ordering: Ordering,
    /// `S₂` of each left prefix in the original order (cut `c` at `c−1`).
    pub entropy_before: Vec<f64>,
    pub entropy_after: Vec<f64>,
    /// Distinct purities computed by the search.
    pub distinct_queries: usize,
    /// Oracle calls including cache hits.
    pub total_queries: usize,
}

impl DisentangleReport {
    /// Cut after `⌊L/2⌋` sites.
    pub fn mid_cut(&self) -> Option<(f64, f64)> {
        let c = (self.ordering.len() / 2).checked_sub(1)?;
        Some((*self.entropy_before.get(c)?, *self.entropy_after.get(c)?))
    }
}

fn split_pool<B: PurityBackend>(
    oracle: &CachedOracle<B>,
    pool: Vec<usize>,
    node: u64,
    opts: &DisentangleOptions,
) -> Result<Vec<usize>> {
    if pool.len() <= 2 {
        return Ok(pool);
    }
    let k = pool.len() / 2;
    let tci = TciOptions { seed: derive_seed(opts.seed, "split", node), ..opts.tci.clone() };
    let split = best_split(oracle, &pool, k, opts.rank_cap, &tci)?;
    log::debug!("split {pool:?} -> {:?} (purity {:.6e})", split.subset, split.purity);
    let rest: Vec<usize> = pool.iter().copied().filter(|s| !split.subset.contains(s)).collect();
    let (left, right) = rayon::join(
        || split_pool(oracle, split.subset.clone(), 2 * node, opts),
        || split_pool(oracle, rest, 2 * node + 1, opts),
    );
    let mut out = left?;
    out.extend(right?);
    Ok(out)
}

/// Recursively reorders the sites of `backend`. Entropy reporting uses
/// direct backend calls that are not counted as search queries.
pub fn disentangle<B: PurityBackend>(backend: B, opts: &DisentangleOptions) -> Result<DisentangleReport> {
    if opts.rank_cap == 0 {
        return Err(Error::InvalidArgument("rank cap must be >= 1".into()));
    }
    let l = backend.n_sites();
    let oracle = CachedOracle::new(backend);
    let perm = split_pool(&oracle, (0..l).collect(), 1, opts)?;
    let ordering = Ordering::new(perm)?;
    let stats = oracle.stats();
    let entropy_before = prefix_entropies(oracle.backend(), &Ordering::identity(l))?;
    let entropy_after = prefix_entropies(oracle.backend(), &ordering)?;
    Ok(DisentangleReport {
        ordering,
        entropy_before,
        entropy_after,
        distinct_queries: stats.distinct_queries,
        total_queries: stats.total_queries,
    })
}

/// Bound on distinct search queries checked by the benchmarks: `50·L³`.
pub fn query_cap(l: usize) -> usize {
    50 * l * l * l
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShuffleSample {
    pub seed: u64,
    pub shuffle: Vec<usize>,
    pub before: f64,
    pub after: f64,
    pub distinct_queries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShuffleRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub mean_before: f64,
    pub mean_after: f64,
    pub samples: Vec<ShuffleSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShuffleTable {
    pub phi: usize,
    pub rows: Vec<ShuffleRow>,
    /// Slopes of the mean mid-cut `S₂` against `L`.
    pub slope_before: Option<f64>,
    pub slope_after: Option<f64>,
}

/// Random MPS with randomly shuffled sites, disentangled; mid-cut entropies
/// before and after, averaged per size.
pub fn shuffle_benchmark(
    phi: usize,
    sizes: &[usize],
    n_samples: usize,
    opts: &DisentangleOptions,
) -> Result<ShuffleTable> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &l in sizes {
        if l < 2 {
            return Err(Error::InvalidArgument(format!("shuffle benchmark needs L >= 2, got {l}")));
        }
        let mut samples = Vec::with_capacity(n_samples);
        for s in 0..n_samples {
            let seed = derive_seed(derive_seed(opts.seed, "shuffle", l as u64), "sample", s as u64);
            let mps = gen_random_mps(l, phi, derive_seed(seed, "mps", 0))?;
            let mut shuffle: Vec<usize> = (0..l).collect();
            shuffle.shuffle(&mut rng(derive_seed(seed, "permutation", 0)));
            let backend = Permuted::new(&mps, shuffle.clone())?;
            let run_opts = DisentangleOptions { seed: derive_seed(seed, "disentangle", 0), ..opts.clone() };
            let rep = disentangle(backend, &run_opts)?;
            let (before, after) = rep.mid_cut().expect("L >= 2 has a mid cut");
            log::info!("shuffle L={l} sample {s}: S2 {before:.4} -> {after:.4}, {} queries", rep.distinct_queries);
            samples.push(ShuffleSample { seed, shuffle, before, after, distinct_queries: rep.distinct_queries });
        }
        let n = samples.len() as f64;
        rows.push(ShuffleRow {
            l,
            mean_before: samples.iter().map(|s| s.before).sum::<f64>() / n,
            mean_after: samples.iter().map(|s| s.after).sum::<f64>() / n,
            samples,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.l as f64).collect();
    let fit = |y: Vec<f64>| linear_fit(&x, &y).map(|(s, _)| s);
    let slope_before = fit(rows.iter().map(|r| r.mean_before).collect());
    let slope_after = fit(rows.iter().map(|r| r.mean_after).collect());
    Ok(ShuffleTable { phi, rows, slope_before, slope_after })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{permute_dense, DenseState, Mps};
    use crate::C64;

    /// Bell pairs on sites (0,3), (1,4), (2,5).
    fn shuffled_bells() -> DenseState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pair = DenseState::qubits(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]).unwrap();
        // |pair⟩⊗|pair⟩⊗|pair⟩ on sites (0,1),(2,3),(4,5), then relabel
        let mut amps = vec![C64::new(0.0, 0.0); 64];
        for (i, a) in amps.iter_mut().enumerate() {
            let b = |s: usize| (i >> (5 - s)) & 1;
            *a = pair.amps()[b(0) * 2 + b(1)] * pair.amps()[b(2) * 2 + b(3)] * pair.amps()[b(4) * 2 + b(5)];
        }
        let paired = DenseState::qubits(amps).unwrap();
        // new site j = old site perm[j]: 0→0, 3→1, 1→2, 4→3, 2→4, 5→5
        permute_dense(&paired, &[0, 2, 4, 1, 3, 5]).unwrap()
    }

    #[test]
    fn ordering_validates() {
        assert!(Ordering::new(vec![1, 0, 2]).is_ok());
        assert!(Ordering::new(vec![1, 1, 2]).is_err());
        assert_eq!(Ordering::new(vec![2, 0, 1]).unwrap().inverse(), vec![1, 2, 0]);
        let json = serde_json::to_string(&Ordering::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(json, "[1,0]");
        assert!(serde_json::from_str::<Ordering>("[0,0]").is_err());
    }

    #[test]
    fn two_site_pool_picks_larger_purity() {
        // site 2 is unentangled, site 0 is half of a Bell pair
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = vec![C64::new(0.0, 0.0); 8];
        a[0b000] = C64::new(h, 0.0);
        a[0b110] = C64::new(h, 0.0);
        let s = DenseState::qubits(a).unwrap();
        let o = CachedOracle::new(&s);
        let r = best_split(&o, &[0, 2], 1, 2, &TciOptions::default()).unwrap();
        assert_eq!((r.subset.clone(), r.purity), (vec![2], 1.0));
        assert!(best_split(&o, &[0, 1], 2, 2, &TciOptions::default()).is_err());
    }

    #[test]
    fn bell_pairs_split_respects_pairs() {
        let s = shuffled_bells();
        let o = CachedOracle::new(&s);
        let pool = [0, 1, 2, 3, 4, 5];
        let opts = DisentangleOptions::default().tci;
        // pairs are (0,3), (1,4), (2,5): only k = 2 admits an unbroken half
        let r = best_split(&o, &pool, 2, 2, &opts).unwrap();
        assert!((r.purity - 1.0).abs() < 1e-12, "{r:?}");
        assert_eq!(r.subset, vec![0, 3]);
        // any 3 sites break at least one pair
        let r = best_split(&o, &pool, 3, 2, &opts).unwrap();
        assert!((r.purity - 0.5).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn disentangle_bells_reaches_optimal_midcut() {
        let rep = disentangle(shuffled_bells(), &DisentangleOptions::default()).unwrap();
        let (before, after) = rep.mid_cut().unwrap();
        let ln2 = 2f64.ln();
        assert!((before - 3.0 * ln2).abs() < 1e-10);
        assert!((after - ln2).abs() < 1e-10, "{rep:?}");
        assert!(rep.distinct_queries <= query_cap(6));
    }

    #[test]
    fn tiny_systems() {
        let p = DenseState::product(vec![2; 2]).unwrap();
        let rep = disentangle(&p, &DisentangleOptions::default()).unwrap();
        assert_eq!(rep.ordering.perm(), &[0, 1]);
        assert_eq!(rep.entropy_before.len(), 1);
        assert_eq!(rep.distinct_queries, 0);
    }

    #[test]
    fn product_mps_has_zero_entropy() {
        let t = shuffle_benchmark(1, &[6, 8], 1, &DisentangleOptions::default()).unwrap();
        for r in &t.rows {
            assert!(r.mean_before.abs() < 1e-12 && r.mean_after.abs() < 1e-12);
        }
    }

    #[test]
    fn shuffled_mps_improves() {
        let t = shuffle_benchmark(3, &[12], 2, &DisentangleOptions::default()).unwrap();
        let r = &t.rows[0];
        assert!(r.mean_after < r.mean_before, "{r:?}");
        for s in &r.samples {
            assert!(s.distinct_queries <= query_cap(12));
        }
    }

    #[test]
    fn ordered_mps_not_harmed_much() {
        let mps: Mps = gen_random_mps(10, 2, 9).unwrap();
        let rep = disentangle(&mps, &DisentangleOptions::default()).unwrap();
        let (before, after) = rep.mid_cut().unwrap();
        assert!(after <= before + 2f64.ln() + 1e-9, "{before} -> {after}");
    }
}
