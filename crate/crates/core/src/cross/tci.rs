//! Two-site tensor cross interpolation.
//!
//! Each sweep updates every bond from the full Π-matrix
//! `F(I_{ℓ-1} × d_ℓ, d_{ℓ+1} × J_{ℓ+2})`, then restores the nesting
//! conditions in both directions with one-site passes so that the resulting
//! train interpolates the oracle exactly on every pivot-composed index.

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix_ci::matrix_ci_dense;
use super::IndexSpace;
use crate::linalg;
use crate::seed::{derive_seed, rng};
use crate::tt::{Core, TensorTrain};
use crate::{Error, Result};

/// How many random draws to try when looking for a nonzero starting entry.
const INITIAL_PIVOT_ATTEMPTS: usize = 1000;
/// Cap on full coordinate passes when refining a random start.
const ASCENT_PASSES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPivot {
    /// All-zeros index when the oracle is nonzero there, else a seeded search.
    Default,
    /// Seeded uniform draw (redrawn until nonzero).
    Random,
    /// Seeded uniform draw refined by coordinate ascent on `|f|`.
    RandomAscent,
    Given(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TciOptions {
    /// Local relative error target.
    pub tolerance: f64,
    /// Rank cap for adaptive mode; `usize::MAX` means unbounded.
    pub max_rank: usize,
    pub max_sweeps: usize,
    pub n_global_search: usize,
    pub max_global_insert: usize,
    pub seed: u64,
    pub initial_pivot: InitialPivot,
}

impl Default for TciOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_rank: usize::MAX,
            max_sweeps: 100,
            n_global_search: 2,
            max_global_insert: 2,
            seed: 0,
            initial_pivot: InitialPivot::Default,
        }
    }
}

impl TciOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {}", self.tolerance)));
        }
        if self.max_sweeps == 0 || self.max_rank == 0 {
            return Err(Error::InvalidArgument("max_sweeps and max_rank must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TciMode {
    /// Ranks capped at the given value (mode I).
    FixedRank(usize),
    /// Ranks grow until the tolerance is met (mode II).
    Adaptive,
}

/// Nested pivot multi-index sets. `rows[ℓ]` holds `I_ℓ` (indices over
/// positions `0..ℓ`) and `cols[ℓ]` holds `J_ℓ` (positions `ℓ..N`), for
/// `ℓ = 0..=N`; bond `b` pairs `rows[b]` with `cols[b]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotState {
    pub rows: Vec<Vec<Vec<usize>>>,
    pub cols: Vec<Vec<Vec<usize>>>,
}

impl PivotState {
    fn from_pivot(x: &[usize]) -> Self {
        let n = x.len();
        Self {
            rows: (0..=n).map(|l| vec![x[..l].to_vec()]).collect(),
            cols: (0..=n).map(|l| vec![x[l..].to_vec()]).collect(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.rows.len() - 1
    }

    /// Bond ranks `r_1..r_{N-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        (1..self.n_sites()).map(|b| self.rows[b].len()).collect()
    }

    /// Whether `I_b ⊂ I_{b-1} × d` and `J_b ⊂ d × J_{b+1}` hold on every
    /// bond. `rows[N]` and `cols[0]` carry no information and are ignored.
    pub fn is_nested(&self) -> bool {
        let n = self.n_sites();
        (1..n).all(|b| {
            let prev: HashSet<&[usize]> = self.rows[b - 1].iter().map(|v| v.as_slice()).collect();
            let next: HashSet<&[usize]> = self.cols[b + 1].iter().map(|v| v.as_slice()).collect();
            self.rows[b].iter().all(|r| prev.contains(&r[..b - 1]))
                && self.cols[b].iter().all(|c| next.contains(&c[1..]))
        })
    }

    /// Every index `a ⊕ i ⊕ c` with `a ∈ I_ℓ`, `i < d_ℓ`, `c ∈ J_{ℓ+1}`.
    pub fn composed_indices(&self, dims: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (l, &d) in dims.iter().enumerate() {
            for a in &self.rows[l] {
                for i in 0..d {
                    for c in &self.cols[l + 1] {
                        let mut x = a.clone();
                        x.push(i);
                        x.extend_from_slice(c);
                        if seen.insert(x.clone()) {
                            out.push(x);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Per-sweep diagnostics handed to observers and kept in the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub ranks: Vec<usize>,
    pub max_local_error: f64,
    pub n_queries: usize,
    pub n_global_inserted: usize,
}

#[derive(Clone, Debug)]
pub struct TciResult {
    pub tt: TensorTrain,
    pub pivots: PivotState,
    /// Distinct oracle evaluations.
    pub n_queries: usize,
    pub converged: bool,
    pub max_local_error: f64,
    pub sweeps: usize,
    pub history: Vec<SweepRecord>,
}

pub(crate) type Cache = HashMap<Vec<usize>, f64>;

struct Driver<'a, F> {
    f: &'a F,
    dims: Vec<usize>,
    cache: Cache,
    piv: PivotState,
    scale: f64,
}

impl<'a, F> Driver<'a, F>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    fn eval_batch(&mut self, keys: &[Vec<usize>]) -> Result<Vec<f64>> {
        let mut missing: Vec<&Vec<usize>> = Vec::new();
        let mut seen = HashSet::new();
        for k in keys {
            if !self.cache.contains_key(k) && seen.insert(k) {
                missing.push(k);
            }
        }
        let f = self.f;
        let fresh: Vec<Result<f64>> = missing.par_iter().map(|k| f(k)).collect();
        for (k, v) in missing.into_iter().zip(fresh) {
            let v = v?;
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k.clone(), value: v });
            }
            self.scale = self.scale.max(v.abs());
            self.cache.insert(k.clone(), v);
        }
        Ok(keys.iter().map(|k| self.cache[k]).collect())
    }

    fn eval_one(&mut self, key: &[usize]) -> Result<f64> {
        Ok(self.eval_batch(&[key.to_vec()])?[0])
    }

    /// Evaluates `F(rows, cols)` with keys `row ⊕ col`.
    fn submatrix(&mut self, rows: &[Vec<usize>], cols: &[Vec<usize>]) -> Result<Vec<f64>> {
        let mut keys = Vec::with_capacity(rows.len() * cols.len());
        for r in rows {
            for c in cols {
                let mut k = r.clone();
                k.extend_from_slice(c);
                keys.push(k);
            }
        }
        self.eval_batch(&keys)
    }

    fn extend_rows(&self, l: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.piv.rows[l].len() * self.dims[l]);
        for a in &self.piv.rows[l] {
            for i in 0..self.dims[l] {
                let mut x = a.clone();
                x.push(i);
                out.push(x);
            }
        }
        out
    }

    fn extend_cols(&self, l: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.piv.cols[l + 1].len() * self.dims[l]);
        for i in 0..self.dims[l] {
            for c in &self.piv.cols[l + 1] {
                let mut x = vec![i];
                x.extend_from_slice(c);
                out.push(x);
            }
        }
        out
    }

    /// Two-site update of bond `b` (between sites `b-1` and `b`). Returns the
    /// local error relative to the largest Π entry.
    fn update_bond(&mut self, b: usize, tol: f64, max_rank: usize) -> Result<f64> {
        let rows = self.extend_rows(b - 1);
        let cols = self.extend_cols(b);
        let pi = self.submatrix(&rows, &cols)?;
        let ci = matrix_ci_dense(pi, rows.len(), cols.len(), tol, max_rank);
        if ci.rank() == 0 {
            return Err(Error::Numerical(format!("Π-matrix at bond {b} vanished")));
        }
        self.piv.rows[b] = ci.rows.iter().map(|&i| rows[i].clone()).collect();
        self.piv.cols[b] = ci.cols.iter().map(|&j| cols[j].clone()).collect();
        Ok(ci.relative_error())
    }

    /// One-site passes re-deriving `I` from `I × d` and `J` from `d × J`
    /// until both nesting conditions hold with nonsingular pivot matrices.
    fn canonicalize(&mut self) -> Result<()> {
        let n = self.dims.len();
        loop {
            for b in 1..n {
                let rows = self.extend_rows(b - 1);
                let cols = self.piv.cols[b].clone();
                let m = self.submatrix(&rows, &cols)?;
                let ci = matrix_ci_dense(m, rows.len(), cols.len(), 0.0, cols.len());
                if ci.rank() == 0 {
                    return Err(Error::Numerical(format!("pivot block at bond {b} vanished")));
                }
                self.piv.rows[b] = ci.rows.iter().map(|&i| rows[i].clone()).collect();
                self.piv.cols[b] = ci.cols.iter().map(|&j| cols[j].clone()).collect();
            }
            let mut dropped = false;
            for b in (1..n).rev() {
                let rows = self.piv.rows[b].clone();
                let cols = self.extend_cols(b);
                let m = self.submatrix(&rows, &cols)?;
                let ci = matrix_ci_dense(m, rows.len(), cols.len(), 0.0, rows.len());
                if ci.rank() == 0 {
                    return Err(Error::Numerical(format!("pivot block at bond {b} vanished")));
                }
                dropped |= ci.rank() < rows.len();
                self.piv.rows[b] = ci.rows.iter().map(|&i| rows[i].clone()).collect();
                self.piv.cols[b] = ci.cols.iter().map(|&j| cols[j].clone()).collect();
            }
            if !dropped {
                return Ok(());
            }
        }
    }

    fn build_tt(&mut self) -> Result<TensorTrain> {
        let n = self.dims.len();
        let mut cores = Vec::with_capacity(n);
        for l in 0..n {
            let rows = self.extend_rows(l);
            let cols = self.piv.cols[l + 1].clone();
            let t = self.submatrix(&rows, &cols)?;
            let (rl, d, rr) = (self.piv.rows[l].len(), self.dims[l], cols.len());
            let data = if l + 1 < n {
                let prow = self.piv.rows[l + 1].clone();
                let p = self.submatrix(&prow, &cols)?;
                linalg::right_solve(&t, rl * d, &p, rr)
            } else {
                t
            };
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("singular pivot matrix at bond {}", l + 1)));
            }
            cores.push(Core::new(rl, d, rr, data)?);
        }
        TensorTrain::new(cores)
    }

    /// Samples random indices, inserts the worst offenders as global pivots.
    fn global_search(&mut self, tt: &TensorTrain, opts: &TciOptions, sweep: usize) -> Result<usize> {
        if opts.n_global_search == 0 || opts.max_global_insert == 0 {
            return Ok(0);
        }
        let mut r = rng(derive_seed(opts.seed, "global-pivot", sweep as u64));
        let samples: Vec<Vec<usize>> = (0..opts.n_global_search)
            .map(|_| self.dims.iter().map(|&d| r.gen_range(0..d)).collect())
            .collect();
        let vals = self.eval_batch(&samples)?;
        let threshold = opts.tolerance * self.scale;
        let mut bad: Vec<(f64, Vec<usize>)> = samples
            .into_iter()
            .zip(vals)
            .map(|(x, v)| ((tt.eval_unchecked(&x) - v).abs(), x))
            .filter(|(e, _)| *e > threshold)
            .collect();
        bad.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        bad.dedup_by(|a, b| a.1 == b.1);
        let n = self.dims.len();
        let mut inserted = 0;
        for (_, x) in bad.into_iter().take(opts.max_global_insert) {
            for l in 1..n {
                if !self.piv.rows[l].iter().any(|a| a[..] == x[..l]) {
                    self.piv.rows[l].push(x[..l].to_vec());
                }
                if !self.piv.cols[l].iter().any(|c| c[..] == x[l..]) {
                    self.piv.cols[l].push(x[l..].to_vec());
                }
            }
            inserted += 1;
        }
        Ok(inserted)
    }

    fn initial_pivot(&mut self, opts: &TciOptions) -> Result<Vec<usize>> {
        let mut r = rng(derive_seed(opts.seed, "initial-pivot", 0));
        let dims = self.dims.clone();
        let draw = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<usize> { dims.iter().map(|&d| r.gen_range(0..d)).collect() };
        let given = match &opts.initial_pivot {
            InitialPivot::Given(x) => {
                if x.len() != self.dims.len() || x.iter().zip(&self.dims).any(|(i, d)| i >= d) {
                    return Err(Error::InvalidArgument(format!("initial pivot {x:?} outside index space")));
                }
                if self.eval_one(x)? == 0.0 {
                    return Err(Error::InvalidArgument(format!("oracle vanishes at initial pivot {x:?}")));
                }
                return Ok(x.clone());
            }
            InitialPivot::Default => Some(vec![0; self.dims.len()]),
            InitialPivot::Random | InitialPivot::RandomAscent => None,
        };
        if let Some(x) = given {
            if self.eval_one(&x)? != 0.0 {
                return Ok(x);
            }
        }
        for _ in 0..INITIAL_PIVOT_ATTEMPTS {
            let x = draw(&mut r);
            if self.eval_one(&x)? != 0.0 {
                return match opts.initial_pivot {
                    InitialPivot::RandomAscent => self.ascend(x),
                    _ => Ok(x),
                };
            }
        }
        Err(Error::InvalidArgument("oracle is zero on every sampled index".into()))
    }

    /// Single-site moves that strictly increase `|f|`, until none does.
    fn ascend(&mut self, mut x: Vec<usize>) -> Result<Vec<usize>> {
        let mut best = self.eval_one(&x)?.abs();
        for _ in 0..ASCENT_PASSES {
            let mut improved = false;
            for site in 0..x.len() {
                let keys: Vec<Vec<usize>> = (0..self.dims[site])
                    .filter(|&v| v != x[site])
                    .map(|v| {
                        let mut k = x.clone();
                        k[site] = v;
                        k
                    })
                    .collect();
                let vals = self.eval_batch(&keys)?;
                if let Some((k, v)) = keys.into_iter().zip(vals).map(|(k, v)| (k, v.abs())).max_by(|a, b| a.1.total_cmp(&b.1)) {
                    if v > best {
                        best = v;
                        x = k;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        Ok(x)
    }
}

/// Learns a tensor train interpolating `oracle` over `space`.
pub fn tci_learn<F>(oracle: &F, space: &IndexSpace, opts: &TciOptions, mode: TciMode) -> Result<TciResult>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    tci_learn_observed(oracle, space, opts, mode, |_, _| ControlFlow::Continue(()))
}

/// [`tci_learn`] with a callback after every sweep; returning
/// `ControlFlow::Break` stops the run with the current train.
pub fn tci_learn_observed<F, O>(
    oracle: &F,
    space: &IndexSpace,
    opts: &TciOptions,
    mode: TciMode,
    observer: O,
) -> Result<TciResult>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
    O: FnMut(&SweepRecord, &TensorTrain) -> ControlFlow<()>,
{
    run(oracle, space, opts, mode, observer).map(|(r, _)| r)
}

pub(crate) fn run<F, O>(
    oracle: &F,
    space: &IndexSpace,
    opts: &TciOptions,
    mode: TciMode,
    mut observer: O,
) -> Result<(TciResult, Cache)>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
    O: FnMut(&SweepRecord, &TensorTrain) -> ControlFlow<()>,
{
    opts.validate()?;
    let max_rank = match mode {
        TciMode::FixedRank(r) if r == 0 => return Err(Error::InvalidArgument("rank cap must be >= 1".into())),
        TciMode::FixedRank(r) => r,
        TciMode::Adaptive => opts.max_rank,
    };
    let dims = space.dims().to_vec();
    let n = dims.len();
    let mut drv = Driver { f: oracle, dims: dims.clone(), cache: HashMap::new(), piv: PivotState::from_pivot(&[]), scale: 0.0 };

    if n == 1 {
        let keys: Vec<Vec<usize>> = (0..dims[0]).map(|i| vec![i]).collect();
        let vals = drv.eval_batch(&keys)?;
        let tt = TensorTrain::new(vec![Core::new(1, dims[0], 1, vals)?])?;
        let record = SweepRecord { sweep: 1, ranks: vec![], max_local_error: 0.0, n_queries: drv.cache.len(), n_global_inserted: 0 };
        let _ = observer(&record, &tt);
        let res = TciResult {
            tt,
            pivots: PivotState { rows: vec![vec![vec![]], vec![vec![0]]], cols: vec![vec![vec![0]], vec![vec![]]] },
            n_queries: drv.cache.len(),
            converged: true,
            max_local_error: 0.0,
            sweeps: 1,
            history: vec![record],
        };
        return Ok((res, drv.cache));
    }

    let x0 = drv.initial_pivot(opts)?;
    drv.piv = PivotState::from_pivot(&x0);

    let mut history = Vec::new();
    let mut prev: Option<PivotState> = None;
    let mut last = None;
    for sweep in 1..=opts.max_sweeps {
        let bonds: Vec<usize> = if sweep % 2 == 1 { (1..n).collect() } else { (1..n).rev().collect() };
        let mut err: f64 = 0.0;
        for b in bonds {
            err = err.max(drv.update_bond(b, opts.tolerance, max_rank)?);
        }
        drv.canonicalize()?;
        let tt = drv.build_tt()?;
        let pivots = drv.piv.clone();
        let inserted = drv.global_search(&tt, opts, sweep)?;
        let record = SweepRecord {
            sweep,
            ranks: tt.ranks(),
            max_local_error: err,
            n_queries: drv.cache.len(),
            n_global_inserted: inserted,
        };
        log::debug!("tci sweep {sweep}: ranks {:?} err {err:.3e} queries {}", record.ranks, record.n_queries);
        let stable = match (&prev, mode) {
            (Some(p), TciMode::Adaptive) => p.ranks() == pivots.ranks() && err <= opts.tolerance,
            (Some(p), TciMode::FixedRank(_)) => same_sets(p, &pivots),
            (None, _) => false,
        };
        let converged = stable && inserted == 0;
        let flow = observer(&record, &tt);
        history.push(record);
        last = Some((tt, pivots.clone(), err, converged));
        if converged || flow.is_break() {
            break;
        }
        prev = Some(pivots);
    }
    let (tt, pivots, err, converged) = last.expect("max_sweeps >= 1");
    let res = TciResult {
        tt,
        pivots,
        n_queries: drv.cache.len(),
        converged,
        max_local_error: err,
        sweeps: history.len(),
        history,
    };
    Ok((res, drv.cache))
}

fn same_sets(a: &PivotState, b: &PivotState) -> bool {
    let eq = |x: &Vec<Vec<usize>>, y: &Vec<Vec<usize>>| {
        let mut x = x.clone();
        let mut y = y.clone();
        x.sort();
        y.sort();
        x == y
    };
    a.rows.iter().zip(&b.rows).all(|(x, y)| eq(x, y)) && a.cols.iter().zip(&b.cols).all(|(x, y)| eq(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::multi_indices;

    fn haar(b: &[usize]) -> f64 {
        let k = b.iter().filter(|&&x| x == 1).count() as i32;
        2f64.powi(-k) + 2f64.powi(-(b.len() as i32 - k))
    }

    fn max_rel_err(tt: &TensorTrain, f: impl Fn(&[usize]) -> f64) -> f64 {
        multi_indices(tt.dims())
            .map(|x| ((tt.eval(&x).unwrap() - f(&x)) / f(&x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn separable_function_is_rank_one() {
        let f = |x: &[usize]| -> Result<f64> { Ok(x.iter().enumerate().map(|(i, &b)| 1.0 + (i + b) as f64 * 0.1).product()) };
        let space = IndexSpace::binary(8).unwrap();
        let r = tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive).unwrap();
        assert!(r.converged);
        assert!(r.tt.ranks().iter().all(|&k| k == 1));
        assert!(max_rel_err(&r.tt, |x| f(x).unwrap()) < 1e-10);
    }

    #[test]
    fn haar_formula_has_rank_two() {
        let f = |x: &[usize]| -> Result<f64> { Ok(haar(x)) };
        let space = IndexSpace::binary(10).unwrap();
        let r = tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive).unwrap();
        assert!(r.converged);
        assert!(r.tt.max_rank() <= 2, "ranks {:?}", r.tt.ranks());
        assert!(max_rel_err(&r.tt, haar) < 1e-10);
        assert!(r.n_queries <= 2000, "queries {}", r.n_queries);
    }

    #[test]
    fn pivots_are_nested_and_exact() {
        // rank-3 function with non-uniform dims
        let dims = vec![3, 2, 4, 2, 3];
        let f = |x: &[usize]| -> Result<f64> {
            let s: f64 = x.iter().map(|&v| v as f64).sum();
            Ok(1.0 + s * s + (x[0] as f64 - x[4] as f64).abs())
        };
        let space = IndexSpace::new(dims.clone()).unwrap();
        let r = tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive).unwrap();
        assert!(r.pivots.is_nested());
        for x in r.pivots.composed_indices(&dims) {
            let v = f(&x).unwrap();
            assert!((r.tt.eval(&x).unwrap() - v).abs() <= 1e-10 * v.abs());
        }
        assert!(max_rel_err(&r.tt, |x| f(x).unwrap()) < 1e-9);
    }

    #[test]
    fn fixed_rank_is_capped() {
        let f = |x: &[usize]| -> Result<f64> { Ok(1.0 + x.iter().enumerate().map(|(i, &b)| ((i * b) as f64).sin()).sum::<f64>().powi(4)) };
        let space = IndexSpace::binary(8).unwrap();
        let opts = TciOptions { max_sweeps: 8, ..Default::default() };
        let r = tci_learn(&f, &space, &opts, TciMode::FixedRank(2)).unwrap();
        assert!(r.tt.max_rank() <= 2);
    }

    #[test]
    fn caching_counts_distinct_queries() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let f = |x: &[usize]| -> Result<f64> {
            calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            Ok(haar(x))
        };
        let space = IndexSpace::binary(8).unwrap();
        let r = tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive).unwrap();
        assert_eq!(r.n_queries, calls.load(std::sync::atomic::Ordering::Relaxed));
    }

    #[test]
    fn non_finite_value_aborts() {
        let f = |x: &[usize]| -> Result<f64> { Ok(if x[2] == 1 { f64::NAN } else { 1.0 }) };
        let space = IndexSpace::binary(4).unwrap();
        match tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index[2], 1),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn zero_oracle_is_rejected() {
        let f = |_: &[usize]| -> Result<f64> { Ok(0.0) };
        let space = IndexSpace::binary(3).unwrap();
        assert!(tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive).is_err());
    }

    #[test]
    fn single_site_enumerates() {
        let f = |x: &[usize]| -> Result<f64> { Ok(x[0] as f64 + 0.5) };
        let space = IndexSpace::new(vec![4]).unwrap();
        let r = tci_learn(&f, &space, &TciOptions::default(), TciMode::Adaptive).unwrap();
        assert_eq!(r.tt.to_dense(), vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(r.n_queries, 4);
    }

    #[test]
    fn observer_can_stop_early() {
        let f = |x: &[usize]| -> Result<f64> { Ok(haar(x)) };
        let space = IndexSpace::binary(6).unwrap();
        let mut seen = 0;
        let r = tci_learn_observed(&f, &space, &TciOptions::default(), TciMode::Adaptive, |_, _| {
            seen += 1;
            ControlFlow::Break(())
        })
        .unwrap();
        assert_eq!(seen, 1);
        assert_eq!(r.sweeps, 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = |x: &[usize]| -> Result<f64> { Ok(1.0 + x.iter().enumerate().map(|(i, &b)| ((i + 1) * b) as f64).sum::<f64>().sqrt()) };
        let space = IndexSpace::binary(7).unwrap();
        for initial_pivot in [InitialPivot::Random, InitialPivot::RandomAscent] {
            let opts = TciOptions { seed: 9, initial_pivot, tolerance: 1e-6, ..Default::default() };
            let a = tci_learn(&f, &space, &opts, TciMode::Adaptive).unwrap();
            let b = tci_learn(&f, &space, &opts, TciMode::Adaptive).unwrap();
            assert_eq!(a.tt, b.tt);
            assert_eq!(a.pivots, b.pivots);
            assert_eq!(a.n_queries, b.n_queries);
        }
    }

    #[test]
    fn ascent_start_is_exact_on_separable() {
        let f = |x: &[usize]| -> Result<f64> { Ok(x.iter().map(|&v| 1.0 + v as f64).product()) };
        let space = IndexSpace::new(vec![3; 6]).unwrap();
        let opts = TciOptions { seed: 3, initial_pivot: InitialPivot::RandomAscent, ..Default::default() };
        let r = tci_learn(&f, &space, &opts, TciMode::Adaptive).unwrap();
        assert_eq!(r.tt.max_rank(), 1);
        assert_eq!(r.pivots.rows[5], vec![vec![2; 5]]);
        let err = max_rel_err(&r.tt, |x| f(x).unwrap());
        assert!(err < 1e-12, "{err}");
    }
}
