//! Maximum-modulus search by fixed-rank cross interpolation.

use std::ops::ControlFlow;

use super::tci::{run, TciMode, TciOptions};
use super::IndexSpace;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct TtoptResult {
    pub argmax: Vec<usize>,
    /// Oracle value at `argmax`, from a fresh call.
    pub value: f64,
    pub n_queries: usize,
    /// Every evaluation made during the search, sorted by index.
    pub evaluations: Vec<(Vec<usize>, f64)>,
}

/// Runs rank-`rank_cap` TCI and returns the largest-modulus entry among all
/// oracle evaluations it made (ties to the lexicographically smallest index).
pub fn ttopt_max<F>(oracle: &F, space: &IndexSpace, rank_cap: usize, opts: &TciOptions) -> Result<TtoptResult>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    if rank_cap == 0 {
        return Err(Error::InvalidArgument("rank cap must be >= 1".into()));
    }
    let (res, cache) = run(oracle, space, opts, TciMode::FixedRank(rank_cap), |_, _| ControlFlow::Continue(()))?;
    let mut evaluations: Vec<(Vec<usize>, f64)> = cache.into_iter().collect();
    evaluations.sort_by(|a, b| a.0.cmp(&b.0));
    let best = evaluations
        .iter()
        .fold(None::<&(Vec<usize>, f64)>, |best, e| match best {
            Some(b) if b.1.abs() >= e.1.abs() => Some(b),
            _ => Some(e),
        })
        .expect("TCI evaluates at least one entry");
    let argmax = best.0.clone();
    let value = oracle(&argmax)?;
    Ok(TtoptResult { argmax, value, n_queries: res.n_queries, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_positive_finds_per_position_argmax() {
        let w = [[0.2, 0.9, 0.5], [1.0, 0.1, 0.3], [0.4, 0.4, 0.8], [0.7, 0.6, 0.1]];
        let f = |x: &[usize]| -> Result<f64> { Ok(x.iter().enumerate().map(|(i, &v)| w[i][v]).product()) };
        let space = IndexSpace::new(vec![3; 4]).unwrap();
        let r = ttopt_max(&f, &space, 2, &TciOptions::default()).unwrap();
        assert_eq!(r.argmax, vec![1, 0, 2, 0]);
        assert!((r.value - 0.9 * 1.0 * 0.8 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn constant_oracle_returns_constant() {
        let f = |_: &[usize]| -> Result<f64> { Ok(0.25) };
        let space = IndexSpace::new(vec![5, 4, 3]).unwrap();
        let r = ttopt_max(&f, &space, 2, &TciOptions::default()).unwrap();
        assert_eq!(r.value, 0.25);
        assert_eq!(r.argmax, vec![0, 0, 0]);
    }
}
