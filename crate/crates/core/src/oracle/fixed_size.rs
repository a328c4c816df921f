//! Sequential-selection encoding of fixed-size subsets.
//!
//! An index `(i₁, …, i_k)` with `1 ≤ i_j ≤ |pool| − j + 1` picks the
//! `i_j`-th element (1-based) of what is left of the pool after the
//! previous picks.

use super::Partition;
use crate::{Error, Result};

/// Labels picked by a 1-based selection index, in pick order.
pub fn fixed_size_select<T: Copy>(idx: &[usize], pool: &[T]) -> Result<Vec<T>> {
    if idx.len() > pool.len() {
        return Err(Error::InvalidArgument(format!("{} picks from a pool of {}", idx.len(), pool.len())));
    }
    let mut rest = pool.to_vec();
    let mut out = Vec::with_capacity(idx.len());
    for (j, &i) in idx.iter().enumerate() {
        if i == 0 || i > rest.len() {
            return Err(Error::IndexOutOfRange { position: j, value: i, dim: rest.len() });
        }
        out.push(rest.remove(i - 1));
    }
    Ok(out)
}

/// Partition of `n_sites` whose region is the selected subset of `pool`.
pub fn fixed_size_decode(idx: &[usize], pool: &[usize], n_sites: usize) -> Result<Partition> {
    Partition::from_sites(n_sites, &fixed_size_select(idx, pool)?)
}

/// Canonical 1-based index of a subset of `pool`: elements are picked in
/// pool order.
pub fn fixed_size_encode(subset: &[usize], pool: &[usize]) -> Result<Vec<usize>> {
    let mut rest = pool.to_vec();
    let mut chosen: Vec<usize> = Vec::with_capacity(subset.len());
    for &s in subset {
        let pos = pool
            .iter()
            .position(|&p| p == s)
            .ok_or_else(|| Error::InvalidArgument(format!("site {s} is not in the pool")))?;
        if chosen.contains(&pos) {
            return Err(Error::InvalidArgument(format!("site {s} listed twice")));
        }
        chosen.push(pos);
    }
    chosen.sort_unstable();
    let mut idx = Vec::with_capacity(chosen.len());
    for pos in chosen {
        let label = pool[pos];
        let i = rest.iter().position(|&x| x == label).expect("still in pool");
        idx.push(i + 1);
        rest.remove(i);
    }
    Ok(idx)
}

/// Dimensions `(|pool|, |pool| − 1, …, |pool| − k + 1)`.
pub fn fixed_size_dims(pool_len: usize, k: usize) -> Vec<usize> {
    (0..k).map(|j| pool_len - j).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_selection() {
        let pool: Vec<usize> = (1..=7).collect();
        assert_eq!(fixed_size_select(&[4, 6, 2, 2], &pool).unwrap(), vec![4, 7, 2, 3]);
        assert_eq!(fixed_size_select(&[1], &pool).unwrap(), vec![1]);
        assert!(fixed_size_select(&[4, 7], &pool).is_err());
        assert!(fixed_size_select(&[0], &pool).is_err());
    }

    #[test]
    fn decode_sets_bits() {
        let p = fixed_size_decode(&[2, 1], &[5, 1, 3], 6).unwrap();
        assert_eq!(p.sites(), vec![1, 5]);
    }

    proptest! {
        #[test]
        fn decode_encode_roundtrip(n in 2usize..=10, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::Rng;
            let mut r = crate::seed::rng(seed);
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(&mut r);
            let k = r.gen_range(1..n);
            let idx: Vec<usize> = (0..k).map(|j| r.gen_range(1..=n - j)).collect();
            let set = fixed_size_decode(&idx, &pool, n).unwrap();
            let canon = fixed_size_encode(&set.sites(), &pool).unwrap();
            prop_assert_eq!(fixed_size_decode(&canon, &pool, n).unwrap(), set);
        }
    }
}
