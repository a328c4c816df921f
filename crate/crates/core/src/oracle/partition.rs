use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported site count (masks are stored in a `u64`).
pub const MAX_SITES: usize = 64;

/// Bipartition of `len` sites; bit `i` set means site `i` belongs to `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    len: usize,
    bits: u64,
}

impl Partition {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len == 0 || len > MAX_SITES {
            return Err(Error::InvalidArgument(format!("partition length {len} outside 1..={MAX_SITES}")));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::InvalidArgument(format!("mask {bits:#x} has bits beyond {len} sites")));
        }
        Ok(Self { len, bits })
    }

    pub fn empty(len: usize) -> Result<Self> {
        Self::new(len, 0)
    }

    pub fn full(len: usize) -> Result<Self> {
        Self::new(len, full_bits(len))
    }

    pub fn from_sites(len: usize, sites: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &s in sites {
            if s >= len {
                return Err(Error::IndexOutOfRange { position: s, value: s, dim: len });
            }
            bits |= 1 << s;
        }
        Self::new(len, bits)
    }

    /// From a 0/1 multi-index (site 0 first).
    pub fn from_index(idx: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &b) in idx.iter().enumerate() {
            match b {
                0 => {}
                1 => bits |= 1 << i,
                v => return Err(Error::IndexOutOfRange { position: i, value: v, dim: 2 }),
            }
        }
        Self::new(idx.len(), bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.bits == full_bits(self.len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, site: usize) -> bool {
        site < self.len && self.bits >> site & 1 == 1
    }

    /// `|A|`.
    pub fn size(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn complement(&self) -> Self {
        Self { len: self.len, bits: !self.bits & full_bits(self.len) }
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.contains(i)).collect()
    }

    pub fn to_index(&self) -> Vec<usize> {
        (0..self.len).map(|i| usize::from(self.contains(i))).collect()
    }
}

pub(crate) fn full_bits(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses masks such as `"0110"` (site 0 first).
    fn from_str(s: &str) -> Result<Self> {
        let idx = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidArgument(format!("invalid mask character {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_index(&idx)
    }
}

/// Domain-wall encoding of a partition modulo complement: `L − 1` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualIndex(pub Vec<usize>);

/// `b₁ = 1`, `b_{i+1} = b_i XOR b̄_i`.
pub fn dual_to_natural(dual: &[usize]) -> Result<Partition> {
    let len = dual.len() + 1;
    let mut bits = 1u64;
    let mut cur = 1usize;
    for (i, &w) in dual.iter().enumerate() {
        if w > 1 {
            return Err(Error::IndexOutOfRange { position: i, value: w, dim: 2 });
        }
        cur ^= w;
        bits |= (cur as u64) << (i + 1);
    }
    Partition::new(len, bits)
}

/// Inverse of [`dual_to_natural`] after replacing `p` by its complement when
/// site 0 is not in `A`.
pub fn natural_to_dual(p: &Partition) -> DualIndex {
    let q = if p.contains(0) { *p } else { p.complement() };
    DualIndex((0..q.len() - 1).map(|i| usize::from(q.contains(i) != q.contains(i + 1))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let p: Partition = "0110".parse().unwrap();
        assert_eq!(p.sites(), vec![1, 2]);
        assert_eq!(p.to_string(), "0110");
        assert_eq!(p.complement().to_string(), "1001");
        assert!("01a".parse::<Partition>().is_err());
    }

    #[test]
    fn dual_examples() {
        assert!(dual_to_natural(&[0, 0, 0]).unwrap().is_full());
        assert_eq!(dual_to_natural(&[1, 0]).unwrap().to_string(), "100");
        let p: Partition = "011".parse().unwrap();
        assert_eq!(natural_to_dual(&p).0, vec![1, 0]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Partition::new(3, 0b1000).is_err());
        assert!(Partition::from_sites(3, &[3]).is_err());
        assert!(dual_to_natural(&[2]).is_err());
    }

    proptest! {
        #[test]
        fn dual_roundtrip(bits in proptest::collection::vec(0usize..2, 1..20)) {
            let p = dual_to_natural(&bits).unwrap();
            prop_assert!(p.contains(0));
            prop_assert_eq!(natural_to_dual(&p).0, bits);
        }

        #[test]
        fn complement_has_same_dual(len in 2usize..30, raw in any::<u64>()) {
            let p = Partition::new(len, raw & full_bits(len)).unwrap();
            prop_assert_eq!(natural_to_dual(&p), natural_to_dual(&p.complement()));
            prop_assert_eq!(p.complement().complement(), p);
        }
    }
}
