use std::collections::BTreeMap;

use super::EFRecord;
use crate::{Error, Result};

/// Radicands down to this negative value are rounding noise and clamp to 0.
pub const RADICAND_SLACK: f64 = 1e-10;

/// ℓ² distance between two (unnormalized) EFs, from TT inner products.
pub fn ef_distance(a: &EFRecord, b: &EFRecord) -> Result<f64> {
    if a.basis != b.basis || a.n_sites != b.n_sites {
        return Err(Error::DimMismatch(format!(
            "EF distance needs matching basis and size: {:?}/{} vs {:?}/{}",
            a.basis, a.n_sites, b.basis, b.n_sites
        )));
    }
    let r = a.tt.inner(&a.tt)? - 2.0 * a.tt.inner(&b.tt)? + b.tt.inner(&b.tt)?;
    if r >= 0.0 {
        Ok(r.sqrt())
    } else if r >= -RADICAND_SLACK {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("negative squared distance {r}")))
    }
}

/// Pairwise distances; exactly symmetric with a zero diagonal.
pub fn distance_matrix(records: &[EFRecord]) -> Result<Vec<Vec<f64>>> {
    let n = records.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = ef_distance(&records[i], &records[j])?;
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    Ok(d)
}

/// One row of the long-form distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceStat {
    pub name_a: String,
    pub name_b: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Groups the pairs `i < j` of `d` by their (sorted) name pair and reports
/// mean and population std of each group.
pub fn distance_stats(names: &[String], d: &[Vec<f64>]) -> Result<Vec<DistanceStat>> {
    if names.len() != d.len() {
        return Err(Error::DimMismatch(format!("{} names for a {}-point matrix", names.len(), d.len())));
    }
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let (a, b) = if names[i] <= names[j] { (&names[i], &names[j]) } else { (&names[j], &names[i]) };
            groups.entry((a.clone(), b.clone())).or_default().push(d[i][j]);
        }
    }
    Ok(groups
        .into_iter()
        .map(|((name_a, name_b), v)| {
            let (mean, std) = super::mean_std(&v);
            DistanceStat { name_a, name_b, mean, std, count: v.len() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::learn_ef;
    use crate::cross::{TciMode, TciOptions};
    use crate::oracle::{Basis, DenseState};
    use crate::C64;

    fn learn(s: &DenseState) -> EFRecord {
        learn_ef(s, Basis::Dual, &TciOptions::default(), TciMode::Adaptive, None).unwrap()
    }

    #[test]
    fn product_vs_bell() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DenseState::qubits(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]).unwrap();
        let prod = DenseState::product(vec![2, 2]).unwrap();
        let (a, b) = (learn(&prod), learn(&bell));
        assert!((ef_distance(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(ef_distance(&a, &a).unwrap(), 0.0);
        let d = distance_matrix(&[a.clone(), b, a]).unwrap();
        assert_eq!(d[0][2], 0.0);
        assert_eq!(d[0][1], d[1][0]);
    }

    #[test]
    fn mismatch_rejected() {
        let a = learn(&DenseState::product(vec![2; 3]).unwrap());
        let b = learn(&DenseState::product(vec![2; 4]).unwrap());
        assert!(ef_distance(&a, &b).is_err());
    }

    #[test]
    fn grouped_stats() {
        let names: Vec<String> = ["p", "h", "h"].iter().map(|s| s.to_string()).collect();
        let d = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 0.5], vec![3.0, 0.5, 0.0]];
        let s = distance_stats(&names, &d).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].name_a.as_str(), s[0].name_b.as_str(), s[0].mean), ("h", "h", 0.5));
        assert_eq!((s[1].name_a.as_str(), s[1].name_b.as_str(), s[1].mean, s[1].std), ("h", "p", 2.0, 1.0));
    }
}
