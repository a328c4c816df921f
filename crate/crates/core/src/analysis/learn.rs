use std::ops::ControlFlow;

use crate::cross::{tci_learn_observed, PivotState, SweepRecord, TciMode, TciOptions};
use crate::oracle::{Basis, CachedOracle, Partition, PurityBackend, PurityTable, StatsSnapshot};
use crate::tt::TensorTrain;
use crate::zoo::ModelSpec;
use crate::{Error, Result};

/// Largest system for which the exact EF is enumerated.
pub const MAX_ENUM_SITES: usize = 14;

/// A learned entanglement feature.
#[derive(Clone, Debug)]
pub struct EFRecord {
    pub tt: TensorTrain,
    pub basis: Basis,
    pub n_sites: usize,
    pub state_meta: Option<ModelSpec>,
    pub stats: StatsSnapshot,
    pub options: TciOptions,
    pub mode: TciMode,
    pub eps_th: Option<f64>,
    pub n_queries: usize,
    pub converged: bool,
    pub max_local_error: f64,
    pub pivots: PivotState,
    pub history: Vec<SweepRecord>,
    /// Global relative error after each sweep (only with `eps_th`).
    pub eps_history: Vec<f64>,
}

impl EFRecord {
    /// Bond ranks including the boundary 1s.
    pub fn full_ranks(&self) -> Vec<usize> {
        let mut r = vec![1];
        r.extend(self.tt.ranks());
        r.push(1);
        r
    }

    pub fn eval(&self, p: &Partition) -> Result<f64> {
        self.tt.eval(&self.basis.encode(p))
    }
}

/// Learns the EF of `backend` in `basis`. With `eps_th`, the exact EF is
/// enumerated and the run stops after the first sweep whose global relative
/// error is `≤ eps_th`.
pub fn learn_ef<B: PurityBackend>(
    backend: &B,
    basis: Basis,
    opts: &TciOptions,
    mode: TciMode,
    eps_th: Option<f64>,
) -> Result<EFRecord> {
    let l = backend.n_sites();
    let space = basis.space(l)?;
    let reference = match eps_th {
        Some(e) => {
            if l > MAX_ENUM_SITES {
                return Err(Error::InvalidArgument(format!(
                    "error-threshold stopping enumerates 2^(L-1) purities; L = {l} exceeds {MAX_ENUM_SITES}"
                )));
            }
            if !(e >= 0.0) {
                return Err(Error::InvalidArgument(format!("eps_th must be >= 0, got {e}")));
            }
            Some(PurityTable::build(backend)?)
        }
        None => None,
    };
    let oracle = CachedOracle::new(backend);
    let f = oracle.in_basis(basis);
    let mut eps_history = Vec::new();
    let res = tci_learn_observed(&f, &space, opts, mode, |_, tt| match (&reference, eps_th) {
        (Some(t), Some(e)) => {
            let eps = global_relative_error(tt, basis, t);
            eps_history.push(eps);
            if eps <= e {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        }
        _ => ControlFlow::Continue(()),
    })?;
    Ok(EFRecord {
        tt: res.tt,
        basis,
        n_sites: l,
        state_meta: None,
        stats: oracle.stats(),
        options: opts.clone(),
        mode,
        eps_th,
        n_queries: res.n_queries,
        converged: res.converged,
        max_local_error: res.max_local_error,
        pivots: res.pivots,
        history: res.history,
        eps_history,
    })
}

/// Mean of `|TT[b] − EF[b]| / EF[b]` over the `2^{L−1}` bipartitions
/// (one representative per complement pair, site 0 in `A`).
pub fn global_relative_error(tt: &TensorTrain, basis: Basis, reference: &PurityTable) -> f64 {
    let l = reference.n_sites();
    let exact = reference.values();
    let approx = basis_values(tt, basis, l);
    let half = 1usize << (l - 1);
    let mut sum = 0.0;
    for m in 0..half {
        let bits = (m << 1) | 1;
        let e = exact[bits];
        sum += (approx[bits] - e).abs() / e;
    }
    sum / half as f64
}

/// TT values re-indexed by natural mask bits (site `i` ↔ bit `i`); in the
/// dual basis both members of a complement pair get the same value.
pub fn basis_values(tt: &TensorTrain, basis: Basis, l: usize) -> Vec<f64> {
    let dense = tt.to_dense();
    (0..1u64 << l)
        .map(|bits| {
            let p = Partition::new(l, bits).expect("bits within range");
            let idx = basis.encode(&p);
            let flat = idx.iter().fold(0usize, |acc, &b| acc * 2 + b);
            dense[flat]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{DenseState, HaarAnalytic};
    use crate::C64;

    fn worked_state() -> DenseState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = vec![C64::new(0.0, 0.0); 8];
        a[0b000] = C64::new(h, 0.0);
        a[0b110] = C64::new(h, 0.0);
        DenseState::qubits(a).unwrap()
    }

    #[test]
    fn worked_example_natural_basis() {
        let r = learn_ef(&worked_state(), Basis::Natural, &TciOptions::default(), TciMode::Adaptive, None).unwrap();
        let expect = [("000", 1.0), ("001", 1.0), ("110", 1.0), ("111", 1.0), ("100", 0.5), ("010", 0.5), ("011", 0.5), ("101", 0.5)];
        for (m, v) in expect {
            let x: Partition = m.parse().unwrap();
            assert!((r.tt.eval(&x.to_index()).unwrap() - v).abs() < 1e-12, "{m}");
        }
    }

    #[test]
    fn product_state_rank_one() {
        let s = DenseState::product(vec![2; 6]).unwrap();
        let r = learn_ef(&s, Basis::Dual, &TciOptions::default(), TciMode::Adaptive, None).unwrap();
        assert_eq!(r.tt.max_rank(), 1);
        assert_eq!(r.full_ranks(), vec![1; 6]);
    }

    #[test]
    fn haar_formula_rank_two_with_eps() {
        let b = HaarAnalytic::unclipped(12, 2).unwrap();
        let r = learn_ef(&b, Basis::Dual, &TciOptions::default(), TciMode::Adaptive, Some(1e-10)).unwrap();
        assert_eq!(r.tt.max_rank(), 2);
        assert!(*r.eps_history.last().unwrap() <= 1e-10);
    }

    #[test]
    fn error_homogeneity() {
        let b = HaarAnalytic::unclipped(8, 2).unwrap();
        let t = PurityTable::build(&b).unwrap();
        let r = learn_ef(&b, Basis::Dual, &TciOptions::default(), TciMode::Adaptive, None).unwrap();
        assert!(global_relative_error(&r.tt, Basis::Dual, &t) < 1e-12);
        let scaled = r.tt.clone().scaled(1.0 + 0.01);
        assert!((global_relative_error(&scaled, Basis::Dual, &t) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap() {
        let b = HaarAnalytic::new(16, 2).unwrap();
        assert!(learn_ef(&b, Basis::Dual, &TciOptions::default(), TciMode::Adaptive, Some(0.1)).is_err());
    }
}
