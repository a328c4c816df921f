//! Reduced density matrices of fermionic states in the canonically ordered
//! occupation basis `(c₁†)^{n₁} ⋯ (c_L†)^{n_L} |Ω⟩`.

use faer::Mat;

use super::{DenseState, Partition};
use crate::{Error, Result, C64};

/// Largest mode count for which the full density matrix is formed.
pub const MAX_FERMION_MODES: usize = 12;

const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct FermionState {
    state: DenseState,
}

impl FermionState {
    /// Amplitudes over `2^L` occupation configurations, mode 1 most
    /// significant.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let state = DenseState::qubits(amps)?;
        if state.n_sites() > MAX_FERMION_MODES {
            return Err(Error::InvalidArgument(format!(
                "{} modes exceed the supported {MAX_FERMION_MODES}",
                state.n_sites()
            )));
        }
        Ok(Self { state })
    }

    pub fn from_dense(state: DenseState) -> Result<Self> {
        if state.dims().iter().any(|&d| d != 2) {
            return Err(Error::InvalidArgument("fermionic modes must have dimension 2".into()));
        }
        Self::new(state.amps().to_vec())
    }

    pub fn n_modes(&self) -> usize {
        self.state.n_sites()
    }

    pub fn as_dense(&self) -> &DenseState {
        &self.state
    }
}

/// Traces the mode at position `q` (of `n` remaining) out of `rho`. The
/// fermionic sign is `(−1)^σ` with `σ = Σ_{p>q} (i_p + j_p)` whenever the
/// traced mode is occupied on both sides.
fn trace_mode(rho: &Mat<C64>, n: usize, q: usize) -> Mat<C64> {
    let low = n - 1 - q; // bit position of the traced mode
    let lower_mask = (1usize << low) - 1;
    let insert = |x: usize, s: usize| ((x >> low) << (low + 1)) | (s << low) | (x & lower_mask);
    let dim = 1usize << (n - 1);
    Mat::from_fn(dim, dim, |i, j| {
        let mut acc = rho[(insert(i, 0), insert(j, 0))];
        let sigma = (i & lower_mask).count_ones() + (j & lower_mask).count_ones();
        let v = rho[(insert(i, 1), insert(j, 1))];
        if sigma % 2 == 0 {
            acc += v;
        } else {
            acc -= v;
        }
        acc
    })
}

/// `ρ_A` of the normalized state, tracing out modes not in `A` in `order`
/// (default: from the last mode backwards). Rows are indexed by the kept
/// modes in ascending order, first kept mode most significant.
pub fn reduced_density_fermionic(state: &FermionState, p: &Partition, order: Option<&[usize]>) -> Result<Mat<C64>> {
    let n = state.n_modes();
    if p.len() != n {
        return Err(Error::DimMismatch(format!("mask over {} modes for a {n}-mode state", p.len())));
    }
    let psi = state.state.clone().normalized()?;
    let traced: Vec<usize> = match order {
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted != p.complement().sites() {
                return Err(Error::InvalidArgument(format!("trace order {o:?} does not match the complement of {p}")));
            }
            o.to_vec()
        }
        None => p.complement().sites().into_iter().rev().collect(),
    };
    let a = psi.amps();
    let mut rho = Mat::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj());
    let mut remaining: Vec<usize> = (0..n).collect();
    for m in traced {
        let q = remaining.iter().position(|&x| x == m).expect("mode present");
        rho = trace_mode(&rho, remaining.len(), q);
        remaining.remove(q);
        check_hermitian(&rho)?;
    }
    let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    if (tr - 1.0).abs() > HERMITICITY_TOL {
        return Err(Error::Consistency(format!("reduced density matrix has trace {tr}")));
    }
    Ok(rho)
}

fn check_hermitian(rho: &Mat<C64>) -> Result<()> {
    let n = rho.nrows();
    for i in 0..n {
        for j in 0..=i {
            let d = (rho[(i, j)] - rho[(j, i)].conj()).norm();
            if d > HERMITICITY_TOL {
                return Err(Error::Consistency(format!("reduced density matrix not Hermitian: |Δ| = {d:e}")));
            }
        }
    }
    Ok(())
}

/// `tr ρ_A²` with the sign-correct fermionic partial trace.
pub fn purity_fermionic(state: &FermionState, p: &Partition) -> Result<f64> {
    if p.is_empty() || p.is_full() {
        if p.len() != state.n_modes() {
            return Err(Error::DimMismatch(format!("mask over {} modes for a {}-mode state", p.len(), state.n_modes())));
        }
        return Ok(1.0);
    }
    let rho = reduced_density_fermionic(state, p, None)?;
    Ok(purity_of(&rho))
}

pub(crate) fn purity_of(rho: &Mat<C64>) -> f64 {
    let n = rho.nrows();
    let mut tr = 0.0;
    let mut sq = 0.0;
    for j in 0..n {
        tr += rho[(j, j)].re;
        for i in 0..n {
            sq += rho[(i, j)].norm_sqr();
        }
    }
    sq / (tr * tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{purity_dense, EntropyKind};
    use rand_distr::{Distribution, StandardNormal};

    fn random_state(n: usize, seed: u64) -> FermionState {
        let mut r = crate::seed::rng(seed);
        let amps = (0..1usize << n)
            .map(|_| C64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)))
            .collect();
        FermionState::new(amps).unwrap()
    }

    #[test]
    fn single_occupied_mode() {
        let s = FermionState::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert_eq!(purity_fermionic(&s, &"1".parse().unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn paired_modes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let s = FermionState::new(vec![C64::new(h, 0.0), z, z, C64::new(h, 0.0)]).unwrap();
        let rho = reduced_density_fermionic(&s, &"10".parse().unwrap(), None).unwrap();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15 && (rho[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(rho[(0, 1)].norm() < 1e-15);
        assert!((purity_fermionic(&s, &"10".parse().unwrap()).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn leading_regions_match_qubit_trace() {
        let s = random_state(6, 3);
        for k in 1..=3 {
            let p = Partition::from_sites(6, &(0..k).collect::<Vec<_>>()).unwrap();
            let f = purity_fermionic(&s, &p).unwrap();
            let q = purity_dense(s.as_dense(), &p, EntropyKind::Renyi2).unwrap();
            assert!((f - q).abs() < 1e-10, "k={k}: {f} vs {q}");
        }
    }

    #[test]
    fn trace_order_does_not_matter() {
        let s = random_state(5, 8);
        let p: Partition = "01001".parse().unwrap();
        let a = reduced_density_fermionic(&s, &p, None).unwrap();
        let b = reduced_density_fermionic(&s, &p, Some(&[0, 2, 3])).unwrap();
        let c = reduced_density_fermionic(&s, &p, Some(&[2, 0, 3])).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[(i, j)] - b[(i, j)]).norm() < 1e-10);
                assert!((a[(i, j)] - c[(i, j)]).norm() < 1e-10);
            }
        }
        assert!(reduced_density_fermionic(&s, &p, Some(&[0, 2])).is_err());
    }

    #[test]
    fn interior_region_purity_in_range() {
        let s = random_state(4, 1);
        let p: Partition = "0100".parse().unwrap();
        let f = purity_fermionic(&s, &p).unwrap();
        assert!(f > 0.5 - 1e-12 && f <= 1.0 + 1e-12);
    }
}
