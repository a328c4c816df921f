use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::oracle::DenseState;
use crate::seed::{derive_seed, rng};
use crate::{Error, Result, C64};

pub const MAX_ED_SITES: usize = 14;
pub const MAX_SYK_MODES: usize = 7;

const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Energy the mid-spectrum target is drawn toward.
pub const MID_SPECTRUM_SHIFT: f64 = 1e-3;

/// Dense Hermitian operator on `2^L` states.
#[derive(Clone, Debug)]
pub enum Hamiltonian {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Ground,
    MidSpectrum,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Real(m) => m.nrows(),
            Hamiltonian::Complex(m) => m.nrows(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match self {
            Hamiltonian::Real(m) => C64::new(m[(i, j)], 0.0),
            Hamiltonian::Complex(m) => m[(i, j)],
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                e = e.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        e
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match self {
            Hamiltonian::Real(m) => {
                let mut v = m
                    .self_adjoint_eigenvalues(faer::Side::Lower)
                    .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
                v.sort_by(f64::total_cmp);
                Ok(v)
            }
            Hamiltonian::Complex(m) => {
                let mut v = linalg::eigvalsh_complex(m)?;
                v.sort_by(f64::total_cmp);
                Ok(v)
            }
        }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j) * v[j]).sum()).collect()
    }
}

/// Selected eigenpair of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct Eigenstate {
    pub state: DenseState,
    pub energy: f64,
    /// `‖Hv − Ev‖` of the normalized vector.
    pub residual: f64,
}

/// Ground state, or the eigenvector whose eigenvalue is closest to
/// [`MID_SPECTRUM_SHIFT`] (ties to the lower one). Full dense
/// diagonalization.
pub fn eigenstate(h: &Hamiltonian, target: Target) -> Result<Eigenstate> {
    let n = h.dim();
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::DimMismatch(format!("Hamiltonian dimension {n} is not 2^L")));
    }
    let (vals, vec): (Vec<f64>, Vec<C64>) = match h {
        Hamiltonian::Real(m) => {
            let (vals, u) = linalg::eigh_real(m)?;
            let k = pick(&vals, target);
            (vals, (0..n).map(|i| C64::new(u[(i, k)], 0.0)).collect())
        }
        Hamiltonian::Complex(m) => {
            let (vals, u) = linalg::eigh_complex(m)?;
            let k = pick(&vals, target);
            (vals, (0..n).map(|i| u[(i, k)]).collect())
        }
    };
    let k = pick(&vals, target);
    let energy = vals[k];
    let state = DenseState::qubits(vec)?.normalized()?;
    let hv = h.apply(state.amps());
    let residual = hv
        .iter()
        .zip(state.amps())
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if residual > EIGEN_RESIDUAL_TOL * scale {
        return Err(Error::Numerical(format!("eigenvector residual {residual:e}")));
    }
    Ok(Eigenstate { state, energy, residual })
}

fn pick(vals: &[f64], target: Target) -> usize {
    match target {
        Target::Ground => (0..vals.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b))).unwrap(),
        Target::MidSpectrum => (0..vals.len())
            .min_by(|&a, &b| {
                (vals[a] - MID_SPECTRUM_SHIFT)
                    .abs()
                    .total_cmp(&(vals[b] - MID_SPECTRUM_SHIFT).abs())
                    .then(vals[a].total_cmp(&vals[b]))
            })
            .unwrap(),
    }
}

/// Open-chain Ising model `J Σ σᶻσᶻ + Σ (g σˣ + (h + rᵢ) σᶻ)` with
/// `rᵢ ~ U[0, W]`. Returns the Hamiltonian and the disorder draw.
pub fn build_tfim(l: usize, j: f64, g: f64, h: f64, w: f64, seed: u64) -> Result<(Hamiltonian, Vec<f64>)> {
    if l == 0 || l > MAX_ED_SITES {
        return Err(Error::InvalidArgument(format!("TFIM supports 1..={MAX_ED_SITES} sites, got {l}")));
    }
    if !(w >= 0.0) {
        return Err(Error::InvalidArgument(format!("disorder width must be >= 0, got {w}")));
    }
    let mut r = rng(derive_seed(seed, "disorder", l as u64));
    let disorder: Vec<f64> = (0..l).map(|_| if w > 0.0 { r.gen_range(0.0..w) } else { 0.0 }).collect();
    let n = 1usize << l;
    let bit = |i: usize| 1usize << (l - 1 - i);
    let z = |x: usize, i: usize| if x & bit(i) == 0 { 1.0 } else { -1.0 };
    let mut m = Mat::<f64>::zeros(n, n);
    for x in 0..n {
        let mut diag = 0.0;
        for i in 0..l {
            diag += (h + disorder[i]) * z(x, i);
            if i + 1 < l {
                diag += j * z(x, i) * z(x, i + 1);
            }
            m[(x ^ bit(i), x)] += g;
        }
        m[(x, x)] += diag;
    }
    Ok((Hamiltonian::Real(m), disorder))
}

/// Sum of independent 4×4 GUE couplings `h = (G + G†)/2` on neighbouring
/// qubit pairs, `G` with i.i.d. standard normal real and imaginary parts.
pub fn build_gue_h(l: usize, seed: u64) -> Result<Hamiltonian> {
    if !(2..=MAX_ED_SITES).contains(&l) {
        return Err(Error::InvalidArgument(format!("GUE chain supports 2..={MAX_ED_SITES} sites, got {l}")));
    }
    let mut r = rng(seed);
    let n = 1usize << l;
    let mut m = Mat::<C64>::zeros(n, n);
    for site in 0..l - 1 {
        let g: Vec<C64> = (0..16).map(|_| C64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r))).collect();
        let block: Vec<C64> = (0..16).map(|k| (g[k] + g[(k % 4) * 4 + k / 4].conj()) * 0.5).collect();
        let shift = l - 2 - site; // bits below the pair
        for x in 0..n {
            let pair_in = (x >> shift) & 3;
            let rest = x & !(3 << shift);
            for pair_out in 0..4 {
                let v = block[pair_out * 4 + pair_in];
                if v != C64::new(0.0, 0.0) {
                    m[(rest | (pair_out << shift), x)] += v;
                }
            }
        }
    }
    Ok(Hamiltonian::Complex(m))
}

/// Monomial operator `|x⟩ ↦ coef(x) |target(x)⟩`.
#[derive(Clone, Debug)]
pub struct Monomial {
    pub target: Vec<usize>,
    pub coef: Vec<C64>,
}

impl Monomial {
    /// `self · other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let target = other.target.iter().map(|&y| self.target[y]).collect();
        let coef = other.coef.iter().zip(&other.target).map(|(&c, &y)| self.coef[y] * c).collect();
        Monomial { target, coef }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.target.len();
        let mut m = Mat::zeros(n, n);
        for x in 0..n {
            m[(self.target[x], x)] += self.coef[x];
        }
        m
    }
}

/// Majorana operators `χ_1..χ_{2L}` on `L` Dirac modes, with
/// `√2 χ_{2k−1} = c_k† + c_k` and `√2 χ_{2k} = i(c_k − c_k†)`. Mode 1 is the
/// most significant bit.
pub fn majoranas(modes: usize) -> Vec<Monomial> {
    let n = 1usize << modes;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * modes);
    for k in 0..modes {
        let bit = 1usize << (modes - 1 - k);
        let sign = |x: usize| if (x >> (modes - k)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let target: Vec<usize> = (0..n).map(|x| x ^ bit).collect();
        let odd = (0..n).map(|x| C64::new(h * sign(x), 0.0)).collect();
        let even = (0..n)
            .map(|x| {
                let s = sign(x);
                if x & bit != 0 {
                    C64::new(0.0, h * s)
                } else {
                    C64::new(0.0, -h * s)
                }
            })
            .collect();
        out.push(Monomial { target: target.clone(), coef: odd });
        out.push(Monomial { target, coef: even });
    }
    out
}

/// SYK Hamiltonian `−(√6 / N^{3/2}) Σ_{i<j<k<l} 4 J_ijkl χ_i χ_j χ_k χ_l`
/// over `N = 2L` Majoranas, `J_ijkl ~ N(0, 1)`.
pub fn build_syk(modes: usize, seed: u64) -> Result<Hamiltonian> {
    if !(2..=MAX_SYK_MODES).contains(&modes) {
        return Err(Error::InvalidArgument(format!("SYK supports 2..={MAX_SYK_MODES} modes, got {modes}")));
    }
    let chi = majoranas(modes);
    let nm = chi.len();
    let pref = -(6f64).sqrt() / (nm as f64).powf(1.5) * 4.0;
    let mut r = rng(seed);
    let dim = 1usize << modes;
    let mut m = Mat::<C64>::zeros(dim, dim);
    for i in 0..nm {
        for j in i + 1..nm {
            let ij = chi[i].compose(&chi[j]);
            for k in j + 1..nm {
                let ijk = ij.compose(&chi[k]);
                for l in k + 1..nm {
                    let jv: f64 = StandardNormal.sample(&mut r);
                    let op = ijk.compose(&chi[l]);
                    for x in 0..dim {
                        m[(op.target[x], x)] += op.coef[x] * (pref * jv);
                    }
                }
            }
        }
    }
    let h = Hamiltonian::Complex(m);
    let herr = h.hermiticity_error();
    if herr > 1e-10 {
        return Err(Error::Consistency(format!("SYK Hamiltonian not Hermitian: {herr:e}")));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zz_pair_spectrum() {
        let (h, _) = build_tfim(2, 1.0, 0.0, 0.0, 0.0, 0).unwrap();
        assert_eq!(h.eigenvalues().unwrap(), vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn tfim_hermitian_and_seeded() {
        let (h, d) = build_tfim(6, 0.632, 0.902, 0.0, 5.0, 3).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        assert!(d.iter().all(|&r| (0.0..5.0).contains(&r)));
        let (_, d2) = build_tfim(6, 0.632, 0.902, 0.0, 5.0, 3).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn critical_spectrum_symmetric() {
        let (h, _) = build_tfim(6, -1.0, -1.0, 0.0, 0.0, 0).unwrap();
        let e = h.eigenvalues().unwrap();
        for (a, b) in e.iter().zip(e.iter().rev()) {
            assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenstate_residuals() {
        let (h, _) = build_tfim(6, -1.0, -1.05, 0.5, 0.0, 0).unwrap();
        let g = eigenstate(&h, Target::Ground).unwrap();
        assert!(g.residual < 1e-10);
        assert!((g.energy - h.eigenvalues().unwrap()[0]).abs() < 1e-10);
        let m = eigenstate(&h, Target::MidSpectrum).unwrap();
        let e = h.eigenvalues().unwrap();
        let best = e.iter().map(|v| (v - MID_SPECTRUM_SHIFT).abs()).fold(f64::INFINITY, f64::min);
        assert!(((m.energy - MID_SPECTRUM_SHIFT).abs() - best).abs() < 1e-10);
    }

    #[test]
    fn ferro_ground_is_cat_like() {
        let (h, _) = build_tfim(2, -1.0, 0.0, 0.0, 0.0, 0).unwrap();
        let g = eigenstate(&h, Target::Ground).unwrap();
        let a = g.state.amps();
        // within the degenerate {|00⟩, |11⟩} space
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
        assert!((a[0].norm_sqr() + a[3].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gue_chain() {
        let h = build_gue_h(4, 1).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        let h2 = build_gue_h(4, 2).unwrap();
        assert!((h.entry(0, 0) - h2.entry(0, 0)).norm() > 0.0);
    }

    #[test]
    fn majorana_algebra() {
        let chi = majoranas(3);
        for i in 0..6 {
            for j in 0..6 {
                let a = chi[i].compose(&chi[j]).to_dense();
                let b = chi[j].compose(&chi[i]).to_dense();
                for x in 0..8 {
                    for y in 0..8 {
                        let v = a[(x, y)] + b[(x, y)];
                        let expect = if i == j && x == y { 1.0 } else { 0.0 };
                        assert!((v - C64::new(expect, 0.0)).norm() < 1e-14, "{{χ{i}, χ{j}}}");
                    }
                }
            }
        }
    }

    #[test]
    fn syk_is_hermitian_and_traceless() {
        let h = build_syk(4, 5).unwrap();
        assert!(h.hermiticity_error() < 1e-10);
        assert!(h.trace().abs() < 1e-10);
    }
}
