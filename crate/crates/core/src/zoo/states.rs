use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::oracle::{DenseState, Mps, MpsCore};
use crate::seed::rng;
use crate::{Error, Result, C64};

pub const MAX_HAAR_SITES: usize = 16;
pub const MAX_MOTZKIN_SITES: usize = 12;
pub const MAX_FREDKIN_SITES: usize = 14;

fn complex_normal(r: &mut rand_chacha::ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(r), StandardNormal.sample(r))
}

/// Haar-random qubit state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn gen_haar(l: usize, seed: u64) -> Result<DenseState> {
    if l == 0 || l > MAX_HAAR_SITES {
        return Err(Error::InvalidArgument(format!("Haar states support 1..={MAX_HAAR_SITES} sites, got {l}")));
    }
    let mut r = rng(seed);
    let amps = (0..1usize << l).map(|_| complex_normal(&mut r)).collect();
    DenseState::qubits(amps)?.normalized()
}

/// Random qubit MPS: complex Gaussian cores with bonds
/// `min(φ, 2^ℓ, 2^{L−ℓ})`, left-canonicalized, unit norm.
pub fn gen_random_mps(l: usize, phi: usize, seed: u64) -> Result<Mps> {
    if l == 0 || phi == 0 {
        return Err(Error::InvalidArgument("random MPS needs L >= 1 and φ >= 1".into()));
    }
    let bond = |b: usize| -> usize {
        if b == 0 || b == l {
            1
        } else {
            let cap = |k: usize| if k >= 20 { usize::MAX } else { 1usize << k };
            phi.min(cap(b)).min(cap(l - b))
        }
    };
    let mut r = rng(seed);
    let mut raw: Vec<(usize, usize, Vec<C64>)> = (0..l)
        .map(|i| {
            let (a, b) = (bond(i), bond(i + 1));
            (a, b, (0..a * 2 * b).map(|_| complex_normal(&mut r)).collect())
        })
        .collect();
    // left-canonical QR sweep
    for i in 0..l {
        let (a, b, data) = raw[i].clone();
        let m = Mat::from_fn(a * 2, b, |x, y| data[x * b + y]);
        let qr = m.qr();
        let q = qr.compute_thin_Q();
        let rr = qr.thin_R().to_owned();
        let k = q.ncols();
        if i + 1 < l {
            let mut qd = Vec::with_capacity(a * 2 * k);
            for x in 0..a * 2 {
                for y in 0..k {
                    qd.push(q[(x, y)]);
                }
            }
            raw[i] = (a, k, qd);
            let (_, nb, next) = raw[i + 1].clone();
            let nm = Mat::from_fn(b, 2 * nb, |x, y| next[x * 2 * nb + y]);
            let prod = &rr * &nm;
            let mut nd = Vec::with_capacity(k * 2 * nb);
            for x in 0..k {
                for y in 0..2 * nb {
                    nd.push(prod[(x, y)]);
                }
            }
            raw[i + 1] = (k, nb, nd);
        } else {
            let norm = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroNorm("random MPS collapsed".into()));
            }
            raw[i] = (a, b, data.iter().map(|z| z / norm).collect());
        }
    }
    let cores = raw
        .into_iter()
        .map(|(a, b, d)| MpsCore::new(a, 2, b, d))
        .collect::<Result<Vec<_>>>()?;
    Mps::new(cores)
}

/// Equal-weight superposition of `c`-colored Motzkin paths. Local states:
/// 0 = flat, `1..=c` = up with color, `c+1..=2c` = down with color.
pub fn gen_motzkin(l: usize, colors: usize) -> Result<DenseState> {
    if l == 0 || l > MAX_MOTZKIN_SITES || colors == 0 {
        return Err(Error::InvalidArgument(format!(
            "Motzkin states support 1..={MAX_MOTZKIN_SITES} sites and >= 1 color"
        )));
    }
    let d = 2 * colors + 1;
    let paths = enumerate_paths(l, colors, true);
    path_state(vec![d; l], &paths)
}

/// Equal-weight superposition of Dyck paths on spin-½ sites (0 = up,
/// 1 = down). Requires even `L`.
pub fn gen_fredkin(l: usize) -> Result<DenseState> {
    if l == 0 || l % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Fredkin states need even L, got {l}")));
    }
    if l > MAX_FREDKIN_SITES {
        return Err(Error::InvalidArgument(format!("Fredkin states support up to {MAX_FREDKIN_SITES} sites")));
    }
    let paths: Vec<Vec<usize>> = enumerate_paths(l, 1, false)
        .into_iter()
        .map(|p| p.into_iter().map(|s| s - 1).collect())
        .collect();
    path_state(vec![2; l], &paths)
}

/// `|0…0⟩` on `L` qubits.
pub fn gen_product(l: usize) -> Result<DenseState> {
    DenseState::product(vec![2; l])
}

/// Local-state sequences of balanced colored paths (Motzkin encoding).
pub(crate) fn enumerate_paths(l: usize, colors: usize, allow_flat: bool) -> Vec<Vec<usize>> {
    fn rec(l: usize, c: usize, flat: bool, cur: &mut Vec<usize>, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let left = l - cur.len();
        if left == 0 {
            if stack.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        if stack.len() > left {
            return;
        }
        if flat {
            cur.push(0);
            rec(l, c, flat, cur, stack, out);
            cur.pop();
        }
        if stack.len() < left {
            for col in 1..=c {
                cur.push(col);
                stack.push(col);
                rec(l, c, flat, cur, stack, out);
                stack.pop();
                cur.pop();
            }
        }
        if let Some(&col) = stack.last() {
            cur.push(c + col);
            stack.pop();
            rec(l, c, flat, cur, stack, out);
            stack.push(col);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(l, colors, allow_flat, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

fn path_state(dims: Vec<usize>, paths: &[Vec<usize>]) -> Result<DenseState> {
    if paths.is_empty() {
        return Err(Error::InvalidArgument("no valid path".into()));
    }
    let n: usize = dims.iter().product();
    let mut amps = vec![C64::new(0.0, 0.0); n];
    let w = 1.0 / (paths.len() as f64).sqrt();
    for p in paths {
        let flat = p.iter().zip(&dims).fold(0usize, |acc, (&s, &d)| acc * d + s);
        amps[flat] = C64::new(w, 0.0);
    }
    DenseState::new(dims, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{purity_dense, purity_mps, EntropyKind, Partition};

    #[test]
    fn haar_is_normalized_and_seeded() {
        let a = gen_haar(8, 1).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert_ne!(a, gen_haar(8, 2).unwrap());
        assert_eq!(a, gen_haar(8, 1).unwrap());
    }

    #[test]
    fn haar_mean_halfcut_purity() {
        let p = Partition::from_sites(10, &[0, 1, 2, 3, 4]).unwrap();
        let mean: f64 =
            (0..100).map(|s| purity_dense(&gen_haar(10, s).unwrap(), &p, EntropyKind::Renyi2).unwrap()).sum::<f64>() / 100.0;
        let expect = 2.0 * 32.0 / 1025.0;
        assert!((mean - expect).abs() < 0.1 * expect, "{mean} vs {expect}");
    }

    #[test]
    fn random_mps_properties() {
        let m = gen_random_mps(8, 2, 3).unwrap();
        assert!((m.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(m.bond_dims(), vec![2; 7]);
        let cut = Partition::from_sites(8, &[0, 1, 2, 3]).unwrap();
        let s2 = -purity_mps(&m, &cut).unwrap().ln();
        assert!(s2 <= 2f64.ln() + 1e-9);
        let d = m.to_dense().unwrap();
        for bits in [0b1u64, 0b1010_0110, 0b0111_0000] {
            let p = Partition::new(8, bits).unwrap();
            let a = purity_mps(&m, &p).unwrap();
            let b = purity_dense(&d, &p, EntropyKind::Renyi2).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
        let capped = gen_random_mps(5, 8, 1).unwrap();
        assert_eq!(capped.bond_dims(), vec![2, 4, 4, 2]);
    }

    #[test]
    fn product_mps_has_unit_purities() {
        let m = gen_random_mps(6, 1, 4).unwrap();
        for bits in 0..64u64 {
            let v = purity_mps(&m, &Partition::new(6, bits).unwrap()).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn motzkin_counts() {
        assert_eq!(enumerate_paths(2, 1, true).len(), 2);
        assert_eq!(enumerate_paths(4, 1, true).len(), 9);
        assert_eq!(enumerate_paths(6, 1, true).len(), 51);
        // two colors, L=2: flat-flat plus two colored up-down pairs
        assert_eq!(enumerate_paths(2, 2, true).len(), 3);
        let s = gen_motzkin(2, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |ff⟩ = 0*3+0, |ud⟩ = 1*3+2
        assert!((s.amps()[0].re - h).abs() < 1e-15 && (s.amps()[5].re - h).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fredkin_paths() {
        assert!(gen_fredkin(5).is_err());
        let s = gen_fredkin(2).unwrap();
        assert_eq!(s.amps()[0b01].re, 1.0);
        let p = purity_dense(&s, &"10".parse().unwrap(), EntropyKind::Renyi2).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        // Catalan number C_3 = 5
        assert_eq!(enumerate_paths(6, 1, false).len(), 5);
    }
}
