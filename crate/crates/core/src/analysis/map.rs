use faer::linalg::solvers::Solve;
use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::seed::rng;
use crate::{Error, Result};

/// Cap on `D⁻²` weights (coincident points).
pub const MAX_WEIGHT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub coords: Vec<[f64; 2]>,
    /// Stress before the first iteration and after each one.
    pub stress: Vec<f64>,
}

fn weights(d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    d.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| if i == j { 0.0 } else if x > 0.0 { (x * x).recip().min(MAX_WEIGHT) } else { MAX_WEIGHT })
                .collect()
        })
        .collect()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `Σ_{i<j} wᵢⱼ (‖xᵢ − xⱼ‖ − Dᵢⱼ)²` with the layout weights.
pub fn stress(d: &[Vec<f64>], x: &[[f64; 2]]) -> f64 {
    let w = weights(d);
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let r = dist(x[i], x[j]) - d[i][j];
            s += w[i][j] * r * r;
        }
    }
    s
}

fn validate(d: &[Vec<f64>], pinned: &[Option<[f64; 2]>]) -> Result<()> {
    let n = d.len();
    if pinned.len() != n || d.iter().any(|r| r.len() != n) {
        return Err(Error::DimMismatch("distance matrix must be square and match the pin list".into()));
    }
    let scale = d.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..n {
        if d[i][i] != 0.0 {
            return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
        }
        for j in 0..n {
            let x = d[i][j];
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidArgument(format!("invalid distance {x} at ({i},{j})")));
            }
            if (x - d[j][i]).abs() > 1e-9 * scale.max(1.0) {
                return Err(Error::InvalidArgument(format!("distance matrix not symmetric at ({i},{j})")));
            }
        }
    }
    if pinned.iter().flatten().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("non-finite pin".into()));
    }
    Ok(())
}

/// Weighted SMACOF with `w = D⁻²`. Pinned points stay fixed; free points
/// start from a seeded Gaussian scaled to the mean distance.
pub fn stress_layout(d: &[Vec<f64>], pinned: &[Option<[f64; 2]>], iters: usize, seed: u64) -> Result<Layout> {
    validate(d, pinned)?;
    let n = d.len();
    let w = weights(d);
    let free: Vec<usize> = (0..n).filter(|&i| pinned[i].is_none()).collect();
    let fixed: Vec<usize> = (0..n).filter(|&i| pinned[i].is_some()).collect();

    let n_pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
    let spread = d.iter().flatten().sum::<f64>() / (2.0 * n_pairs);
    let spread = if spread > 0.0 { spread } else { 1.0 };
    let mut r = rng(seed);
    let mut x: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let g: [f64; 2] = [StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)];
            pinned[i].unwrap_or([g[0] * spread, g[1] * spread])
        })
        .collect();
    let mut history = vec![stress(d, &x)];
    if free.is_empty() || n < 2 {
        history.resize(iters + 1, history[0]);
        return Ok(Layout { coords: x, stress: history });
    }

    // V restricted to free points; without pins add 11ᵀ to remove the
    // translation null space (B·Z is orthogonal to 1).
    let k = free.len();
    let v = Mat::from_fn(k, k, |a, b| {
        let (i, j) = (free[a], free[b]);
        let base = if i == j { w[i].iter().sum::<f64>() } else { -w[i][j] };
        if fixed.is_empty() {
            base + 1.0
        } else {
            base
        }
    });
    let lu = v.partial_piv_lu();

    for _ in 0..iters {
        // (B(Z) Z)_i = Σ_j wᵢⱼ Dᵢⱼ (zᵢ − zⱼ) / ‖zᵢ − zⱼ‖
        let rhs = Mat::from_fn(k, 2, |a, c| {
            let i = free[a];
            let mut s = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dz = dist(x[i], x[j]);
                if dz > 0.0 {
                    s += w[i][j] * d[i][j] * (x[i][c] - x[j][c]) / dz;
                }
                if pinned[j].is_some() {
                    // −V_UP X_P
                    s += w[i][j] * x[j][c];
                }
            }
            s
        });
        let sol = lu.solve(&rhs);
        for (a, &i) in free.iter().enumerate() {
            x[i] = [sol[(a, 0)], sol[(a, 1)]];
        }
        let s = stress(d, &x);
        let prev = *history.last().unwrap();
        history.push(s);
        if prev - s <= 1e-15 * prev.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(Layout { coords: x, stress: history })
}

/// Two-pass map: lay out the deterministic states first, pin them, then
/// lay out everything. `pins` fixes points in the first pass as well.
pub fn entanglement_map(
    d: &[Vec<f64>],
    deterministic: &[bool],
    pins: &[Option<[f64; 2]>],
    iters: usize,
    seed: u64,
) -> Result<Layout> {
    validate(d, pins)?;
    if deterministic.len() != d.len() {
        return Err(Error::DimMismatch("one determinism flag per point".into()));
    }
    let det: Vec<usize> = (0..d.len()).filter(|&i| deterministic[i]).collect();
    let mut stage2 = pins.to_vec();
    if !det.is_empty() && det.len() < d.len() {
        let sub: Vec<Vec<f64>> = det.iter().map(|&i| det.iter().map(|&j| d[i][j]).collect()).collect();
        let sub_pins: Vec<Option<[f64; 2]>> = det.iter().map(|&i| pins[i]).collect();
        let first = stress_layout(&sub, &sub_pins, iters, crate::seed::derive_seed(seed, "map-anchor", 0))?;
        for (a, &i) in det.iter().enumerate() {
            stage2[i] = Some(first.coords[a]);
        }
    }
    stress_layout(d, &stage2, iters, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equilateral_triangle() {
        let d = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let l = stress_layout(&d, &[None; 3], 500, 7).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((dist(l.coords[i], l.coords[j]) - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn all_pinned_echoes() {
        let d = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        let pins = [Some([0.0, 0.0]), Some([1.0, 0.5])];
        let l = stress_layout(&d, &pins, 10, 0).unwrap();
        assert_eq!(l.coords, vec![[0.0, 0.0], [1.0, 0.5]]);
        assert!(l.stress.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn coincident_points_are_capped() {
        let d = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let l = stress_layout(&d, &[None; 3], 200, 1).unwrap();
        assert!(dist(l.coords[0], l.coords[1]) < 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(stress_layout(&[vec![1.0]], &[None], 1, 0).is_err());
        assert!(stress_layout(&[vec![0.0, 1.0], vec![2.0, 0.0]], &[None; 2], 1, 0).is_err());
    }

    #[test]
    fn two_pass_map_keeps_anchors() {
        let d = vec![
            vec![0.0, 3.0, 1.0, 2.5],
            vec![3.0, 0.0, 2.5, 1.0],
            vec![1.0, 2.5, 0.0, 2.0],
            vec![2.5, 1.0, 2.0, 0.0],
        ];
        let m = entanglement_map(&d, &[true, true, false, false], &[None; 4], 300, 3).unwrap();
        assert!((dist(m.coords[0], m.coords[1]) - 3.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn stress_never_increases(pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..7), pin_first in any::<bool>(), seed in 0u64..100) {
            let n = pts.len();
            // target distances from a 3D point cloud: generally not embeddable in 2D
            let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| {
                let z = (i as f64 - j as f64) * 0.7;
                ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2) + z * z).sqrt()
            }).collect()).collect();
            let mut pins = vec![None; n];
            if pin_first {
                pins[0] = Some([pts[0].0, pts[0].1]);
            }
            let l = stress_layout(&d, &pins, 50, seed).unwrap();
            for w in l.stress.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}
