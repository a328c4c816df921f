use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear_fit;
use crate::oracle::mps_ef_build;
use crate::seed::derive_seed;
use crate::zoo::gen_random_mps;
use crate::{Error, Result};

/// Averaged half-cut EF spectrum at one bond dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub phi: usize,
    /// Sample means of `λᵢ²`, descending index order, zero-padded.
    pub mean_sq: Vec<f64>,
    /// `λ₃² / λ₂²` of the averaged squares.
    pub ratio: f64,
}

impl SpectrumRow {
    /// `√⟨λᵢ²⟩`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.mean_sq.iter().map(|v| v.sqrt()).collect()
    }
}

pub fn spectrum_sample_seed(root: u64, phi: usize, sample: usize) -> u64 {
    derive_seed(derive_seed(root, "ef-spectrum", phi as u64), "sample", sample as u64)
}

/// Builds the EF of random MPS directly from their tensors and averages the
/// squared half-cut singular values of the normalized EF.
pub fn ef_spectrum_study(phis: &[usize], l: usize, n_samples: usize, seed: u64) -> Result<Vec<SpectrumRow>> {
    if n_samples == 0 || l < 2 {
        return Err(Error::InvalidArgument("spectrum study needs L >= 2 and at least one sample".into()));
    }
    phis.iter()
        .map(|&phi| {
            let spectra = (0..n_samples)
                .into_par_iter()
                .map(|s| {
                    let mps = gen_random_mps(l, phi, spectrum_sample_seed(seed, phi, s))?;
                    Ok(mps_ef_build(&mps)?.halfcut_spectrum()?.values().to_vec())
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            let width = spectra.iter().map(Vec::len).max().unwrap_or(0).max(3);
            let mut mean_sq = vec![0.0; width];
            for sp in &spectra {
                for (m, v) in mean_sq.iter_mut().zip(sp) {
                    *m += v * v / n_samples as f64;
                }
            }
            let ratio = if mean_sq[1] > 0.0 { mean_sq[2] / mean_sq[1] } else { 0.0 };
            Ok(SpectrumRow { phi, mean_sq, ratio })
        })
        .collect()
}

/// Slope of `ln ratio` against `ln φ` over rows with a positive ratio.
pub fn ratio_slope(rows: &[SpectrumRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.ratio > 0.0 && r.phi > 0).map(|r| ((r.phi as f64).ln(), r.ratio.ln())).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    linear_fit(&x, &y).map(|(slope, _)| slope)
}
