//! Learning drivers, error metrics, EF distances, scans and maps.

mod distance;
mod learn;
mod map;
mod scan;
mod spectrum;

pub use distance::{distance_matrix, distance_stats, ef_distance, DistanceStat, RADICAND_SLACK};
pub use learn::{basis_values, global_relative_error, learn_ef, EFRecord, MAX_ENUM_SITES};
pub use map::{entanglement_map, stress, stress_layout, Layout, MAX_WEIGHT};
pub use scan::{
    bond_scan, reference_curve, run_seed_root, state_seed, RunPoint, ScanFamily, ScanGrid, ScanOutput, ScanRow,
    ScanSource, ScanStatus,
};
pub use spectrum::{ef_spectrum_study, ratio_slope, spectrum_sample_seed, SpectrumRow};

/// Mean and population standard deviation (`NaN`s for an empty slice).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Unbiased sample variance (`n − 1` denominator).
pub fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::NAN;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Least-squares line `y ≈ slope·x + intercept`; `None` with fewer than two
/// distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_helpers() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(sample_variance(&[1.0, 3.0]), 2.0);
        let (s, c) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
