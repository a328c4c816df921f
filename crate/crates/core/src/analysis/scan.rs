use std::cmp::Ordering;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{global_relative_error, mean_std, MAX_ENUM_SITES};
use crate::cross::{tci_learn_observed, TciMode, TciOptions};
use crate::oracle::{Basis, CachedOracle, HaarAnalytic, PurityBackend, PurityTable};
use crate::seed::derive_seed;
use crate::zoo::{Family, ModelSpec, TfimPreset};
use crate::{Error, Result};

/// Where the states of a scan family come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanSource {
    /// Closed-form Haar average (rank-2 formula, no clipping).
    HaarAnalytic,
    Model { family: Family, preset: Option<TfimPreset>, phi: Option<usize> },
}

/// A named state family; parsed from `haar`, `haar_analytic`, `product`,
/// `tfim:<preset>`, `random_mps:<φ>`, ...
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanFamily {
    pub name: String,
    pub source: ScanSource,
}

impl std::str::FromStr for ScanFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let canon = s.trim().replace('-', "_");
        let (head, arg) = match canon.split_once(':') {
            Some((h, a)) => (h.to_string(), Some(a.to_string())),
            None => (canon.clone(), None),
        };
        let source = match (head.as_str(), &arg) {
            ("haar_analytic", None) => ScanSource::HaarAnalytic,
            ("tfim", Some(p)) => ScanSource::Model { family: Family::Tfim, preset: Some(p.parse()?), phi: None },
            ("tfim", None) => return Err(Error::InvalidArgument("tfim needs a preset, e.g. tfim:mbl".into())),
            ("random_mps", Some(p)) => {
                let phi = p.parse().map_err(|_| Error::InvalidArgument(format!("bad bond dimension in {s:?}")))?;
                ScanSource::Model { family: Family::RandomMps, preset: None, phi: Some(phi) }
            }
            (f, None) => ScanSource::Model { family: f.parse()?, preset: None, phi: None },
            _ => return Err(Error::InvalidArgument(format!("unexpected argument in family {s:?}"))),
        };
        Ok(Self { name: canon, source })
    }
}

impl ScanFamily {
    /// Model spec of one sample, or `None` for the analytic source.
    pub fn spec(&self, l: usize, seed: u64) -> Option<ModelSpec> {
        match &self.source {
            ScanSource::HaarAnalytic => None,
            ScanSource::Model { family: Family::Tfim, preset: Some(p), .. } => Some(ModelSpec::tfim_preset(*p, l, seed)),
            ScanSource::Model { family, phi, .. } => Some(ModelSpec { phi: *phi, ..ModelSpec::new(*family, l, seed) }),
        }
    }

    /// Whether every sample of the family is the same state.
    pub fn is_deterministic(&self) -> bool {
        match &self.source {
            ScanSource::HaarAnalytic => true,
            ScanSource::Model { family, .. } => matches!(family, Family::Product | Family::Motzkin | Family::Fredkin),
        }
    }

    fn table(&self, l: usize, seed: u64) -> Result<PurityTable> {
        match self.spec(l, seed) {
            None => PurityTable::build(&HaarAnalytic::unclipped(l, 2)?),
            Some(spec) => PurityTable::build(&spec.generate()?.state),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub families: Vec<ScanFamily>,
    pub sizes: Vec<usize>,
    pub eps_ths: Vec<f64>,
    pub n_state_samples: usize,
    pub n_tci_runs: usize,
    pub seed: u64,
    pub basis: Basis,
    /// Base options; `seed` is overridden per run.
    pub tci: TciOptions,
}

impl ScanGrid {
    pub fn new(families: Vec<ScanFamily>, sizes: Vec<usize>, eps_ths: Vec<f64>) -> Self {
        Self {
            families,
            sizes,
            eps_ths,
            n_state_samples: 1,
            n_tci_runs: 10,
            seed: 0,
            basis: Basis::Dual,
            tci: TciOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Ok,
    /// At least one run ended above the threshold; its final sweep is used.
    NotReached,
    Error,
}

impl std::fmt::Display for ScanStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScanStatus::Ok => "ok",
            ScanStatus::NotReached => "not_reached",
            ScanStatus::Error => "error",
        })
    }
}

/// One run stopped at one threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPoint {
    pub family: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub state_seed: u64,
    pub run_seed: u64,
    pub eps_th: f64,
    pub sweep: usize,
    pub eps: f64,
    pub mean_chi: f64,
    pub max_chi: usize,
    pub queries: usize,
    pub reached: bool,
}

/// Statistics over the TCI runs of one state at one threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub family: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub state_seed: u64,
    /// Root of the per-run seeds.
    pub run_seed: u64,
    pub eps_th: f64,
    pub mean_chi: f64,
    pub std_chi: f64,
    pub mean_queries: f64,
    pub mean_max_chi: f64,
    pub status: ScanStatus,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub runs: Vec<RunPoint>,
}

/// Largest mean bond dimension a dual-basis train can have:
/// mean over bonds `ℓ = 1..L−2` of `min(2^ℓ, 2^{L−1−ℓ})`.
pub fn reference_curve(l: usize) -> f64 {
    if l < 3 {
        return 1.0;
    }
    let n = l - 1;
    let sum: f64 = (1..n).map(|b| 2f64.powi(b.min(n - b) as i32)).sum();
    sum / (n - 1) as f64
}

pub fn state_seed(root: u64, family: &str, l: usize, sample: usize) -> u64 {
    derive_seed(derive_seed(root, &format!("scan-state:{family}"), l as u64), "sample", sample as u64)
}

pub fn run_seed_root(state_seed: u64) -> u64 {
    derive_seed(state_seed, "scan-runs", 0)
}

struct SweepPoint {
    eps: f64,
    mean_chi: f64,
    max_chi: usize,
    queries: usize,
    sweep: usize,
}

fn run_history(table: &PurityTable, grid: &ScanGrid, seed: u64, stop_at: f64) -> Result<Vec<SweepPoint>> {
    let l = table.n_sites();
    let oracle = CachedOracle::new(table);
    let f = oracle.in_basis(grid.basis);
    let opts = TciOptions { seed, ..grid.tci.clone() };
    let mut hist = Vec::new();
    tci_learn_observed(&f, &grid.basis.space(l)?, &opts, TciMode::Adaptive, |rec, tt| {
        let eps = global_relative_error(tt, grid.basis, table);
        hist.push(SweepPoint {
            eps,
            mean_chi: tt.mean_rank(),
            max_chi: tt.max_rank(),
            queries: rec.n_queries,
            sweep: rec.sweep,
        });
        if eps <= stop_at {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(hist)
}

fn scan_state(grid: &ScanGrid, fam: &ScanFamily, l: usize, sample: usize) -> (Vec<ScanRow>, Vec<RunPoint>) {
    let seed = state_seed(grid.seed, &fam.name, l, sample);
    let root = run_seed_root(seed);
    let row = |eps_th: f64, status, message| ScanRow {
        family: fam.name.clone(),
        l,
        state_seed: seed,
        run_seed: root,
        eps_th,
        mean_chi: f64::NAN,
        std_chi: f64::NAN,
        mean_queries: f64::NAN,
        mean_max_chi: f64::NAN,
        status,
        message,
    };
    let fail = |e: Error| (grid.eps_ths.iter().map(|&t| row(t, ScanStatus::Error, Some(e.to_string()))).collect(), vec![]);
    if l > MAX_ENUM_SITES {
        return fail(Error::InvalidArgument(format!("scans enumerate the EF; L = {l} exceeds {MAX_ENUM_SITES}")));
    }
    let table = match fam.table(l, seed) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let stop_at = grid.eps_ths.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut histories = Vec::with_capacity(grid.n_tci_runs);
    for r in 0..grid.n_tci_runs {
        let s = derive_seed(root, "run", r as u64);
        match run_history(&table, grid, s, stop_at) {
            Ok(h) if !h.is_empty() => histories.push((s, h)),
            Ok(_) => return fail(Error::Consistency("TCI run recorded no sweeps".into())),
            Err(e) => return fail(e),
        }
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &eps_th in &grid.eps_ths {
        let mut points = Vec::new();
        for (s, h) in &histories {
            let (p, reached) = match h.iter().find(|p| p.eps <= eps_th) {
                Some(p) => (p, true),
                None => (h.last().expect("nonempty history"), false),
            };
            points.push(RunPoint {
                family: fam.name.clone(),
                l,
                state_seed: seed,
                run_seed: *s,
                eps_th,
                sweep: p.sweep,
                eps: p.eps,
                mean_chi: p.mean_chi,
                max_chi: p.max_chi,
                queries: p.queries,
                reached,
            });
        }
        let chis: Vec<f64> = points.iter().map(|p| p.mean_chi).collect();
        let (mean_chi, std_chi) = mean_std(&chis);
        let (mean_queries, _) = mean_std(&points.iter().map(|p| p.queries as f64).collect::<Vec<_>>());
        let (mean_max_chi, _) = mean_std(&points.iter().map(|p| p.max_chi as f64).collect::<Vec<_>>());
        let all = points.iter().all(|p| p.reached);
        rows.push(ScanRow {
            mean_chi,
            std_chi,
            mean_queries,
            mean_max_chi,
            ..row(eps_th, if all { ScanStatus::Ok } else { ScanStatus::NotReached }, None)
        });
        runs.extend(points);
    }
    (rows, runs)
}

fn cmp_rows(a: &ScanRow, b: &ScanRow) -> Ordering {
    (&a.family, a.l, a.state_seed)
        .cmp(&(&b.family, b.l, b.state_seed))
        .then(b.eps_th.total_cmp(&a.eps_th))
}

/// Runs `n_tci_runs` randomly started learns per state and reports, for
/// each threshold, the bond dimension at the first sweep whose global
/// relative error is below it. Failures become rows with error status.
pub fn bond_scan(grid: &ScanGrid) -> Result<ScanOutput> {
    if grid.n_tci_runs == 0 || grid.n_state_samples == 0 {
        return Err(Error::InvalidArgument("scan needs at least one state sample and one TCI run".into()));
    }
    if grid.eps_ths.is_empty() || grid.eps_ths.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidArgument("scan needs non-negative thresholds".into()));
    }
    let jobs: Vec<(&ScanFamily, usize, usize)> = grid
        .families
        .iter()
        .flat_map(|f| grid.sizes.iter().flat_map(move |&l| (0..grid.n_state_samples).map(move |s| (f, l, s))))
        .collect();
    let parts: Vec<_> = jobs.par_iter().map(|&(f, l, s)| scan_state(grid, f, l, s)).collect();
    let mut out = ScanOutput::default();
    for (rows, runs) in parts {
        out.rows.extend(rows);
        out.runs.extend(runs);
    }
    out.rows.sort_by(cmp_rows);
    out.runs.sort_by(|a, b| {
        (&a.family, a.l, a.state_seed, a.run_seed)
            .cmp(&(&b.family, b.l, b.state_seed, b.run_seed))
            .then(b.eps_th.total_cmp(&a.eps_th))
    });
    Ok(out)
}
