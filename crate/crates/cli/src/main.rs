mod source;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use eftci::analysis::{
    bond_scan, distance_matrix, distance_stats, ef_spectrum_study, entanglement_map, learn_ef, ratio_slope,
    reference_curve, EFRecord, ScanFamily, ScanGrid, ScanStatus,
};
use eftci::cross::{InitialPivot, TciMode, TciOptions};
use eftci::disentangle::{disentangle, query_cap, DisentangleOptions};
use eftci::oracle::{Basis, PurityBackend};
use eftci::seed::derive_seed;
use eftci::zoo::{Family, ModelSpec, StateData, Target, TfimPreset};

use source::OracleSpec;

#[derive(Parser, Debug, Serialize)]
#[command(name = "eftci", version, about = "Learn and analyse entanglement features of quantum states")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (EFTCI_THREADS overrides).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Table format for scan, distmatrix, map and spectrum outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// State generation.
    #[command(subcommand)]
    State(StateCmd),
    /// Entanglement-feature learning and analysis.
    #[command(subcommand)]
    Ef(EfCmd),
}

#[derive(Subcommand, Debug, Serialize)]
enum StateCmd {
    /// Generate a zoo state and write it in the dense binary format.
    Gen(GenArgs),
}

#[derive(Subcommand, Debug, Serialize)]
enum EfCmd {
    /// Learn the EF of one state with TCI.
    Learn(LearnArgs),
    /// Bond-dimension scan over families, sizes and error thresholds.
    Scan(ScanArgs),
    /// Pairwise EF distances.
    Distmatrix(DistArgs),
    /// Two-dimensional entanglement map by stress majorization.
    Map(MapArgs),
    /// Reorder sites to lower left-right entanglement.
    Disentangle(DisentangleArgs),
    /// Half-cut spectrum of the EF of random MPS.
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum TargetArg {
    Ground,
    MidSpectrum,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    /// haar, random_mps, tfim, gue_h, syk, motzkin, fredkin, product
    #[arg(long)]
    family: String,
    #[arg(long = "L")]
    l: usize,
    /// Ising parameter set: chaotic, weak_disorder, mblt, mbl, critical.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    /// MPS bond dimension.
    #[arg(long)]
    phi: Option<usize>,
    /// Motzkin colors.
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    /// Output state file; metadata goes to `<stem>.meta.json`.
    #[arg(long, default_value = "state.bin")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BasisArg {
    Natural,
    Dual,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Natural => Basis::Natural,
            BasisArg::Dual => Basis::Dual,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct TciArgs {
    /// Local relative error tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Rank cap (required for mode 1).
    #[arg(long)]
    chi_max: Option<usize>,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 2)]
    n_global_search: usize,
    #[arg(long, default_value_t = 2)]
    max_global_insert: usize,
    /// First pivot: zeros (default), random, or ascent (random then greedy |f| ascent).
    #[arg(long, value_enum)]
    initial_pivot: Option<PivotArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PivotArg {
    Zeros,
    Random,
    Ascent,
}

impl TciArgs {
    fn options(&self, seed: u64) -> TciOptions {
        TciOptions {
            tolerance: self.tol,
            max_rank: self.chi_max.unwrap_or(usize::MAX),
            max_sweeps: self.max_sweeps,
            n_global_search: self.n_global_search,
            max_global_insert: self.max_global_insert,
            seed,
            initial_pivot: match self.initial_pivot {
                None | Some(PivotArg::Zeros) => InitialPivot::Default,
                Some(PivotArg::Random) => InitialPivot::Random,
                Some(PivotArg::Ascent) => InitialPivot::RandomAscent,
            },
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct LearnArgs {
    /// dense:PATH, fermion:PATH, mps:PATH, haar:L[:d], haar-formula:L[:d], gen:FAMILY:L:SEED
    #[arg(long)]
    oracle: String,
    #[arg(long, value_enum, default_value_t = BasisArg::Dual)]
    basis: BasisArg,
    /// 1 = fixed rank (needs --chi-max), 2 = adaptive.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    mode: u8,
    #[command(flatten)]
    tci: TciArgs,
    /// Stop once the enumerated global relative error is below this (L <= 14).
    #[arg(long)]
    eps_th: Option<f64>,
    /// Output TT file; the sidecar goes to `<stem>.sidecar.json`.
    #[arg(long, default_value = "ef.json")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    /// Families, e.g. haar,haar_analytic,product,tfim:mbl,random_mps:3
    #[arg(long, value_delimiter = ',', required = true)]
    families: Vec<String>,
    /// Sizes: a list (6,8,10) or an inclusive range with step (6..12:2).
    #[arg(long = "L", required = true)]
    sizes: String,
    /// Thresholds as exponents k of 1.1^-k.
    #[arg(long, value_delimiter = ',', default_values_t = vec![40, 50, 52, 54, 56, 58, 60, 70, 80])]
    eps_exp: Vec<i32>,
    /// Explicit thresholds; replaces --eps-exp.
    #[arg(long, value_delimiter = ',')]
    eps_th: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, value_enum, default_value_t = BasisArg::Dual)]
    basis: BasisArg,
    #[command(flatten)]
    tci: TciArgs,
    /// Row table; per-run points and the reference curve are written next to it.
    #[arg(long, default_value = "scan.csv")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DistArgs {
    /// NAME=ORACLE, repeated. Equal names are grouped in the statistics.
    #[arg(long = "state", required = true)]
    states: Vec<String>,
    #[arg(long, value_enum, default_value_t = BasisArg::Dual)]
    basis: BasisArg,
    #[command(flatten)]
    tci: TciArgs,
    #[arg(long, default_value = "distances.csv")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct MapArgs {
    /// NAME=ORACLE, repeated.
    #[arg(long = "state")]
    states: Vec<String>,
    /// Distance matrix JSON written by `ef distmatrix`; replaces --state.
    #[arg(long, conflicts_with = "states")]
    matrix: Option<PathBuf>,
    /// NAME=X,Y: pin a point.
    #[arg(long = "pin")]
    pins: Vec<String>,
    /// Treat NAME as deterministic (laid out and fixed first).
    #[arg(long = "anchor")]
    anchors: Vec<String>,
    #[arg(long, default_value_t = 300)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = BasisArg::Dual)]
    basis: BasisArg,
    #[command(flatten)]
    tci: TciArgs,
    #[arg(long, default_value = "map.csv")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DisentangleArgs {
    #[arg(long)]
    oracle: String,
    #[arg(long, default_value_t = 2)]
    rank_cap: usize,
    #[arg(long, default_value_t = 20)]
    max_sweeps: usize,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4, 5])]
    phi: Vec<usize>,
    #[arg(long = "L", default_value_t = 15)]
    l: usize,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value = "spectrum.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn threads(global: &Global) -> Result<usize> {
    match std::env::var("EFTCI_THREADS") {
        Ok(v) => v.trim().parse().with_context(|| format!("EFTCI_THREADS={v:?} is not a thread count")),
        Err(_) => Ok(global.threads),
    }
}

/// Returns `Ok(false)` on partial failure (outputs written, some rows failed).
fn run(cli: &Cli) -> Result<bool> {
    let n = threads(&cli.global)?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("thread pool")?;
    let seed = cli.global.seed;
    let (out, ok) = match &cli.command {
        Command::State(StateCmd::Gen(a)) => (a.out.clone(), cmd_state_gen(a, seed)?),
        Command::Ef(EfCmd::Learn(a)) => (a.out.clone(), cmd_learn(a, seed)?),
        Command::Ef(EfCmd::Scan(a)) => (a.out.clone(), cmd_scan(a, seed, cli.global.format)?),
        Command::Ef(EfCmd::Distmatrix(a)) => (a.out.clone(), cmd_distmatrix(a, seed, cli.global.format)?),
        Command::Ef(EfCmd::Map(a)) => (a.out.clone(), cmd_map(a, seed, cli.global.format)?),
        Command::Ef(EfCmd::Disentangle(a)) => (a.out.clone(), cmd_disentangle(a, seed)?),
        Command::Ef(EfCmd::Spectrum(a)) => (a.out.clone(), cmd_spectrum(a, seed, cli.global.format)?),
    };
    let config = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "threads": n,
        "cli": cli,
    });
    write_json(&dir_of(&out).join("resolved-config.json"), &config)?;
    Ok(ok)
}

fn dir_of(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// `dir/stem.suffix` next to `p`.
fn sibling(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    dir_of(p).join(format!("{stem}.{suffix}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(d) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(d) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(d)?;
    }
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// 17 significant digits.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

fn cmd_state_gen(a: &GenArgs, seed: u64) -> Result<bool> {
    let family: Family = a.family.parse()?;
    let mut spec = match (&a.preset, family) {
        (Some(p), Family::Tfim) => ModelSpec::tfim_preset(p.parse::<TfimPreset>()?, a.l, seed),
        (Some(_), _) => bail!("--preset only applies to the tfim family"),
        _ => ModelSpec::new(family, a.l, seed),
    };
    spec.j = a.j.or(spec.j);
    spec.g = a.g.or(spec.g);
    spec.h = a.h.or(spec.h);
    spec.w = a.w.or(spec.w);
    spec.phi = a.phi.or(spec.phi);
    spec.colors = a.colors.or(spec.colors);
    if let Some(t) = a.target {
        spec.target = Some(match t {
            TargetArg::Ground => Target::Ground,
            TargetArg::MidSpectrum => Target::MidSpectrum,
        });
    }
    let g = spec.generate()?;
    let (kind, oracle_kind) = match &g.state {
        StateData::Dense(_) => ("dense", "dense"),
        StateData::Fermion(_) => ("fermion", "fermion"),
        StateData::Mps(_) => ("mps", "dense"),
    };
    let mut files = vec![a.out.display().to_string()];
    if let StateData::Mps(m) = &g.state {
        let p = sibling(&a.out, "tt.json");
        m.save(&p)?;
        files.push(p.display().to_string());
    }
    let dense = g.state.to_dense()?;
    if let Some(d) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(d)?;
    }
    dense.write_bin(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let meta = json!({
        "spec": g.spec,
        "kind": kind,
        "dims": dense.dims(),
        "energy": g.energy,
        "disorder": g.disorder,
        "oracle": format!("{oracle_kind}:{}", a.out.display()),
        "files": files,
    });
    write_json(&sibling(&a.out, "meta.json"), &meta)?;
    println!("wrote {}", a.out.display());
    Ok(true)
}

fn mode(tci: &TciArgs, m: u8) -> Result<TciMode> {
    Ok(match m {
        1 => TciMode::FixedRank(tci.chi_max.context("mode 1 needs --chi-max")?),
        _ => TciMode::Adaptive,
    })
}

fn cmd_learn(a: &LearnArgs, seed: u64) -> Result<bool> {
    let spec: OracleSpec = a.oracle.parse()?;
    let backend = spec.load()?;
    log::info!("learning {spec} (L = {})", backend.n_sites());
    let run_seed = derive_seed(seed, "tci", 0);
    let rec = learn_ef(&backend, a.basis.into(), &a.tci.options(run_seed), mode(&a.tci, a.mode)?, a.eps_th)?;
    if let Some(d) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(d)?;
    }
    rec.tt.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let sidecar = json!({
        "n_queries": rec.n_queries,
        "converged": rec.converged,
        "ranks": rec.full_ranks(),
        "max_local_error": rec.max_local_error,
        "seed": run_seed,
        "basis": rec.basis,
        "L": rec.n_sites,
        "oracle": spec.to_string(),
        "sweeps": rec.history.len(),
        "oracle_stats": rec.stats,
        "eps_th": rec.eps_th,
        "eps_history": rec.eps_history,
        "options": rec.options,
    });
    write_json(&sibling(&a.out, "sidecar.json"), &sidecar)?;
    println!(
        "L={} ranks {:?} queries {} converged {}",
        rec.n_sites,
        rec.full_ranks(),
        rec.n_queries,
        rec.converged
    );
    Ok(true)
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let (hi, step) = match b.split_once(':') {
            Some((h, st)) => (h, st.parse::<usize>()?),
            None => (b, 1),
        };
        let (lo, hi): (usize, usize) = (a.trim().parse()?, hi.trim().parse()?);
        if step == 0 || lo > hi {
            bail!("bad size range {s:?}");
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        s.split(',').map(|x| x.trim().parse().with_context(|| format!("bad size {x:?}"))).collect()
    }
}

fn cmd_scan(a: &ScanArgs, seed: u64, format: Format) -> Result<bool> {
    let families = a.families.iter().map(|f| f.parse::<ScanFamily>()).collect::<eftci::Result<Vec<_>>>()?;
    let eps = if a.eps_th.is_empty() { a.eps_exp.iter().map(|&k| 1.1f64.powi(-k)).collect() } else { a.eps_th.clone() };
    let mut grid = ScanGrid::new(families, parse_sizes(&a.sizes)?, eps);
    grid.n_state_samples = a.samples;
    grid.n_tci_runs = a.runs;
    grid.seed = seed;
    grid.basis = a.basis.into();
    grid.tci = a.tci.options(0);
    log::info!(
        "scanning {} families x {} sizes x {} samples x {} runs",
        grid.families.len(),
        grid.sizes.len(),
        grid.n_state_samples,
        grid.n_tci_runs
    );
    let out = bond_scan(&grid)?;
    let reference: Vec<(usize, f64)> = grid.sizes.iter().map(|&l| (l, reference_curve(l))).collect();
    match format {
        Format::Json => {
            write_json(&a.out, &json!({ "rows": out.rows, "reference": reference }))?;
            write_json(&sibling(&a.out, "runs.json"), &out.runs)?;
        }
        Format::Csv => {
            let mut w = csv_writer(&a.out)?;
            w.write_record(["family", "L", "state_seed", "run_seed", "eps_th", "mean_chi", "std_chi", "mean_queries", "status"])?;
            for r in &out.rows {
                w.write_record([
                    r.family.clone(),
                    r.l.to_string(),
                    r.state_seed.to_string(),
                    r.run_seed.to_string(),
                    num(r.eps_th),
                    num(r.mean_chi),
                    num(r.std_chi),
                    num(r.mean_queries),
                    r.status.to_string(),
                ])?;
            }
            w.flush()?;
            let mut w = csv_writer(&sibling(&a.out, "runs.csv"))?;
            w.write_record(["family", "L", "state_seed", "run_seed", "eps_th", "sweep", "eps", "mean_chi", "max_chi", "queries", "reached"])?;
            for p in &out.runs {
                w.write_record([
                    p.family.clone(),
                    p.l.to_string(),
                    p.state_seed.to_string(),
                    p.run_seed.to_string(),
                    num(p.eps_th),
                    p.sweep.to_string(),
                    num(p.eps),
                    num(p.mean_chi),
                    p.max_chi.to_string(),
                    p.queries.to_string(),
                    p.reached.to_string(),
                ])?;
            }
            w.flush()?;
            let mut w = csv_writer(&sibling(&a.out, "reference.csv"))?;
            w.write_record(["L", "chi_max"])?;
            for (l, c) in &reference {
                w.write_record([l.to_string(), num(*c)])?;
            }
            w.flush()?;
        }
    }
    let failed: Vec<_> = out.rows.iter().filter(|r| r.status == ScanStatus::Error).collect();
    for r in &failed {
        eprintln!(
            "failed: family={} L={} state_seed={} eps_th={}: {}",
            r.family,
            r.l,
            r.state_seed,
            r.eps_th,
            r.message.as_deref().unwrap_or("")
        );
    }
    println!("{} rows, {} failed", out.rows.len(), failed.len());
    Ok(failed.is_empty())
}

fn parse_named(s: &str) -> Result<(String, OracleSpec)> {
    let (name, spec) = s.split_once('=').with_context(|| format!("expected NAME=ORACLE, got {s:?}"))?;
    if name.is_empty() {
        bail!("empty name in {s:?}");
    }
    Ok((name.to_string(), spec.parse()?))
}

fn learn_all(states: &[(String, OracleSpec)], basis: Basis, tci: &TciArgs, seed: u64) -> Result<Vec<EFRecord>> {
    states
        .iter()
        .enumerate()
        .map(|(i, (name, spec))| {
            let b = spec.load().with_context(|| format!("loading {name}"))?;
            log::info!("learning {name} = {spec}");
            let opts = tci.options(derive_seed(seed, "tci", i as u64));
            learn_ef(&b, basis, &opts, TciMode::Adaptive, None).with_context(|| format!("learning {name}"))
        })
        .collect()
}

fn cmd_distmatrix(a: &DistArgs, seed: u64, format: Format) -> Result<bool> {
    let states = a.states.iter().map(|s| parse_named(s)).collect::<Result<Vec<_>>>()?;
    let recs = learn_all(&states, a.basis.into(), &a.tci, seed)?;
    let d = distance_matrix(&recs)?;
    let names: Vec<String> = states.iter().map(|(n, _)| n.clone()).collect();
    let stats = distance_stats(&names, &d)?;
    write_json(&sibling(&a.out, "matrix.json"), &json!({ "names": names, "matrix": d }))?;
    match format {
        Format::Json => write_json(
            &a.out,
            &stats
                .iter()
                .map(|s| json!({"name_a": s.name_a, "name_b": s.name_b, "mean": s.mean, "std": s.std, "count": s.count}))
                .collect::<Vec<_>>(),
        )?,
        Format::Csv => {
            let mut w = csv_writer(&a.out)?;
            w.write_record(["name_a", "name_b", "mean", "std"])?;
            for s in &stats {
                w.write_record([s.name_a.clone(), s.name_b.clone(), num(s.mean), num(s.std)])?;
            }
            w.flush()?;
        }
    }
    println!("{} states, {} distance groups", names.len(), stats.len());
    Ok(true)
}

fn cmd_map(a: &MapArgs, seed: u64, format: Format) -> Result<bool> {
    let (names, d, mut deterministic) = match &a.matrix {
        Some(p) => {
            #[derive(serde::Deserialize)]
            struct MatrixFile {
                names: Vec<String>,
                matrix: Vec<Vec<f64>>,
            }
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let m: MatrixFile = serde_json::from_str(&text)?;
            let n = m.names.len();
            (m.names, m.matrix, vec![false; n])
        }
        None => {
            if a.states.is_empty() {
                bail!("give --state entries or --matrix");
            }
            let states = a.states.iter().map(|s| parse_named(s)).collect::<Result<Vec<_>>>()?;
            let recs = learn_all(&states, a.basis.into(), &a.tci, seed)?;
            let det = states.iter().map(|(_, s)| s.is_deterministic()).collect();
            (states.into_iter().map(|(n, _)| n).collect::<Vec<_>>(), distance_matrix(&recs)?, det)
        }
    };
    for anchor in &a.anchors {
        let mut found = false;
        for (i, n) in names.iter().enumerate() {
            if n == anchor {
                deterministic[i] = true;
                found = true;
            }
        }
        if !found {
            bail!("anchor {anchor:?} names no point");
        }
    }
    let mut pins = vec![None; names.len()];
    for p in &a.pins {
        let (name, xy) = p.split_once('=').with_context(|| format!("expected NAME=X,Y, got {p:?}"))?;
        let (x, y) = xy.split_once(',').with_context(|| format!("expected NAME=X,Y, got {p:?}"))?;
        let c = [x.trim().parse::<f64>()?, y.trim().parse::<f64>()?];
        let mut found = false;
        for (i, n) in names.iter().enumerate() {
            if n == name {
                pins[i] = Some(c);
                found = true;
            }
        }
        if !found {
            bail!("pin {name:?} names no point");
        }
    }
    let layout = entanglement_map(&d, &deterministic, &pins, a.iters, derive_seed(seed, "layout", 0))?;
    match format {
        Format::Json => write_json(
            &a.out,
            &json!({
                "points": names.iter().zip(&layout.coords).zip(&pins).map(|((n, c), p)| json!({"name": n, "x": c[0], "y": c[1], "pinned": p.is_some()})).collect::<Vec<_>>(),
                "stress": layout.stress,
            }),
        )?,
        Format::Csv => {
            let mut w = csv_writer(&a.out)?;
            w.write_record(["name", "x", "y", "pinned"])?;
            for ((n, c), p) in names.iter().zip(&layout.coords).zip(&pins) {
                w.write_record([n.clone(), num(c[0]), num(c[1]), p.is_some().to_string()])?;
            }
            w.flush()?;
        }
    }
    println!("{} points, final stress {:.6e}", names.len(), layout.stress.last().copied().unwrap_or(0.0));
    Ok(true)
}

fn cmd_disentangle(a: &DisentangleArgs, seed: u64) -> Result<bool> {
    let spec: OracleSpec = a.oracle.parse()?;
    let backend = spec.load()?;
    let l = backend.n_sites();
    log::info!("disentangling {spec} (L = {l}, query cap {})", query_cap(l));
    let mut opts = DisentangleOptions { rank_cap: a.rank_cap, seed: derive_seed(seed, "disentangle", 0), ..Default::default() };
    opts.tci.max_sweeps = a.max_sweeps;
    let rep = disentangle(backend, &opts)?;
    let (before, after) = rep.mid_cut().unwrap_or((0.0, 0.0));
    let report = json!({
        "oracle": spec.to_string(),
        "L": l,
        "perm": rep.ordering,
        "entropy_before": rep.entropy_before,
        "entropy_after": rep.entropy_after,
        "mid_cut_before": before,
        "mid_cut_after": after,
        "distinct_queries": rep.distinct_queries,
        "total_queries": rep.total_queries,
        "query_cap": query_cap(l),
        "options": opts,
    });
    write_json(&a.out, &report)?;
    println!("perm {:?}; mid-cut S2 {before:.4} -> {after:.4}; {} queries", rep.ordering.perm(), rep.distinct_queries);
    Ok(true)
}

fn cmd_spectrum(a: &SpectrumArgs, seed: u64, format: Format) -> Result<bool> {
    let rows = ef_spectrum_study(&a.phi, a.l, a.samples, seed)?;
    let slope = ratio_slope(&rows);
    match format {
        Format::Json => write_json(&a.out, &json!({ "rows": rows, "ratio_slope": slope }))?,
        Format::Csv => {
            let width = rows.iter().map(|r| r.mean_sq.len()).max().unwrap_or(0).min(8);
            let mut w = csv_writer(&a.out)?;
            let mut head = vec!["phi".to_string(), "ratio".to_string()];
            head.extend((1..=width).map(|i| format!("lambda_{i}")));
            w.write_record(&head)?;
            for r in &rows {
                let mut rec = vec![r.phi.to_string(), num(r.ratio)];
                let l = r.lambdas();
                rec.extend((0..width).map(|i| num(l.get(i).copied().unwrap_or(0.0))));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    match slope {
        Some(s) => println!("log-log slope of lambda_3^2/lambda_2^2 vs phi: {s:.3}"),
        None => println!("too few points for a slope"),
    }
    Ok(true)
}
