//! Oracle specifications given on the command line.
//!
//! * `dense:PATH` dense qubit/qudit state (binary format)
//! * `fermion:PATH` dense state read in the fermionic occupation basis
//! * `mps:PATH` MPS in the tensor-train JSON format
//! * `haar:L[:d]` clipped Haar-average purities
//! * `haar-formula:L[:d]` unclipped Haar-average formula
//! * `gen:FAMILY:L:SEED` a freshly generated zoo state, FAMILY as in scans
//!   (`haar`, `product`, `tfim:mbl`, `random_mps:3`, ...)

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use eftci::analysis::{ScanFamily, ScanSource};
use eftci::oracle::{DenseState, FermionState, HaarAnalytic, Mps, PurityBackend};
use eftci::zoo::{Family, StateData};

#[derive(Clone, Debug, PartialEq)]
pub enum OracleSpec {
    Dense(PathBuf),
    Fermion(PathBuf),
    Mps(PathBuf),
    Haar { l: usize, d: usize, clip: bool },
    Gen { family: ScanFamily, l: usize, seed: u64 },
}

impl FromStr for OracleSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| anyhow!("oracle spec {s:?} needs a KIND: prefix"))?;
        Ok(match kind {
            "dense" => OracleSpec::Dense(rest.into()),
            "fermion" => OracleSpec::Fermion(rest.into()),
            "mps" => OracleSpec::Mps(rest.into()),
            "haar" | "haar-formula" => {
                let mut it = rest.split(':');
                let l = it.next().unwrap_or_default().parse().with_context(|| format!("bad L in {s:?}"))?;
                let d = match it.next() {
                    Some(d) => d.parse().with_context(|| format!("bad local dimension in {s:?}"))?,
                    None => 2,
                };
                if it.next().is_some() {
                    bail!("too many fields in {s:?}");
                }
                OracleSpec::Haar { l, d, clip: kind == "haar" }
            }
            "gen" => {
                let parts: Vec<&str> = rest.rsplitn(3, ':').collect();
                if parts.len() != 3 {
                    bail!("expected gen:FAMILY:L:SEED, got {s:?}");
                }
                let seed = parts[0].parse().with_context(|| format!("bad seed in {s:?}"))?;
                let l = parts[1].parse().with_context(|| format!("bad L in {s:?}"))?;
                OracleSpec::Gen { family: parts[2].parse()?, l, seed }
            }
            _ => bail!("unknown oracle kind {kind:?} (dense, fermion, mps, haar, haar-formula, gen)"),
        })
    }
}

impl std::fmt::Display for OracleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleSpec::Dense(p) => write!(f, "dense:{}", p.display()),
            OracleSpec::Fermion(p) => write!(f, "fermion:{}", p.display()),
            OracleSpec::Mps(p) => write!(f, "mps:{}", p.display()),
            OracleSpec::Haar { l, d, clip } => write!(f, "{}:{l}:{d}", if *clip { "haar" } else { "haar-formula" }),
            OracleSpec::Gen { family, l, seed } => write!(f, "gen:{}:{l}:{seed}", family.name),
        }
    }
}

pub enum Backend {
    State(StateData),
    Haar(HaarAnalytic),
}

impl PurityBackend for Backend {
    fn n_sites(&self) -> usize {
        match self {
            Backend::State(s) => s.n_sites(),
            Backend::Haar(h) => h.n_sites(),
        }
    }

    fn purity(&self, p: &eftci::oracle::Partition) -> eftci::Result<f64> {
        match self {
            Backend::State(s) => s.purity(p),
            Backend::Haar(h) => h.purity(p),
        }
    }
}

impl OracleSpec {
    pub fn load(&self) -> Result<Backend> {
        Ok(match self {
            OracleSpec::Dense(p) => Backend::State(StateData::Dense(
                DenseState::read_bin(p).with_context(|| format!("reading {}", p.display()))?,
            )),
            OracleSpec::Fermion(p) => {
                let d = DenseState::read_bin(p).with_context(|| format!("reading {}", p.display()))?;
                Backend::State(StateData::Fermion(FermionState::from_dense(d)?))
            }
            OracleSpec::Mps(p) => {
                Backend::State(StateData::Mps(Mps::load(p).with_context(|| format!("reading {}", p.display()))?))
            }
            OracleSpec::Haar { l, d, clip: true } => Backend::Haar(HaarAnalytic::new(*l, *d)?),
            OracleSpec::Haar { l, d, clip: false } => Backend::Haar(HaarAnalytic::unclipped(*l, *d)?),
            OracleSpec::Gen { family, l, seed } => match family.spec(*l, *seed) {
                None => Backend::Haar(HaarAnalytic::unclipped(*l, 2)?),
                Some(spec) => Backend::State(spec.generate()?.state),
            },
        })
    }

    /// Whether the state is fixed by its parameters (no random draw).
    pub fn is_deterministic(&self) -> bool {
        match self {
            OracleSpec::Haar { .. } => true,
            OracleSpec::Gen { family, l, seed } => match &family.source {
                ScanSource::HaarAnalytic => true,
                ScanSource::Model { family: Family::Tfim, .. } => {
                    family.spec(*l, *seed).and_then(|s| s.w).map_or(true, |w| w == 0.0)
                }
                _ => family.is_deterministic(),
            },
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("haar:12".parse::<OracleSpec>().unwrap(), OracleSpec::Haar { l: 12, d: 2, clip: true });
        assert_eq!(
            "haar-formula:8:3".parse::<OracleSpec>().unwrap(),
            OracleSpec::Haar { l: 8, d: 3, clip: false }
        );
        let g: OracleSpec = "gen:tfim:mbl:10:3".parse().unwrap();
        assert_eq!(g.to_string(), "gen:tfim:mbl:10:3");
        assert!(!g.is_deterministic());
        assert!("gen:tfim:critical:10:3".parse::<OracleSpec>().unwrap().is_deterministic());
        assert!("gen:product:4:0".parse::<OracleSpec>().unwrap().is_deterministic());
        assert!("bogus:1".parse::<OracleSpec>().is_err());
        assert!("gen:haar:4".parse::<OracleSpec>().is_err());
    }
}
