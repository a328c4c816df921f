//! Benchmark state families.

mod hamiltonians;
mod states;

use serde::{Deserialize, Serialize};

use crate::oracle::{DenseState, FermionState, Mps, Partition, PurityBackend};
use crate::{Error, Result};

pub use hamiltonians::{
    build_gue_h, build_syk, build_tfim, eigenstate, majoranas, Eigenstate, Hamiltonian, Monomial, Target,
    MAX_ED_SITES, MAX_SYK_MODES, MID_SPECTRUM_SHIFT,
};
pub use states::{
    gen_fredkin, gen_haar, gen_motzkin, gen_product, gen_random_mps, MAX_FREDKIN_SITES, MAX_HAAR_SITES,
    MAX_MOTZKIN_SITES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Haar,
    RandomMps,
    Tfim,
    GueH,
    Syk,
    Motzkin,
    Fredkin,
    Product,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "haar" => Family::Haar,
            "random_mps" => Family::RandomMps,
            "tfim" => Family::Tfim,
            "gue_h" => Family::GueH,
            "syk" => Family::Syk,
            "motzkin" => Family::Motzkin,
            "fredkin" => Family::Fredkin,
            "product" => Family::Product,
            _ => return Err(Error::InvalidArgument(format!("unknown family {s:?}"))),
        })
    }
}

/// Named Ising parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfimPreset {
    Chaotic,
    WeakDisorder,
    Mblt,
    Mbl,
    Critical,
}

impl std::str::FromStr for TfimPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "chaotic" => TfimPreset::Chaotic,
            "weak_disorder" => TfimPreset::WeakDisorder,
            "mblt" => TfimPreset::Mblt,
            "mbl" => TfimPreset::Mbl,
            "critical" => TfimPreset::Critical,
            _ => return Err(Error::InvalidArgument(format!("unknown TFIM preset {s:?}"))),
        })
    }
}

/// Parameters of a generated state. Unused fields stay `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
}

impl ModelSpec {
    pub fn new(family: Family, l: usize, seed: u64) -> Self {
        Self { family, l, seed, j: None, g: None, h: None, w: None, phi: None, colors: None, target: None }
    }

    pub fn tfim(l: usize, j: f64, g: f64, h: f64, w: f64, target: Target, seed: u64) -> Self {
        Self { j: Some(j), g: Some(g), h: Some(h), w: Some(w), target: Some(target), ..Self::new(Family::Tfim, l, seed) }
    }

    pub fn tfim_preset(preset: TfimPreset, l: usize, seed: u64) -> Self {
        match preset {
            TfimPreset::Chaotic => Self::tfim(l, -1.0, -1.05, 0.5, 0.0, Target::MidSpectrum, seed),
            TfimPreset::WeakDisorder => Self::tfim(l, 0.632, 0.902, 0.0, 1.0, Target::MidSpectrum, seed),
            TfimPreset::Mblt => Self::tfim(l, 0.632, 0.902, 0.0, 2.5, Target::MidSpectrum, seed),
            TfimPreset::Mbl => Self::tfim(l, 0.632, 0.902, 0.0, 5.0, Target::MidSpectrum, seed),
            TfimPreset::Critical => Self::tfim(l, -1.0, -1.0, 0.0, 0.0, Target::Ground, seed),
        }
    }

    pub fn random_mps(l: usize, phi: usize, seed: u64) -> Self {
        Self { phi: Some(phi), ..Self::new(Family::RandomMps, l, seed) }
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::InvalidArgument(format!("{:?} needs parameter {name}", self.family)))
    }

    pub fn generate(&self) -> Result<Generated> {
        let mut out = Generated { spec: self.clone(), state: StateData::Dense(DenseState::product(vec![2])?), energy: None, disorder: None };
        out.state = match self.family {
            Family::Haar => StateData::Dense(gen_haar(self.l, self.seed)?),
            Family::RandomMps => StateData::Mps(gen_random_mps(self.l, self.need(self.phi, "phi")?, self.seed)?),
            Family::Product => StateData::Dense(gen_product(self.l)?),
            Family::Motzkin => StateData::Dense(gen_motzkin(self.l, self.colors.unwrap_or(1))?),
            Family::Fredkin => StateData::Dense(gen_fredkin(self.l)?),
            Family::Tfim => {
                let (h, disorder) = build_tfim(
                    self.l,
                    self.need(self.j, "j")?,
                    self.need(self.g, "g")?,
                    self.need(self.h, "h")?,
                    self.w.unwrap_or(0.0),
                    self.seed,
                )?;
                let e = eigenstate(&h, self.target.unwrap_or(Target::MidSpectrum))?;
                out.energy = Some(e.energy);
                out.disorder = Some(disorder);
                StateData::Dense(e.state)
            }
            Family::GueH => {
                let e = eigenstate(&build_gue_h(self.l, self.seed)?, self.target.unwrap_or(Target::Ground))?;
                out.energy = Some(e.energy);
                StateData::Dense(e.state)
            }
            Family::Syk => {
                let e = eigenstate(&build_syk(self.l, self.seed)?, self.target.unwrap_or(Target::Ground))?;
                out.energy = Some(e.energy);
                StateData::Fermion(FermionState::from_dense(e.state)?)
            }
        };
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub enum StateData {
    Dense(DenseState),
    Fermion(FermionState),
    Mps(Mps),
}

impl StateData {
    pub fn n_sites(&self) -> usize {
        match self {
            StateData::Dense(s) => s.n_sites(),
            StateData::Fermion(s) => s.n_modes(),
            StateData::Mps(m) => m.n_sites(),
        }
    }

    /// Dense amplitudes (fermionic states in their occupation basis).
    pub fn to_dense(&self) -> Result<DenseState> {
        Ok(match self {
            StateData::Dense(s) => s.clone(),
            StateData::Fermion(s) => s.as_dense().clone(),
            StateData::Mps(m) => m.to_dense()?,
        })
    }
}

impl PurityBackend for StateData {
    fn n_sites(&self) -> usize {
        StateData::n_sites(self)
    }

    fn purity(&self, p: &Partition) -> Result<f64> {
        match self {
            StateData::Dense(s) => s.purity(p),
            StateData::Fermion(s) => s.purity(p),
            StateData::Mps(m) => m.purity(p),
        }
    }
}

/// A generated state with its spec and model metadata.
#[derive(Clone, Debug)]
pub struct Generated {
    pub spec: ModelSpec,
    pub state: StateData,
    pub energy: Option<f64>,
    /// On-site fields `rᵢ` drawn for disordered models.
    pub disorder: Option<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_roundtrip() {
        let s = ModelSpec::tfim_preset(TfimPreset::Mbl, 6, 4);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"L\":6"));
        assert_eq!(serde_json::from_str::<ModelSpec>(&text).unwrap(), s);
    }

    #[test]
    fn generate_families() {
        for fam in [Family::Haar, Family::Product, Family::Motzkin, Family::GueH] {
            let g = ModelSpec::new(fam, 4, 1).generate().unwrap();
            assert!((g.state.to_dense().unwrap().norm() - 1.0).abs() < 1e-12, "{fam:?}");
        }
        let g = ModelSpec::tfim_preset(TfimPreset::Mbl, 6, 2).generate().unwrap();
        assert_eq!(g.disorder.as_ref().unwrap().len(), 6);
        assert!(ModelSpec::new(Family::Fredkin, 5, 0).generate().is_err());
        assert!(ModelSpec::new(Family::RandomMps, 5, 0).generate().is_err());
        let syk = ModelSpec::new(Family::Syk, 3, 0).generate().unwrap();
        assert!(matches!(syk.state, StateData::Fermion(_)));
    }

    #[test]
    fn parse_names() {
        assert_eq!("random-mps".parse::<Family>().unwrap(), Family::RandomMps);
        assert_eq!("mblt".parse::<TfimPreset>().unwrap(), TfimPreset::Mblt);
        assert!("nope".parse::<Family>().is_err());
    }
}
