//! Cross interpolation: matrix CI, two-site tensor cross interpolation and
//! TTOpt maximum search over product index spaces.

mod matrix_ci;
mod tci;
mod ttopt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use matrix_ci::{matrix_ci, matrix_ci_dense, CrossResult, CONDITION_GUARD};
pub use tci::{
    tci_learn, tci_learn_observed, InitialPivot, PivotState, SweepRecord, TciMode, TciOptions, TciResult,
};
pub use ttopt::{ttopt_max, TtoptResult};

/// Product index space `[0, d₁) × … × [0, d_N)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSpace {
    dims: Vec<usize>,
}

impl IndexSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("index space needs at least one position".into()));
        }
        if let Some(p) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("dimension at position {p} is 0")));
        }
        Ok(Self { dims })
    }

    pub fn binary(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Number of multi-indices, as a float to avoid overflow.
    pub fn size(&self) -> f64 {
        self.dims.iter().map(|&d| d as f64).product()
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.len() == self.dims.len() && idx.iter().zip(&self.dims).all(|(i, d)| i < d)
    }
}
