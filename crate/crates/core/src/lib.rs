//! Learning the entanglement feature of quantum states with tensor cross
//! interpolation.
//!
//! The entanglement feature (EF) of an `L`-site pure state is the vector of
//! all `2^L` bipartite purities `tr ρ_A²`, indexed by the bitstring marking
//! region `A`. This crate learns a tensor-train interpolation of that vector
//! from a polynomial number of purity queries and uses it for distances
//! between entanglement structures and for purity-guided site reordering.
//!
//! Module map:
//!
//! * [`tt`]: tensor-train container, contraction, SVD compression, spectra.
//! * [`cross`]: matrix cross interpolation, two-site TCI and TTOpt.
//! * [`oracle`]: purity backends, partitions and index-space adapters.
//! * [`zoo`]: generators for the benchmark states.
//! * [`analysis`]: learning drivers, error metrics, distances and maps.
//! * [`disentangle`]: divide-and-conquer site reordering.

pub mod analysis;
pub mod cross;
pub mod disentangle;
mod error;
pub(crate) mod linalg;
pub mod oracle;
pub mod seed;
pub mod tt;
pub mod zoo;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
