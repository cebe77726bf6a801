//! L^q-spectra and multifractal spectra of self-similar measures on the line,
//! with brute-force cross-checks: grid minimization over the simplex, moment
//! sums over word-tree sections, and exact ball measures of a 1-D geometric
//! realization.

pub mod cli;
pub mod coarse;
pub mod duality;
pub mod error;
pub mod format;
pub mod geometry;
pub mod info;
pub mod lq;
pub mod model;
pub mod multifractal;
pub mod roots;
pub mod section;
pub mod simplex;
pub mod types;

pub use error::{Error, Result};
pub use model::{IfsModel, Word};
pub use simplex::ProbabilityVector;
