//! Finite-n information-spectrum tools for bipartite pure-state conversion.
//!
//! Schmidt spectra are kept in compressed form (probability, multiplicity), which lets i.i.d.
//! and mixed sources reach block lengths of a few hundred without enumerating sequences.

pub mod convert;
pub mod error;
pub mod hermitian;
pub mod infospec;
pub mod majorize;
pub mod randgen;
pub mod spectra;
pub mod suites;

pub use error::{Error, Result};
pub use spectra::{Budgets, SequenceModel, Spectrum};
