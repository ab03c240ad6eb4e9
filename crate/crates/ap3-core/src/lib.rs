//! Exact and spectral analysis of three-term arithmetic progressions.
//!
//! The crate works over three ambient domains: cyclic groups `Z/NZ`, vector
//! groups `F_3^n`, and integer intervals `[N] = {1, ..., N}`. On top of the
//! element arithmetic in [`group`] it provides:
//!
//! - discrete Fourier transforms, convolutions, and the trilinear 3-AP form
//!   ([`fourier`]),
//! - large spectra, additive and higher energies, dissociated dimension, and
//!   related diagnostics ([`spectrum`]),
//! - 3-AP counting, AP-freeness certification, and progression-free
//!   constructions ([`apsets`]),
//! - exact extremal solvers for the largest progression-free subsets
//!   ([`extremal`]),
//! - Bohr sets with exact dilation sizing and regularity analysis ([`bohr`]),
//! - density-increment steps and iteration drivers with machine-checkable
//!   certificates ([`increment`]),
//! - the slice-rank bound for cap-sets with explicit decompositions
//!   ([`slicerank`]).
//!
//! Counting paths are exact (integers and rationals); floating point appears
//! only in spectral data and clearly-labeled diagnostic columns.
//!
//! ```
//! use ap3_core::extremal::{solve_vector, Budget};
//! use ap3_core::increment::{meshulam_drive, verify_certificate};
//! use ap3_core::group::SetData;
//!
//! // the largest cap-set in F_3^3, proved optimal by branch-and-bound
//! let record = solve_vector(3, &Budget::default())?;
//! assert_eq!(record.value, 9);
//!
//! // run the density-increment iteration on it; every certificate in the
//! // trace re-verifies by independent counting
//! let witness = record.witness.as_site()?.clone();
//! let trace = meshulam_drive(&witness)?;
//! assert!(trace.steps.last().unwrap().certificate.is_small_n());
//! assert!(verify_certificate(&SetData::Group(witness), &trace.steps[0].certificate)?);
//! # Ok::<(), ap3_core::Error>(())
//! ```

pub mod apsets;
pub mod bohr;
pub mod corpus;
pub mod error;
pub mod extremal;
pub mod fourier;
pub mod group;
pub mod increment;
pub mod rational;
pub mod slicerank;
pub mod spectrum;

pub use error::Error;
pub use group::{AmbientGroup, GroupElement, IntervalSet, SetData, SiteSet};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
