//! Exact generation, separation and verification of mixing and aggregated
//! mixing inequalities for joint mixing sets with a linking constraint
//!
//! `y_j + w_ij z_i >= w_ij`, `y_j >= lower_j`, `sum_j y_j >= epsilon + sum_j lower_j`, `z` binary.
//!
//! All arithmetic is exact over the rationals. Scenario and column indices are
//! 0-based in the library; the command-line front end prints them 1-based.

pub mod aggregated;
pub mod counterexample;
pub mod cut;
pub mod error;
pub mod hull;
pub mod instance;
pub mod lp;
pub mod mixing;
pub mod rational;
pub mod separation;
pub mod sequence;
pub mod submodular;
pub mod twosided;
pub mod verify;
pub mod vertices;

pub use cut::{CutKind, LinearCut, Point};
pub use error::{Error, Result};
pub use hull::{diagnose, HullDiagnosis};
pub use instance::MixingInstance;
pub use rational::Rational;
pub use separation::SeparatorRegistry;
pub use sequence::SequenceTheta;
pub use twosided::TwoSidedData;
pub use verify::VerifierRegistry;
