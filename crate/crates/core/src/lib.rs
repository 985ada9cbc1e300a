//! Simulation and verification of topologically protected Majorana-mode
//! operations: braids and pairwise charge measurements.
//!
//! Three independent backends implement [`program::Backend`]:
//! [`stabilizer::AccessibleState`] (exact signed matchings),
//! [`gaussian::CovarianceMatrix`] (covariance matrices, supports noise) and
//! [`oracle::DenseState`] (state vectors, small systems only). On top of them
//! sit the nonlocal-game analysis in [`games`], the GHZ obstruction checks in
//! [`ghz`] and the teleportation / dense-coding protocols in [`protocols`].

pub mod algebra;
pub mod crosscheck;
pub mod error;
pub mod games;
pub mod gaussian;
pub mod ghz;
pub mod oracle;
pub mod prob;
pub mod program;
pub mod protocols;
pub mod stabilizer;

pub use algebra::{MajoranaString, ModeMap, Phase};
pub use error::{Error, Result};
pub use prob::Rational;
pub use program::{Backend, Instruction, Transcript};
pub use stabilizer::{AccessibleState, MatchedPair};
