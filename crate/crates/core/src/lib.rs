//! Dempster-Shafer evidence combination.
//!
//! - [`mass`]: general mass functions and the brute-force orthogonal sum,
//!   used as the reference for every fast path.
//! - [`dichotomous`]: `{x}, Θ−{x}, Θ` functions and their linear-time
//!   repeated-focus combination.
//! - [`triplet`]: two-singleton-plus-Θ functions, the outstanding rule and
//!   constant-time pairwise combination.
//! - [`fusion`]: classifier score fusion and evaluation.
//! - [`formats`], [`bench`], [`check`]: file formats, timing harness and the
//!   randomized equivalence checks.
//! - [`cli`]: the `ds-triplet` command-line tool.

pub mod bench;
pub mod check;
pub mod cli;
pub mod dichotomous;
pub mod error;
pub mod formats;
pub mod frame;
pub mod fusion;
pub mod mass;
pub mod triplet;

pub use dichotomous::DichotomousMass;
pub use error::{CombinationCase, Error, Result};
pub use frame::{Frame, Subset, MAX_FRAME_SIZE};
pub use mass::MassFunction;
pub use triplet::{MultiFocusIntermediate, TripletMass};
