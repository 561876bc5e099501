//! LCS between random and periodic words, computed through frog dynamics.
//!
//! A `Word` of length k defines a ring of k lily pads. Ranked frogs sit on the
//! pads; feeding symbols to the ring makes them hop. The long-run hop rates of
//! the frogs are the slopes of the curve rho -> gamma_W(rho), where
//! `E LCS(R, W^(rho n)) = gamma_W(rho) n - tau_W(rho) sqrt(n) + O(1)`
//! for a uniformly random word R of length n.
//!
//! Frogs are indexed from 0; frog 0 is the nastiest.

pub mod chain;
pub mod error;
pub mod frogs;
pub mod heights;
pub mod lcs;
pub mod linalg;
pub mod montecarlo;
pub mod signed;
pub mod words;

pub use chain::{ChainSolution, GammaCurve, MArrangement, Scalar};
pub use error::{Error, Result};
pub use frogs::{FrogArrangement, TransitionRecord};
pub use heights::KHeight;
pub use lcs::BandSchedule;
pub use signed::{LabeledConfig, Phase, SignedState};
pub use words::{Alphabet, Symbol, Word};

pub use num_rational::BigRational;
