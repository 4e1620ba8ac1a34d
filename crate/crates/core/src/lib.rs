//! Toolkit for classical-quantum communication channels.
//!
//! A classical-quantum channel maps letters of a finite alphabet to
//! density operators on a finite-dimensional Hilbert space. This crate
//! evaluates and maximizes the Holevo quantity, builds square-root
//! measurement decoders for block codes, computes error-probability
//! bounds and reliability-exponent functions, and validates the
//! underlying inequalities by exhaustive and Monte-Carlo simulation at
//! small dimension and block length.
//!
//! Modules:
//! - [`operator`]: dense complex Hermitian linear algebra.
//! - [`channel`]: the channel abstraction, priors, POVMs, Holevo quantity.
//! - [`capacity`]: capacity-like scalar quantities and prior optimization.
//! - [`coding`]: block-code decoders, error bounds, typical projectors.
//! - [`exponents`]: reliability-function machinery.
//! - [`sim`]: seeded random-coding experiments.
//!
//! All logarithms are base 2; entropies, capacities, and rates are in
//! bits unless a function says otherwise.

pub mod capacity;
pub mod channel;
pub mod coding;
pub mod error;
pub mod exponents;
pub mod operator;
pub mod optim;
pub mod random;
pub mod sim;

pub use error::{Error, Result};
pub use operator::{DensityOperator, HermitianOperator, PureState, Spectrum};

pub use channel::{CqChannel, Povm, Prior, Word};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
