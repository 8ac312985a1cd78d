//! Random walks on weight lattices whose steps are the weights of a
//! minuscule representation, and their conditionings to stay in the closed
//! Weyl chamber.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: root systems, dominance, Weyl group action.
//! * [`reps`]: minuscule representations, characters, dimensions and the
//!   one-step relation `λ ⇝ Λ`.
//! * [`walk`]: θ-parameterized step laws, drift, and the infinite-horizon
//!   conditioned kernels.
//! * [`conditioning`]: exact path-counting DP, survival probabilities,
//!   finite-horizon kernels, convergence series and tail fits.
//! * [`montecarlo`]: seeded simulation used to cross-check the exact side.
//! * [`parse`]: text formats shared with the command line front end.

pub mod conditioning;
pub mod error;
pub mod lattice;
pub mod montecarlo;
pub mod parse;
pub mod prob;
pub mod reps;
pub mod walk;

mod engine;

pub use error::{Error, Result};
pub use lattice::{build_root_system, Family, RootSystem, Weight};
pub use prob::{KernelRow, Prob};
pub use reps::MinusculeRep;
pub use walk::{StepDistribution, Theta};

/// Exact rational used for weight coordinates.
pub type Q = num::rational::Ratio<i64>;
