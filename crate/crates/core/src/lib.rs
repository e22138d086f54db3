//! Worst-case optimal control for finite, partially observed systems.
//!
//! Disturbances and noises are set-valued (no distributions); performance is
//! the maximum terminal cost over all feasible realizations. The crate
//! provides:
//!
//! - exact solvers: backward induction over full memories, and over
//!   conditional ranges (the set of states consistent with the memory),
//!   together with an equivalence checker between the two;
//! - a quantized approximate solver with certified worst-case error bounds:
//!   measured terminal/evolution gaps, empirical Lipschitz constants and the
//!   accumulated per-step bound recursion;
//! - the additive-cost reduction (accumulated-cost state augmentation),
//!   adversarial policy evaluation and seeded randomized simulation;
//! - a gridworld pursuit benchmark generator and JSON model/solution
//!   formats.
//!
//! All numeric code is generic over [`scalar::Scalar`]; use `f64` for speed
//! (integer-valued models stay exact) or [`scalar::Rational`] for exact
//! bound arithmetic.

pub mod additive;
pub mod approx;
pub mod bounds;
pub mod dump;
pub mod error;
pub mod exact;
pub mod grid;
pub mod gridworld;
pub mod instances;
pub mod io;
pub mod metric;
pub mod model;
pub mod rollout;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Production instantiation: double-precision tables.
pub type SystemModelF64 = model::SystemModel<f64>;
/// Single-precision instantiation.
pub type SystemModelF32 = model::SystemModel<f32>;
/// Exact instantiation for certificates and boundary-tight bound checks.
pub type SystemModelExact = model::SystemModel<Rational>;

pub type InfostateSolutionF64 = exact::InfostateSolution<f64>;
pub type ApproxSolutionF64 = approx::ApproxSolution<f64>;
pub type BoundLedgerF64 = bounds::BoundLedger<f64>;
pub type BoundLedgerExact = bounds::BoundLedger<Rational>;
