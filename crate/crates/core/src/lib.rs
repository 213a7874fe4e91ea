//! Numerical laboratory for decreasing rearrangements and the functional
//! inequalities built on them.
//!
//! The crate is organized around a pipeline:
//!
//! * [`mesh`] — grids, Lebesgue/Gaussian cell measures, domains, and the
//!   [`mesh::SampledFunction`] container everything else consumes.
//! * [`rearrange`] — distribution function, decreasing rearrangement `f*`,
//!   maximal average `f**`, oscillation `f** - f*`, and the calculus
//!   identities connecting them.
//! * [`functionals`] — Lorentz, Zygmund, Besov and related norms computed
//!   from rearrangement profiles and moduli of continuity.
//! * [`calculus`] — finite-difference gradient, higher derivatives,
//!   Laplacian, and the level-set gradient cumulant.
//! * [`corpus`] — deterministic test-function generators with analytic
//!   ground truth.
//! * [`inequality`] — the registry of inequality/identity checks evaluated
//!   over sampled functions.
//! * [`search`] — derivative-free maximization of inequality ratios over
//!   parametric families (empirical best constants).
//! * [`cli`] — the `verifylab` command-line driver.

pub mod calculus;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod functionals;
pub mod inequality;
pub mod mesh;
pub mod normal;
pub mod rearrange;
pub mod search;
pub mod tgrid;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
