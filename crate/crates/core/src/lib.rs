//! Numerical solver for linear stochastic Volterra integral equations
//!
//! ```text
//! x(t) = f(t) + ∫₀ᵗ k₁(s,t) x(s) ds + ∫₀ᵗ k₂(s,t) x(s) dB(s),   t ∈ [0, T)
//! ```
//!
//! The unknown is approximated on a dyadic grid of `m = 2^k` cells. Walsh
//! functions and block pulse functions span the same piecewise-constant space
//! and are exchanged through the ±1 transform matrix `T_W`; running integrals
//! (deterministic and Itô) become the operational matrices `P` and `P_S`, which
//! turn the integral equation into an `m × m` linear system. A Monte Carlo
//! harness drives repeated solves against closed-form solutions and reports the
//! max-norm error of the Walsh coefficients with 95% confidence intervals.
//!
//! Module map:
//!
//! * [`walsh`] — Rademacher/Walsh evaluation, the transform matrix, projections
//!   onto cell midpoints, and reconstruction.
//! * [`brownian`] — seeded Brownian paths and left-point Itô sums.
//! * [`opmat`] — the operational matrices `P`, `P_S` and their Walsh-domain
//!   conjugates `Λ`, `Λ_S`.
//! * [`solver`] — system assembly, LU solve, and a Picard fixed-point oracle.
//! * [`monte_carlo`] — trial statistics, confidence intervals, convergence
//!   sweeps.
//! * [`expr`] — a small expression language for file-defined problems.
//! * [`problems`] — the built-in problem registry.

pub mod brownian;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod monte_carlo;
pub mod opmat;
pub mod problems;
pub mod solver;
pub mod walsh;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
