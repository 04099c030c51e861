//! Configurable-precision Jacobi theta sums over periodic point
//! configurations on the real line.
//!
//! The library evaluates the periodic heat kernel
//! `theta(x; alpha) = 1 + 2 * sum_{k>=1} exp(-pi*alpha*k^2) * cos(2*pi*k*x)`
//! and sums of its translates `F(x) = sum_j theta(x - x_j; alpha)` for a
//! configuration `{x_1, ..., x_n}` of points on the unit circle `R/Z`. On top
//! of that it provides:
//!
//! - certified global extrema of `F` (polarization and covering values with
//!   enclosure radii),
//! - the pair-interaction energy and its Fourier-side lower bound,
//! - a toolbox of checkable inequalities for trigonometric polynomials
//!   (pigeonholing, midpoint negativity, discrete Plancherel, Fejer kernel
//!   identities, a modified Poincare inequality) used to compare perturbed
//!   configurations against the equispaced one,
//! - local ascent / brute-force optimizers for the inner-extremum objectives.
//!
//! All arithmetic runs at a caller-chosen precision through
//! [`numerics::PrecisionContext`]; results that matter carry explicit error
//! budgets (truncation tails and rounding floors) rather than silent
//! best-effort values.

pub mod analysis;
pub mod config;
pub mod error;
pub mod functionals;
pub mod numerics;
pub mod optimizer;
pub mod theta;

mod extrema;
mod quad;

pub use error::Error;
