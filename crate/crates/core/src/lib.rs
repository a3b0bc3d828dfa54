//! Solver core for the nonlocal scalar conservation law
//!
//! ```text
//! q_t + ( exp{ ∫_x^0 f(q(t,ξ)) dξ } · f(q) )_x = 0,   x ≤ 0,
//! ```
//!
//! which describes the slope deviation `q = p - 1` of a standing granular
//! layer in the slow-erosion regime. The crate is `no_std` (it needs
//! `alloc`) and carries no IO: profile files, configuration and the
//! experiment CLI live in the `nonlocal-flow` crate.
//!
//! Layout:
//!
//! * [`erosion`]: the erosion nonlinearity `f` and an audit of its structural
//!   assumptions.
//! * [`profile`]: the truncated grid, piecewise-constant profiles and the
//!   norms that define the admissible solution class.
//! * [`nonlocal`]: the integral coefficient `k = K(q)` and its derivative.
//! * [`solver`]: the fractional-step upwind scheme with a frozen coefficient
//!   per step.
//! * [`analysis`]: characteristics, entropy residuals, stability and bound
//!   diagnostics measured on computed trajectories.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod erosion;
mod error;
pub(crate) mod math;
pub mod nonlocal;
pub mod profile;
pub mod solver;

pub use error::{Error, Result};
pub use erosion::ErosionFunction;
pub use nonlocal::CoefficientField;
pub use profile::{ClassBounds, Grid, Profile};
pub use solver::{SolverConfig, Trajectory};
