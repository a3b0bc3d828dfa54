//! Measurable versions of the a-priori properties of solutions.
//!
//! Nothing here feeds back into the solver; every function reads a
//! finished [`Trajectory`](crate::solver::Trajectory) or profile and
//! reports numbers plus verdicts.

mod characteristics;
mod entropy;
mod envelope;
mod stability;

pub use characteristics::{potential_w, qbound_check, trace_characteristic, BoundReport, CharacteristicPath, PathSample};
pub use entropy::{default_alphas, entropy_residual, EntropyReport, Hat, ResidualEntry, TestFunction, ENTROPY_TOL_CONSTANT};
pub use envelope::{existence_time, verify_envelope, EnvelopeReport, ExistenceTime};
pub use stability::{
    coefficient_distance, coefficient_swap, continuous_dependence, fit_growth_rate, CoefficientSwapReport, DistanceReport,
};

use alloc::vec::Vec;

use crate::profile::Profile;

/// Bed profile `u(x) = x + ∫_{x_left}^x q dy` at the interfaces; up-jumps
/// of `q` show up as convex kinks.
pub fn standing_profile(p: &Profile) -> Vec<(f64, f64)> {
    let g = p.grid();
    let mut out = Vec::with_capacity(g.cells() + 1);
    let mut integral = 0.0;
    out.push((g.interface(0), g.interface(0)));
    for (i, &q) in p.cells().iter().enumerate() {
        integral += q * g.dx();
        let x = g.interface(i + 1);
        out.push((x, x + integral));
    }
    out
}
