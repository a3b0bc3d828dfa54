//! Forward characteristics and the upper-bound functional along them.
//!
//! Along a characteristic `x' = k f'(q)` the solution obeys
//! `q' = -k_x f(q) = k f(q)^2 ≥ 0`. The path integrates both equations
//! with RK4 using only the frozen coefficient of each snapshot interval, so
//! its `q` never reads the grid solution and can serve as an oracle for it.

use alloc::vec::Vec;
use serde::Serialize;

use crate::erosion::ErosionFunction;
use crate::math;
use crate::nonlocal::CoefficientField;
use crate::profile::Profile;
use crate::solver::Trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
    pub x: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicPath {
    pub start: (f64, f64),
    pub samples: Vec<PathSample>,
    /// The path left the domain through `x = 0` before `t_end`.
    pub exited: bool,
}

impl CharacteristicPath {
    /// Largest decrease of `q` between consecutive samples (zero for an
    /// exactly monotone path).
    pub fn max_q_decrease(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].q - w[1].q)
            .fold(0.0, f64::max)
    }
}

fn rhs(field: &CoefficientField, f: &ErosionFunction, x: f64, q: f64) -> (f64, f64) {
    // right of x = 0 the coefficient is continued by its boundary value
    let k = field.value_at(x.min(0.0)).unwrap_or(1.0);
    let fq = f.eval_raw(q);
    (k * f.deriv_raw(q), k * fq * fq)
}

/// Traces the characteristic starting at `(0, x0)` through the
/// trajectory's snapshot intervals.
pub fn trace_characteristic(traj: &Trajectory, x0: f64, f: &ErosionFunction) -> Result<CharacteristicPath> {
    let grid = *traj.grid();
    let cell = grid.locate(x0)?;
    let mut q = traj.initial().cells()[cell];
    f.eval(q)?;
    let mut x = x0;
    let mut samples = Vec::new();
    samples.push(PathSample { t: 0.0, x, q });
    let mut exited = false;

    'outer: for w in traj.snapshots.windows(2) {
        let (t0, t1) = (w[0].t, w[1].t);
        let field = &w[0].field;
        let speed = field.sup() * f.deriv_raw(q);
        let h_max = 0.25 * grid.dx() / speed;
        let n_sub = math::floor((t1 - t0) / h_max) as usize + 1;
        let h = (t1 - t0) / n_sub as f64;
        for s in 0..n_sub {
            let (a1, b1) = rhs(field, f, x, q);
            let (a2, b2) = rhs(field, f, x + 0.5 * h * a1, q + 0.5 * h * b1);
            let (a3, b3) = rhs(field, f, x + 0.5 * h * a2, q + 0.5 * h * b2);
            let (a4, b4) = rhs(field, f, x + h * a3, q + h * b3);
            let x_new = x + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            let q_new = q + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            if x_new > 0.0 {
                exited = true;
                break 'outer;
            }
            x = x_new;
            q = q_new;
            let t = if s + 1 == n_sub { t1 } else { t0 + (s + 1) as f64 * h };
            samples.push(PathSample { t, x, q });
        }
    }
    Ok(CharacteristicPath {
        start: (0.0, x0),
        samples,
        exited,
    })
}

/// `W(x) = ∫_{x_left}^x |q| dy`.
pub fn potential_w(p: &Profile, x: f64) -> Result<f64> {
    let g = p.grid();
    let i = g.locate(x)?;
    let full = math::sum(p.cells()[..i].iter().map(|q| q.abs())) * g.dx();
    Ok(full + p.cells()[i].abs() * (x - g.interface(i)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub samples_checked: usize,
    /// `W + q/f(q)` at the start of the path.
    pub invariant_initial: f64,
    /// Largest deviation of `W + q/f(q)` from its initial value.
    pub max_drift: f64,
    /// Global constant `sup_{q̄>0} q̄/f(q̄) + ‖q̄‖_L¹` bounding `q/f(q)`.
    pub c1: f64,
    pub max_ratio: f64,
    pub bound_holds: bool,
}

/// Evaluates `W(t, x(t)) + q/f(q)` at the snapshot times the path passes
/// through. Only meaningful where `q > 0` along the whole path.
pub fn qbound_check(traj: &Trajectory, path: &CharacteristicPath, f: &ErosionFunction) -> Result<BoundReport> {
    if path.samples.iter().any(|s| !(s.q > 0.0)) {
        return Err(Error::NotApplicable("q must stay positive along the path"));
    }
    let q0 = traj.initial();
    let c1 = q0
        .cells()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| q / f.eval_raw(q))
        .fold(0.0, f64::max)
        + q0.l1_norm();

    let mut invariant_initial = f64::NAN;
    let mut max_drift = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    let mut checked = 0;
    let mut snap = 0;
    for s in &path.samples {
        while snap < traj.snapshots.len() && traj.snapshots[snap].t < s.t {
            snap += 1;
        }
        if snap == traj.snapshots.len() {
            break;
        }
        if traj.snapshots[snap].t != s.t {
            continue;
        }
        let ratio = s.q / f.eval(s.q)?;
        let inv = potential_w(&traj.snapshots[snap].profile, s.x)? + ratio;
        if checked == 0 {
            invariant_initial = inv;
        }
        max_drift = max_drift.max((inv - invariant_initial).abs());
        max_ratio = max_ratio.max(ratio);
        checked += 1;
    }
    Ok(BoundReport {
        samples_checked: checked,
        invariant_initial,
        max_drift,
        c1,
        max_ratio,
        bound_holds: max_ratio <= c1,
    })
}
