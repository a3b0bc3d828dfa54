//! Guaranteed-existence time from the lower/upper envelope estimates.
//!
//! With `z = inf q`, `w = sup q`, `δ = (z(0) + 1) / 2` and `M = 2 w(0)`,
//! the bounds `z ≥ -1 + δ`, `w ≤ M` hold up to
//! `T = min(δ / (C |f'(-1+δ)|), (M/2) / (C f(M)))` where
//! `C = sup|f| · exp(f'(-1+δ) ‖q̄‖_L¹)`.

use alloc::vec::Vec;
use serde::Serialize;

use crate::erosion::ErosionFunction;
use crate::math;
use crate::profile::Profile;
use crate::solver::Trajectory;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceTime {
    pub z0: f64,
    pub w0: f64,
    /// `None` when `z(0) ≥ 0` and the lower bound is automatic.
    pub delta: Option<f64>,
    /// `None` when `w(0) ≤ 0` and the upper bound is automatic.
    pub m: Option<f64>,
    pub c: f64,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    /// `None` when neither bound needs to be established.
    pub t: Option<f64>,
}

impl ExistenceTime {
    pub fn lower(&self) -> f64 {
        self.delta.map_or(0.0, |d| -1.0 + d)
    }

    pub fn upper(&self) -> f64 {
        self.m.unwrap_or(0.0)
    }
}

pub fn existence_time(q0: &Profile, f: &ErosionFunction) -> Result<ExistenceTime> {
    let z0 = q0.inf();
    let w0 = q0.sup();
    let delta = (z0 < 0.0).then(|| (z0 + 1.0) / 2.0);
    let m = (w0 > 0.0).then(|| 2.0 * w0);
    let lo = delta.map_or(z0.min(0.0), |d| -1.0 + d);
    let hi = m.unwrap_or(w0.max(0.0));
    let sup_f = f.eval(lo)?.abs().max(f.eval(hi)?.abs());
    let c = sup_f * math::exp(f.deriv(lo)? * q0.l1_norm());
    let t1 = match delta {
        Some(d) => Some(d / (c * f.deriv(lo)?.abs())),
        None => None,
    };
    let t2 = match m {
        Some(m) => Some(0.5 * m / (c * f.eval(m)?)),
        None => None,
    };
    let t = match (t1, t2) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok(ExistenceTime { z0, w0, delta, m, c, t1, t2, t })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub existence: ExistenceTime,
    /// Time span actually checked: `min(T, t_end)`.
    pub checked_until: f64,
    pub steps_checked: usize,
    pub min_inf: f64,
    pub max_sup: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `z(t) ≥ z_env(t)` and `w(t) ≤ w_env(t)` at the snapshots, where the
    /// envelopes solve `z' = C f(z)`, `w' = C f(w)`.
    pub ode_ok: bool,
    pub ode_lower: Vec<(f64, f64)>,
    pub ode_upper: Vec<(f64, f64)>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.existence.t.map_or(true, |t| t > 0.0) && self.lower_ok && self.upper_ok
    }
}

fn envelope_ode(y0: f64, c: f64, f: &ErosionFunction, until: f64, times: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    let mut t = 0.0;
    let rhs = |y: f64| c * f.eval_raw(y.max(-1.0 + 1e-12));
    for &target in times.iter().filter(|&&s| s <= until) {
        let span = target - t;
        let n = math::ceil(span / 1e-3).max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * h * k1);
            let k3 = rhs(y + 0.5 * h * k2);
            let k4 = rhs(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t = target;
        out.push((t, y));
    }
    out
}

pub fn verify_envelope(traj: &Trajectory, et: &ExistenceTime, f: &ErosionFunction) -> EnvelopeReport {
    let until = et.t.unwrap_or(f64::INFINITY).min(traj.t_end());
    let lower = et.lower();
    let upper = et.upper();
    let mut min_inf = f64::INFINITY;
    let mut max_sup = f64::NEG_INFINITY;
    let mut steps_checked = 0;
    for r in traj.series.iter().filter(|r| r.t <= until) {
        min_inf = min_inf.min(r.inf);
        max_sup = max_sup.max(r.sup);
        steps_checked += 1;
    }
    let lower_ok = et.delta.map_or(min_inf >= 0.0, |_| min_inf >= lower);
    let upper_ok = et.m.map_or(max_sup <= 0.0, |_| max_sup <= upper);

    let times = traj.times();
    let ode_lower = envelope_ode(et.z0, et.c, f, until, &times);
    let ode_upper = envelope_ode(et.w0, et.c, f, until, &times);
    let ode_ok = traj.snapshots.iter().filter(|s| s.t <= until).zip(ode_lower.iter().zip(&ode_upper)).all(
        |(s, (lo, hi))| {
            let slack = 1e-9;
            s.profile.inf() >= lo.1 - slack && s.profile.sup() <= hi.1 + slack
        },
    );
    EnvelopeReport {
        existence: *et,
        checked_until: until,
        steps_checked,
        min_inf,
        max_sup,
        lower_ok,
        upper_ok,
        ode_ok,
        ode_lower,
        ode_upper,
    }
}
