//! L¹ stability: growth of the distance between two nonlocal solutions, and
//! the effect of swapping the coefficient under fixed data.

use alloc::vec::Vec;
use serde::Serialize;

use crate::erosion::ErosionFunction;
use crate::math;
use crate::nonlocal::{self, CoefficientField};
use crate::profile::{self, Profile};
use crate::solver::{self, run, SolverConfig, Trajectory};
use crate::{Error, Result};

/// `(sup |k1 - k2|, TV(k1 - k2))` over the interfaces.
pub fn coefficient_distance(k1: &CoefficientField, k2: &CoefficientField) -> Result<(f64, f64)> {
    if k1.grid() != k2.grid() {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = k1.k_iface().iter().zip(k2.k_iface()).map(|(a, b)| a - b).collect();
    let sup = diff.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    Ok((sup, profile::tv(&diff)))
}

/// Least-squares slope of `ln d` against `t` over `t ≥ t_end / 4`, clamped
/// at zero. Non-positive distances are skipped; fewer than two usable
/// points give `0`.
pub fn fit_growth_rate(times: &[f64], distances: &[f64]) -> f64 {
    let t_end = times.last().copied().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(distances)
        .filter(|(t, d)| **t >= 0.25 * t_end && **d > 0.0)
        .map(|(t, d)| (*t, math::ln(*d)))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mt = math::sum(pts.iter().map(|p| p.0)) / n;
    let my = math::sum(pts.iter().map(|p| p.1)) / n;
    let sxx = math::sum(pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)));
    let sxy = math::sum(pts.iter().map(|p| (p.0 - mt) * (p.1 - my)));
    if sxx == 0.0 {
        return 0.0;
    }
    (sxy / sxx).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub initial_distance: f64,
    pub fitted_l: f64,
    /// `(d_{j+1} - d_j) / (t_{j+1} - t_j)` per snapshot interval.
    pub increments: Vec<f64>,
    /// `d(t) ≤ d(0) e^{L t} (1 + slack)` at every snapshot.
    pub bound_ok: bool,
    pub slack: f64,
    pub nonincreasing: bool,
    /// Chain bound on `L` from measured `sup k`, `sup |f|`, `sup f'` and the
    /// variation of both solutions.
    pub l_bound: f64,
    pub l_bound_ok: bool,
}

/// Bound slack used by [`continuous_dependence`].
pub const GROWTH_SLACK: f64 = 0.05;

/// Runs both data with their own nonlocal coefficient and measures the L¹
/// distance at every snapshot.
pub fn continuous_dependence(
    q0a: &Profile,
    q0b: &Profile,
    f: &ErosionFunction,
    cfg: &SolverConfig,
) -> Result<DistanceReport> {
    q0a.same_grid(q0b)?;
    let ta = run(q0a, f, cfg)?;
    let tb = run(q0b, f, cfg)?;
    distance_report(&ta, &tb, f)
}

pub(crate) fn distance_report(ta: &Trajectory, tb: &Trajectory, f: &ErosionFunction) -> Result<DistanceReport> {
    let times = ta.times();
    let distances = ta
        .snapshots
        .iter()
        .zip(&tb.snapshots)
        .map(|(a, b)| a.profile.l1_distance(&b.profile))
        .collect::<Result<Vec<_>>>()?;
    let d0 = distances[0];
    let fitted_l = if d0 > 0.0 { fit_growth_rate(&times, &distances) } else { 0.0 };
    let increments = times
        .windows(2)
        .zip(distances.windows(2))
        .map(|(t, d)| (d[1] - d[0]) / (t[1] - t[0]))
        .collect();
    let bound_ok = times
        .iter()
        .zip(&distances)
        .all(|(t, d)| *d <= d0 * math::exp(fitted_l * t) * (1.0 + GROWTH_SLACK) + 1e-15);
    let nonincreasing = distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);

    // E ≤ Ĉ1 TV(k1 - k2) + Ĉ2 (1 + TV u1 + TV u2) ‖k1 - k2‖_∞ with
    // ‖k1 - k2‖_∞ ≤ K f'(κ) d and TV(k1 - k2) ≤ K f'(κ) (1 + ‖f(q1)‖_L¹) d
    let mut sup_k = 0.0_f64;
    let mut sup_f = 0.0_f64;
    let mut inf_q = 0.0_f64;
    let mut sup_q = 0.0_f64;
    let mut f_l1 = 0.0_f64;
    let mut tv_a = 0.0_f64;
    let mut tv_b = 0.0_f64;
    for (sa, sb) in ta.snapshots.iter().zip(&tb.snapshots) {
        sup_k = sup_k.max(sa.field.sup()).max(sb.field.sup());
        inf_q = inf_q.min(sa.profile.inf()).min(sb.profile.inf());
        sup_q = sup_q.max(sa.profile.sup()).max(sb.profile.sup());
        tv_a = tv_a.max(sa.profile.tv());
        tv_b = tv_b.max(sb.profile.tv());
        for p in [&sa.profile, &sb.profile] {
            let l1 = math::sum(p.cells().iter().map(|&q| f.eval_raw(q).abs())) * p.grid().dx();
            f_l1 = f_l1.max(l1);
        }
    }
    sup_f = sup_f.max(f.eval(inf_q)?.abs()).max(f.eval(sup_q)?.abs());
    let fp = f.deriv(inf_q)?;
    let c1 = sup_f;
    let c2 = fp;
    let l_bound = c1 * sup_k * fp * (1.0 + f_l1) + c2 * (1.0 + tv_a + tv_b) * sup_k * fp;

    Ok(DistanceReport {
        times,
        distances,
        initial_distance: d0,
        fitted_l,
        increments,
        bound_ok,
        slack: GROWTH_SLACK,
        nonincreasing,
        l_bound,
        l_bound_ok: fitted_l <= l_bound,
    })
}

/// Same data, two coefficient sequences: `u` is driven by the nonlocal
/// coefficient of `source1`, `ũ` by that of `source2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSwapReport {
    pub times: Vec<f64>,
    /// `‖u(t) - ũ(t)‖_L¹`
    pub distances: Vec<f64>,
    /// Measured `sup|f|` over both solutions.
    pub c1: f64,
    /// Smallest `Ĉ2` for which every per-step increment fits
    /// `Δe ≤ Δt [Ĉ1 TV(k1-k2) + Ĉ2 (1 + TV u + TV ũ) ‖k1-k2‖_∞]`.
    pub c2_required: f64,
    pub sup_k_distance: f64,
    pub sup_tv_k_distance: f64,
    pub sup_tv_u: f64,
    pub sup_tv_u_tilde: f64,
}

impl CoefficientSwapReport {
    /// Right-hand side of the integrated estimate at time `t` for a given
    /// `Ĉ2`.
    pub fn rhs(&self, t: f64, c2: f64) -> f64 {
        t * (self.c1 * self.sup_tv_k_distance
            + c2 * (1.0 + self.sup_tv_u + self.sup_tv_u_tilde) * self.sup_k_distance)
    }
}

pub fn coefficient_swap(
    data: &Profile,
    source1: &Profile,
    source2: &Profile,
    f: &ErosionFunction,
    cfg: &SolverConfig,
) -> Result<CoefficientSwapReport> {
    data.same_grid(source1)?;
    data.same_grid(source2)?;
    cfg.validate()?;
    let dx = data.grid().dx();
    let mut s1 = source1.clone();
    let mut s2 = source2.clone();
    let mut u = data.clone();
    let mut v = data.clone();
    let mut t = 0.0;
    let mut times = alloc::vec![0.0];
    let mut distances = alloc::vec![0.0];
    let mut c1 = 0.0_f64;
    let mut c2_required = 0.0_f64;
    let mut sup_k_distance = 0.0_f64;
    let mut sup_tv_k_distance = 0.0_f64;
    let mut sup_tv_u = u.tv();
    let mut sup_tv_v = v.tv();
    let mut steps = 0;
    while t < cfg.t_end {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::StepBudgetExceeded { steps: cfg.max_steps, time: t });
        }
        let k1 = nonlocal::compute_k(&s1, f)?;
        let k2 = nonlocal::compute_k(&s2, f)?;
        let speed = [
            solver::max_speed(&s1, &k1, f)?,
            solver::max_speed(&u, &k1, f)?,
            solver::max_speed(&s2, &k2, f)?,
            solver::max_speed(&v, &k2, f)?,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let dt = (cfg.cfl * dx / speed).min(cfg.t_end - t);
        let (dk_sup, dk_tv) = coefficient_distance(&k1, &k2)?;
        for p in [&u, &v] {
            for &q in p.cells() {
                c1 = c1.max(f.eval(q)?.abs());
            }
        }
        let e0 = u.l1_distance(&v)?;
        let tv_sum = 1.0 + u.tv() + v.tv();
        u = solver::advance(&u, &k1, dt, f, cfg.floor_guard)?.0;
        v = solver::advance(&v, &k2, dt, f, cfg.floor_guard)?.0;
        s1 = solver::advance(&s1, &k1, dt, f, cfg.floor_guard)?.0;
        s2 = solver::advance(&s2, &k2, dt, f, cfg.floor_guard)?.0;
        t = if cfg.t_end - t <= dt { cfg.t_end } else { t + dt };
        let e1 = u.l1_distance(&v)?;
        let excess = (e1 - e0) / dt - c1 * dk_tv;
        if excess > 0.0 && dk_sup > 0.0 {
            c2_required = c2_required.max(excess / (tv_sum * dk_sup));
        }
        sup_k_distance = sup_k_distance.max(dk_sup);
        sup_tv_k_distance = sup_tv_k_distance.max(dk_tv);
        sup_tv_u = sup_tv_u.max(u.tv());
        sup_tv_v = sup_tv_v.max(v.tv());
        times.push(t);
        distances.push(e1);
    }
    Ok(CoefficientSwapReport {
        times,
        distances,
        c1,
        c2_required,
        sup_k_distance,
        sup_tv_k_distance,
        sup_tv_u,
        sup_tv_u_tilde: sup_tv_v,
    })
}
