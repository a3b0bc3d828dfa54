//! Fractional-step finite-volume solver.
//!
//! Each step freezes `k_n = K(q(t_n))`, advances the local law
//! `q_t + (k_n(x) f(q))_x = 0` by one explicit upwind step under a CFL
//! condition, then recomputes `k`. Because `f' > 0` everywhere the flux is
//! increasing in `q`, so the Godunov flux at every interface is the upwind
//! value `k f(q_left)`. The inflow state at `x_left` is the equilibrium
//! `q = 0` (zero flux); the right boundary `x = 0` is pure outflow.

use alloc::vec;
use alloc::vec::Vec;
use serde::Serialize;

use crate::erosion::ErosionFunction;
use crate::nonlocal::{self, CoefficientField};
use crate::profile::{self, Grid, Profile};
use crate::{Error, Result};

/// Hard floor below which an update is reported instead of clamped.
pub const DEFAULT_FLOOR_GUARD: f64 = -1.0 + 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub cfl: f64,
    pub t_end: f64,
    /// Sorted times in `(0, t_end]` at which snapshots are taken; `0` and
    /// `t_end` are always recorded.
    pub snapshot_times: Vec<f64>,
    pub floor_guard: f64,
    pub max_steps: usize,
}

impl SolverConfig {
    /// Defaults: `cfl = 0.9`, ten evenly spaced snapshots.
    pub fn new(t_end: f64) -> Self {
        Self {
            cfl: 0.9,
            t_end,
            snapshot_times: Vec::new(),
            floor_guard: DEFAULT_FLOOR_GUARD,
            max_steps: 10_000_000,
        }
        .with_snapshot_count(10)
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    /// `count` evenly spaced snapshots ending at `t_end`.
    pub fn with_snapshot_count(mut self, count: usize) -> Self {
        let count = count.max(1);
        self.snapshot_times = (1..=count)
            .map(|j| self.t_end * j as f64 / count as f64)
            .collect();
        self
    }

    pub fn with_snapshot_times(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidInput("cfl must be in (0,1]"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput("t_end must be positive"));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0 && t <= self.t_end))
        {
            return Err(Error::InvalidInput("snapshot times must lie in [0, t_end]"));
        }
        if self.snapshot_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("snapshot times must be strictly increasing"));
        }
        if !(self.floor_guard > -1.0 && self.floor_guard < 0.0) {
            return Err(Error::InvalidInput("floor_guard must lie in (-1, 0)"));
        }
        Ok(())
    }

    /// Requested snapshot times with `t_end` appended and `0` dropped.
    fn targets(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .snapshot_times
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < self.t_end)
            .collect();
        v.push(self.t_end);
        v
    }
}

/// Where the frozen coefficient of each step comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoefficientModel {
    /// `k_n = K(q(t_n))`, the nonlocal law.
    Nonlocal,
    /// `k ≡ value`: the local law `q_t + value · f(q)_x = 0`.
    Uniform(f64),
}

impl CoefficientModel {
    fn field(&self, p: &Profile, f: &ErosionFunction) -> Result<CoefficientField> {
        match *self {
            CoefficientModel::Nonlocal => nonlocal::compute_k(p, f),
            CoefficientModel::Uniform(v) => CoefficientField::uniform(*p.grid(), v),
        }
    }
}

/// Upwind (= Godunov, since `f' > 0`) flux `k f(u_left)` at an interface.
pub fn numerical_flux(k_iface: f64, u_left: f64, _u_right: f64, f: &ErosionFunction) -> Result<f64> {
    Ok(k_iface * f.eval(u_left)?)
}

/// Interface fluxes `G_0 .. G_N` with the equilibrium inflow `G_0 = 0`.
pub fn interface_fluxes(p: &Profile, field: &CoefficientField, f: &ErosionFunction) -> Result<Vec<f64>> {
    if field.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let k = field.k_iface();
    let mut g = Vec::with_capacity(k.len());
    g.push(k[0] * f.eval(0.0)?);
    for (i, &q) in p.cells().iter().enumerate() {
        g.push(numerical_flux(k[i + 1], q, q, f)?);
    }
    Ok(g)
}

/// Largest stable step: `cfl · dx / max_i (max(k_i, k_{i+1}) f'(q_i))`.
pub fn cfl_dt(p: &Profile, field: &CoefficientField, f: &ErosionFunction, cfl: f64) -> Result<f64> {
    Ok(cfl * p.grid().dx() / max_speed(p, field, f)?)
}

pub(crate) fn max_speed(p: &Profile, field: &CoefficientField, f: &ErosionFunction) -> Result<f64> {
    if field.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let k = field.k_iface();
    let mut speed = 0.0_f64;
    for (i, &q) in p.cells().iter().enumerate() {
        speed = speed.max(k[i].max(k[i + 1]) * f.deriv(q)?);
    }
    Ok(speed)
}

/// One conservative upwind step with a frozen coefficient.
pub fn step_frozen_k(p: &Profile, field: &CoefficientField, dt: f64, f: &ErosionFunction) -> Result<Profile> {
    advance(p, field, dt, f, DEFAULT_FLOOR_GUARD).map(|(q, _)| q)
}

/// Returns the new profile and the outflow flux at `x = 0`.
pub(crate) fn advance(
    p: &Profile,
    field: &CoefficientField,
    dt: f64,
    f: &ErosionFunction,
    floor_guard: f64,
) -> Result<(Profile, f64)> {
    let g = interface_fluxes(p, field, f)?;
    let lambda = dt / p.grid().dx();
    let mut cells = Vec::with_capacity(p.cells().len());
    for (i, &q) in p.cells().iter().enumerate() {
        let v = q - lambda * (g[i + 1] - g[i]);
        if !(v > floor_guard) {
            return Err(Error::FloorViolation {
                cell: i,
                value: v,
                time: f64::NAN,
            });
        }
        cells.push(v);
    }
    let outflow = g[g.len() - 1];
    Ok((Profile::from_raw(*p.grid(), cells), outflow))
}

pub(crate) fn flux_stats(g: &[f64]) -> (f64, f64) {
    let sup = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (sup, profile::tv(g))
}

/// Change of the complete flux when `k` is refreshed at the start of a
/// step: `F_after = (1 + r) F_before` with `r = (k_new - k_old) / k_old`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefreshRecord {
    /// `sup |r|`
    pub k_change: f64,
    /// `TV(r)`
    pub k_change_tv: f64,
    pub tv_flux_before: f64,
    pub tv_flux_after: f64,
    pub sup_flux_before: f64,
    /// `(1 + sup|r|) TV(F_before) + sup|F_before| TV(r)`
    pub tv_bound: f64,
    /// `sup|r| / dt` of the step that preceded the refresh.
    pub growth_rate: f64,
}

/// Diagnostics after one step (the first record is the initial state with
/// `dt = 0`). Flux quantities are over the interface fluxes `G_0..G_N`
/// including the zero inflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub l1: f64,
    pub tv: f64,
    pub inf: f64,
    pub sup: f64,
    /// `sup |F|` after the update, still with the frozen `k_n`.
    pub sup_flux: f64,
    pub tv_flux: f64,
    /// Same quantities before the update.
    pub sup_flux_pre: f64,
    pub tv_flux_pre: f64,
    /// Flux through `x = 0` during the step.
    pub outflow: f64,
    pub refresh: Option<RefreshRecord>,
}

impl StepRecord {
    fn initial(p: &Profile, g: &[f64]) -> Self {
        let (sup_flux, tv_flux) = flux_stats(g);
        Self {
            t: 0.0,
            dt: 0.0,
            mass: p.mass(),
            l1: p.l1_norm(),
            tv: p.tv(),
            inf: p.inf(),
            sup: p.sup(),
            sup_flux,
            tv_flux,
            sup_flux_pre: sup_flux,
            tv_flux_pre: tv_flux,
            outflow: 0.0,
            refresh: None,
        }
    }
}

/// State at a snapshot time, with the coefficient frozen for the step that
/// starts there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub profile: Profile,
    pub field: CoefficientField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub model: CoefficientModel,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<StepRecord>,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        self.snapshots[0].profile.grid()
    }

    pub fn initial(&self) -> &Profile {
        &self.snapshots[0].profile
    }

    pub fn last(&self) -> &Profile {
        &self.snapshots[self.snapshots.len() - 1].profile
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots[self.snapshots.len() - 1].t
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Index of the last snapshot with `t_s ≤ t`.
    pub fn snapshot_index(&self, t: f64) -> usize {
        match self.snapshots.iter().rposition(|s| s.t <= t) {
            Some(i) => i,
            None => 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.series.len() - 1
    }

    /// Largest `|mass_n - (mass_0 - Σ dt·outflow)|` over the run, relative
    /// to `max(‖q_0‖_L¹, |mass_0|)` (absolute when both vanish).
    pub fn mass_balance_error(&self) -> f64 {
        let m0 = self.series[0].mass;
        let scale = self.series[0].l1.max(m0.abs());
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut outflow = 0.0;
        let mut comp = 0.0;
        let mut worst = 0.0_f64;
        for r in &self.series[1..] {
            let y = r.dt * r.outflow - comp;
            let t = outflow + y;
            comp = (t - outflow) - y;
            outflow = t;
            worst = worst.max((r.mass - (m0 - outflow)).abs());
        }
        worst / scale
    }
}

/// Runs the nonlocal law from `q0` to `cfg.t_end`.
pub fn run(q0: &Profile, f: &ErosionFunction, cfg: &SolverConfig) -> Result<Trajectory> {
    run_with_model(q0, f, cfg, CoefficientModel::Nonlocal)
}

pub fn run_with_model(
    q0: &Profile,
    f: &ErosionFunction,
    cfg: &SolverConfig,
    model: CoefficientModel,
) -> Result<Trajectory> {
    cfg.validate()?;
    let targets = cfg.targets();
    let mut next = 0;
    let mut t = 0.0;
    let mut q = q0.clone();
    let mut field = model.field(&q, f)?;
    let g0 = interface_fluxes(&q, &field, f)?;
    let mut series = vec![StepRecord::initial(&q, &g0)];
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        profile: q.clone(),
        field: field.clone(),
    }];
    // flux with the previous k at the current state, and the previous dt
    let mut carried: Option<(CoefficientField, Vec<f64>, f64)> = None;

    while next < targets.len() {
        if series.len() > cfg.max_steps {
            return Err(Error::StepBudgetExceeded {
                steps: cfg.max_steps,
                time: t,
            });
        }
        let g_pre = interface_fluxes(&q, &field, f)?;
        let refresh = carried
            .take()
            .map(|(old, g_before, dt_prev)| refresh_record(&old, &field, &g_before, &g_pre, dt_prev));

        let target = targets[next];
        let mut dt = cfl_dt(&q, &field, f, cfg.cfl)?;
        let lands = t + dt >= target;
        if lands {
            dt = target - t;
        }
        let (q_new, outflow) =
            advance(&q, &field, dt, f, cfg.floor_guard).map_err(|e| with_time(e, t + dt))?;
        let g_post = interface_fluxes(&q_new, &field, f)?;
        t = if lands { target } else { t + dt };

        let (sup_flux_pre, tv_flux_pre) = flux_stats(&g_pre);
        let (sup_flux, tv_flux) = flux_stats(&g_post);
        series.push(StepRecord {
            t,
            dt,
            mass: q_new.mass(),
            l1: q_new.l1_norm(),
            tv: q_new.tv(),
            inf: q_new.inf(),
            sup: q_new.sup(),
            sup_flux,
            tv_flux,
            sup_flux_pre,
            tv_flux_pre,
            outflow,
            refresh,
        });
        q = q_new;
        let new_field = model.field(&q, f)?;
        carried = Some((core::mem::replace(&mut field, new_field), g_post, dt));
        if lands {
            snapshots.push(Snapshot {
                t,
                profile: q.clone(),
                field: field.clone(),
            });
            next += 1;
        }
    }
    Ok(Trajectory {
        model,
        snapshots,
        series,
    })
}

fn with_time(e: Error, time: f64) -> Error {
    match e {
        Error::FloorViolation { cell, value, .. } => Error::FloorViolation { cell, value, time },
        other => other,
    }
}

fn refresh_record(
    old: &CoefficientField,
    new: &CoefficientField,
    g_before: &[f64],
    g_after: &[f64],
    dt_prev: f64,
) -> RefreshRecord {
    let r: Vec<f64> = old
        .k_iface()
        .iter()
        .zip(new.k_iface())
        .map(|(o, n)| (n - o) / o)
        .collect();
    let k_change = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let k_change_tv = profile::tv(&r);
    let (sup_flux_before, tv_flux_before) = flux_stats(g_before);
    let (_, tv_flux_after) = flux_stats(g_after);
    RefreshRecord {
        k_change,
        k_change_tv,
        tv_flux_before,
        tv_flux_after,
        sup_flux_before,
        tv_bound: (1.0 + k_change) * tv_flux_before + sup_flux_before * k_change_tv,
        growth_rate: if dt_prev > 0.0 { k_change / dt_prev } else { 0.0 },
    }
}

/// Evolves `q0a` and `q0b` with the coefficient sequence generated by the
/// nonlocal evolution of `k_source`, all three sharing every `(k_n, dt_n)`.
/// With the coefficient prescribed this is the fixed-coefficient
/// semigroup, which is an L¹ contraction.
pub fn solve_frozen_pair(
    q0a: &Profile,
    q0b: &Profile,
    k_source: &Profile,
    f: &ErosionFunction,
    cfg: &SolverConfig,
) -> Result<(Trajectory, Trajectory)> {
    q0a.same_grid(q0b)?;
    q0a.same_grid(k_source)?;
    cfg.validate()?;
    let targets = cfg.targets();
    let mut next = 0;
    let mut t = 0.0;
    let mut src = k_source.clone();
    let mut field = nonlocal::compute_k(&src, f)?;
    let mut states = [q0a.clone(), q0b.clone()];
    let mut out: [(Vec<Snapshot>, Vec<StepRecord>); 2] = Default::default();
    for (s, o) in states.iter().zip(out.iter_mut()) {
        let g = interface_fluxes(s, &field, f)?;
        o.0.push(Snapshot {
            t: 0.0,
            profile: s.clone(),
            field: field.clone(),
        });
        o.1.push(StepRecord::initial(s, &g));
    }
    let mut steps = 0;
    while next < targets.len() {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::StepBudgetExceeded {
                steps: cfg.max_steps,
                time: t,
            });
        }
        let speed = max_speed(&src, &field, f)?
            .max(max_speed(&states[0], &field, f)?)
            .max(max_speed(&states[1], &field, f)?);
        let target = targets[next];
        let mut dt = cfg.cfl * src.grid().dx() / speed;
        let lands = t + dt >= target;
        if lands {
            dt = target - t;
        }
        let t_new = if lands { target } else { t + dt };
        for (s, o) in states.iter_mut().zip(out.iter_mut()) {
            let g_pre = interface_fluxes(s, &field, f)?;
            let (q_new, outflow) =
                advance(s, &field, dt, f, cfg.floor_guard).map_err(|e| with_time(e, t_new))?;
            let g_post = interface_fluxes(&q_new, &field, f)?;
            let (sup_flux_pre, tv_flux_pre) = flux_stats(&g_pre);
            let (sup_flux, tv_flux) = flux_stats(&g_post);
            o.1.push(StepRecord {
                t: t_new,
                dt,
                mass: q_new.mass(),
                l1: q_new.l1_norm(),
                tv: q_new.tv(),
                inf: q_new.inf(),
                sup: q_new.sup(),
                sup_flux,
                tv_flux,
                sup_flux_pre,
                tv_flux_pre,
                outflow,
                refresh: None,
            });
            *s = q_new;
        }
        src = advance(&src, &field, dt, f, cfg.floor_guard)
            .map_err(|e| with_time(e, t_new))?
            .0;
        field = nonlocal::compute_k(&src, f)?;
        t = t_new;
        if lands {
            for (s, o) in states.iter().zip(out.iter_mut()) {
                o.0.push(Snapshot {
                    t,
                    profile: s.clone(),
                    field: field.clone(),
                });
            }
            next += 1;
        }
    }
    let [(sa, ra), (sb, rb)] = out;
    let mk = |snapshots, series| Trajectory {
        model: CoefficientModel::Nonlocal,
        snapshots,
        series,
    };
    Ok((mk(sa, ra), mk(sb, rb)))
}

/// Front position: first interface-interpolated crossing of `level`
/// scanning from the left. `None` if the profile never crosses.
pub fn front_position(p: &Profile, level: f64) -> Option<f64> {
    let g = p.grid();
    let c = p.cells();
    for i in 0..c.len() - 1 {
        let (a, b) = (c[i] - level, c[i + 1] - level);
        if a == 0.0 {
            return Some(g.center(i));
        }
        if a * b < 0.0 {
            let s = a / (a - b);
            return Some(g.center(i) + s * g.dx());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::presets;
    use proptest::prelude::*;

    const F: ErosionFunction = ErosionFunction::canonical();

    fn unit(n: usize) -> Grid {
        Grid::new(-1.0, n).unwrap()
    }

    #[test]
    fn flux_examples() {
        assert_eq!(numerical_flux(1.0, 0.0, 5.0, &F).unwrap(), 0.0);
        assert_eq!(numerical_flux(2.0, 1.0, 3.0, &F).unwrap(), 1.0);
        assert!(numerical_flux(1.0, -1.0, 0.0, &F).is_err());
    }

    #[test]
    fn cfl_examples() {
        let g = Grid::new(-2.0, 200).unwrap();
        let p = Profile::zeros(g);
        let k = CoefficientField::uniform(g, 1.0).unwrap();
        assert!((cfl_dt(&p, &k, &F, 0.9).unwrap() - 0.009).abs() < 1e-15);
        let g2 = Grid::new(-2.0, 400).unwrap();
        let dt2 = cfl_dt(&Profile::zeros(g2), &CoefficientField::uniform(g2, 1.0).unwrap(), &F, 0.9).unwrap();
        assert!((dt2 - 0.0045).abs() < 1e-15);
        let low = presets::block(g, -1.0, -0.5, -0.5).unwrap();
        let lower = presets::block(g, -1.0, -0.5, -0.7).unwrap();
        assert!(cfl_dt(&lower, &k, &F, 0.9).unwrap() < cfl_dt(&low, &k, &F, 0.9).unwrap());
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let p = Profile::zeros(unit(50));
        let k = nonlocal::compute_k(&p, &F).unwrap();
        let q = step_frozen_k(&p, &k, 0.01, &F).unwrap();
        assert!(q.cells().iter().all(|&v| v == 0.0));
        let traj = run(&p, &F, &SolverConfig::new(1.0)).unwrap();
        assert!(traj.snapshots.iter().all(|s| s.profile.cells().iter().all(|&v| v == 0.0)));
        assert!(traj.series.iter().all(|r| r.mass == 0.0));
    }

    #[test]
    fn one_step_mass_change_is_boundary_flux() {
        let p = presets::bump(unit(100), -0.3, 0.5, 0.8).unwrap();
        let k = nonlocal::compute_k(&p, &F).unwrap();
        let dt = cfl_dt(&p, &k, &F, 0.9).unwrap();
        let g = interface_fluxes(&p, &k, &F).unwrap();
        let q = step_frozen_k(&p, &k, dt, &F).unwrap();
        let expected = p.mass() + dt * (g[0] - g[100]);
        assert!((q.mass() - expected).abs() < 1e-14);
    }

    #[test]
    fn floor_violation_is_reported() {
        let p = presets::block(unit(8), -0.75, -0.5, -0.9).unwrap();
        let k = CoefficientField::uniform(unit(8), 1.0).unwrap();
        let err = step_frozen_k(&p, &k, 0.5, &F).unwrap_err();
        assert!(matches!(err, Error::FloorViolation { .. }), "{err:?}");
    }

    #[test]
    fn step_budget() {
        let p = presets::bump(unit(50), -0.5, 0.4, 0.5).unwrap();
        let cfg = SolverConfig::new(1.0).with_max_steps(3);
        assert!(matches!(run(&p, &F, &cfg), Err(Error::StepBudgetExceeded { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(1.0).with_cfl(1.5).validate().is_err());
        assert!(SolverConfig::new(1.0).with_snapshot_times(vec![0.5, 0.2]).validate().is_err());
        assert!(SolverConfig::new(1.0).with_snapshot_times(vec![2.0]).validate().is_err());
        assert!(SolverConfig::new(-1.0).validate().is_err());
    }

    #[test]
    fn snapshots_land_exactly() {
        let p = presets::bump(unit(64), -0.5, 0.4, 0.5).unwrap();
        let cfg = SolverConfig::new(0.7).with_snapshot_times(vec![0.1, 0.25, 0.5]);
        let traj = run(&p, &F, &cfg).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.25, 0.5, 0.7]);
        assert_eq!(traj.series.last().unwrap().t, 0.7);
        assert!(traj.series.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn shock_travels_at_rankine_hugoniot_speed() {
        let g = unit(400);
        let p = presets::step(g, -0.5, 0.0, 1.0).unwrap();
        let cfg = SolverConfig::new(0.5).with_snapshot_count(1);
        let traj = run_with_model(&p, &F, &cfg, CoefficientModel::Uniform(1.0)).unwrap();
        let x = front_position(traj.last(), 0.5).unwrap();
        assert!((x - (-0.25)).abs() <= 2.0 * g.dx(), "front at {x}");
    }

    #[test]
    fn constant_k_maximum_principle() {
        let g = unit(100);
        let p = presets::bump(g, -0.5, 0.4, 0.8).unwrap();
        let k = CoefficientField::uniform(g, 1.3).unwrap();
        let mut q = p;
        for _ in 0..50 {
            let dt = cfl_dt(&q, &k, &F, 0.9).unwrap();
            let next = step_frozen_k(&q, &k, dt, &F).unwrap();
            assert!(next.inf() >= q.inf().min(0.0) - 1e-15);
            assert!(next.sup() <= q.sup() + 1e-15);
            q = next;
        }
    }

    #[test]
    fn negative_bump_relaxes() {
        let g = unit(200);
        let p = presets::block(g, -0.6, -0.4, -0.3).unwrap();
        let traj = run(&p, &F, &SolverConfig::new(1.0)).unwrap();
        for w in traj.series.windows(2) {
            assert!(w[1].inf >= w[0].inf - 1e-15);
        }
    }

    #[test]
    fn frozen_pair_identical_data() {
        let g = unit(80);
        let a = presets::bump(g, -0.6, 0.3, 0.5).unwrap();
        let (ta, tb) = solve_frozen_pair(&a, &a, &a, &F, &SolverConfig::new(0.5)).unwrap();
        assert_eq!(ta.snapshots, tb.snapshots);
        assert!(solve_frozen_pair(&a, &Profile::zeros(unit(40)), &a, &F, &SolverConfig::new(0.5)).is_err());
    }

    #[test]
    fn front_position_interpolates() {
        let g = unit(4);
        let p = Profile::new(g, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!((front_position(&p, 0.5).unwrap() - (-0.5)).abs() < 1e-15);
        assert!(front_position(&Profile::zeros(g), 0.5).is_none());
    }

    proptest! {
        #[test]
        fn flux_is_monotone(k in 0.1_f64..5.0, a in -0.9_f64..5.0, b in -0.9_f64..5.0, c in -0.9_f64..5.0) {
            prop_assume!(a < b);
            prop_assert!(numerical_flux(k, a, c, &F).unwrap() <= numerical_flux(k, b, c, &F).unwrap());
            prop_assert_eq!(numerical_flux(k, a, b, &F).unwrap(), numerical_flux(k, a, c, &F).unwrap());
        }

        #[test]
        fn ordered_data_stay_ordered(
            base in prop::collection::vec(-0.5_f64..1.5, 40),
            bump in prop::collection::vec(0.0_f64..0.5, 40),
        ) {
            let g = unit(40);
            let lo = Profile::new(g, base.clone()).unwrap();
            let hi = Profile::new(g, base.iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
            let (ta, tb) = solve_frozen_pair(&lo, &hi, &lo, &F, &SolverConfig::new(0.3).with_snapshot_count(6)).unwrap();
            for (sa, sb) in ta.snapshots.iter().zip(&tb.snapshots) {
                for (x, y) in sa.profile.cells().iter().zip(sb.profile.cells()) {
                    prop_assert!(x <= y);
                }
            }
        }
    }
}
