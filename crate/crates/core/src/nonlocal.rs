//! The integral coefficient `k(x) = exp{ ∫_x^0 f(q(ξ)) dξ }` and its
//! derivative `k_x = -k f(q)`.
//!
//! For piecewise-constant `q` the integral is a finite sum, so `k` at the
//! interfaces is exact up to rounding and `k` is a pure exponential inside
//! each cell.

use alloc::vec;
use alloc::vec::Vec;
use serde::Serialize;

use crate::erosion::ErosionFunction;
use crate::math;
use crate::profile::{self, ClassBounds, Grid, Profile};
use crate::{Error, Result};

/// `k` at the `N + 1` interfaces and `k_x` at the `N` cell centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientField {
    grid: Grid,
    k_iface: Vec<f64>,
    kx_cell: Vec<f64>,
}

/// `k = K(q)` with `k_x` filled in. One right-to-left pass.
pub fn compute_k(p: &Profile, f: &ErosionFunction) -> Result<CoefficientField> {
    let grid = *p.grid();
    let n = grid.cells();
    let dx = grid.dx();
    let rates = p
        .cells()
        .iter()
        .map(|&q| f.eval(q))
        .collect::<Result<Vec<_>>>()?;
    let mut k_iface = vec![0.0; n + 1];
    k_iface[n] = 1.0;
    let mut integral = 0.0;
    let mut comp = 0.0;
    for i in (0..n).rev() {
        // compensated running sum of f(q_j) dx, j ≥ i
        let y = rates[i] * dx - comp;
        let t = integral + y;
        comp = (t - integral) - y;
        integral = t;
        k_iface[i] = math::exp(integral);
    }
    let kx_cell = kx_from(&k_iface, &rates);
    Ok(CoefficientField {
        grid,
        k_iface,
        kx_cell,
    })
}

/// `k_x = -k f(q)` at cell centers, with `k` at the center taken as the
/// geometric mean of the bounding interface values (exact for an
/// exponential).
pub fn compute_kx(field: &CoefficientField, p: &Profile, f: &ErosionFunction) -> Result<Vec<f64>> {
    if field.grid != *p.grid() {
        return Err(Error::GridMismatch);
    }
    let rates = p
        .cells()
        .iter()
        .map(|&q| f.eval(q))
        .collect::<Result<Vec<_>>>()?;
    Ok(kx_from(&field.k_iface, &rates))
}

fn kx_from(k_iface: &[f64], rates: &[f64]) -> Vec<f64> {
    rates
        .iter()
        .enumerate()
        .map(|(i, r)| -math::sqrt(k_iface[i] * k_iface[i + 1]) * r)
        .collect()
}

impl CoefficientField {
    /// Spatially constant `k ≡ value`, `k_x ≡ 0`; for frozen-coefficient
    /// Riemann tests.
    pub fn uniform(grid: Grid, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput("uniform coefficient must be positive"));
        }
        Ok(Self {
            grid,
            k_iface: vec![value; grid.cells() + 1],
            kx_cell: vec![0.0; grid.cells()],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_iface(&self) -> &[f64] {
        &self.k_iface
    }

    pub fn kx_cell(&self) -> &[f64] {
        &self.kx_cell
    }

    /// Exact value at the center of cell `i`.
    pub fn k_mid(&self, i: usize) -> f64 {
        math::sqrt(self.k_iface[i] * self.k_iface[i + 1])
    }

    pub fn sup(&self) -> f64 {
        self.k_iface.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.k_iface.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `TV(k) = ‖k_x‖_L¹`; `k` is monotone inside each cell, so the
    /// interface values carry all of it.
    pub fn tv(&self) -> f64 {
        profile::tv(&self.k_iface)
    }

    /// TV of the cell-center samples of `k_x`.
    pub fn tv_kx(&self) -> f64 {
        profile::tv(&self.kx_cell)
    }

    /// `k(x)` anywhere on the grid, interpolating exponentially inside the
    /// cell.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let i = self.grid.locate(x)?;
        let (kl, kr) = (self.k_iface[i], self.k_iface[i + 1]);
        if kl == kr {
            return Ok(kr);
        }
        let theta = (self.grid.interface(i + 1) - x) / self.grid.dx();
        Ok(kr * math::pow(kl / kr, theta))
    }

    /// Rebuilds `k` from `k_x` by exact integration across each cell
    /// (right to left, starting from `k(0) = 1`) and returns the largest
    /// relative mismatch with the stored interface values.
    pub fn kx_identity_residual(&self, p: &Profile, f: &ErosionFunction) -> Result<f64> {
        if self.grid != *p.grid() {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.cells();
        let dx = self.grid.dx();
        let mut k = self.k_iface[n];
        let mut worst = 0.0_f64;
        for i in (0..n).rev() {
            let a = f.eval(p.cells()[i])? * dx;
            // ∫_cell k_x dx = k_{i+1} - k_i = k_x(mid) dx sinh(a/2)/(a/2)
            k -= self.kx_cell[i] * dx * math::sinhc(0.5 * a);
            worst = worst.max((k - self.k_iface[i]).abs() / self.k_iface[i]);
        }
        Ok(worst)
    }

    fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.k_iface
            .iter()
            .copied()
            .chain((0..self.grid.cells()).map(|i| self.k_mid(i)))
    }
}

/// `sup |k1 - k2|` over interfaces and cell centers.
fn sup_distance(a: &CoefficientField, b: &CoefficientField) -> f64 {
    a.samples()
        .zip(b.samples())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn kx_l1_distance(a: &CoefficientField, b: &CoefficientField) -> f64 {
    math::sum(
        a.kx_cell
            .iter()
            .zip(&b.kx_cell)
            .map(|(x, y)| (x - y).abs()),
    ) * a.grid.dx()
}

/// Measured value against its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn upper(measured: f64, bound: f64) -> Self {
        Self {
            measured,
            bound,
            passed: measured <= bound * (1.0 + 1e-12) + 1e-15,
        }
    }

    fn lower(measured: f64, bound: f64) -> Self {
        Self {
            measured,
            bound,
            passed: measured >= bound * (1.0 - 1e-12) - 1e-15,
        }
    }
}

/// Audit of the coefficient properties for a pair of states a time
/// `dt_between` apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    /// `|f'(κ)|` with `κ` the class floor (lowered to the data if needed).
    pub deriv_at_floor: f64,
    /// `inf k ≥ exp(-|f'(κ)| ‖q‖_L¹)`
    pub k_lower: BoundCheck,
    /// `sup k ≤ exp(|f'(κ)| ‖q‖_L¹)`
    pub k_upper: BoundCheck,
    /// `TV(k) ≤ |f'(κ)| ‖k‖_∞ ‖q‖_L¹`
    pub tv_k: BoundCheck,
    /// `TV(k_x) ≤ TV(k) ‖f(q)‖_∞ + ‖k‖_∞ TV(f(q))`
    pub tv_kx: BoundCheck,
    /// `‖k1 - k2‖_∞ ≤ ‖k‖_∞ |f'(κ)| ‖q1 - q2‖_L¹`
    pub sup_chain: BoundCheck,
    /// `‖k1_x - k2_x‖_L¹ ≤ ‖k1 - k2‖_∞ ‖f(q1)‖_L¹ + ‖k2‖_∞ |f'(κ)| ‖q1 - q2‖_L¹`
    pub kx_chain: BoundCheck,
    /// `‖k1 - k2‖_∞ / ‖q1 - q2‖_L¹` (zero when the data coincide).
    pub sup_ratio: f64,
    pub q_lipschitz: f64,
    pub k_lipschitz: f64,
    pub kx_lipschitz: f64,
    pub kx_identity_residual: f64,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        [
            self.k_lower,
            self.k_upper,
            self.tv_k,
            self.tv_kx,
            self.sup_chain,
            self.kx_chain,
        ]
        .iter()
        .all(|c| c.passed)
    }
}

/// Checks the boundedness, variation and Lipschitz properties of `K` on
/// two profiles. Bounds use `|f'|` at the class floor `bounds.kappa0`
/// (or at the lower of the data, if a profile dips below the floor).
pub fn verify_k_properties(
    p1: &Profile,
    p2: &Profile,
    dt_between: f64,
    f: &ErosionFunction,
    bounds: &ClassBounds,
) -> Result<PropertyReport> {
    p1.same_grid(p2)?;
    if !(dt_between > 0.0) {
        return Err(Error::InvalidInput("dt_between must be positive"));
    }
    let k1 = compute_k(p1, f)?;
    let k2 = compute_k(p2, f)?;
    let kappa = bounds.kappa0.min(p1.inf()).min(p2.inf()).min(0.0);
    let fp = f.deriv(kappa)?.abs();
    let dx = p1.grid().dx();

    let l1_max = p1.l1_norm().max(p2.l1_norm());
    let b = fp * l1_max;
    let sup_k = k1.sup().max(k2.sup());
    let inf_k = k1.inf().min(k2.inf());

    let f_of = |p: &Profile| -> Result<Vec<f64>> { p.cells().iter().map(|&q| f.eval(q)).collect() };
    let f1 = f_of(p1)?;
    let f2 = f_of(p2)?;
    let f_sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    let tv_k_measured = k1.tv().max(k2.tv());
    let tv_kx_measured = k1.tv_kx().max(k2.tv_kx());
    let tv_kx_bound = (k1.tv() * f_sup(&f1) + k1.sup() * profile::tv(&f1))
        .max(k2.tv() * f_sup(&f2) + k2.sup() * profile::tv(&f2));

    let dq = p1.l1_distance(p2)?;
    let dk = sup_distance(&k1, &k2);
    let dkx = kx_l1_distance(&k1, &k2);
    let f1_l1 = math::sum(f1.iter().map(|v| v.abs())) * dx;

    Ok(PropertyReport {
        deriv_at_floor: fp,
        k_lower: BoundCheck::lower(inf_k, math::exp(-b)),
        k_upper: BoundCheck::upper(sup_k, math::exp(b)),
        tv_k: BoundCheck::upper(tv_k_measured, fp * sup_k * l1_max),
        tv_kx: BoundCheck::upper(tv_kx_measured, tv_kx_bound),
        sup_chain: BoundCheck::upper(dk, sup_k * fp * dq),
        kx_chain: BoundCheck::upper(dkx, dk * f1_l1 + k2.sup() * fp * dq),
        sup_ratio: if dq > 0.0 { dk / dq } else { 0.0 },
        q_lipschitz: dq / dt_between,
        k_lipschitz: dk / dt_between,
        kx_lipschitz: dkx / dt_between,
        kx_identity_residual: k1
            .kx_identity_residual(p1, f)?
            .max(k2.kx_identity_residual(p2, f)?),
    })
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

    fn constant(n: usize, v: f64) -> Profile {
        Profile::new(unit(n), vec![v; n]).unwrap()
    }

    #[test]
    fn zero_profile_gives_unit_coefficient() {
        let k = compute_k(&Profile::zeros(unit(50)), &F).unwrap();
        assert!(k.k_iface().iter().all(|&v| v == 1.0));
        assert!(k.kx_cell().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_profiles_match_closed_form() {
        let k = compute_k(&constant(100, 1.0), &F).unwrap();
        assert_eq!(k.k_iface()[100], 1.0);
        assert!((k.k_iface()[0] - libm::exp(0.5)).abs() < 1e-13 * libm::exp(0.5));
        let k = compute_k(&constant(100, -0.5), &F).unwrap();
        assert!((k.k_iface()[0] - libm::exp(-1.0)).abs() < 1e-13);
    }

    #[test]
    fn kx_matches_derivative_of_closed_form() {
        // k(x) = e^{-x/2}, k_x = -0.5 e^{-x/2}
        let n = 100;
        let k = compute_k(&constant(n, 1.0), &F).unwrap();
        let g = unit(n);
        for i in 0..n {
            let x = g.center(i);
            let exact = -0.5 * libm::exp(-0.5 * x);
            assert!((k.kx_cell()[i] - exact).abs() < 1e-13, "{i}");
        }
        // first cell center sits at -1 + dx/2, extrapolate the check to x = -1
        let at_left = -0.5 * libm::exp(0.5);
        assert!((at_left + 0.82436).abs() < 1e-5);
    }

    #[test]
    fn value_at_is_exponential() {
        let k = compute_k(&constant(10, 1.0), &F).unwrap();
        for x in [-1.0, -0.93, -0.5, -0.01, 0.0] {
            let exact = libm::exp(-0.5 * x);
            assert!((k.value_at(x).unwrap() - exact).abs() < 1e-13, "{x}");
        }
        assert!(k.value_at(0.5).is_err());
    }

    #[test]
    fn uniform_field() {
        let k = CoefficientField::uniform(unit(4), 2.0).unwrap();
        assert_eq!(k.tv(), 0.0);
        assert!(CoefficientField::uniform(unit(4), 0.0).is_err());
    }

    #[test]
    fn identical_profiles_have_zero_distances() {
        let p = presets::bump(unit(200), -0.5, 0.4, 0.8).unwrap();
        let b = ClassBounds::enclosing([&p]).unwrap();
        let r = verify_k_properties(&p, &p, 0.1, &F, &b).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.sup_chain.measured, 0.0);
        assert_eq!(r.kx_chain.measured, 0.0);
    }

    #[test]
    fn bound_needs_class_floor_not_profile_inf() {
        // q ≡ 1: sup k = e^{0.5}; f'(inf q) = f'(1) = 0.25 would give e^{0.25}
        let p = constant(100, 1.0);
        let k = compute_k(&p, &F).unwrap();
        assert!(k.sup() > libm::exp(F.deriv(1.0).unwrap() * p.l1_norm()));
        let b = ClassBounds::new(2.0, -0.2).unwrap();
        let r = verify_k_properties(&p, &p, 1.0, &F, &b).unwrap();
        assert!(r.k_upper.passed && r.k_lower.passed);
        let b0 = ClassBounds::new(2.0, 0.0).unwrap();
        assert!(verify_k_properties(&p, &p, 1.0, &F, &b0).unwrap().k_upper.passed);
    }

    #[test]
    fn single_cell_perturbation() {
        let n = 50;
        let base = presets::bump(unit(n), -0.5, 0.5, 0.6).unwrap();
        let kappa = 0.0;
        let fp = F.deriv(kappa).unwrap();
        for (i, delta) in [(10, 0.3), (25, -0.4), (40, 1.2)] {
            let mut cells = base.cells().to_vec();
            cells[i] += delta;
            let pert = Profile::new(unit(n), cells).unwrap();
            let k0 = compute_k(&base, &F).unwrap();
            let k1 = compute_k(&pert, &F).unwrap();
            let kappa_here = kappa.min(pert.inf());
            let bound = k0.sup().max(k1.sup())
                * (libm::exp(F.deriv(kappa_here).unwrap().max(fp) * libm::fabs(delta) * unit(n).dx()) - 1.0);
            assert!((k0.sup() - k1.sup()).abs() <= bound * (1.0 + 1e-12));
        }
    }

    fn random_profile() -> impl Strategy<Value = Profile> {
        prop::collection::vec(-0.8_f64..2.0, 40).prop_map(|v| Profile::new(unit(40), v).unwrap())
    }

    proptest! {
        #[test]
        fn cumulative_matches_analytic(p in random_profile()) {
            let k = compute_k(&p, &F).unwrap();
            let dx = p.grid().dx();
            for i in 0..=p.grid().cells() {
                let exact: f64 = p.cells()[i..].iter().map(|&q| F.eval(q).unwrap() * dx).sum();
                let e = libm::exp(exact);
                prop_assert!((k.k_iface()[i] - e).abs() <= 1e-13 * e);
            }
        }

        #[test]
        fn multiplicative_across_cells(p in random_profile()) {
            let k = compute_k(&p, &F).unwrap();
            let dx = p.grid().dx();
            for i in 0..p.grid().cells() {
                let rhs = k.k_iface()[i + 1] * libm::exp(F.eval(p.cells()[i]).unwrap() * dx);
                prop_assert!((k.k_iface()[i] - rhs).abs() <= 1e-13 * rhs);
            }
        }

        #[test]
        fn kx_sign_and_identity(p in random_profile()) {
            let k = compute_k(&p, &F).unwrap();
            for (kx, q) in k.kx_cell().iter().zip(p.cells()) {
                let fq = F.eval(*q).unwrap();
                prop_assert!(*kx == 0.0 && fq == 0.0 || kx.signum() == -fq.signum());
            }
            prop_assert!(k.kx_identity_residual(&p, &F).unwrap() <= 1e-10);
            let again = compute_kx(&k, &p, &F).unwrap();
            prop_assert_eq!(again.as_slice(), k.kx_cell());
        }

        #[test]
        fn property_suite_holds(a in random_profile(), b in random_profile()) {
            let bounds = ClassBounds::enclosing([&a, &b]).unwrap();
            let r = verify_k_properties(&a, &b, 0.5, &F, &bounds).unwrap();
            prop_assert!(r.all_passed(), "{:?}", r);
            prop_assert!(r.kx_identity_residual <= 1e-10);
        }
    }
}
