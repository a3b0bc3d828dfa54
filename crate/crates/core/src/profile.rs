//! Truncated grid on `[x_left, 0]` and piecewise-constant profiles.
//!
//! Cells hold averages. Everything left of `x_left` is the equilibrium
//! `q ≡ 0`, so the nonlocal integral (which runs from `x` to `0`) sees no
//! truncation error as long as the data vanish near the left edge.

use alloc::vec;
use alloc::vec::Vec;
use serde::Serialize;

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    x_left: f64,
    cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_left: f64, cells: usize) -> Result<Self> {
        if !(x_left < 0.0) || !x_left.is_finite() {
            return Err(Error::InvalidInput("x_left must be negative and finite"));
        }
        if cells < 2 {
            return Err(Error::InvalidInput("a grid needs at least two cells"));
        }
        Ok(Self {
            x_left,
            cells,
            dx: -x_left / cells as f64,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of interface `i` in `0..=cells`; interface `cells` is
    /// exactly `x = 0`.
    pub fn interface(&self, i: usize) -> f64 {
        self.x_left * ((self.cells - i) as f64 / self.cells as f64)
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_left * ((self.cells - i) as f64 - 0.5) / self.cells as f64
    }

    /// Cell containing `x`; the right edge `x = 0` belongs to the last cell.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= self.x_left && x <= 0.0) {
            return Err(Error::OutOfDomain { x });
        }
        let i = math::floor((x - self.x_left) / self.dx) as usize;
        Ok(i.min(self.cells - 1))
    }

    /// Same interval, `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid::new(self.x_left, self.cells * factor)
    }
}

/// Cell averages of `q` on a [`Grid`]. Every value is finite and `> -1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    grid: Grid,
    cells: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != grid.cells() {
            return Err(Error::InvalidInput("cell count does not match the grid"));
        }
        if let Some(v) = cells.iter().find(|v| !(v.is_finite() && **v > -1.0)) {
            return Err(Error::Domain { q: *v });
        }
        Ok(Self { grid, cells })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            cells: vec![0.0; grid.cells()],
        }
    }

    /// Builds a profile from exact cell integrals: `integral(a, b)` must
    /// return `∫_a^b q dx`.
    pub fn from_integrals(grid: Grid, integral: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let cells = (0..grid.cells())
            .map(|i| integral(grid.interface(i), grid.interface(i + 1)) / grid.dx())
            .collect();
        Self::new(grid, cells)
    }

    pub(crate) fn from_raw(grid: Grid, cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), grid.cells());
        Self { grid, cells }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    pub fn same_grid(&self, other: &Profile) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `Σ |q_i| dx`
    pub fn l1_norm(&self) -> f64 {
        math::sum(self.cells.iter().map(|q| q.abs())) * self.grid.dx
    }

    /// Signed mass `Σ q_i dx`.
    pub fn mass(&self) -> f64 {
        math::sum(self.cells.iter().copied()) * self.grid.dx
    }

    /// Sum of interior jumps; no boundary terms.
    pub fn tv(&self) -> f64 {
        tv(&self.cells)
    }

    pub fn inf(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ |a_i - b_i| dx`
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        self.same_grid(other)?;
        Ok(math::sum(
            self.cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| (a - b).abs()),
        ) * self.grid.dx)
    }

    /// Exact cell averaging onto a grid whose cell count divides this one's.
    pub fn restrict(&self, coarse: &Grid) -> Result<Profile> {
        if coarse.x_left() != self.grid.x_left()
            || coarse.cells() == 0
            || self.grid.cells() % coarse.cells() != 0
        {
            return Err(Error::GridMismatch);
        }
        let r = self.grid.cells() / coarse.cells();
        let cells = self
            .cells
            .chunks(r)
            .map(|c| math::sum(c.iter().copied()) / r as f64)
            .collect();
        Ok(Profile::from_raw(*coarse, cells))
    }

    pub fn check_class(&self, bounds: &ClassBounds) -> ClassReport {
        let inf = self.inf();
        let tv = self.tv();
        let l1 = self.l1_norm();
        ClassReport {
            inf,
            sup: self.sup(),
            tv,
            l1,
            inf_ok: inf >= bounds.kappa0,
            tv_ok: tv <= bounds.c0,
            l1_ok: l1 <= bounds.c0,
        }
    }
}

/// Total variation of a sequence.
pub fn tv(values: &[f64]) -> f64 {
    math::sum(values.windows(2).map(|w| (w[1] - w[0]).abs()))
}

/// Constants of the admissible class: `inf q ≥ kappa0`, `TV q ≤ c0`,
/// `‖q‖_L¹ ≤ c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassBounds {
    pub c0: f64,
    pub kappa0: f64,
}

impl ClassBounds {
    pub fn new(c0: f64, kappa0: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::InvalidInput("c0 must be positive"));
        }
        if !(kappa0 > -1.0 && kappa0 <= 0.0) {
            return Err(Error::InvalidInput("kappa0 must lie in (-1, 0]"));
        }
        Ok(Self { c0, kappa0 })
    }

    /// Tightest class containing all the given profiles.
    pub fn enclosing<'a>(profiles: impl IntoIterator<Item = &'a Profile>) -> Result<Self> {
        let mut c0 = 0.0_f64;
        let mut kappa0 = 0.0_f64;
        for p in profiles {
            c0 = c0.max(p.tv()).max(p.l1_norm());
            kappa0 = kappa0.min(p.inf());
        }
        Self::new(c0.max(f64::MIN_POSITIVE), kappa0)
    }
}

/// Measured class functionals with per-bound verdicts. `sup` is reported
/// but not bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassReport {
    pub inf: f64,
    pub sup: f64,
    pub tv: f64,
    pub l1: f64,
    pub inf_ok: bool,
    pub tv_ok: bool,
    pub l1_ok: bool,
}

impl ClassReport {
    pub fn all_ok(&self) -> bool {
        self.inf_ok && self.tv_ok && self.l1_ok
    }
}

/// Named initial data with exact cell averages.
pub mod presets {
    use super::*;
    use core::f64::consts::PI;

    /// `q ≡ 0`
    pub fn zero(grid: Grid) -> Profile {
        Profile::zeros(grid)
    }

    /// Smooth `height · cos²(π (x - center) / width)` on `|x - center| < width/2`.
    pub fn bump(grid: Grid, center: f64, width: f64, height: f64) -> Result<Profile> {
        if !(width > 0.0) {
            return Err(Error::InvalidInput("bump width must be positive"));
        }
        if !(height > -1.0) {
            return Err(Error::Domain { q: height });
        }
        let a = PI / width;
        // antiderivative of cos²(a (x - c))
        let prim = |x: f64| {
            let y = (x - center).clamp(-0.5 * width, 0.5 * width);
            0.5 * y + math::sin(2.0 * a * y) / (4.0 * a)
        };
        Profile::from_integrals(grid, |l, r| height * (prim(r) - prim(l)))
    }

    /// `left` for `x < location`, `right` for `x > location`.
    pub fn step(grid: Grid, location: f64, left: f64, right: f64) -> Result<Profile> {
        if !(left > -1.0) {
            return Err(Error::Domain { q: left });
        }
        if !(right > -1.0) {
            return Err(Error::Domain { q: right });
        }
        Profile::from_integrals(grid, |l, r| {
            let m = location.clamp(l, r);
            left * (m - l) + right * (r - m)
        })
    }

    /// `height` on `[a, b]`, zero elsewhere.
    pub fn block(grid: Grid, a: f64, b: f64, height: f64) -> Result<Profile> {
        if !(height > -1.0) {
            return Err(Error::Domain { q: height });
        }
        Profile::from_integrals(grid, |l, r| {
            let lo = a.max(l);
            let hi = b.min(r);
            if hi > lo {
                height * (hi - lo)
            } else {
                0.0
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(-1.0, n).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(-2.0, 200).unwrap();
        assert_eq!(g.dx(), 0.01);
        assert_eq!(g.interface(200), 0.0);
        assert_eq!(g.interface(0), -2.0);
        assert!((g.center(199) + 0.005).abs() < 1e-15);
        assert_eq!(g.locate(0.0).unwrap(), 199);
        assert_eq!(g.locate(-2.0).unwrap(), 0);
        assert!(g.locate(0.1).is_err());
        assert!(Grid::new(1.0, 10).is_err());
        assert!(Grid::new(-1.0, 1).is_err());
    }

    #[test]
    fn rejects_inadmissible_cells() {
        assert!(matches!(
            Profile::new(grid(3), vec![0.0, -1.0, 0.0]),
            Err(Error::Domain { .. })
        ));
        assert!(Profile::new(grid(3), vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(Profile::new(grid(3), vec![0.0; 2]).is_err());
    }

    #[test]
    fn l1_examples() {
        assert_eq!(Profile::zeros(grid(10)).l1_norm(), 0.0);
        let p = Profile::new(grid(10), vec![1.0; 10]).unwrap();
        assert!((p.l1_norm() - 1.0).abs() < 1e-15);
        let m = Profile::new(grid(10), vec![-0.5; 10]).unwrap();
        let m2 = Profile::new(grid(10), vec![0.5; 10]).unwrap();
        assert_eq!(m.l1_norm(), m2.l1_norm());
    }

    #[test]
    fn tv_examples() {
        assert_eq!(Profile::new(grid(4), vec![0.3; 4]).unwrap().tv(), 0.0);
        assert_eq!(Profile::new(grid(4), vec![0.0, 0.0, 1.0, 1.0]).unwrap().tv(), 1.0);
        assert_eq!(Profile::new(grid(4), vec![0.0, 1.0, 0.0, 1.0]).unwrap().tv(), 3.0);
    }

    #[test]
    fn distance_examples() {
        let g = grid(100);
        let a = Profile::zeros(g);
        let b = Profile::new(g, vec![1.0; 100]).unwrap();
        assert!((a.l1_distance(&b).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(b.l1_distance(&b).unwrap(), 0.0);
        let other = Profile::zeros(Grid::new(-2.0, 100).unwrap());
        assert_eq!(a.l1_distance(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn class_examples() {
        let b = ClassBounds::new(2.0, -0.5).unwrap();
        assert!(Profile::zeros(grid(4)).check_class(&b).all_ok());
        let low = Profile::new(grid(4), vec![-0.99; 4]).unwrap();
        assert!(!low.check_class(&b).inf_ok);
        let stair = Profile::new(grid(4), vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let r = stair.check_class(&b);
        assert!(!r.tv_ok && r.l1_ok && r.inf_ok);
        assert_eq!(r.tv, 3.0);
        assert!(ClassBounds::new(1.0, -1.0).is_err());
    }

    #[test]
    fn tv_converges_to_exact_variation() {
        // q = 0.5 cos(2πx) on [-1, 0] has total variation 2 and flat ends
        let mut prev = f64::INFINITY;
        for n in [50, 100, 200, 400, 800] {
            let g = grid(n);
            let p = Profile::from_integrals(g, |a, b| {
                let w = 2.0 * core::f64::consts::PI;
                0.5 * (libm::sin(w * b) - libm::sin(w * a)) / w
            })
            .unwrap();
            let err = (p.tv() - 2.0).abs();
            assert!(err < prev || err < 1e-12);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn presets_are_exact() {
        let g = grid(10);
        let p = presets::step(g, -0.5, 0.0, 1.0).unwrap();
        assert!((p.mass() - 0.5).abs() < 1e-15);
        let p = presets::step(g, -0.55, 0.0, 1.0).unwrap();
        assert!((p.cells()[4] - 0.5).abs() < 1e-12);
        let b = presets::bump(grid(400), -0.5, 0.2, 1.0).unwrap();
        // ∫ h cos² over one width is h·w/2
        assert!((b.mass() - 0.1).abs() < 1e-14);
        assert!(presets::bump(g, -0.5, 0.2, -1.2).is_err());
        let blk = presets::block(g, -0.6, -0.4, -0.3).unwrap();
        assert!((blk.mass() + 0.06).abs() < 1e-15);
    }

    #[test]
    fn restrict_preserves_mass() {
        let fine = presets::bump(grid(400), -0.4, 0.3, 0.7).unwrap();
        let coarse = fine.restrict(&grid(100)).unwrap();
        assert!((fine.mass() - coarse.mass()).abs() < 1e-14);
        assert!(fine.restrict(&grid(300)).is_err());
    }

    fn profile_strategy() -> impl Strategy<Value = Profile> {
        prop::collection::vec(-0.9_f64..3.0, 16).prop_map(|v| Profile::new(grid(16), v).unwrap())
    }

    proptest! {
        #[test]
        fn norms_are_homogeneous(p in profile_strategy(), s in 0.0_f64..0.3) {
            let scaled = Profile::new(*p.grid(), p.cells().iter().map(|v| v * s).collect()).unwrap();
            prop_assert!((scaled.l1_norm() - s * p.l1_norm()).abs() <= 1e-12 * (1.0 + p.l1_norm()));
            prop_assert!((scaled.tv() - s * p.tv()).abs() <= 1e-12 * (1.0 + p.tv()));
            prop_assert!(p.tv() >= 0.0 && p.l1_norm() >= 0.0);
        }

        #[test]
        fn distance_is_a_metric(a in profile_strategy(), b in profile_strategy(), c in profile_strategy()) {
            let ab = a.l1_distance(&b).unwrap();
            prop_assert_eq!(ab, b.l1_distance(&a).unwrap());
            prop_assert!(ab <= a.l1_distance(&c).unwrap() + c.l1_distance(&b).unwrap() + 1e-12);
            let diff: Vec<f64> = a.cells().iter().zip(b.cells()).map(|(x, y)| x - y).collect();
            let norm = math::sum(diff.iter().map(|d| d.abs())) * a.grid().dx();
            prop_assert_eq!(ab, norm);
        }
    }
}
