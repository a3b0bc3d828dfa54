//! The erosion function `f`.
//!
//! `f` maps the slope deviation `q > -1` to an erosion (positive) or
//! deposition (negative) rate. Every instance must satisfy
//! `f(0) = 0`, `f' > 0`, `f'' < 0`, `f → -∞` at the floor `q → -1` and
//! `f(q)/q → 0` as `q → ∞`. [`validate`] audits these numerically.

use alloc::vec::Vec;
use serde::Serialize;

use crate::math;
use crate::{Error, Result};

/// Distance from `-1` below which `f` is not evaluated.
pub const FLOOR_EPSILON: f64 = 1e-10;

/// Lower bound (exclusive) of admissible `q`.
pub const DOMAIN_FLOOR: f64 = -1.0;

/// An erosion function given by its value and analytic derivative.
///
/// Instances are plain function pointers, so they are `Copy` and can be
/// shared freely between threads.
#[derive(Clone, Copy)]
pub struct ErosionFunction {
    name: &'static str,
    eval: fn(f64) -> f64,
    deriv: fn(f64) -> f64,
}

impl core::fmt::Debug for ErosionFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ErosionFunction").field("name", &self.name).finish()
    }
}

fn canonical_eval(q: f64) -> f64 {
    q / (q + 1.0)
}

fn canonical_deriv(q: f64) -> f64 {
    let s = q + 1.0;
    1.0 / (s * s)
}

fn log1p_eval(q: f64) -> f64 {
    math::ln_1p(q)
}

fn log1p_deriv(q: f64) -> f64 {
    1.0 / (1.0 + q)
}

impl ErosionFunction {
    /// `f(q) = q / (q + 1)`, the slow-erosion limit of the granular model.
    /// Bounded above by 1.
    pub const fn canonical() -> Self {
        Self {
            name: "canonical",
            eval: canonical_eval,
            deriv: canonical_deriv,
        }
    }

    /// `f(q) = ln(1 + q)`, unbounded above.
    pub const fn log1p() -> Self {
        Self {
            name: "log1p",
            eval: log1p_eval,
            deriv: log1p_deriv,
        }
    }

    /// A user supplied instance. Nothing is checked here; run [`validate`]
    /// before trusting it.
    pub const fn custom(name: &'static str, eval: fn(f64) -> f64, deriv: fn(f64) -> f64) -> Self {
        Self { name, eval, deriv }
    }

    /// Looks up one of the built-in instances.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "canonical" => Some(Self::canonical()),
            "log1p" => Some(Self::log1p()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub const fn domain_floor(&self) -> f64 {
        DOMAIN_FLOOR
    }

    #[inline]
    fn check(q: f64) -> Result<()> {
        if q > DOMAIN_FLOOR + FLOOR_EPSILON {
            Ok(())
        } else {
            Err(Error::Domain { q })
        }
    }

    /// `f(q)`. Fails for `q ≤ -1 + 1e-10` (and NaN).
    #[inline]
    pub fn eval(&self, q: f64) -> Result<f64> {
        Self::check(q)?;
        Ok((self.eval)(q))
    }

    /// `f'(q)`. Fails for `q ≤ -1 + 1e-10` (and NaN).
    #[inline]
    pub fn deriv(&self, q: f64) -> Result<f64> {
        Self::check(q)?;
        Ok((self.deriv)(q))
    }

    /// Unchecked evaluation for callers that already validated `q`.
    #[inline]
    pub(crate) fn eval_raw(&self, q: f64) -> f64 {
        (self.eval)(q)
    }

    #[inline]
    pub(crate) fn deriv_raw(&self, q: f64) -> f64 {
        (self.deriv)(q)
    }

    /// Smallest `q` with `f'(q) ≤ s`, found by bisection on the decreasing
    /// derivative. Used for exact rarefaction fans. Returns `None` when `s`
    /// is not positive.
    pub fn inverse_deriv(&self, s: f64) -> Option<f64> {
        if !(s > 0.0) {
            return None;
        }
        let mut lo = DOMAIN_FLOOR + FLOOR_EPSILON;
        if (self.deriv)(lo) <= s {
            return Some(lo);
        }
        let mut hi = 1.0;
        while (self.deriv)(hi) > s {
            hi *= 2.0;
            if hi > 1e300 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.deriv)(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// One audited assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// The sample that decided the verdict (worst case or first failure).
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub function: &'static str,
    pub sample_count: usize,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Log-spaced samples in `(-1 + 1e-6, 1e6)`, sorted, always containing 0.
pub fn sample_grid(sample_count: usize) -> Vec<f64> {
    let n = sample_count.max(3);
    let n_neg = n / 2;
    let n_pos = n - n_neg - 1;
    let mut out = Vec::with_capacity(n);
    // q = -1 + 10^s, s from -6 up to just below 0
    for j in 0..n_neg {
        let s = -6.0 + 5.99 * j as f64 / (n_neg.max(2) - 1) as f64;
        out.push(-1.0 + math::pow(10.0, s));
    }
    out.push(0.0);
    for j in 0..n_pos {
        let s = if n_pos == 1 {
            0.0
        } else {
            -6.0 + 12.0 * j as f64 / (n_pos - 1) as f64
        };
        out.push(math::pow(10.0, s));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Step for the centered difference at `q`, kept well inside the domain.
fn fd_step(q: f64) -> f64 {
    let h = 1e-5 * (1.0 + q.abs());
    h.min(1e-4 * (q + 1.0))
}

/// Audits the structural assumptions on `f` over a log-spaced sample grid.
/// Failures are entries in the report, never errors.
pub fn validate(f: &ErosionFunction, sample_count: usize) -> ValidationReport {
    let qs = sample_grid(sample_count);
    let ev = |q: f64| (f.eval)(q);
    let dv = |q: f64| (f.deriv)(q);
    let mut checks = Vec::new();

    let f0 = ev(0.0);
    checks.push(Check {
        name: "zero_at_origin",
        passed: f0 == 0.0,
        at: 0.0,
        value: f0,
    });

    let mut worst = (f64::INFINITY, 0.0);
    for &q in &qs {
        let d = dv(q);
        if !(d > worst.0) {
            worst = (d, q);
        }
    }
    checks.push(Check {
        name: "increasing",
        passed: worst.0 > 0.0,
        at: worst.1,
        value: worst.0,
    });

    // strictly decreasing chord slopes on consecutive triples
    let mut concave = Check {
        name: "concave",
        passed: true,
        at: f64::NAN,
        value: f64::NAN,
    };
    for w in qs.windows(3) {
        let s12 = (ev(w[1]) - ev(w[0])) / (w[1] - w[0]);
        let s23 = (ev(w[2]) - ev(w[1])) / (w[2] - w[1]);
        if !(s12 > s23) {
            concave = Check {
                name: "concave",
                passed: false,
                at: w[1],
                value: s23 - s12,
            };
            break;
        }
    }
    checks.push(concave);

    let mut deriv_dec = Check {
        name: "derivative_decreasing",
        passed: true,
        at: f64::NAN,
        value: f64::NAN,
    };
    for w in qs.windows(2) {
        if !(dv(w[0]) > dv(w[1])) {
            deriv_dec = Check {
                name: "derivative_decreasing",
                passed: false,
                at: w[0],
                value: dv(w[1]) - dv(w[0]),
            };
            break;
        }
    }
    checks.push(deriv_dec);

    let q_floor = -1.0 + 1e-6;
    let v_floor = ev(q_floor);
    checks.push(Check {
        name: "diverges_at_floor",
        passed: v_floor <= -10.0,
        at: q_floor,
        value: v_floor,
    });

    let q_big = 1e6;
    let ratio = ev(q_big) / q_big;
    checks.push(Check {
        name: "sublinear",
        passed: ratio.abs() < 1e-3,
        at: q_big,
        value: ratio,
    });

    let mut worst_fd = (0.0_f64, f64::NAN);
    let mut fd_ok = true;
    for &q in &qs {
        let h = fd_step(q);
        let fd = (ev(q + h) - ev(q - h)) / (2.0 * h);
        let d = dv(q);
        let excess = (d - fd).abs() / (1.0 + d.abs());
        if !(excess <= 1e-6) {
            fd_ok = false;
        }
        if !(excess <= worst_fd.0) {
            worst_fd = (excess, q);
        }
    }
    checks.push(Check {
        name: "derivative_consistent",
        passed: fd_ok,
        at: worst_fd.1,
        value: worst_fd.0,
    });

    ValidationReport {
        function: f.name,
        sample_count: qs.len(),
        checks,
    }
}
