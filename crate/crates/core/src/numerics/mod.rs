//! Scalar numerical kernels: bracketed root finding, adaptive quadrature and
//! explicit Runge–Kutta integration.

mod ode;
mod quad;
mod root;

pub use ode::{rk4_fixed, rk4_step, solve_ode, Rk4Workspace};
pub use quad::integrate;
pub use root::{find_root, Root};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stopping criteria shared by the iterative kernels.
///
/// A result is accepted once the error measure drops below
/// `abs_tol + rel_tol * |scale|`, where the scale is the current estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    abs_tol: T,
    rel_tol: T,
    max_iter: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_iter: usize) -> Result<Self> {
        if !(abs_tol >= T::zero()) || !abs_tol.is_finite() {
            return Err(Error::domain("Tolerance::new", "abs_tol must be finite and >= 0", abs_tol.as_f64()));
        }
        if !(rel_tol >= T::zero()) || !rel_tol.is_finite() {
            return Err(Error::domain("Tolerance::new", "rel_tol must be finite and >= 0", rel_tol.as_f64()));
        }
        if abs_tol == T::zero() && rel_tol == T::zero() {
            return Err(Error::domain("Tolerance::new", "abs_tol and rel_tol are both zero", 0.0));
        }
        if max_iter == 0 {
            return Err(Error::domain("Tolerance::new", "max_iter must be >= 1", 0.0));
        }
        Ok(Self { abs_tol, rel_tol, max_iter })
    }

    /// Floors a requested tolerance at a few ulps so `f32` instantiations
    /// remain attainable.
    fn floored(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Self {
        let eps = T::epsilon();
        let four = T::lit(4.0);
        Self {
            abs_tol: T::lit(abs_tol).max(four * eps * T::min_positive_value().max(eps)),
            rel_tol: T::lit(rel_tol).max(four * eps),
            max_iter,
        }
    }

    /// Root finding default: rel 1e-12, abs 1e-14, 200 iterations.
    pub fn root_default() -> Self {
        Self::floored(1e-14, 1e-12, 200)
    }

    /// Bisection down to adjacent floating-point values.
    pub fn full_precision() -> Self {
        Self {
            abs_tol: T::min_positive_value(),
            rel_tol: T::epsilon(),
            max_iter: 2200,
        }
    }

    /// Quadrature default: 1e-10 (absolute and relative), up to 2000 panels.
    pub fn quad_default() -> Self {
        Self::floored(1e-10, 1e-10, 2000)
    }

    /// ODE default: 1e-10 local error per step, up to 10⁶ steps.
    pub fn ode_default() -> Self {
        Self::floored(1e-10, 1e-10, 1_000_000)
    }

    pub fn abs_tol(&self) -> T {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> T {
        self.rel_tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter.max(1);
        self
    }

    /// Acceptance threshold at the given scale.
    #[inline]
    pub fn threshold(&self, scale: T) -> T {
        self.abs_tol + self.rel_tol * scale.abs()
    }
}
