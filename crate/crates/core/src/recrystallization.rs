//! Recrystallized volume fraction `φ(s)`, `s = t/t₀`.
//!
//! Particles larger than the return radius at `t₀` are exactly the ones that
//! grew between `t₀` and `t`; in rescaled variables the fraction of the solid
//! volume present at `t` that precipitated after `t₀` is
//!
//! ```text
//! φ(s) = (1/z̄³) ∫_{ρ(z₀)}^{z₀} h(x) x³ dx,   z₀ = z₀(s)
//! ```

use crate::distribution::{h, SizeDistribution};
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::regime::Regime;
use crate::return_map::{return_z0, rho};
use crate::scalar::Real;

/// Number of points in [`default_s_grid`].
pub const DEFAULT_GRID_POINTS: usize = 200;
/// Upper end of [`default_s_grid`].
pub const DEFAULT_GRID_MAX: f64 = 1e3;

/// Sampled `φ(s)` curve for one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiCurve<T> {
    pub regime: Regime,
    pub samples: Vec<(T, T)>,
}

impl<T: Real> PhiCurve<T> {
    pub fn s_values(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|p| p.0)
    }

    pub fn phi_values(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|p| p.1)
    }
}

/// `∫_a^b h(x) x³ dx`, split at the mode region `x = 1`.
fn volume_between<T: Real>(dist: &SizeDistribution<T>, a: T, b: T) -> Result<T> {
    let regime = dist.regime();
    let f = |x: T| h(regime, x).unwrap_or(T::zero()) * x * x * x;
    let tol = crate::numerics::Tolerance::quad_default();
    if a < T::one() && T::one() < b {
        Ok(integrate(f, a, T::one(), &tol)? + integrate(f, T::one(), b, &tol)?)
    } else {
        integrate(f, a, b, &tol)
    }
}

/// `φ` from the window `[ρ(z₀), z₀]` directly.
pub fn phi_direct<T: Real>(dist: &SizeDistribution<T>, z0: T) -> Result<T> {
    let lower = rho(dist.regime(), z0)?;
    Ok(volume_between(dist, lower, z0)? / dist.third_moment())
}

/// `φ = 1 − (1/z̄³)[∫₀^ρ + ∫_{z₀}^{z_max}] h x³ dx`; accurate when `φ` is near 1.
pub fn phi_complement<T: Real>(dist: &SizeDistribution<T>, z0: T) -> Result<T> {
    let lower = rho(dist.regime(), z0)?;
    let tails = volume_between(dist, T::zero(), lower)? + volume_between(dist, z0, dist.z_max())?;
    Ok(T::one() - tails / dist.third_moment())
}

/// `φ` as a function of the rescaled start radius `z₀ ∈ [1, z_max)`.
///
/// Switches to the complement form once the window holds more than half of
/// the volume, so that values close to 1 do not lose digits.
pub fn phi_at_z0<T: Real>(dist: &SizeDistribution<T>, z0: T) -> Result<T> {
    if z0 == T::one() {
        return Ok(T::zero());
    }
    let direct = phi_direct(dist, z0)?;
    let phi = if direct > T::lit(0.5) {
        phi_complement(dist, z0)?
    } else {
        direct
    };
    Ok(phi.max(T::zero()).min(T::one()))
}

/// Recrystallized fraction after normalised time `s = t/t₀ ≥ 1`.
pub fn phi<T: Real>(dist: &SizeDistribution<T>, s: T) -> Result<T> {
    if !(s >= T::one()) || !s.is_finite() {
        return Err(Error::domain("phi", "requires finite s >= 1", s.as_f64()));
    }
    let z0 = return_z0(dist.regime(), s)?;
    phi_at_z0(dist, z0)
}

/// `dφ/dt` at `t = t₀` in units of `1/t₀`: `h(1) / (γ z̄³)`.
pub fn phi_initial_rate<T: Real>(dist: &SizeDistribution<T>) -> Result<T> {
    let regime = dist.regime();
    Ok(h(regime, T::one())? / (regime.gamma_real::<T>() * dist.third_moment()))
}

/// Evaluates `φ` on a sorted grid of `s ≥ 1`.
pub fn phi_curve<T: Real>(dist: &SizeDistribution<T>, s_grid: &[T]) -> Result<PhiCurve<T>> {
    for w in s_grid.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(Error::domain("phi_curve", "grid must be sorted ascending", w[1].as_f64()));
        }
    }
    let samples = s_grid
        .iter()
        .map(|&s| phi(dist, s).map(|p| (s, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiCurve {
        regime: dist.regime(),
        samples,
    })
}

/// Logarithmic grid of [`DEFAULT_GRID_POINTS`] values from 1 to [`DEFAULT_GRID_MAX`].
pub fn default_s_grid<T: Real>() -> Vec<T> {
    log_grid(T::one(), T::lit(DEFAULT_GRID_MAX), DEFAULT_GRID_POINTS)
}

pub(crate) fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize(n - 1).expect("grid size fits");
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * T::from_usize(i).expect("index fits") / last).exp()
            }
        })
        .collect()
}
