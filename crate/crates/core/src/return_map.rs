//! Return radius and return time.
//!
//! A particle of radius `r` at time `t₀` first grows, then shrinks back to `r`
//! at the return time `t`. In rescaled coordinates with `z₀ = r/R_c(t₀) ≥ 1`, the
//! rescaled radius at the return time is `ρ(z₀)`, the sub-critical solution of
//! `α(ρ) = α(z₀)`, and the late-stage scaling `R_c ∝ t^{1/γ}` gives
//! `t/t₀ = (z₀/ρ(z₀))^γ`.

use crate::error::{Error, Result};
use crate::numerics::{find_root, Tolerance};
use crate::regime::Regime;
use crate::scalar::Real;

/// `z₀` closer than this to `z_max` is rejected: the return time diverges there.
pub const NEAR_CUTOFF: f64 = 1e-9;

/// A solved instance of the return map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnPoint<T> {
    /// Rescaled radius at the start time, `r / R_c(t₀)`.
    pub z0: T,
    /// Rescaled radius at the return time, `ρ(z₀) = r / R_c(t)`.
    pub z_return: T,
    /// Time ratio `t/t₀ = (z₀/ρ)^γ`. May be `+inf` when `ρ` underflows.
    pub s: T,
}

impl<T: Real> ReturnPoint<T> {
    pub fn from_z0(regime: Regime, z0: T) -> Result<Self> {
        let log_rho = rho_log(regime, z0)?;
        let s = (regime.gamma_real::<T>() * (z0.ln() - log_rho)).exp();
        Ok(Self {
            z0,
            z_return: log_rho.exp(),
            s,
        })
    }

    pub fn from_s(regime: Regime, s: T) -> Result<Self> {
        let z0 = return_z0(regime, s)?;
        let z_return = rho(regime, z0)?;
        Ok(Self { z0, z_return, s })
    }
}

fn check_z0<T: Real>(op: &'static str, regime: Regime, z0: T) -> Result<()> {
    let zmax = regime.z_max::<T>();
    if !(z0 >= T::one()) || !(z0 <= zmax - T::lit(NEAR_CUTOFF)) || !(z0 < zmax) {
        return Err(Error::domain(op, "requires 1 <= z0 <= z_max - 1e-9", z0.as_f64()));
    }
    Ok(())
}

/// `ln ρ(z₀)`, solved by bisection in `u = ln z`.
///
/// For `u → −∞`, `α(e^u) → u + τ(0)` and `τ` is decreasing, so
/// `u_lo = α(z₀) − τ(0) − 1` always satisfies `α(e^{u_lo}) < α(z₀)`.
pub fn rho_log<T: Real>(regime: Regime, z0: T) -> Result<T> {
    check_z0("rho", regime, z0)?;
    if z0 == T::one() {
        return Ok(T::zero());
    }
    let target = regime.alpha(z0)?;
    let lo = target - regime.tau_at_zero::<T>() - T::one();
    let root = find_root(
        |u| regime.alpha_of_log(u) - target,
        lo,
        T::zero(),
        &Tolerance::full_precision(),
    )?;
    Ok(root.x)
}

/// `ρ(z₀)`: the unique `z ∈ (0, 1]` with `α(z) = α(z₀)`. Underflows to 0 for
/// `z₀` very close to the cutoff.
pub fn rho<T: Real>(regime: Regime, z0: T) -> Result<T> {
    Ok(rho_log(regime, z0)?.exp())
}

/// `ρ′(1)`, exactly −1 in both regimes since `α′(1) = 0` and `α″(1) ≠ 0`.
pub fn rho_prime_at_one<T: Real>(_regime: Regime) -> T {
    -T::one()
}

/// `ln(t/t₀) = γ (ln z₀ − ln ρ(z₀))`.
pub fn log_return_time_ratio<T: Real>(regime: Regime, z0: T) -> Result<T> {
    let log_rho = rho_log(regime, z0)?;
    Ok(regime.gamma_real::<T>() * (z0.ln() - log_rho))
}

/// Return time in units of `t₀`: `s(z₀) = (z₀/ρ(z₀))^γ`.
pub fn return_time_ratio<T: Real>(regime: Regime, z0: T) -> Result<T> {
    Ok(log_return_time_ratio(regime, z0)?.exp())
}

/// Inverse of [`return_time_ratio`]: the `z₀ ∈ [1, z_max)` returning at `t = s t₀`.
pub fn return_z0<T: Real>(regime: Regime, s: T) -> Result<T> {
    if !(s >= T::one()) || s.is_nan() {
        return Err(Error::domain("return_z0", "requires s >= 1", s.as_f64()));
    }
    if s == T::one() {
        return Ok(T::one());
    }
    if s.is_infinite() {
        return Err(Error::domain("return_z0", "requires finite s", s.as_f64()));
    }
    let target = s.ln();
    let zmax = regime.z_max::<T>();
    let mut hi = zmax - T::lit(NEAR_CUTOFF);
    if hi >= zmax {
        // Guard band is below the scalar's resolution; step one ulp inside.
        hi = zmax - zmax * T::epsilon();
    }
    let mut failure = None;
    let root = find_root(
        |z0| match log_return_time_ratio(regime, z0) {
            Ok(v) => v - target,
            Err(e) => {
                failure.get_or_insert(e);
                T::nan()
            }
        },
        T::one(),
        hi,
        &Tolerance::root_default(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(root?.x)
}

/// Physical return radius `r(t, t₀) = z₀(t/t₀) · R_c(t₀)`.
///
/// `R_c(t₀)` uses the exact late-stage law with `R_c0`; the rescaling by `t/t₀`
/// assumes `t, t₀ ≫ R_c0^γ`. With `rc0 = 0` the result is exact in the
/// late-stage model.
pub fn return_radius<T: Real>(regime: Regime, t: T, t0: T, rc0: T) -> Result<T> {
    if !(t0 > T::zero()) {
        return Err(Error::domain("return_radius", "requires t0 > 0", t0.as_f64()));
    }
    if !(t >= t0) {
        return Err(Error::domain("return_radius", "requires t >= t0", t.as_f64()));
    }
    let z0 = return_z0(regime, t / t0)?;
    Ok(z0 * regime.critical_radius(rc0, t0)?)
}

/// Growth rate of the return radius at `t = t₀`: `R_c(t₀) / (2γ t₀)`.
pub fn return_radius_rate<T: Real>(regime: Regime, t0: T, rc0: T) -> Result<T> {
    if !(t0 > T::zero()) {
        return Err(Error::domain("return_radius_rate", "requires t0 > 0", t0.as_f64()));
    }
    let rc = regime.critical_radius(rc0, t0)?;
    Ok(rc / (T::lit(2.0) * regime.gamma_real::<T>() * t0))
}
