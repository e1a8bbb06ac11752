//! Late-stage Ostwald ripening in the Lifshitz–Slyozov–Wagner mean-field picture.
//!
//! The crate computes, for the diffusion-limited (DL) and attachment-limited (AL)
//! kinetic regimes:
//!
//! - the single-particle growth laws and the explicit rescaled trajectory `τ(z)`
//!   ([`regime`]),
//! - the return map `ρ(z₀)`, return time and return radius ([`return_map`]),
//! - the scaled size distributions `h(z)`, their moments and sampling
//!   ([`distribution`]),
//! - the recrystallized volume fraction `φ(t/t₀)` ([`recrystallization`]),
//! - and a direct N-particle mean-field simulation used as an independent check
//!   of the closed-form results ([`ensemble`]).
//!
//! All numerics are generic over the scalar type through [`Real`]; the `*64`
//! aliases below fix it to `f64`, which is what the CLI uses.
//!
//! ```
//! use ripening::{Regime, SizeDistribution64, recrystallization};
//!
//! let dist = SizeDistribution64::new(Regime::DiffusionLimited).unwrap();
//! let rate = recrystallization::phi_initial_rate(&dist).unwrap();
//! assert!((rate - 0.51).abs() < 0.01);
//! ```

pub mod cli;
pub mod distribution;
pub mod ensemble;
pub mod error;
pub mod numerics;
pub mod recrystallization;
pub mod regime;
pub mod return_map;
mod scalar;

pub use distribution::SizeDistribution;
pub use ensemble::{Ensemble, Snapshot};
pub use error::{Error, Result};
pub use numerics::Tolerance;
pub use recrystallization::PhiCurve;
pub use regime::{Regime, ScaledState};
pub use return_map::ReturnPoint;
pub use scalar::Real;

pub type Tolerance64 = Tolerance<f64>;
pub type ScaledState64 = ScaledState<f64>;
pub type ReturnPoint64 = ReturnPoint<f64>;
pub type SizeDistribution64 = SizeDistribution<f64>;
pub type PhiCurve64 = PhiCurve<f64>;
pub type Ensemble64 = Ensemble<f64>;
pub type Snapshot64 = Snapshot<f64>;

pub type Tolerance32 = Tolerance<f32>;
pub type SizeDistribution32 = SizeDistribution<f32>;
