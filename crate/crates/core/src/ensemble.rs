//! Direct N-particle mean-field simulation.
//!
//! Each particle follows the physical growth law of its regime with the
//! self-consistent mean field
//!
//! ```text
//! DL: ū = n / Σ Rᵢ            AL: ū = Σ Rᵢ / Σ Rᵢ²          R_c = 1/ū
//! ```
//!
//! The state is integrated in the particle volumes `vᵢ = Rᵢ³`. Both mean-field
//! definitions make `Σ dvᵢ/dt` vanish identically, and RK4 increments are
//! linear combinations of right-hand sides, so the solid volume is conserved
//! to rounding. In `v` the DL right-hand side `3(R ū − 1)` stays bounded as a
//! particle dissolves, which removes the `1/R²` stiffness of the radius form.

use std::collections::BTreeMap;

use crate::distribution::SizeDistribution;
use crate::error::{Error, Result};
use crate::numerics::{rk4_step, Rk4Workspace};
use crate::regime::Regime;
use crate::scalar::Real;

/// Default cap on `|ΔR|/R` per sub-step.
pub const MAX_RELATIVE_CHANGE: f64 = 1e-3;
/// Particles below this many critical radii are deleted.
pub const DELETION_FRACTION: f64 = 1e-4;
/// Only particles with `R/R_c` at least this large constrain the step size.
/// `|Ṙ|/R` diverges as a particle dissolves, so capping it for every particle
/// would stall the run on whichever particle is about to vanish.
pub const STEP_CONTROL_FLOOR: f64 = 0.5;
/// A particle dissolving inside a sub-step overshoots zero by at most about
/// `h |dvᵢ/dt|`; the step is kept short enough that this stays below this
/// fraction of `Σ Rᵢ³`.
pub const OVERSHOOT_FRACTION: f64 = 1e-7;

/// A particle population evolving under the mean field.
#[derive(Debug, Clone)]
pub struct Ensemble<T> {
    regime: Regime,
    t: T,
    ids: Vec<u32>,
    volumes: Vec<T>,
    radii: Vec<T>,
    lost_volume: T,
    rc0: T,
    initial_volume: T,
    deletions: usize,
    substeps: usize,
    max_relative_change: T,
    deletion_fraction: T,
    ws: Rk4Workspace<T>,
}

/// Particle radii at one instant, keyed by particle id.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub radii: BTreeMap<u32, T>,
}

/// One row of the run time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow<T> {
    pub t: T,
    pub n: usize,
    pub rc_estimate: T,
    /// `Σ Rᵢ³` over the surviving particles.
    pub total_r3: T,
    /// `(4/3)π Σ Rᵢ³` over deleted particles.
    pub lost_volume: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub series: Vec<SeriesRow<T>>,
}

/// Newly formed solid between two snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewVolume<T> {
    /// `(4/3)π Σ_{Rᵢ(t) ≥ Rᵢ(t₀)} (Rᵢ(t)³ − Rᵢ(t₀)³)`.
    pub volume: T,
    /// `volume` divided by the total solid volume at the later snapshot.
    pub fraction: T,
    /// Number of particles that grew.
    pub contributing: usize,
}

fn sphere<T: Real>(r3: T) -> T {
    T::lit(4.0) / T::lit(3.0) * T::PI() * r3
}

impl<T: Real> Ensemble<T> {
    /// `n` particles drawn from the regime's scaled distribution, scaled by `rc0`.
    pub fn init(regime: Regime, n: usize, rc0: T, seed: u64) -> Result<Self> {
        let dist = SizeDistribution::new(regime)?;
        Self::from_distribution(&dist, n, rc0, seed)
    }

    pub fn from_distribution(dist: &SizeDistribution<T>, n: usize, rc0: T, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("init_ensemble", "requires n >= 2", n as f64));
        }
        if !(rc0 > T::zero()) || !rc0.is_finite() {
            return Err(Error::domain("init_ensemble", "requires R_c0 > 0", rc0.as_f64()));
        }
        let radii: Vec<T> = dist.sample(n, seed).into_iter().map(|z| z * rc0).collect();
        Self::from_radii(dist.regime(), radii, rc0)
    }

    /// Builds an ensemble from explicit radii; ids follow slice order.
    pub fn from_radii(regime: Regime, radii: Vec<T>, rc0: T) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::State("ensemble needs at least one particle".into()));
        }
        if u32::try_from(radii.len()).is_err() {
            return Err(Error::domain("from_radii", "too many particles", radii.len() as f64));
        }
        if let Some(bad) = radii.iter().find(|r| !(**r > T::zero()) || !r.is_finite()) {
            return Err(Error::domain("from_radii", "radii must be finite and > 0", bad.as_f64()));
        }
        let volumes: Vec<T> = radii.iter().map(|&r| r * r * r).collect();
        let initial_volume = sphere(volumes.iter().fold(T::zero(), |a, &v| a + v));
        Ok(Self {
            regime,
            t: T::zero(),
            ids: (0..radii.len() as u32).collect(),
            volumes,
            radii,
            lost_volume: T::zero(),
            rc0,
            initial_volume,
            deletions: 0,
            substeps: 0,
            max_relative_change: T::lit(MAX_RELATIVE_CHANGE),
            deletion_fraction: T::lit(DELETION_FRACTION),
            ws: Rk4Workspace::new(),
        })
    }

    pub fn with_max_relative_change(mut self, cap: T) -> Self {
        self.max_relative_change = cap;
        self
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn rc0(&self) -> T {
        self.rc0
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn radii(&self) -> impl Iterator<Item = T> + '_ {
        self.radii.iter().copied()
    }

    pub fn lost_volume(&self) -> T {
        self.lost_volume
    }

    pub fn deletions(&self) -> usize {
        self.deletions
    }

    /// Number of integrator sub-steps taken so far.
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    /// `Σ Rᵢ³` of the surviving particles.
    pub fn total_r3(&self) -> T {
        self.volumes.iter().fold(T::zero(), |a, &v| a + v)
    }

    /// `(4/3)π Σ Rᵢ³` of the surviving particles.
    pub fn solid_volume(&self) -> T {
        sphere(self.total_r3())
    }

    /// Relative drift of surviving plus deleted volume since initialisation.
    pub fn conservation_residual(&self) -> T {
        ((self.solid_volume() + self.lost_volume) - self.initial_volume).abs() / self.initial_volume
    }

    /// Clock on which the late-stage law reads `R_c(t)^γ = k t`: the ensemble
    /// time shifted by `R_c0^γ / k`.
    pub fn late_stage_time(&self, t: T) -> T {
        t + self.rc0.powi(self.regime.gamma()) / self.regime.coarsening_rate::<T>()
    }

    /// Mean field `(ū, R_c = 1/ū)` of the current population.
    pub fn mean_field(&self) -> Result<(T, T)> {
        if self.is_empty() {
            return Err(Error::State("mean field of an empty ensemble".into()));
        }
        let u = mean_field_of(self.regime, self.radii());
        Ok((u, T::one() / u))
    }

    pub fn snapshot(&self) -> Snapshot<T> {
        Snapshot {
            t: self.t,
            radii: self.ids.iter().copied().zip(self.radii()).collect(),
        }
    }

    pub fn series_row(&self) -> SeriesRow<T> {
        SeriesRow {
            t: self.t,
            n: self.len(),
            rc_estimate: self.mean_field().map(|m| m.1).unwrap_or(T::nan()),
            total_r3: self.total_r3(),
            lost_volume: self.lost_volume,
        }
    }

    /// Advances the population by `dt`, sub-stepping as needed.
    ///
    /// A particle whose volume reaches zero inside a sub-step stops
    /// contributing for the rest of it and is deleted at its end. Its final
    /// integrated volume, which may undershoot zero slightly, is what goes
    /// into [`Ensemble::lost_volume`], so surviving plus lost volume balances
    /// exactly.
    pub fn step(&mut self, dt: T) -> Result<()> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::domain("step", "requires dt > 0", dt.as_f64()));
        }
        let t_end = self.t + dt;
        while self.t < t_end {
            if self.len() < 2 {
                // A lone particle sits at R = R_c and does not evolve.
                self.t = t_end;
                break;
            }
            let remaining = t_end - self.t;
            let h = self.substep(remaining);
            let regime = self.regime;
            rk4_step(
                |_, v: &[T], dv: &mut [T]| volume_rates(regime, v, dv),
                self.t,
                &mut self.volumes,
                h,
                &mut self.ws,
            );
            self.substeps += 1;
            self.t = if h >= remaining { t_end } else { self.t + h };
            if let Some(i) = self.volumes.iter().position(|v| !v.is_finite()) {
                return Err(Error::State(format!(
                    "particle {} left the finite range at t = {}",
                    self.ids[i], self.t
                )));
            }
            self.delete_vanishing();
        }
        Ok(())
    }

    /// Sub-step size: keeps `|ΔR|/R` under the cap for particles at or above
    /// [`STEP_CONTROL_FLOOR`] critical radii, and bounds the overshoot of any
    /// particle expected to dissolve within the step.
    fn substep(&self, remaining: T) -> T {
        let one = T::one();
        let rc = one / mean_field_of(self.regime, self.radii.iter().copied());
        let lambda1 = self.regime.lambda() + 1;
        let floor = T::lit(STEP_CONTROL_FLOOR) * rc;
        let max_rate = self
            .radii
            .iter()
            .filter(|&&r| r >= floor)
            .fold(T::zero(), |m, &r| m.max((r / rc - one).abs() / r.powi(lambda1)));
        let mut h = if max_rate > T::zero() {
            (self.max_relative_change / max_rate).min(remaining)
        } else {
            remaining
        };

        // d(R^{λ+1})/dt = (λ+1)(R/R_c − 1) gives the linearised time left
        let l1 = T::lit(f64::from(lambda1));
        let budget = T::lit(OVERSHOOT_FRACTION) * self.total_r3();
        for &r in self.radii.iter().filter(|&&r| r < rc) {
            let shrink = one - r / rc;
            if r.powi(lambda1) < l1 * shrink * h {
                // |dv/dt| = 3 R^{2−λ} (1 − R/R_c)
                let speed = T::lit(3.0) * r.powi(2 - self.regime.lambda()) * shrink;
                h = h.min(budget / speed);
            }
        }
        h
    }

    /// Refreshes the radius cache and removes particles at or below the
    /// deletion radius.
    fn delete_vanishing(&mut self) {
        let zero = T::zero();
        for (r, &v) in self.radii.iter_mut().zip(&self.volumes) {
            *r = if v > zero { v.cbrt() } else { zero };
        }
        let live = self.radii.iter().copied().filter(|&r| r > zero);
        let rc = T::one() / mean_field_of(self.regime, live);
        let eps = self.deletion_fraction * rc;
        let mut lost = T::zero();
        let mut keep = 0;
        for i in 0..self.volumes.len() {
            if self.radii[i] <= eps {
                lost = lost + self.volumes[i];
                self.deletions += 1;
            } else {
                self.volumes[keep] = self.volumes[i];
                self.radii[keep] = self.radii[i];
                self.ids[keep] = self.ids[i];
                keep += 1;
            }
        }
        self.volumes.truncate(keep);
        self.radii.truncate(keep);
        self.ids.truncate(keep);
        self.lost_volume = self.lost_volume + sphere(lost);
    }

    /// Integrates to `t_end`, taking snapshots at `snapshot_times` and series
    /// rows at the start, at every snapshot and at `series_points` evenly spaced
    /// times.
    pub fn run(&mut self, t_end: T, snapshot_times: &[T], series_points: usize) -> Result<RunOutput<T>> {
        if !(t_end > self.t) {
            return Err(Error::domain("run", "requires t_end > current time", t_end.as_f64()));
        }
        for w in snapshot_times.windows(2) {
            if !(w[1] >= w[0]) {
                return Err(Error::domain("run", "snapshot times must be sorted", w[1].as_f64()));
            }
        }
        if let Some(&first) = snapshot_times.first() {
            if first < self.t {
                return Err(Error::domain("run", "snapshot time before current time", first.as_f64()));
            }
        }
        if let Some(&last) = snapshot_times.last() {
            if last > t_end {
                return Err(Error::domain("run", "snapshot time after t_end", last.as_f64()));
            }
        }

        // (time, is_snapshot) checkpoints in order
        let start = self.t;
        let mut checkpoints: Vec<(T, bool)> = snapshot_times.iter().map(|&t| (t, true)).collect();
        let steps = series_points.max(1);
        for i in 1..=steps {
            let frac = T::from_usize(i).expect("fits") / T::from_usize(steps).expect("fits");
            checkpoints.push((start + (t_end - start) * frac, false));
        }
        checkpoints.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times").then(b.1.cmp(&a.1)));

        let mut snapshots = Vec::with_capacity(snapshot_times.len());
        let mut series = vec![self.series_row()];
        for (t, is_snapshot) in checkpoints {
            if t > self.t {
                self.step(t - self.t)?;
                series.push(self.series_row());
            }
            if is_snapshot {
                snapshots.push(self.snapshot());
            }
        }
        Ok(RunOutput { snapshots, series })
    }
}

/// `ū` over radii; non-positive radii are treated as dissolved.
fn mean_field_of<T: Real>(regime: Regime, radii: impl Iterator<Item = T>) -> T {
    match regime {
        Regime::DiffusionLimited => {
            let (n, s) = radii
                .filter(|r| *r > T::zero())
                .fold((T::zero(), T::zero()), |(n, s), r| (n + T::one(), s + r));
            n / s
        }
        Regime::AttachmentLimited => {
            let (s1, s2) = radii
                .filter(|r| *r > T::zero())
                .fold((T::zero(), T::zero()), |(a, b), r| (a + r, b + r * r));
            s1 / s2
        }
    }
}

/// `dvᵢ/dt = 3Rᵢ²Ṙᵢ` for all particles; entries with `vᵢ ≤ 0` are dissolved and
/// excluded from the mean field.
fn volume_rates<T: Real>(regime: Regime, v: &[T], dv: &mut [T]) {
    let zero = T::zero();
    let three = T::lit(3.0);
    for (d, &x) in dv.iter_mut().zip(v) {
        *d = if x > zero { x.cbrt() } else { zero };
    }
    let u = mean_field_of(regime, dv.iter().copied());
    if !u.is_finite() {
        dv.iter_mut().for_each(|d| *d = zero);
        return;
    }
    for d in dv.iter_mut() {
        let r = *d;
        if r > zero {
            *d = match regime {
                Regime::DiffusionLimited => three * (r * u - T::one()),
                Regime::AttachmentLimited => three * r * (r * u - T::one()),
            };
        }
    }
}

/// Newly formed volume between two snapshots of the same run.
pub fn measure_new_volume<T: Real>(before: &Snapshot<T>, after: &Snapshot<T>) -> Result<NewVolume<T>> {
    if !(after.t > before.t) {
        return Err(Error::Data(format!(
            "later snapshot time {} must exceed earlier {}",
            after.t, before.t
        )));
    }
    let mut grown = T::zero();
    let mut total = T::zero();
    let mut contributing = 0;
    for (id, &r_after) in &after.radii {
        let r_before = *before
            .radii
            .get(id)
            .ok_or_else(|| Error::Data(format!("particle {id} missing from earlier snapshot")))?;
        let (a3, b3) = (r_after * r_after * r_after, r_before * r_before * r_before);
        total = total + a3;
        if r_after >= r_before {
            grown = grown + (a3 - b3);
            contributing += 1;
        }
    }
    let volume = sphere(grown);
    let total = sphere(total);
    Ok(NewVolume {
        volume,
        fraction: if total > T::zero() { volume / total } else { T::zero() },
        contributing,
    })
}

/// Initial radius separating particles that grew between the snapshots from
/// those that shrank (midpoint of the two closest initial radii across the
/// divide). Errors if the survivors do not split into a clean up-set.
pub fn empirical_return_radius<T: Real>(before: &Snapshot<T>, after: &Snapshot<T>) -> Result<T> {
    let mut max_shrunk: Option<T> = None;
    let mut min_grown: Option<T> = None;
    for (id, &r_after) in &after.radii {
        let r_before = *before
            .radii
            .get(id)
            .ok_or_else(|| Error::Data(format!("particle {id} missing from earlier snapshot")))?;
        if r_after >= r_before {
            min_grown = Some(min_grown.map_or(r_before, |m: T| m.min(r_before)));
        } else {
            max_shrunk = Some(max_shrunk.map_or(r_before, |m: T| m.max(r_before)));
        }
    }
    match (max_shrunk, min_grown) {
        (Some(s), Some(g)) if s <= g => Ok((s + g) * T::lit(0.5)),
        (Some(s), Some(g)) => Err(Error::Data(format!(
            "grown set is not an up-set: shrunk particle at {s} above grown particle at {g}"
        ))),
        _ => Err(Error::Data("no particle on one side of the return radius".into())),
    }
}

/// Least-squares slope of `R_c^γ` against `t` over the series.
pub fn rc_power_slope<T: Real>(regime: Regime, series: &[SeriesRow<T>]) -> Result<T> {
    let pts: Vec<(T, T)> = series
        .iter()
        .filter(|r| r.rc_estimate.is_finite())
        .map(|r| (r.t, r.rc_estimate.powi(regime.gamma())))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Data("need at least two series rows for a fit".into()));
    }
    let n = T::from_usize(pts.len()).expect("fits");
    let mean_t = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let mean_y = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(sxy, sxx), &(t, y)| {
        let dt = t - mean_t;
        (sxy + dt * (y - mean_y), sxx + dt * dt)
    });
    if sxx == T::zero() {
        return Err(Error::Data("series spans zero time".into()));
    }
    Ok(sxy / sxx)
}
