//! Scaled LSW size distributions `h(z)`.
//!
//! ```text
//! DL: h(z) = 81e·2^{−5/3} z² (z+3)^{−7/3} (3/2−z)^{−11/3} exp(−3/(3−2z)),  z < 3/2
//! AL: h(z) = 24 z (2−z)^{−5} exp(−3z/(2−z)),                             z < 2
//! ```
//!
//! Both vanish identically beyond the cutoff and are evaluated in log space so
//! the essential singularity at `z_max` underflows cleanly to zero.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{integrate, Tolerance};
use crate::regime::Regime;
use crate::scalar::Real;

/// Number of nodes in the tabulated cumulative distribution.
pub const CDF_TABLE_POINTS: usize = 4096;

/// Probability density of the rescaled radius `z` in the given regime.
pub fn h<T: Real>(regime: Regime, z: T) -> Result<T> {
    if !(z >= T::zero()) {
        return Err(Error::domain("h", "requires z >= 0", z.as_f64()));
    }
    if z == T::zero() || z >= regime.z_max::<T>() {
        return Ok(T::zero());
    }
    Ok(log_h(regime, z).exp())
}

fn log_h<T: Real>(regime: Regime, z: T) -> T {
    let lit = T::lit;
    match regime {
        Regime::DiffusionLimited => {
            // ln(81 e 2^{-5/3})
            let log_prefactor = lit(81.0).ln() + T::one() - lit(5.0) / lit(3.0) * T::LN_2();
            log_prefactor + lit(2.0) * z.ln()
                - lit(7.0) / lit(3.0) * (z + lit(3.0)).ln()
                - lit(11.0) / lit(3.0) * (lit(1.5) - z).ln()
                - lit(3.0) / (lit(3.0) - lit(2.0) * z)
        }
        Regime::AttachmentLimited => {
            lit(24.0).ln() + z.ln() - lit(5.0) * (lit(2.0) - z).ln() - lit(3.0) * z / (lit(2.0) - z)
        }
    }
}

/// The scaled distribution of one regime with cached moments and a
/// tabulated CDF for inverse-transform sampling. Immutable once built.
#[derive(Debug, Clone)]
pub struct SizeDistribution<T> {
    regime: Regime,
    tol: Tolerance<T>,
    moments: BTreeMap<u32, T>,
    cdf_z: Vec<T>,
    cdf_h: Vec<T>,
    // ∫h over the support before the table is normalised
    mass: T,
}

impl<T: Real> SizeDistribution<T> {
    pub fn new(regime: Regime) -> Result<Self> {
        Self::with_tolerance(regime, Tolerance::quad_default())
    }

    pub fn with_tolerance(regime: Regime, tol: Tolerance<T>) -> Result<Self> {
        let mut moments = BTreeMap::new();
        for k in 0..=3 {
            moments.insert(k, raw_moment(regime, k, &tol)?);
        }
        let (cdf_z, cdf_h, mass) = build_cdf_table(regime, &tol)?;
        Ok(Self {
            regime,
            tol,
            moments,
            cdf_z,
            cdf_h,
            mass,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn z_max(&self) -> T {
        self.regime.z_max()
    }

    pub fn density(&self, z: T) -> Result<T> {
        h(self.regime, z)
    }

    /// `∫₀^{z_max} z^k h(z) dz`; cached for `k ≤ 3`.
    pub fn moment(&self, k: u32) -> Result<T> {
        match self.moments.get(&k) {
            Some(&m) => Ok(m),
            None => raw_moment(self.regime, k, &self.tol),
        }
    }

    /// Mean rescaled radius `z̄ = moment(1)`.
    pub fn mean(&self) -> T {
        self.moments[&1]
    }

    /// `z̄³ := ∫ z³ h(z) dz`, the normalising volume of the late-stage phase.
    pub fn third_moment(&self) -> T {
        self.moments[&3]
    }

    /// Total mass as measured by the CDF table build (should be 1).
    pub fn mass(&self) -> T {
        self.mass
    }

    /// Tabulated `(z, H(z))` nodes; strictly increasing in both coordinates
    /// with `H(0) = 0` and `H(z_max) = 1`.
    pub fn cdf_table(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.cdf_z.iter().copied().zip(self.cdf_h.iter().copied())
    }

    /// Cumulative distribution `H(z) = ∫₀^z h`, normalised to `H(z_max) = 1`.
    pub fn cdf(&self, z: T) -> Result<T> {
        if !(z >= T::zero()) {
            return Err(Error::domain("cdf", "requires z >= 0", z.as_f64()));
        }
        if z >= self.z_max() {
            return Ok(T::one());
        }
        let i = self.cdf_z.partition_point(|&zi| zi <= z).saturating_sub(1);
        let left = self.cdf_z[i];
        let partial = integrate(|x| h(self.regime, x).unwrap_or(T::zero()), left, z, &self.tol)?;
        Ok((self.cdf_h[i] + partial / self.mass).min(T::one()))
    }

    /// Inverse CDF by linear interpolation between table nodes (monotone).
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u >= T::zero()) || !(u <= T::one()) {
            return Err(Error::domain("quantile", "requires 0 <= u <= 1", u.as_f64()));
        }
        let j = self.cdf_h.partition_point(|&hj| hj < u);
        if j == 0 {
            return Ok(self.cdf_z[0]);
        }
        if j >= self.cdf_h.len() {
            return Ok(*self.cdf_z.last().expect("table is non-empty"));
        }
        let (h0, h1) = (self.cdf_h[j - 1], self.cdf_h[j]);
        let (z0, z1) = (self.cdf_z[j - 1], self.cdf_z[j]);
        Ok(z0 + (z1 - z0) * (u - h0) / (h1 - h0))
    }

    /// Kolmogorov–Smirnov distance between the empirical distribution of
    /// `samples` and `h`. Values outside `[0, z_max]` count as mass at the
    /// nearest end.
    pub fn ks_distance(&self, samples: &[T]) -> Result<T> {
        if samples.is_empty() {
            return Err(Error::Data("KS distance of an empty sample".into()));
        }
        if let Some(bad) = samples.iter().find(|x| x.is_nan()) {
            return Err(Error::domain("ks_distance", "sample is NaN", bad.as_f64()));
        }
        let mut xs = samples.to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        let n = T::from_usize(xs.len()).expect("sample size fits");
        let mut d = T::zero();
        for (i, &x) in xs.iter().enumerate() {
            let c = self.cdf(x.max(T::zero()))?;
            let below = T::from_usize(i).expect("index fits") / n;
            let above = T::from_usize(i + 1).expect("index fits") / n;
            d = d.max((c - below).abs()).max((above - c).abs());
        }
        Ok(d)
    }

    /// `n` i.i.d. draws from `h`, reproducible for a fixed `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    /// Draws with a caller-owned generator. Every draw lies in `(0, z_max)`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<T> {
        let zmax = self.z_max();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u = T::lit(rng.gen::<f64>());
            let z = self.quantile(u).expect("u drawn from [0, 1)");
            if z > T::zero() && z < zmax {
                out.push(z);
            }
        }
        out
    }
}

fn raw_moment<T: Real>(regime: Regime, k: u32, tol: &Tolerance<T>) -> Result<T> {
    let f = |z: T| h(regime, z).unwrap_or(T::zero()) * z.powi(k as i32);
    // the mode sits near z = 1; splitting there keeps the panels balanced
    let lower = integrate(f, T::zero(), T::one(), tol)?;
    let upper = integrate(f, T::one(), regime.z_max(), tol)?;
    Ok(lower + upper)
}

fn build_cdf_table<T: Real>(regime: Regime, tol: &Tolerance<T>) -> Result<(Vec<T>, Vec<T>, T)> {
    let zmax: T = regime.z_max();
    let n = CDF_TABLE_POINTS;
    let last = T::from_usize(n - 1).expect("table size fits");
    let half = T::lit(0.5);
    let nodes: Vec<T> = (0..n)
        .map(|i| {
            let theta = T::PI() * T::from_usize(i).expect("index fits") / last;
            zmax * half * (T::one() - theta.cos())
        })
        .collect();

    let f = |z: T| h(regime, z).unwrap_or(T::zero());
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = T::zero();
    cumulative.push(acc);
    for w in nodes.windows(2) {
        acc = acc + integrate(f, w[0], w[1], tol)?;
        cumulative.push(acc);
    }
    let mass = acc;

    // Drop nodes where the density has underflowed so both columns stay
    // strictly increasing, then pin the last node to (z_max, 1).
    let mut zs = vec![T::zero()];
    let mut hs = vec![T::zero()];
    for (&z, &c) in nodes.iter().zip(&cumulative).skip(1) {
        let c = c / mass;
        if c > *hs.last().expect("non-empty") && z > *zs.last().expect("non-empty") {
            zs.push(z);
            hs.push(c);
        }
    }
    let top = zs.len() - 1;
    zs[top] = zmax;
    hs[top] = T::one();
    Ok((zs, hs, mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DL: Regime = Regime::DiffusionLimited;
    const AL: Regime = Regime::AttachmentLimited;

    #[test]
    fn density_examples() {
        for r in Regime::ALL {
            assert_eq!(h(r, 0.0).unwrap(), 0.0);
            assert_eq!(h(r, r.z_max::<f64>()).unwrap(), 0.0);
            assert_eq!(h(r, r.z_max::<f64>() + 0.3).unwrap(), 0.0);
            assert!(h(r, -0.1).is_err());
        }
        let al = 24.0 * (-3.0f64).exp();
        assert!((h(AL, 1.0).unwrap() - al).abs() < 1e-14);
        assert!((al - 1.1949).abs() < 1e-4);
        let dl = 81.0 * (-2.0f64).exp() * 2f64.powf(-8.0 / 3.0);
        assert!((h(DL, 1.0).unwrap() - dl).abs() < 1e-14);
        assert!((dl - 1.7264).abs() < 1e-4);
    }

    #[test]
    fn log_space_matches_direct_formula() {
        let direct_dl = |z: f64| {
            81.0 * std::f64::consts::E
                * 2f64.powf(-5.0 / 3.0)
                * z * z
                * (z + 3.0).powf(-7.0 / 3.0)
                * (1.5 - z).powf(-11.0 / 3.0)
                * (-3.0 / (3.0 - 2.0 * z)).exp()
        };
        let direct_al = |z: f64| 24.0 * z * (2.0 - z).powi(-5) * (-3.0 * z / (2.0 - z)).exp();
        for i in 1..100 {
            let z = 1.5 * i as f64 / 100.0;
            assert!((h(DL, z).unwrap() - direct_dl(z)).abs() < 1e-12 * direct_dl(z).max(1e-300));
            let z = 2.0 * i as f64 / 100.0;
            assert!((h(AL, z).unwrap() - direct_al(z)).abs() < 1e-12 * direct_al(z).max(1e-300));
        }
    }

    #[test]
    fn cutoff_decays_monotonically() {
        for r in Regime::ALL {
            let zmax = r.z_max::<f64>();
            let mut prev = f64::INFINITY;
            for i in 0..=1000 {
                let z = zmax * (0.99 + 0.01 * i as f64 / 1000.0);
                let v = h(r, z).unwrap();
                assert!(v.is_finite() && v <= prev, "{r} z={z}");
                prev = v;
            }
            assert_eq!(prev, 0.0);
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let dx = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            acc += f(a + i as f64 * dx) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * dx / 3.0
    }

    #[test]
    fn normalisation_against_fixed_grid_oracle() {
        for r in Regime::ALL {
            let zmax = r.z_max::<f64>();
            let oracle = simpson(|z| h(r, z).unwrap(), 0.0, zmax, 200_000);
            assert!((oracle - 1.0).abs() < 1e-10, "{r}: simpson {oracle}");
            let dist = SizeDistribution::<f64>::new(r).unwrap();
            assert!((dist.moment(0).unwrap() - oracle).abs() < 1e-9);
            assert!((dist.mass() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn moments() {
        let dl = SizeDistribution::<f64>::new(DL).unwrap();
        let al = SizeDistribution::<f64>::new(AL).unwrap();
        assert!((dl.moment(0).unwrap() - 1.0).abs() < 1e-8);
        assert!((al.moment(0).unwrap() - 1.0).abs() < 1e-8);
        assert!((dl.mean() - 1.0).abs() < 1e-8);
        assert!((al.mean() - 8.0 / 9.0).abs() < 1e-8);
        // mpmath references
        assert!((dl.third_moment() - 1.129_599_991_180_2).abs() < 1e-9);
        assert!((al.third_moment() - 0.956_676_432_794_311).abs() < 1e-9);
        // AL mean field needs E[z²]/E[z] = 1
        assert!((al.moment(2).unwrap() - al.mean()).abs() < 1e-8);
        // uncached moment
        assert!(dl.moment(5).unwrap() > dl.moment(4).unwrap() * 0.5);
    }

    #[test]
    fn moments_stable_across_tolerances() {
        for r in Regime::ALL {
            let coarse = SizeDistribution::<f64>::with_tolerance(r, Tolerance::new(1e-8, 1e-8, 2000).unwrap()).unwrap();
            let fine = SizeDistribution::<f64>::with_tolerance(r, Tolerance::new(1e-10, 1e-10, 2000).unwrap()).unwrap();
            for k in 0..=3 {
                assert!((coarse.moment(k).unwrap() - fine.moment(k).unwrap()).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn cdf_table_invariants() {
        for r in Regime::ALL {
            let d = SizeDistribution::<f64>::new(r).unwrap();
            let table: Vec<_> = d.cdf_table().collect();
            assert_eq!(table[0], (0.0, 0.0));
            assert_eq!(*table.last().unwrap(), (r.z_max(), 1.0));
            for w in table.windows(2) {
                assert!(w[1].0 > w[0].0 && w[1].1 > w[0].1);
            }
            // nodes in the underflowed tail are dropped
            assert!(table.len() > CDF_TABLE_POINTS * 3 / 4);
        }
    }

    #[test]
    fn cdf_matches_direct_quadrature() {
        let q = Tolerance::quad_default();
        for r in Regime::ALL {
            let d = SizeDistribution::<f64>::new(r).unwrap();
            for z in [0.2, 0.77, 1.0, 1.3] {
                let direct = integrate(|x| h(r, x).unwrap(), 0.0, z, &q).unwrap();
                assert!((d.cdf(z).unwrap() - direct).abs() < 1e-9);
            }
            assert_eq!(d.cdf(10.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn sampling_support_and_determinism() {
        let d = SizeDistribution::<f64>::new(DL).unwrap();
        let a = d.sample(5000, 42);
        let b = d.sample(5000, 42);
        assert_eq!(a, b);
        assert_ne!(a, d.sample(5000, 43));
        assert!(a.iter().all(|&z| z > 0.0 && z < 1.5));
    }

    #[test]
    fn sample_mean_and_ks_distance() {
        for r in Regime::ALL {
            let d = SizeDistribution::<f64>::new(r).unwrap();
            let n = 100_000;
            let mut xs = d.sample(n, 7);
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = d.moment(2).unwrap() - d.mean().powi(2);
            let sigma = var.sqrt();
            assert!((mean - d.mean()).abs() < 3.0 * sigma / (n as f64).sqrt(), "{r}: {mean}");

            let ks = d.ks_distance(&xs).unwrap();
            assert!(ks < 0.01, "{r}: KS {ks}");
            // a shifted sample is clearly rejected
            xs.iter_mut().for_each(|x| *x *= 0.9);
            assert!(d.ks_distance(&xs).unwrap() > 0.05);
        }
    }

    #[test]
    fn single_precision_distribution() {
        let d = SizeDistribution::<f32>::new(AL).unwrap();
        assert!((d.mean() - 8.0 / 9.0).abs() < 1e-4);
    }
}
