//! Property tests across modules.

use std::sync::OnceLock;

use proptest::prelude::*;
use ripening::recrystallization::phi;
use ripening::return_map::{return_time_ratio, return_z0, rho, rho_log};
use ripening::{Ensemble64, Regime, SizeDistribution32, SizeDistribution64};

fn regime() -> impl Strategy<Value = Regime> {
    prop_oneof![Just(Regime::DiffusionLimited), Just(Regime::AttachmentLimited)]
}

fn dist(r: Regime) -> &'static SizeDistribution64 {
    static DL: OnceLock<SizeDistribution64> = OnceLock::new();
    static AL: OnceLock<SizeDistribution64> = OnceLock::new();
    let cell = match r {
        Regime::DiffusionLimited => &DL,
        Regime::AttachmentLimited => &AL,
    };
    cell.get_or_init(|| SizeDistribution64::new(r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_lands_on_same_alpha(r in regime(), frac in 0.0f64..1.0) {
        let z0 = 1.0 + frac * (r.z_max::<f64>() - 1.05);
        let back = rho(r, z0).unwrap();
        prop_assert!(back > 0.0 && back <= 1.0);
        if z0 > 1.0 {
            let diff = (r.alpha(back).unwrap() - r.alpha(z0).unwrap()).abs();
            prop_assert!(diff < 1e-10 * r.alpha(z0).unwrap().abs().max(1.0));
        }
    }

    #[test]
    fn return_time_round_trip(r in regime(), log_s in 0.0f64..14.0) {
        let s = log_s.exp();
        let z0 = return_z0(r, s).unwrap();
        prop_assert!(z0 >= 1.0 && z0 < r.z_max::<f64>());
        let back = return_time_ratio(r, z0).unwrap();
        prop_assert!((back - s).abs() <= 1e-8 * s);
    }

    #[test]
    fn rho_log_is_monotone(r in regime(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let hi = r.z_max::<f64>() - 1e-6;
        let (lo, up) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(up - lo > 1e-9);
        let z_lo = 1.0 + lo * (hi - 1.0);
        let z_up = 1.0 + up * (hi - 1.0);
        prop_assert!(rho_log(r, z_up).unwrap() < rho_log(r, z_lo).unwrap());
    }

    #[test]
    fn phi_is_monotone_and_bounded(r in regime(), a in 1.0f64..50.0, b in 1.0f64..50.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let d = dist(r);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p, q) = (phi(d, lo).unwrap(), phi(d, hi).unwrap());
        prop_assert!(0.0 <= p && p < q && q < 1.0);
    }

    #[test]
    fn quantile_inverts_cdf(r in regime(), u in 0.001f64..0.999) {
        let d = dist(r);
        let z = d.quantile(u).unwrap();
        prop_assert!(z > 0.0 && z < r.z_max::<f64>());
        prop_assert!((d.cdf(z).unwrap() - u).abs() < 1e-5);
    }

    #[test]
    fn step_conserves_volume_and_order(
        r in regime(),
        radii in prop::collection::vec(0.05f64..3.0, 2..40),
        dt in 0.001f64..2.0,
    ) {
        let mut e = Ensemble64::from_radii(r, radii.clone(), 1.0).unwrap();
        let before = e.snapshot();
        e.step(dt).unwrap();
        prop_assert!(e.conservation_residual() < 1e-12);
        let after = e.snapshot();
        let rc = if e.len() > 0 { e.mean_field().unwrap().1 } else { 1.0 };
        for (id, &x) in &after.radii {
            prop_assert!(x > 1e-4 * rc);
            for (jd, &y) in &after.radii {
                if before.radii[id] < before.radii[jd] {
                    prop_assert!(x <= y);
                }
            }
        }
    }
}

#[test]
fn single_precision_agrees_with_double() {
    for r in Regime::ALL {
        let single = SizeDistribution32::new(r).unwrap();
        let double = dist(r);
        for k in 0..=3 {
            let a = f64::from(single.moment(k).unwrap());
            let b = double.moment(k).unwrap();
            assert!((a - b).abs() < 1e-5, "{r} moment {k}: {a} vs {b}");
        }
        let z0 = 1.2f32;
        let a = f64::from(rho(r, z0).unwrap());
        let b = rho(r, 1.2f64).unwrap();
        assert!((a - b).abs() < 1e-5);
        assert!((f64::from(phi(&single, 2.0f32).unwrap()) - phi(double, 2.0).unwrap()).abs() < 1e-4);
    }
}

#[test]
fn ks_distance_contract() {
    let d = dist(Regime::DiffusionLimited);
    assert!(d.ks_distance(&[]).is_err());
    assert!(d.ks_distance(&[f64::NAN]).is_err());
    let ks = d.ks_distance(&d.sample(20_000, 1)).unwrap();
    assert!(ks < 0.02);
}
