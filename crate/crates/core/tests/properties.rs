//! Property checks over randomized inputs.

use std::sync::{Arc, OnceLock};

use blowup_core::config::ExperimentConfig;
use blowup_core::io;
use blowup_core::nonlin;
use blowup_core::ode_asym::ResolventTable;
use blowup_core::profiles::spatial_shift;
use blowup_core::similarity::{self, SimilarityFrame};
use proptest::prelude::*;

fn tables() -> &'static Vec<Arc<ResolventTable>> {
    static T: OnceLock<Vec<Arc<ResolventTable>>> = OnceLock::new();
    T.get_or_init(|| {
        nonlin::builtin_catalog()
            .into_iter()
            .map(|f| Arc::new(ResolventTable::with_defaults(f)))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolvent_round_trip(which in 0usize..9, offset in 0.5f64..150.0) {
        let t = &tables()[which];
        let x = t.floor() + offset;
        let back = t.g_inv(t.g(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x.max(1.0), "{}: {x} -> {back}", t.family().label());
    }

    #[test]
    fn resolvent_is_decreasing(which in 0usize..9, offset in 0.5f64..60.0, gap in 0.01f64..5.0) {
        let t = &tables()[which];
        let x = t.floor() + offset;
        prop_assert!(t.g(x + gap).unwrap() < t.g(x).unwrap());
        prop_assert!(t.h(x + gap).unwrap() < t.h(x).unwrap());
    }

    #[test]
    fn inverse_log_form_agrees(which in 0usize..9, y in 2.0f64..200.0) {
        let t = &tables()[which];
        prop_assume!(y > t.floor() + 1.0);
        if let (Ok(a), true) = (t.g_inv_log(y), y < 700.0) {
            let b = t.g_inv((-y).exp()).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn spatial_shift_grows_away_from_the_origin(x in 1e-8f64..0.5, k in 1.01f64..1.9) {
        prop_assert!(spatial_shift(x) > 0.0);
        prop_assert!(spatial_shift(x * k) > spatial_shift(x));
    }

    #[test]
    fn gaussian_moment_is_dimension_free(n in 1usize..6, amp in -2.0f64..2.0) {
        // ∫ c ρ over R^n with ω_{n-1} y^{n-1} dy is c (4π)^{n/2}
        let y: Vec<f64> = (0..=1200).map(|k| k as f64 * 0.01).collect();
        let w = vec![amp; y.len()];
        let f = SimilarityFrame::from_samples(5.0, n, 3.0, y, w).unwrap();
        let v = f.integrate(|_, w, _| w);
        let exact = amp * (4.0 * std::f64::consts::PI).powf(n as f64 / 2.0);
        prop_assert!((v - exact).abs() <= 1e-8 * exact.abs().max(1.0), "n = {n}: {v} vs {exact}");
    }

    #[test]
    fn weighted_norms_are_ordered(n in 1usize..4, c in 0.0f64..1.0, d in 0.1f64..2.0) {
        let y: Vec<f64> = (0..=1200).map(|k| k as f64 * 0.01).collect();
        let w: Vec<f64> = y.iter().map(|v| c * (-v * v / d).exp()).collect();
        let f = SimilarityFrame::from_samples(5.0, n, 3.0, y, w).unwrap();
        let l2 = similarity::weighted_norm(&f, similarity::NormKind::L2rho).value;
        let h1 = similarity::weighted_norm(&f, similarity::NormKind::H1rho).value;
        prop_assert!(l2 >= 0.0 && h1 >= l2 - 1e-12);
    }

    #[test]
    fn config_hash_ignores_formatting(cells in 400usize..4000, amp in 0.5f64..6.0) {
        let text = format!(
            "[family]\nname = \"pure_exp\"\n[domain]\nn = 1\n[initial]\nkind = \"bump\"\namplitude = {amp:?}\n[solver]\ncells = {cells}\n"
        );
        let spaced = text.replace(" = ", "   =   ").replace('\n', "\n\n");
        let a = ExperimentConfig::from_toml(&text).unwrap();
        let b = ExperimentConfig::from_toml(&spaced).unwrap();
        prop_assert_eq!(io::config_hash(&a).unwrap(), io::config_hash(&b).unwrap());
        let again = ExperimentConfig::from_toml(&a.to_toml()).unwrap();
        prop_assert_eq!(a, again);
    }
}
