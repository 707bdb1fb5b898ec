use proptest::prelude::*;
use uav_relay_core::fso_link::fso_rate_cdf;
use uav_relay_core::geometry::fluctuation_covariance;
use uav_relay_core::placement::sweep;
use uav_relay_core::specfun::{gamma_q, marcum_q1, rice_ie};
use uav_relay_core::{Axis, Objective, PlacementGrid, Range1d, Scenario, SimConfig, UavStability};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

prop_compose! {
    fn position()(dx in -60.0..150.0f64, y in -80.0..80.0f64, z in 5.0..250.0f64) -> [f64; 3] {
        [600.0 - dx, y, z]
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn covariance_is_psd_and_hoyt_shape_in_unit_interval(
        pos in position(),
        sp in 0.0..0.1f64,
        so in 0.0..2e-3f64,
    ) {
        let s = Scenario::default().with_uav_position(pos).unwrap();
        let h = fluctuation_covariance(&s.geometry, &UavStability { sigma_p: sp, sigma_o: so }).unwrap();
        let [[a, b], [_, d]] = h.sigma;
        prop_assert!(a >= 0.0 && d >= 0.0);
        prop_assert!(a * d - b * b >= -1e-12 * (a + d).powi(2));
        prop_assert!((0.0..=1.0).contains(&h.m));
        prop_assert!(h.lambda1 >= h.lambda2 && h.lambda2 >= 0.0);
        prop_assert!((h.omega - (a + d)).abs() <= 1e-12 * h.omega.max(1e-300));
    }

    #[test]
    fn rate_cdf_is_monotone_and_bounded(pos in position(), gamma_bar in 0.05..500.0f64) {
        let s = Scenario::default().with_uav_position(pos).unwrap().with_gamma_bar(gamma_bar).unwrap();
        let ch = s.fso_channel().unwrap();
        let top = ch.max_rate();
        let mut prev = 0.0;
        for k in 0..=40 {
            let f = fso_rate_cdf(top * k as f64 / 40.0, &ch).unwrap();
            prop_assert!((0.0..=1.0).contains(&f), "F = {f}");
            prop_assert!(f >= prev - 1e-12, "F decreased: {prev} -> {f}");
            prev = f;
        }
        prop_assert!((fso_rate_cdf(top * 1.01, &ch).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_nonba_never_exceeds_ba(
        pos in position(),
        gamma_bar in 0.05..300.0f64,
        log_density in -2.7..-1.3f64,
        antennas in 1u32..=4,
    ) {
        let mut s = Scenario::default();
        s.rf.antennas = antennas;
        let s = s
            .with_density(10f64.powf(log_density)).unwrap()
            .with_uav_position(pos).unwrap()
            .with_gamma_bar(gamma_bar).unwrap();
        let r = s.evaluate().unwrap();
        prop_assert!(r.c_nb <= r.c_ba, "c_nb {} > c_ba {}", r.c_nb, r.c_ba);
        prop_assert!(r.c_nb >= 0.0);
        prop_assert!((r.c_ba - r.c_rf.min(r.c_fso)).abs() <= 1e-12 * r.c_ba);
    }

    #[test]
    fn monte_carlo_mean_of_min_is_below_min_of_means(pos in position(), seed in 0u64..1000) {
        let s = Scenario::default().with_uav_position(pos).unwrap();
        let cfg = SimConfig { n_slots: 500, master_seed: seed, ..SimConfig::default() };
        let r = uav_relay_core::estimate_rates(&s, &cfg).unwrap();
        prop_assert!(r.c_nb <= r.c_ba);
        prop_assert!(r.c_min.mean <= r.c_rf.mean.min(r.c_fso.mean) + 1e-9 * r.c_ba);
    }

    #[test]
    fn special_functions_stay_in_range(a in 0.1..40.0f64, x in 0.0..80.0f64, dx in 0.0..5.0f64) {
        let q0 = gamma_q(a, x).unwrap();
        let q1 = gamma_q(a, x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&q0) && q1 <= q0 + 1e-15);
        let m0 = marcum_q1(a.sqrt(), x.sqrt()).unwrap();
        let m1 = marcum_q1(a.sqrt(), (x + dx).sqrt()).unwrap();
        prop_assert!((0.0..=1.0).contains(&m0) && m1 <= m0 + 1e-15);
        let v = (a / 40.0).min(0.999);
        let ie = rice_ie(v, x).unwrap();
        prop_assert!(ie >= 0.0 && ie <= rice_ie(v, x + dx).unwrap() + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// Halving the step nests the coarse grid in the fine one, so the best
    /// value can only improve.
    #[test]
    fn refining_the_grid_never_lowers_the_optimum(
        steps in 2usize..7,
        lo in 0.0..20.0f64,
        width in 5.0..60.0f64,
        objective in prop_oneof![Just(Objective::Ba), Just(Objective::Nonba), Just(Objective::Rf)],
    ) {
        let s = Scenario::default();
        let coarse = PlacementGrid::new(Axis::XOffset, Range1d::new(lo, lo + width, steps), objective);
        let fine = PlacementGrid::new(Axis::XOffset, Range1d::new(lo, lo + width, 2 * steps - 1), objective);
        let best = |g: &PlacementGrid| {
            let r = sweep(g, &s).unwrap();
            r.best(objective).and_then(|row| row.rates).map(|p| p.get(objective)).unwrap()
        };
        // Shared points may differ in the last bit of the coordinate.
        let (f, c) = (best(&fine), best(&coarse));
        prop_assert!(f >= c * (1.0 - 1e-12), "{f} < {c}");
    }
}
