use uav_relay_core::placement::{optimize, parameter_sweep, Crossing, Parameter};
use uav_relay_core::{
    estimate_rates, load_config, parse_config, Axis, Evaluator, Objective, PlacementGrid, Range1d,
    Scenario, SimConfig,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn reproducible_runs_ignore_the_worker_count() {
    let s = Scenario::default();
    let base = SimConfig {
        n_slots: 20_000,
        master_seed: 42,
        ..SimConfig::default()
    };
    let one = estimate_rates(
        &s,
        &SimConfig {
            worker_hint: Some(1),
            ..base
        },
    )
    .unwrap();
    let four = estimate_rates(
        &s,
        &SimConfig {
            worker_hint: Some(4),
            ..base
        },
    )
    .unwrap();
    assert_eq!(one, four);
    let other_seed = estimate_rates(
        &s,
        &SimConfig {
            master_seed: 43,
            ..base
        },
    )
    .unwrap();
    assert_ne!(one.c_rf.mean, other_seed.c_rf.mean);
}

#[test]
fn analytic_hop_rates_track_simulation() {
    let s = Scenario::default();
    let a = s.evaluate().unwrap();
    let m = estimate_rates(
        &s,
        &SimConfig {
            n_slots: 20_000,
            ..SimConfig::default()
        },
    )
    .unwrap();
    assert!(
        rel(a.c_rf, m.c_rf.mean) < 0.02,
        "{} vs {}",
        a.c_rf,
        m.c_rf.mean
    );
    assert!(
        rel(a.c_fso, m.c_fso.mean) < 0.01,
        "{} vs {}",
        a.c_fso,
        m.c_fso.mean
    );
    assert!(rel(m.users.mean, s.mean_users()) < 0.01);
    // Closed form and quadrature of the same FSO expectation.
    assert!(rel(a.c_fso, a.c_fso_numeric) < 1e-3);
}

#[test]
fn crossing_balances_the_two_hops() {
    let grid = PlacementGrid::new(Axis::XOffset, Range1d::new(0.0, 40.0, 41), Objective::Ba);
    let res = optimize(&grid, &Scenario::default()).unwrap();
    match res.crossing {
        Crossing::Found {
            coordinate,
            rates,
            mismatch,
            ..
        } => {
            assert!((5.0..20.0).contains(&coordinate), "{coordinate}");
            assert!(mismatch < 1e-3);
            assert!(rel(rates.c_rf, rates.c_fso) < 1e-3);
        }
        other => panic!("no crossing: {other:?}"),
    }
}

#[test]
fn worse_weather_lowers_the_fso_rate_only() {
    let rows = parameter_sweep(
        &Scenario::default(),
        Parameter::Kappa,
        &Range1d::new(10e-3, 25e-3, 6),
        &Evaluator::Analytic,
    )
    .unwrap();
    let rates: Vec<_> = rows.iter().map(|r| r.rates.unwrap()).collect();
    for w in rates.windows(2) {
        assert!(w[1].c_fso < w[0].c_fso);
        assert_eq!(w[1].c_rf, w[0].c_rf);
        assert!(w[1].c_nb <= w[0].c_nb);
    }
}

#[test]
fn config_file_round_trips_through_disk() {
    let text = "[geometry]\nuav_position = [580.0, 0.0, 40.0]\n\n[fso]\nkappa_db_per_m = 0.018\n\n[sim]\nn_slots = 1000\nmaster_seed = 9\n";
    let path = std::env::temp_dir().join(format!("uav-relay-{}.toml", std::process::id()));
    std::fs::write(&path, text).unwrap();
    let loaded = load_config(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(loaded.scenario.geometry.uav_position, [580.0, 0.0, 40.0]);
    assert_eq!(loaded.scenario.fso.kappa_db_per_m, 0.018);
    assert_eq!(loaded.sim.n_slots, 1000);
    let again = parse_config(&loaded.file.to_toml().unwrap()).unwrap();
    assert_eq!(again.scenario, loaded.scenario);
    assert!(!loaded.conversions.is_empty());
}

#[test]
fn missing_config_file_is_an_error() {
    assert!(load_config(std::path::Path::new("/nonexistent/uav.toml")).is_err());
}
