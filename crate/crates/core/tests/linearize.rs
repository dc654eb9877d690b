mod common;

use ferry::linearize::{
    consumption, consumption_at_time, envelope_value, secant_envelope, travel_interval, travel_options,
};
use ferry::scenario::{Leg, TimeGrid, Vessel};
use ferry::synth::reference_friction_const;
use ferry::FerryError;
use proptest::prelude::*;

fn grid() -> TimeGrid {
    TimeGrid {
        start: chrono::NaiveDate::from_ymd_opt(2023, 11, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        periods: 192,
        step: 0.25,
    }
}

fn vessel(k: f64, smin: f64, smax: f64) -> Vessel {
    Vessel {
        id: "V1".into(),
        battery_bound_max: 50.0,
        battery_fixed: Some(40.0),
        soc_min: 15.0,
        displacement: 2800.0,
        friction_const: k,
        periodic_frac: 0.5,
        soc_init_frac: 0.8,
        speed_min: smin,
        speed_max: smax,
    }
}

fn leg(distance: f64, bounds: (f64, f64)) -> Leg {
    Leg {
        vessel: 0,
        seq: 1,
        origin: 0,
        destination: 1,
        distance,
        displacement: 2800.0,
        dep_window: (2.0, 2.0),
        arr_window: (2.0, 6.0),
        travel_time_bounds: bounds,
    }
}

#[test]
fn crossing_has_a_single_option_at_21_33_knots() {
    let opts = travel_options(&leg(32.0, (1.28, 1.5)), &vessel(1e-5, 10.0, 25.0), &grid()).unwrap();
    assert_eq!(opts.len(), 1);
    assert_eq!(opts[0].travel_time, 1.5);
    assert!((opts[0].speed - 21.333).abs() < 1e-3);
}

#[test]
fn options_exclude_times_above_speed_limit() {
    let opts = travel_options(&leg(32.0, (1.25, 2.5)), &vessel(1e-5, 10.0, 25.0), &grid()).unwrap();
    let times: Vec<f64> = opts.iter().map(|o| o.travel_time).collect();
    assert_eq!(times, vec![1.5, 1.75, 2.0, 2.25, 2.5]);
    assert!(opts.windows(2).all(|w| w[0].consumption > w[1].consumption));
}

#[test]
fn option_consumption_follows_the_law() {
    // k = 3.2e-4 as a plain arithmetic check of k d s^2 w^(2/3)
    let k = 3.2e-4;
    let opts = travel_options(&leg(32.0, (1.28, 1.5)), &vessel(k, 10.0, 25.0), &grid()).unwrap();
    let s: f64 = 32.0 / 1.5;
    let expected = k * 32.0 * s * s * 2800f64.powf(2.0 / 3.0);
    assert!((opts[0].consumption - expected).abs() < 1e-9 * expected);
}

#[test]
fn reference_vessel_uses_about_18_2_mwh_per_crossing() {
    let k = reference_friction_const();
    assert!((consumption(k, 32.0, 25.0, 2800.0) - 25.0).abs() < 1e-9);
    let e = consumption_at_time(k, 32.0, 1.5, 2800.0);
    assert!((e - 18.2).abs() < 0.01, "{e}");
}

#[test]
fn empty_option_set_is_an_error() {
    // [1.3, 1.45] h holds no multiple of 15 minutes
    let err = travel_options(&leg(32.0, (1.3, 1.45)), &vessel(1e-5, 10.0, 25.0), &grid()).unwrap_err();
    assert!(matches!(err, FerryError::Linearize { leg: 1, .. }));
    let err = travel_options(&leg(32.0, (0.5, 1.0)), &vessel(1e-5, 10.0, 25.0), &grid()).unwrap_err();
    assert!(matches!(err, FerryError::Linearize { .. }));
}

#[test]
fn two_breakpoints_give_one_exact_secant() {
    let l = leg(32.0, (1.28, 2.5));
    let v = vessel(1e-5, 10.0, 25.0);
    let env = secant_envelope(&l, &v, 2).unwrap();
    assert_eq!(env.len(), 1);
    let (lo, hi) = travel_interval(&l, &v).unwrap();
    for t in [lo, hi] {
        let e = consumption_at_time(1e-5, 32.0, t, 2800.0);
        assert!((env[0].value(t) - e).abs() < 1e-12 * e.max(1.0));
    }
    for i in 0..100 {
        let t = lo + (hi - lo) * i as f64 / 99.0;
        assert!(envelope_value(&env, t) >= consumption_at_time(1e-5, 32.0, t, 2800.0) - 1e-12);
    }
}

#[test]
fn more_breakpoints_overestimate_less() {
    let l = leg(32.0, (1.28, 3.0));
    let v = vessel(1e-5, 10.0, 25.0);
    let (lo, hi) = travel_interval(&l, &v).unwrap();
    let worst = |n| {
        let env = secant_envelope(&l, &v, n).unwrap();
        (0..200)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / 199.0;
                envelope_value(&env, t) - consumption_at_time(1e-5, 32.0, t, 2800.0)
            })
            .fold(0.0f64, f64::max)
    };
    assert!(worst(5) < worst(2));
}

#[test]
fn fewer_than_two_breakpoints_is_an_error() {
    assert!(secant_envelope(&leg(32.0, (1.28, 1.5)), &vessel(1e-5, 10.0, 25.0), 1).is_err());
}

#[test]
fn degenerate_interval_gives_a_constant() {
    let env = secant_envelope(&leg(32.0, (1.5, 1.5)), &vessel(1e-5, 10.0, 25.0), 4).unwrap();
    assert_eq!(env.len(), 1);
    assert_eq!(env[0].slope, 0.0);
}

proptest! {
    #[test]
    fn envelope_never_underestimates(
        k in 1e-6f64..1e-4,
        d in 5.0f64..60.0,
        w in 300.0f64..6000.0,
        frac in 0.0f64..=1.0,
        n in 2usize..12,
    ) {
        let mut l = leg(d, (d / 25.0, d / 10.0));
        l.displacement = w;
        let v = vessel(k, 10.0, 25.0);
        let env = secant_envelope(&l, &v, n).unwrap();
        let (lo, hi) = travel_interval(&l, &v).unwrap();
        let t = lo + frac * (hi - lo);
        let truth = consumption_at_time(k, d, t, w);
        prop_assert!(envelope_value(&env, t) >= truth - 1e-12 * truth.max(1.0));
        for seg in &env {
            for t in [seg.t_lo, seg.t_hi] {
                let e = consumption_at_time(k, d, t, w);
                prop_assert!((envelope_value(&env, t) - e).abs() <= 1e-12 * e.max(1.0));
            }
        }
    }

    #[test]
    fn options_are_grid_multiples_within_speed_bounds(d in 5.0f64..60.0, lo in 0.25f64..3.0, span in 0.0f64..3.0) {
        let l = leg(d, (lo, lo + span));
        let v = vessel(1e-5, 8.0, 25.0);
        if let Ok(opts) = travel_options(&l, &v, &grid()) {
            for o in opts {
                let m = o.travel_time / 0.25;
                prop_assert!((m - m.round()).abs() < 1e-9);
                prop_assert!(o.speed <= 25.0 + 1e-9 && o.speed >= 8.0 - 1e-9);
                prop_assert!(o.travel_time >= lo - 1e-9 && o.travel_time <= lo + span + 1e-9);
            }
        }
    }
}
