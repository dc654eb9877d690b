mod common;

use ferry::model::{
    build_model, build_objective, experiment_toggles, fix_experiment, symbol_coverage, var_lookup, var_lookup_name,
    LinearizationMode, ModelOptions, RowFamily, VarKey, VarKind,
};
use ferry::scenario::load_scenario;
use ferry::synth::random_scenario;
use ferry::FerryError;
use proptest::prelude::*;

#[test]
fn hand_counted_rows_of_the_tiny_instance() {
    let s = common::hand_tiny();
    let m = build_model(&s, ModelOptions::default()).unwrap();
    let counts = m.row_counts();
    let per_period = 2 * 12;
    let expected: Vec<(RowFamily, usize)> = vec![
        (RowFamily::TravelChoice, 2),
        (RowFamily::ArrivalEqualsDeparturePlusTravel, 2),
        (RowFamily::LegSequence, 1),
        (RowFamily::LegEnergyBalance, 2),
        (RowFamily::InitialCharge, 1),
        (RowFamily::LegContinuity, 1),
        (RowFamily::ChargedEnergy, 2),
        (RowFamily::DepthOfDischarge, 3),
        (RowFamily::VesselCapacity, 2),
        (RowFamily::PeriodicStart, 1),
        (RowFamily::PeriodicEnd, 1),
        (RowFamily::MooringGate, 7),
        (RowFamily::ChargingSourceSplit, 7),
        (RowFamily::DepartureLink, 7),
        (RowFamily::ArrivalLink, 4),
        (RowFamily::DeliveredPowerCap, 7),
        (RowFamily::GridImportBalance, per_period),
        (RowFamily::GridExportBalance, per_period),
        (RowFamily::PvAvailability, per_period),
        (RowFamily::PvSplit, per_period),
        (RowFamily::StorageDischargeSplit, per_period),
        (RowFamily::StorageChargeSplit, per_period),
        (RowFamily::StorageDynamics, per_period),
        (RowFamily::StorageCapacity, per_period),
        (RowFamily::StorageMinimum, per_period),
        (RowFamily::StorageTerminal, 2),
    ];
    for (f, n) in &expected {
        assert_eq!(counts.get(f).copied().unwrap_or(0), *n, "{}", f.as_str());
    }
    assert_eq!(counts.values().sum::<usize>(), expected.iter().map(|e| e.1).sum::<usize>());
    assert_eq!(m.problem.binaries().count(), 3 + 7);
    let cols = m.col_counts();
    assert_eq!(cols[&VarKind::Y], 3);
    assert_eq!(cols[&VarKind::Z], 7);
    assert_eq!(cols[&VarKind::EB], per_period);
}

#[test]
fn secant_mode_replaces_choices_with_envelope_rows() {
    let s = common::hand_tiny();
    let opts = ModelOptions {
        mode: LinearizationMode::Secant { breakpoints: 4 },
        ..ModelOptions::default()
    };
    let m = build_model(&s, opts).unwrap();
    let counts = m.row_counts();
    assert_eq!(counts.get(&RowFamily::TravelChoice), None);
    // leg 1 has a real interval (3 segments), leg 2 a single point (1)
    assert_eq!(counts[&RowFamily::ConsumptionEnvelope], 4);
    assert_eq!(m.problem.binaries().count(), 7);
}

#[test]
fn experiment_one_fixes_the_current_design() {
    let s = common::desk();
    let m = fix_experiment(&build_model(&s, ModelOptions::default()).unwrap(), 1).unwrap();
    for (k, c) in m.keys().iter().zip(&m.problem.cols) {
        match k.kind {
            VarKind::PPvMax | VarKind::PPv | VarKind::PPv2v | VarKind::PPv2g | VarKind::PPv2b => {
                assert_eq!(c.upper, 0.0, "{}", k.name(&s))
            }
            VarKind::EBMax | VarKind::EB | VarKind::PBPlus | VarKind::PBMinus | VarKind::PB2v | VarKind::PB2g => {
                assert_eq!(c.upper, 0.0, "{}", k.name(&s))
            }
            VarKind::EVMax => assert_eq!((c.lower, c.upper), (40.0, 40.0)),
            VarKind::PGMax => assert_eq!((c.lower, c.upper), (15.0, 15.0)),
            _ => {}
        }
    }
}

#[test]
fn experiment_bounds_three_and_four() {
    let s = common::desk();
    let base = build_model(&s, ModelOptions::default()).unwrap();
    let m3 = fix_experiment(&base, 3).unwrap();
    for i in 0..2 {
        let r = var_lookup(&m3, &VarKey::design(VarKind::EBMax, i)).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 50.0));
        let r = var_lookup(&m3, &VarKey::design(VarKind::EVMax, i)).unwrap();
        assert_eq!((r.lower, r.upper), (40.0, 40.0));
    }
    let m4 = fix_experiment(&base, 4).unwrap();
    for v in 0..2 {
        let r = var_lookup(&m4, &VarKey::design(VarKind::EVMax, v)).unwrap();
        assert_eq!((r.lower, r.upper), (15.0, 50.0));
    }
    assert!(matches!(fix_experiment(&base, 5), Err(FerryError::UnknownExperiment(5))));
}

#[test]
fn variable_lookup() {
    let s = common::desk();
    let m = build_model(&s, ModelOptions::default()).unwrap();
    let z = var_lookup(&m, &VarKey::leg_at(VarKind::Z, 0, 2, 20)).unwrap();
    assert!(z.binary);
    assert_eq!(var_lookup_name(&m, "Z[V1,2,20]").unwrap().col, z.col);
    assert!(matches!(var_lookup_name(&m, "Z[V1,2,10]"), Err(FerryError::UnknownVariable(_))));
    assert!(var_lookup_name(&m, "Q[V1]").is_err());

    let week = load_scenario(common::bundle_dir("ba_co_week")).unwrap();
    let mw = build_model(&week, ModelOptions::default()).unwrap();
    let pv = var_lookup_name(&mw, "P_pv[CO,300]").unwrap();
    assert!(!pv.binary);
    let co = week.port_index("CO").unwrap();
    assert_eq!(pv.upper, week.ports[co].max_pv_bound * week.ports[co].pv_profile[299]);
}

#[test]
fn flat_prices_with_full_resale_give_symmetric_coefficients() {
    let mut s = common::hand_tiny();
    for p in &mut s.ports {
        p.feed_in_ratio = 1.0;
        p.prices = vec![0.08; 12];
    }
    let m = build_model(&s, ModelOptions::default()).unwrap();
    let c = build_objective(&s, &m);
    for i in 0..2 {
        for p in 1..=12 {
            let plus = m.col(&VarKey::port(VarKind::PGPlus, i, p)).unwrap();
            let minus = m.col(&VarKey::port(VarKind::PGMinus, i, p)).unwrap();
            assert!((c[plus] - 0.5 * 0.08).abs() < 1e-15);
            assert!((c[minus] + 0.5 * 0.08).abs() < 1e-15);
            assert_eq!(m.problem.cols[plus].cost, c[plus]);
        }
    }
}

#[test]
fn week_vessel_capital_of_the_current_design() {
    let s = load_scenario(common::bundle_dir("ba_co_week")).unwrap();
    let m = fix_experiment(&build_model(&s, ModelOptions::default()).unwrap(), 1).unwrap();
    let mut capital = 0.0;
    for v in 0..2 {
        let c = m.col(&VarKey::design(VarKind::EVMax, v)).unwrap();
        capital += m.problem.cols[c].cost * m.problem.cols[c].lower;
    }
    let expected = 2.0 * 40.0 * 400.0 * 168.0 / (10.0 * 8766.0);
    assert!((capital - expected).abs() < 1e-9);
    assert!((capital - 61.3).abs() < 0.05);
}

#[test]
fn zero_horizon_has_no_capital_weight() {
    let s = common::desk();
    assert_eq!(s.costs.infra_factor(0.0), 0.0);
    assert_eq!(s.costs.vessel_factor(0.0), 0.0);
    let mut empty = s.clone();
    empty.grid.periods = 0;
    assert!(build_model(&empty, ModelOptions::default()).is_err());
}

#[test]
fn every_symbol_is_housed() {
    for mode in [LinearizationMode::Candidates, LinearizationMode::Secant { breakpoints: 3 }] {
        let m = build_model(&common::hand_tiny(), ModelOptions { mode, ..ModelOptions::default() }).unwrap();
        let cov = symbol_coverage(&m);
        assert!(!cov.is_empty());
        for h in cov {
            assert!(!h.housed_by.is_empty(), "{} has no column", h.symbol);
        }
    }
}

#[test]
fn experiments_are_nested() {
    for seed in 0..4 {
        let s = random_scenario(seed);
        let base = build_model(&s, ModelOptions::default()).unwrap();
        let ms: Vec<_> = (1..=4).map(|e| fix_experiment(&base, e).unwrap()).collect();
        for w in ms.windows(2) {
            for (a, b) in w[0].problem.cols.iter().zip(&w[1].problem.cols) {
                assert!(b.lower <= a.lower && a.upper <= b.upper, "{}", a.name);
            }
        }
        assert_eq!(ms[3].toggles, experiment_toggles(4).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn toggles_round_trip_through_bounds(seed in 0u64..200, e in 1u8..=4, f in 1u8..=4) {
        let s = random_scenario(seed);
        let base = build_model(&s, ModelOptions::default()).unwrap();
        let direct = fix_experiment(&base, e).unwrap();
        let via = fix_experiment(&fix_experiment(&base, f).unwrap(), e).unwrap();
        for (a, b) in direct.problem.cols.iter().zip(&via.problem.cols) {
            prop_assert_eq!((a.lower, a.upper), (b.lower, b.upper));
        }
    }

    #[test]
    fn every_row_and_column_is_named_uniquely(seed in 0u64..200) {
        let s = random_scenario(seed);
        let m = build_model(&s, ModelOptions::default()).unwrap();
        let mut rows: Vec<&str> = m.problem.rows.iter().map(|r| r.name.as_str()).collect();
        rows.sort_unstable();
        let n = rows.len();
        rows.dedup();
        prop_assert_eq!(rows.len(), n);
        for (j, k) in m.keys().iter().enumerate() {
            prop_assert_eq!(m.col_by_name(&k.name(&s)), Some(j));
            prop_assert_eq!(VarKey::parse(&s, &k.name(&s)).unwrap(), *k);
        }
    }
}
