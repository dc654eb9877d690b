#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ferry::scenario::{load_scenario, Scenario};

pub fn bundle_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bundles").join(name)
}

pub fn desk() -> Scenario {
    load_scenario(bundle_dir("ba_co_desk")).expect("desk bundle loads")
}

/// Copies a bundle into `dest` so a test can edit it.
pub fn copy_bundle(name: &str, dest: &Path) {
    std::fs::create_dir_all(dest).unwrap();
    for entry in std::fs::read_dir(bundle_dir(name)).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dest.join(entry.file_name())).unwrap();
    }
}

/// One vessel, two legs A->B->A, T = 12 at 30 minutes.
/// Leg 1: departs in [1.0, 1.5] h, travel options {1.0, 1.5} h, gates in periods 1-3.
/// Leg 2: departs in [3.5, 4.0] h, travel option {1.0} h, gates in periods 5-8.
pub fn hand_tiny() -> Scenario {
    use ferry::scenario::{CostCoefficients, DesignToggles, Leg, PortSite, TimeGrid, Vessel};
    let port = |id: &str, price: f64| PortSite {
        id: id.into(),
        max_grid_power_bound: 8.0,
        max_pv_bound: 2.0,
        max_storage_bound: 6.0,
        storage_power_bound: 3.0,
        charge_eff: 0.9,
        discharge_eff: 0.95,
        storage_soc_min_frac: 0.1,
        storage_soc_init_frac: 0.5,
        feed_in_ratio: 0.5,
        prices: (0..12).map(|p| price * (1.0 + 0.1 * (p % 4) as f64)).collect(),
        pv_profile: (0..12).map(|p| [0.0, 0.2, 0.6, 0.9, 0.6, 0.2][p % 6]).collect(),
    };
    let leg = |seq, o, d, dep: (f64, f64), arr: (f64, f64), tt: (f64, f64)| Leg {
        vessel: 0,
        seq,
        origin: o,
        destination: d,
        distance: 10.0,
        displacement: 1000.0,
        dep_window: dep,
        arr_window: arr,
        travel_time_bounds: tt,
    };
    Scenario {
        name: "hand_tiny".into(),
        description: "hand-checked instance".into(),
        grid: TimeGrid {
            start: chrono::NaiveDate::from_ymd_opt(2024, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            periods: 12,
            step: 0.5,
        },
        ports: vec![port("A", 0.1), port("B", 0.15)],
        vessels: vec![Vessel {
            id: "V1".into(),
            battery_bound_max: 12.0,
            battery_fixed: Some(10.0),
            soc_min: 2.0,
            displacement: 1000.0,
            // 3 MWh per crossing at 10 kn
            friction_const: 3.0 / (10.0 * 100.0 * 100.0),
            periodic_frac: 0.5,
            soc_init_frac: 0.5,
            speed_min: 5.0,
            speed_max: 20.0,
        }],
        legs: vec![vec![
            leg(1, 0, 1, (1.0, 1.5), (2.0, 3.0), (1.0, 1.5)),
            leg(2, 1, 0, (3.5, 4.0), (4.5, 5.0), (1.0, 1.0)),
        ]],
        costs: CostCoefficients {
            storage_capex: 250.0,
            pv_capex: 850.0,
            grid_capex: 174.0,
            vessel_batt_capex: 400.0,
            amort_infra_years: 15.0,
            amort_vessel_years: 10.0,
        },
        toggles: DesignToggles::ALL,
    }
}
