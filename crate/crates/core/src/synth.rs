//! Scenario generators: the two reference bundles and seeded random instances
//! for tests and benchmarks.

use std::f64::consts::PI;
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ScenarioError;
use crate::scenario::{format_ts, write_bundle};
use crate::scenario::{
    scenario_to_config, CostCoefficients, DesignToggles, Leg, PortSite, Scenario, TimeGrid, Vessel,
};

/// Friction constant that makes one 32 nmi crossing at 25 kn with a 2800 t
/// displacement use 25 MWh.
pub fn reference_friction_const() -> f64 {
    25.0 / (32.0 * 25.0 * 25.0 * 2800f64.powf(2.0 / 3.0))
}

fn reference_costs() -> CostCoefficients {
    CostCoefficients {
        storage_capex: 250.0,
        pv_capex: 850.0,
        grid_capex: 174.0,
        vessel_batt_capex: 400.0,
        amort_infra_years: 15.0,
        amort_vessel_years: 10.0,
    }
}

fn reference_port(id: &str, prices: Vec<f64>, pv_profile: Vec<f64>) -> PortSite {
    PortSite {
        id: id.into(),
        max_grid_power_bound: 15.0,
        max_pv_bound: 2.5,
        max_storage_bound: 50.0,
        storage_power_bound: 15.0,
        charge_eff: 0.9,
        discharge_eff: 0.95,
        storage_soc_min_frac: 0.1,
        storage_soc_init_frac: 0.8,
        feed_in_ratio: 0.2,
        prices,
        pv_profile,
    }
}

fn reference_vessel(id: &str) -> Vessel {
    Vessel {
        id: id.into(),
        battery_bound_max: 50.0,
        battery_fixed: Some(40.0),
        soc_min: 15.0,
        displacement: 2800.0,
        friction_const: reference_friction_const(),
        periodic_frac: 0.5,
        soc_init_frac: 0.8,
        speed_min: 10.0,
        speed_max: 25.0,
    }
}

/// Daily price curve around `avg` (USD/kWh = kUSD/MWh) with an evening peak
/// and a small deterministic jitter.
fn price_series(rng: &mut ChaCha8Rng, avg: f64, amplitude: f64, periods: usize, step: f64) -> Vec<f64> {
    (0..periods)
        .map(|p| {
            let h = (p as f64 + 0.5) * step % 24.0;
            let shape = (2.0 * PI * (h - 13.0) / 24.0).sin();
            let jitter = rng.random_range(-0.04..0.04);
            let v = avg * (1.0 + amplitude * shape + jitter);
            (v * 1e5).round() / 1e5
        })
        .collect()
}

/// Clear-sky style capacity factor with sunrise at 06:00 and sunset at 19:30,
/// scaled per day by a random clearness index.
fn pv_series(rng: &mut ChaCha8Rng, peak: f64, periods: usize, step: f64) -> Vec<f64> {
    let days = ((periods as f64 * step) / 24.0).ceil() as usize;
    let clearness: Vec<f64> = (0..days).map(|_| rng.random_range(0.75..1.0)).collect();
    (0..periods)
        .map(|p| {
            let t = (p as f64 + 0.5) * step;
            let h = t % 24.0;
            let day = (t / 24.0) as usize;
            let (rise, set) = (6.0, 19.5);
            let cf = if h > rise && h < set {
                peak * clearness[day] * ((PI * (h - rise) / (set - rise)).sin()).powf(1.3)
            } else {
                0.0
            };
            (cf.clamp(0.0, 1.0) * 1e4).round() / 1e4
        })
        .collect()
}

fn crossing(vessel: usize, seq: usize, origin: usize, destination: usize, departure: f64) -> Leg {
    Leg {
        vessel,
        seq,
        origin,
        destination,
        distance: 32.0,
        displacement: 2800.0,
        dep_window: (departure, departure),
        arr_window: (departure + 1.0, departure + 2.0),
        travel_time_bounds: (1.28, 1.5),
    }
}

/// Buenos Aires - Colonia service: two vessels, four crossings per vessel and
/// day, `days` days at 15 minute resolution.
fn ba_co(days: usize, name: &str, description: &str) -> Scenario {
    let step = 0.25;
    let periods = days * 96;
    let mut rng = ChaCha8Rng::seed_from_u64(20231101);
    let ba_prices = price_series(&mut rng, 0.09, 0.35, periods, step);
    let co_prices = price_series(&mut rng, 0.135, 0.25, periods, step);
    let ba_pv = pv_series(&mut rng, 0.78, periods, step);
    let co_pv = pv_series(&mut rng, 0.78, periods, step);
    let mut legs = vec![Vec::new(), Vec::new()];
    for d in 0..days {
        let base = 24.0 * d as f64;
        for (k, h) in [2.0, 8.0, 14.0, 20.0].into_iter().enumerate() {
            let (o, t) = if k % 2 == 0 { (0, 1) } else { (1, 0) };
            let seq = legs[0].len() + 1;
            legs[0].push(crossing(0, seq, o, t, base + h));
        }
        for (k, h) in [4.0, 10.0, 16.0, 22.0].into_iter().enumerate() {
            let (o, t) = if k % 2 == 0 { (1, 0) } else { (0, 1) };
            let seq = legs[1].len() + 1;
            legs[1].push(crossing(1, seq, o, t, base + h));
        }
    }
    Scenario {
        name: name.into(),
        description: description.into(),
        grid: TimeGrid {
            start: NaiveDate::from_ymd_opt(2023, 11, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            periods,
            step,
        },
        ports: vec![
            reference_port("BA", ba_prices, ba_pv),
            reference_port("CO", co_prices, co_pv),
        ],
        vessels: vec![reference_vessel("V1"), reference_vessel("V2")],
        legs,
        costs: reference_costs(),
        toggles: DesignToggles::ALL,
    }
}

pub fn ba_co_desk() -> Scenario {
    ba_co(
        2,
        "ba_co_desk",
        "Two-day Buenos Aires - Colonia service, two vessels, 15 minute periods. \
         Prices and PV profiles are synthetic.",
    )
}

pub fn ba_co_week() -> Scenario {
    ba_co(
        7,
        "ba_co_week",
        "slow: one-week Buenos Aires - Colonia service, two vessels, 15 minute periods. \
         Prices and PV profiles are synthetic.",
    )
}

const BUNDLE_HEADER: &str = "\
# Buenos Aires - Colonia reference bundle.
# Travel time bounds are [1.28, 1.5] h: the lower end is 32 nmi at 25 kn, the
# upper end is the scheduled crossing time, so 1.5 h (21.33 kn) is feasible.
# Displacement 2800 t and the friction constant (one crossing at 25 kn uses
# 25 MWh) are modelling assumptions. Prices and PV series are synthetic.
# Prices are in USD/kWh and capital costs in USD/kW or USD/kWh.
";

/// Writes a reference bundle in the units of the published parameter table
/// (MW, MWh, USD/kWh, USD/kW) with an explanatory header.
pub fn write_reference_bundle(s: &Scenario, dir: &Path) -> Result<(), ScenarioError> {
    let mut cfg = scenario_to_config(s);
    cfg.units.price = "USD/kWh".into();
    cfg.units.capex = "USD/kW".into();
    write_bundle(&cfg, dir)?;
    let path = dir.join(crate::scenario::CONFIG_FILE);
    let body = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
        file: path.display().to_string(),
        source,
    })?;
    std::fs::write(&path, format!("{BUNDLE_HEADER}\n{body}")).map_err(|source| ScenarioError::Io {
        file: path.display().to_string(),
        source,
    })
}

/// Number of binaries in the candidate-mode model of `s`.
pub fn binary_count(s: &Scenario) -> usize {
    crate::model::build_model(s, Default::default()).map_or(usize::MAX, |m| m.problem.binaries().count())
}

fn random_toggles(rng: &mut ChaCha8Rng) -> DesignToggles {
    DesignToggles {
        pv_enabled: rng.random_bool(0.5),
        storage_enabled: rng.random_bool(0.5),
        vessel_sizing_enabled: rng.random_bool(0.5),
        grid_power_optimized: rng.random_bool(0.5),
    }
}

fn random_port(rng: &mut ChaCha8Rng, id: &str, periods: usize, step: f64) -> PortSite {
    let avg = rng.random_range(0.05..0.2);
    let prices = (0..periods).map(|_| avg * rng.random_range(0.5..1.5)).collect();
    let peak = rng.random_range(0.4..0.9);
    let pv_profile = pv_series(rng, peak, periods, step)
        .into_iter()
        .map(|v| if step * periods as f64 <= 12.0 { (v + 0.3).min(1.0) } else { v })
        .collect();
    PortSite {
        id: id.into(),
        max_grid_power_bound: rng.random_range(6.0..12.0),
        max_pv_bound: rng.random_range(0.5..3.0),
        max_storage_bound: rng.random_range(2.0..15.0),
        storage_power_bound: rng.random_range(2.0..8.0),
        charge_eff: rng.random_range(0.85..1.0),
        discharge_eff: rng.random_range(0.85..1.0),
        storage_soc_min_frac: rng.random_range(0.0..0.2),
        storage_soc_init_frac: rng.random_range(0.3..0.9),
        feed_in_ratio: rng.random_range(0.1..0.9),
        prices,
        pv_profile,
    }
}

fn random_costs(rng: &mut ChaCha8Rng, scale: f64) -> CostCoefficients {
    CostCoefficients {
        storage_capex: rng.random_range(100.0..300.0) * scale,
        pv_capex: rng.random_range(500.0..1000.0) * scale,
        grid_capex: rng.random_range(100.0..250.0) * scale,
        vessel_batt_capex: rng.random_range(200.0..500.0) * scale,
        amort_infra_years: rng.random_range(10.0..20.0),
        amort_vessel_years: rng.random_range(8.0..12.0),
    }
}

/// Random vessel whose initial energy never forces energy to be discarded
/// (the initial fraction does not exceed the periodic fraction).
fn random_vessel(rng: &mut ChaCha8Rng, id: &str, k: f64) -> Vessel {
    let bound = rng.random_range(10.0..14.0);
    let periodic = rng.random_range(0.4..0.6);
    Vessel {
        id: id.into(),
        battery_bound_max: bound,
        battery_fixed: Some(bound * rng.random_range(0.8..1.0)),
        soc_min: rng.random_range(1.0..2.5),
        displacement: 1000.0,
        friction_const: k,
        periodic_frac: periodic,
        soc_init_frac: periodic * rng.random_range(0.8..1.0),
        speed_min: 8.0,
        speed_max: 20.0,
    }
}

fn start_time() -> chrono::NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

/// Tiny instance: one vessel, two legs between two ports, T = 12 at 30
/// minutes, at most 22 binaries. Windows and travel options vary with the seed.
pub fn tiny_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 0.5;
    let periods = 12;
    loop {
        // consumption of about 2-4 MWh per crossing at 10 kn
        let k = rng.random_range(2.0..4.0) / (10.0 * 100.0 * 1000f64.powf(2.0 / 3.0));
        let vessel = random_vessel(&mut rng, "V1", k);
        let n_opts = rng.random_range(1..=3usize);
        let t_min = 1.0;
        let t_max = t_min + step * (n_opts - 1) as f64;
        let distance = 10.0;
        let dep1 = step * rng.random_range(2..=3) as f64;
        let flex1 = step * rng.random_range(0..=1) as f64;
        let arr1 = (dep1 + t_min, dep1 + flex1 + t_max);
        let dep2 = step * rng.random_range(7..=8) as f64;
        let flex2 = step * rng.random_range(0..=2) as f64;
        let dep2_lat = dep2 + flex2;
        let arr2 = (dep2 + t_min, (dep2_lat + t_max).min(step * periods as f64));
        let leg = |seq, o, d, dep: (f64, f64), arr: (f64, f64)| Leg {
            vessel: 0,
            seq,
            origin: o,
            destination: d,
            distance,
            displacement: 1000.0,
            dep_window: dep,
            arr_window: arr,
            travel_time_bounds: (t_min, t_max),
        };
        let s = Scenario {
            name: format!("tiny_{seed}"),
            description: "random tiny instance".into(),
            grid: TimeGrid {
                start: start_time(),
                periods,
                step,
            },
            ports: vec![
                random_port(&mut rng, "A", periods, step),
                random_port(&mut rng, "B", periods, step),
            ],
            vessels: vec![vessel],
            legs: vec![vec![
                leg(1, 0, 1, (dep1, dep1 + flex1), arr1),
                leg(2, 1, 0, (dep2, dep2_lat), arr2),
            ]],
            costs: random_costs(&mut rng, 1.0),
            toggles: random_toggles(&mut rng),
        };
        if binary_count(&s) <= 22 {
            return s;
        }
    }
}

/// Small random service for experiment-ladder checks: one day at 30 minutes,
/// two ports, one or two vessels with two to four legs each.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let step = 0.5;
    let periods = 48;
    let n_vessels = rng.random_range(1..=2usize);
    let k = rng.random_range(2.0..4.0) / (12.0 * 144.0 * 1000f64.powf(2.0 / 3.0));
    let mut vessels = Vec::new();
    let mut legs = Vec::new();
    for vi in 0..n_vessels {
        vessels.push(random_vessel(&mut rng, &format!("V{}", vi + 1), k));
        let n_legs = rng.random_range(2..=4usize);
        let mut t = step * rng.random_range(2..=6) as f64;
        let mut at = rng.random_range(0..2usize);
        let mut row = Vec::new();
        for seq in 1..=n_legs {
            let n_opts = rng.random_range(1..=2usize);
            let (t_min, t_max) = (1.0, 1.0 + step * (n_opts - 1) as f64);
            let flex = step * rng.random_range(0..=1) as f64;
            row.push(Leg {
                vessel: vi,
                seq,
                origin: at,
                destination: 1 - at,
                distance: 12.0,
                displacement: 1000.0,
                dep_window: (t, t + flex),
                arr_window: (t + t_min, t + flex + t_max),
                travel_time_bounds: (t_min, t_max),
            });
            at = 1 - at;
            t += flex + t_max + step * rng.random_range(4..=8) as f64;
        }
        legs.push(row);
    }
    // keep every window inside the horizon
    let horizon = step * periods as f64;
    for row in &mut legs {
        row.retain(|l| l.arr_window.1 <= horizon);
        if row.len() < 2 {
            // fall back to a compact two-leg shuttle
            row.clear();
        }
    }
    for (vi, row) in legs.iter_mut().enumerate() {
        if row.is_empty() {
            for seq in 1..=2 {
                let dep = if seq == 1 { 3.0 } else { 10.0 };
                row.push(Leg {
                    vessel: vi,
                    seq,
                    origin: seq - 1,
                    destination: 2 - seq,
                    distance: 12.0,
                    displacement: 1000.0,
                    dep_window: (dep, dep),
                    arr_window: (dep + 1.0, dep + 1.0),
                    travel_time_bounds: (1.0, 1.0),
                });
            }
        }
    }
    Scenario {
        name: format!("random_{seed}"),
        description: "random small service".into(),
        grid: TimeGrid {
            start: start_time(),
            periods,
            step,
        },
        ports: vec![
            random_port(&mut rng, "A", periods, step),
            random_port(&mut rng, "B", periods, step),
        ],
        vessels,
        legs,
        costs: random_costs(&mut rng, 1.0),
        toggles: DesignToggles::ALL,
    }
}

/// Timestamp text for a period start.
pub fn period_stamp(s: &Scenario, period: usize) -> String {
    format_ts(crate::scenario::time_of(&s.grid, period))
}
