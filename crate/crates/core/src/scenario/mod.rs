//! Problem instances: ports, vessels, itineraries, the time grid, series and
//! cost coefficients, all in canonical units (MW, MWh, hours, knots, nautical
//! miles, kUSD).

mod bundle;
mod validate;

use chrono::{Duration, NaiveDateTime};

pub use bundle::{
    load_scenario, normalize_config, save_scenario, scenario_from_config, scenario_to_config, BundleConfig,
    CONFIG_FILE, format_ts, read_bundle, write_bundle,
};
pub use validate::{validate_scenario, ViolationRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub start: NaiveDateTime,
    pub periods: usize,
    /// Period length in hours.
    pub step: f64,
}

/// Result of mapping a timestamp onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodIndex {
    /// 1-based period containing the timestamp.
    At(usize),
    OutOfRange,
}

impl TimeGrid {
    pub fn horizon_hours(&self) -> f64 {
        self.periods as f64 * self.step
    }

    /// Hours elapsed from the horizon start.
    pub fn hours_since_start(&self, ts: NaiveDateTime) -> f64 {
        (ts - self.start).num_milliseconds() as f64 / 3.6e6
    }

    /// Timestamp `hours` after the horizon start, rounded to the millisecond.
    pub fn timestamp_at(&self, hours: f64) -> NaiveDateTime {
        self.start + Duration::milliseconds((hours * 3.6e6).round() as i64)
    }

    pub fn step_minutes(&self) -> f64 {
        self.step * 60.0
    }
}

/// Floor mapping of a timestamp to its period in `1..=T`.
pub fn time_index(grid: &TimeGrid, ts: NaiveDateTime) -> PeriodIndex {
    let ms = (ts - grid.start).num_milliseconds();
    let step_ms = (grid.step * 3.6e6).round() as i64;
    if ms < 0 || step_ms <= 0 {
        return PeriodIndex::OutOfRange;
    }
    let p = (ms / step_ms) as usize + 1;
    if p > grid.periods {
        PeriodIndex::OutOfRange
    } else {
        PeriodIndex::At(p)
    }
}

/// Start timestamp of 1-based period `index`.
pub fn time_of(grid: &TimeGrid, index: usize) -> NaiveDateTime {
    grid.timestamp_at((index as f64 - 1.0) * grid.step)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortSite {
    pub id: String,
    /// Upper bound of the grid-connection design variable (MW).
    pub max_grid_power_bound: f64,
    /// Upper bound of installed PV (MW).
    pub max_pv_bound: f64,
    /// Upper bound of installed stationary storage (MWh).
    pub max_storage_bound: f64,
    /// Storage charge and discharge power limit (MW).
    pub storage_power_bound: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    pub storage_soc_min_frac: f64,
    pub storage_soc_init_frac: f64,
    pub feed_in_ratio: f64,
    /// Purchase price per period (kUSD/MWh).
    pub prices: Vec<f64>,
    /// PV capacity factor per period.
    pub pv_profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vessel {
    pub id: String,
    /// Upper bound on the battery size when sizing is free (MWh).
    pub battery_bound_max: f64,
    /// Battery size used when sizing is disabled (MWh).
    pub battery_fixed: Option<f64>,
    pub soc_min: f64,
    /// Displacement (t).
    pub displacement: f64,
    /// Lumped friction constant (MWh per kn² per nmi per t^(2/3)).
    pub friction_const: f64,
    pub periodic_frac: f64,
    pub soc_init_frac: f64,
    pub speed_min: f64,
    pub speed_max: f64,
}

impl Vessel {
    /// Battery size for configurations that do not optimize it.
    pub fn fixed_battery(&self) -> f64 {
        self.battery_fixed.unwrap_or(self.battery_bound_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub vessel: usize,
    /// 1-based position in the vessel's itinerary.
    pub seq: usize,
    pub origin: usize,
    pub destination: usize,
    /// Distance (nmi).
    pub distance: f64,
    /// Displacement on this leg (t).
    pub displacement: f64,
    /// Earliest and latest departure, hours from horizon start.
    pub dep_window: (f64, f64),
    /// Earliest and latest arrival, hours from horizon start.
    pub arr_window: (f64, f64),
    /// Minimum and maximum travel time (h).
    pub travel_time_bounds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostCoefficients {
    /// kUSD/MWh
    pub storage_capex: f64,
    /// kUSD/MW
    pub pv_capex: f64,
    /// kUSD/MW
    pub grid_capex: f64,
    /// kUSD/MWh
    pub vessel_batt_capex: f64,
    pub amort_infra_years: f64,
    pub amort_vessel_years: f64,
}

pub const HOURS_PER_YEAR: f64 = 8766.0;

impl CostCoefficients {
    /// Share of an infrastructure asset's lifetime covered by `horizon_hours`.
    pub fn infra_factor(&self, horizon_hours: f64) -> f64 {
        horizon_hours / (self.amort_infra_years * HOURS_PER_YEAR)
    }

    /// Share of a vessel battery's lifetime covered by `horizon_hours`.
    pub fn vessel_factor(&self, horizon_hours: f64) -> f64 {
        horizon_hours / (self.amort_vessel_years * HOURS_PER_YEAR)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignToggles {
    pub pv_enabled: bool,
    pub storage_enabled: bool,
    pub vessel_sizing_enabled: bool,
    pub grid_power_optimized: bool,
}

impl DesignToggles {
    pub const ALL: DesignToggles = DesignToggles {
        pv_enabled: true,
        storage_enabled: true,
        vessel_sizing_enabled: true,
        grid_power_optimized: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub grid: TimeGrid,
    pub ports: Vec<PortSite>,
    pub vessels: Vec<Vessel>,
    /// Ordered itinerary of each vessel, indexed like `vessels`.
    pub legs: Vec<Vec<Leg>>,
    pub costs: CostCoefficients,
    pub toggles: DesignToggles,
}

impl Scenario {
    pub fn port_index(&self, id: &str) -> Option<usize> {
        self.ports.iter().position(|p| p.id == id)
    }

    pub fn vessel_index(&self, id: &str) -> Option<usize> {
        self.vessels.iter().position(|v| v.id == id)
    }

    pub fn leg(&self, vessel: usize, seq: usize) -> &Leg {
        &self.legs[vessel][seq - 1]
    }

    pub fn num_legs(&self) -> usize {
        self.legs.iter().map(Vec::len).sum()
    }

    /// Same scenario with every design option enabled.
    pub fn with_all_features(&self) -> Scenario {
        Scenario {
            toggles: DesignToggles::ALL,
            ..self.clone()
        }
    }
}
