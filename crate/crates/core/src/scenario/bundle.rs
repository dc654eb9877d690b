//! On-disk scenario bundles: `scenario.toml` plus `prices_<port>.csv` and
//! `pv_<port>.csv` series with header `timestamp,value`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::{CostCoefficients, DesignToggles, Leg, PortSite, Scenario, TimeGrid, Vessel};
use crate::error::ScenarioError;

pub const CONFIG_FILE: &str = "scenario.toml";
const TS_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub meta: Meta,
    pub units: Units,
    pub time: TimeSection,
    pub toggles: Toggles,
    pub costs: Costs,
    pub ports: Vec<PortEntry>,
    pub vessels: Vec<VesselEntry>,
    pub legs: Vec<LegEntry>,
    /// Series keyed by port id; filled from the CSV files, not from TOML.
    #[serde(skip)]
    pub prices: BTreeMap<String, Vec<(NaiveDateTime, f64)>>,
    #[serde(skip)]
    pub pv: BTreeMap<String, Vec<(NaiveDateTime, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub power: String,
    pub energy: String,
    pub price: String,
    /// Unit of capital costs, per kW for power assets and per kWh for energy
    /// assets (or the MW/MWh variants).
    pub capex: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub start: String,
    pub step_minutes: f64,
    pub periods: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toggles {
    pub pv_enabled: bool,
    pub storage_enabled: bool,
    pub vessel_sizing_enabled: bool,
    pub grid_power_optimized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Costs {
    pub storage_capex: f64,
    pub pv_capex: f64,
    pub grid_capex: f64,
    pub vessel_battery_capex: f64,
    pub amort_infra_years: f64,
    pub amort_vessel_years: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortEntry {
    pub id: String,
    pub max_grid_power: f64,
    pub max_pv: f64,
    pub max_storage: f64,
    pub storage_power: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    pub storage_soc_min_frac: f64,
    pub storage_soc_init_frac: f64,
    pub feed_in_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselEntry {
    pub id: String,
    pub battery_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery_fixed: Option<f64>,
    pub soc_min: f64,
    pub displacement: f64,
    pub friction_const: f64,
    pub periodic_frac: f64,
    pub soc_init_frac: f64,
    pub speed_min: f64,
    pub speed_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegEntry {
    pub vessel: String,
    pub origin: String,
    pub destination: String,
    pub distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacement: Option<f64>,
    pub departure: [String; 2],
    pub arrival: [String; 2],
    /// Minimum and maximum travel time in hours.
    pub travel_time: [f64; 2],
}

fn power_factor(unit: &str) -> Option<f64> {
    match unit {
        "MW" => Some(1.0),
        "kW" => Some(1e-3),
        _ => None,
    }
}

fn energy_factor(unit: &str) -> Option<f64> {
    match unit {
        "MWh" => Some(1.0),
        "kWh" => Some(1e-3),
        _ => None,
    }
}

/// Factor to kUSD/MWh.
fn price_factor(unit: &str) -> Option<f64> {
    match unit {
        "kUSD/MWh" | "USD/kWh" => Some(1.0),
        "USD/MWh" => Some(1e-3),
        _ => None,
    }
}

/// Factor to kUSD/MW (and kUSD/MWh for energy assets).
fn capex_factor(unit: &str) -> Option<f64> {
    match unit {
        "kUSD/MW" | "USD/kW" => Some(1.0),
        "USD/MW" => Some(1e-3),
        _ => None,
    }
}

pub fn format_ts(ts: NaiveDateTime) -> String {
    ts.format(TS_FORMAT).to_string()
}

fn parse_ts(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, TS_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M"))
        .ok()
}

/// Converts every quantity to canonical units and rewrites the unit header.
/// Applying it to an already canonical config returns it unchanged.
pub fn normalize_config(cfg: &BundleConfig, file: &str) -> Result<BundleConfig, ScenarioError> {
    let bad = |key: &str, unit: &str| ScenarioError::Field {
        file: file.to_string(),
        key: format!("units.{key}"),
        msg: format!("unsupported unit {unit:?}"),
    };
    let pf = power_factor(&cfg.units.power).ok_or_else(|| bad("power", &cfg.units.power))?;
    let ef = energy_factor(&cfg.units.energy).ok_or_else(|| bad("energy", &cfg.units.energy))?;
    let prf = price_factor(&cfg.units.price).ok_or_else(|| bad("price", &cfg.units.price))?;
    let cf = capex_factor(&cfg.units.capex).ok_or_else(|| bad("capex", &cfg.units.capex))?;
    let mut out = cfg.clone();
    out.units = Units {
        power: "MW".into(),
        energy: "MWh".into(),
        price: "kUSD/MWh".into(),
        capex: "kUSD/MW".into(),
    };
    for p in &mut out.ports {
        p.max_grid_power *= pf;
        p.max_pv *= pf;
        p.storage_power *= pf;
        p.max_storage *= ef;
    }
    for v in &mut out.vessels {
        v.battery_max *= ef;
        v.battery_fixed = v.battery_fixed.map(|b| b * ef);
        v.soc_min *= ef;
        v.friction_const *= ef;
    }
    let c = &mut out.costs;
    c.storage_capex *= cf;
    c.pv_capex *= cf;
    c.grid_capex *= cf;
    c.vessel_battery_capex *= cf;
    for series in out.prices.values_mut() {
        for (_, v) in series.iter_mut() {
            *v *= prf;
        }
    }
    Ok(out)
}

fn read_series(path: &Path) -> Result<Vec<(NaiveDateTime, f64)>, ScenarioError> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => ScenarioError::Io {
            file: file.clone(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
        },
        _ => ScenarioError::Parse {
            file: file.clone(),
            msg: e.to_string(),
        },
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| ScenarioError::Parse {
            file: file.clone(),
            msg: e.to_string(),
        })?
        .clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "value" {
        return Err(ScenarioError::Series {
            file,
            line: 1,
            msg: "header must be `timestamp,value`".into(),
        });
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| ScenarioError::Series {
            file: file.clone(),
            line,
            msg: e.to_string(),
        })?;
        let ts = parse_ts(rec.get(0).unwrap_or("").trim()).ok_or_else(|| ScenarioError::Series {
            file: file.clone(),
            line,
            msg: format!("bad timestamp {:?}", rec.get(0).unwrap_or("")),
        })?;
        let v: f64 = rec
            .get(1)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| ScenarioError::Series {
                file: file.clone(),
                line,
                msg: format!("bad value {:?}", rec.get(1).unwrap_or("")),
            })?;
        if !v.is_finite() {
            return Err(ScenarioError::Series {
                file: file.clone(),
                line,
                msg: "value is not finite".into(),
            });
        }
        out.push((ts, v));
    }
    Ok(out)
}

fn config_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(CONFIG_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Reads the raw config and series without unit conversion.
pub fn read_bundle(path: &Path) -> Result<BundleConfig, ScenarioError> {
    let cfg_path = config_path(path);
    let file = cfg_path.display().to_string();
    let text = fs::read_to_string(&cfg_path).map_err(|source| ScenarioError::Io {
        file: file.clone(),
        source,
    })?;
    let mut cfg: BundleConfig = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        file: file.clone(),
        msg: e.to_string(),
    })?;
    let dir = cfg_path.parent().map(Path::to_path_buf).unwrap_or_default();
    for p in &cfg.ports {
        let prices = read_series(&dir.join(format!("prices_{}.csv", p.id)))?;
        let pv = read_series(&dir.join(format!("pv_{}.csv", p.id)))?;
        cfg.prices.insert(p.id.clone(), prices);
        cfg.pv.insert(p.id.clone(), pv);
    }
    Ok(cfg)
}

/// Loads and unit-normalizes a bundle; `path` is the bundle directory or
/// its `scenario.toml`.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let raw = read_bundle(path)?;
    let file = config_path(path).display().to_string();
    let cfg = normalize_config(&raw, &file)?;
    let dir = config_path(path).parent().map(Path::to_path_buf).unwrap_or_default();
    scenario_from_config(&cfg, &file, &dir)
}

/// Builds a scenario from a normalized config. `dir` is only used to name
/// series files in error messages.
pub fn scenario_from_config(cfg: &BundleConfig, file: &str, dir: &Path) -> Result<Scenario, ScenarioError> {
    let field = |key: String, msg: String| ScenarioError::Field {
        file: file.to_string(),
        key,
        msg,
    };
    let start = parse_ts(&cfg.time.start)
        .ok_or_else(|| field("time.start".into(), format!("bad timestamp {:?}", cfg.time.start)))?;
    if cfg.time.step_minutes.is_nan() || cfg.time.step_minutes <= 0.0 {
        return Err(field("time.step_minutes".into(), "must be positive".into()));
    }
    if cfg.time.periods == 0 {
        return Err(field("time.periods".into(), "must be at least 1".into()));
    }
    let grid = TimeGrid {
        start,
        periods: cfg.time.periods,
        step: cfg.time.step_minutes / 60.0,
    };

    let mut ports = Vec::with_capacity(cfg.ports.len());
    for (k, p) in cfg.ports.iter().enumerate() {
        if cfg.ports[..k].iter().any(|q| q.id == p.id) {
            return Err(field(format!("ports[{k}].id"), format!("duplicate port id {}", p.id)));
        }
        let prices_file = dir.join(format!("prices_{}.csv", p.id)).display().to_string();
        let pv_file = dir.join(format!("pv_{}.csv", p.id)).display().to_string();
        let prices = check_series(&grid, cfg.prices.get(&p.id), &prices_file, |v| {
            (v >= 0.0).then_some(()).ok_or("negative price")
        })?;
        let pv_profile = check_series(&grid, cfg.pv.get(&p.id), &pv_file, |v| {
            (0.0..=1.0).contains(&v).then_some(()).ok_or("capacity factor out of [0,1]")
        })?;
        ports.push(PortSite {
            id: p.id.clone(),
            max_grid_power_bound: p.max_grid_power,
            max_pv_bound: p.max_pv,
            max_storage_bound: p.max_storage,
            storage_power_bound: p.storage_power,
            charge_eff: p.charge_eff,
            discharge_eff: p.discharge_eff,
            storage_soc_min_frac: p.storage_soc_min_frac,
            storage_soc_init_frac: p.storage_soc_init_frac,
            feed_in_ratio: p.feed_in_ratio,
            prices,
            pv_profile,
        });
    }

    let mut vessels = Vec::with_capacity(cfg.vessels.len());
    for (k, v) in cfg.vessels.iter().enumerate() {
        if cfg.vessels[..k].iter().any(|q| q.id == v.id) {
            return Err(field(format!("vessels[{k}].id"), format!("duplicate vessel id {}", v.id)));
        }
        vessels.push(Vessel {
            id: v.id.clone(),
            battery_bound_max: v.battery_max,
            battery_fixed: v.battery_fixed,
            soc_min: v.soc_min,
            displacement: v.displacement,
            friction_const: v.friction_const,
            periodic_frac: v.periodic_frac,
            soc_init_frac: v.soc_init_frac,
            speed_min: v.speed_min,
            speed_max: v.speed_max,
        });
    }

    let mut legs: Vec<Vec<Leg>> = vec![Vec::new(); vessels.len()];
    for (k, l) in cfg.legs.iter().enumerate() {
        let key = |name: &str| format!("legs[{k}].{name}");
        let vi = vessels
            .iter()
            .position(|v| v.id == l.vessel)
            .ok_or_else(|| field(key("vessel"), format!("unknown vessel {:?}", l.vessel)))?;
        let oi = ports
            .iter()
            .position(|p| p.id == l.origin)
            .ok_or_else(|| field(key("origin"), format!("unknown port {:?}", l.origin)))?;
        let di = ports
            .iter()
            .position(|p| p.id == l.destination)
            .ok_or_else(|| field(key("destination"), format!("unknown port {:?}", l.destination)))?;
        let hours = |name: &str, s: &str| -> Result<f64, ScenarioError> {
            parse_ts(s)
                .map(|ts| grid.hours_since_start(ts))
                .ok_or_else(|| field(key(name), format!("bad timestamp {s:?}")))
        };
        let dep = (hours("departure", &l.departure[0])?, hours("departure", &l.departure[1])?);
        let arr = (hours("arrival", &l.arrival[0])?, hours("arrival", &l.arrival[1])?);
        let seq = legs[vi].len() + 1;
        legs[vi].push(Leg {
            vessel: vi,
            seq,
            origin: oi,
            destination: di,
            distance: l.distance,
            displacement: l.displacement.unwrap_or(vessels[vi].displacement),
            dep_window: dep,
            arr_window: arr,
            travel_time_bounds: (l.travel_time[0], l.travel_time[1]),
        });
    }

    Ok(Scenario {
        name: cfg.meta.name.clone(),
        description: cfg.meta.description.clone(),
        grid,
        ports,
        vessels,
        legs,
        costs: CostCoefficients {
            storage_capex: cfg.costs.storage_capex,
            pv_capex: cfg.costs.pv_capex,
            grid_capex: cfg.costs.grid_capex,
            vessel_batt_capex: cfg.costs.vessel_battery_capex,
            amort_infra_years: cfg.costs.amort_infra_years,
            amort_vessel_years: cfg.costs.amort_vessel_years,
        },
        toggles: DesignToggles {
            pv_enabled: cfg.toggles.pv_enabled,
            storage_enabled: cfg.toggles.storage_enabled,
            vessel_sizing_enabled: cfg.toggles.vessel_sizing_enabled,
            grid_power_optimized: cfg.toggles.grid_power_optimized,
        },
    })
}

fn check_series(
    grid: &TimeGrid,
    series: Option<&Vec<(NaiveDateTime, f64)>>,
    file: &str,
    range: impl Fn(f64) -> Result<(), &'static str>,
) -> Result<Vec<f64>, ScenarioError> {
    let err = |line: usize, msg: String| ScenarioError::Series {
        file: file.to_string(),
        line,
        msg,
    };
    let series = series.ok_or_else(|| err(0, "series missing".into()))?;
    if series.len() != grid.periods {
        return Err(err(
            0,
            format!("series has {} rows, expected T = {}", series.len(), grid.periods),
        ));
    }
    let mut out = Vec::with_capacity(series.len());
    for (k, &(ts, v)) in series.iter().enumerate() {
        let line = k + 2;
        if k > 0 && ts <= series[k - 1].0 {
            return Err(err(line, "timestamps must be strictly increasing".into()));
        }
        if ts != super::time_of(grid, k + 1) {
            return Err(err(
                line,
                format!(
                    "timestamp {} is not the start of period {}",
                    format_ts(ts),
                    k + 1
                ),
            ));
        }
        range(v).map_err(|m| err(line, format!("{m}: {v}")))?;
        out.push(v);
    }
    Ok(out)
}

/// Canonical config for a scenario; the inverse of [`scenario_from_config`].
pub fn scenario_to_config(s: &Scenario) -> BundleConfig {
    let ts = |h: f64| format_ts(s.grid.timestamp_at(h));
    let series = |vals: &[f64]| -> Vec<(NaiveDateTime, f64)> {
        vals.iter()
            .enumerate()
            .map(|(k, &v)| (super::time_of(&s.grid, k + 1), v))
            .collect()
    };
    BundleConfig {
        meta: Meta {
            name: s.name.clone(),
            description: s.description.clone(),
        },
        units: Units {
            power: "MW".into(),
            energy: "MWh".into(),
            price: "kUSD/MWh".into(),
            capex: "kUSD/MW".into(),
        },
        time: TimeSection {
            start: format_ts(s.grid.start),
            step_minutes: s.grid.step_minutes(),
            periods: s.grid.periods,
        },
        toggles: Toggles {
            pv_enabled: s.toggles.pv_enabled,
            storage_enabled: s.toggles.storage_enabled,
            vessel_sizing_enabled: s.toggles.vessel_sizing_enabled,
            grid_power_optimized: s.toggles.grid_power_optimized,
        },
        costs: Costs {
            storage_capex: s.costs.storage_capex,
            pv_capex: s.costs.pv_capex,
            grid_capex: s.costs.grid_capex,
            vessel_battery_capex: s.costs.vessel_batt_capex,
            amort_infra_years: s.costs.amort_infra_years,
            amort_vessel_years: s.costs.amort_vessel_years,
        },
        ports: s
            .ports
            .iter()
            .map(|p| PortEntry {
                id: p.id.clone(),
                max_grid_power: p.max_grid_power_bound,
                max_pv: p.max_pv_bound,
                max_storage: p.max_storage_bound,
                storage_power: p.storage_power_bound,
                charge_eff: p.charge_eff,
                discharge_eff: p.discharge_eff,
                storage_soc_min_frac: p.storage_soc_min_frac,
                storage_soc_init_frac: p.storage_soc_init_frac,
                feed_in_ratio: p.feed_in_ratio,
            })
            .collect(),
        vessels: s
            .vessels
            .iter()
            .map(|v| VesselEntry {
                id: v.id.clone(),
                battery_max: v.battery_bound_max,
                battery_fixed: v.battery_fixed,
                soc_min: v.soc_min,
                displacement: v.displacement,
                friction_const: v.friction_const,
                periodic_frac: v.periodic_frac,
                soc_init_frac: v.soc_init_frac,
                speed_min: v.speed_min,
                speed_max: v.speed_max,
            })
            .collect(),
        legs: s
            .legs
            .iter()
            .flatten()
            .map(|l| LegEntry {
                vessel: s.vessels[l.vessel].id.clone(),
                origin: s.ports[l.origin].id.clone(),
                destination: s.ports[l.destination].id.clone(),
                distance: l.distance,
                displacement: (l.displacement != s.vessels[l.vessel].displacement).then_some(l.displacement),
                departure: [ts(l.dep_window.0), ts(l.dep_window.1)],
                arrival: [ts(l.arr_window.0), ts(l.arr_window.1)],
                travel_time: [l.travel_time_bounds.0, l.travel_time_bounds.1],
            })
            .collect(),
        prices: s.ports.iter().map(|p| (p.id.clone(), series(&p.prices))).collect(),
        pv: s.ports.iter().map(|p| (p.id.clone(), series(&p.pv_profile))).collect(),
    }
}

fn write_series(path: &Path, series: &[(NaiveDateTime, f64)]) -> Result<(), ScenarioError> {
    let file = path.display().to_string();
    let io = |e: csv::Error| ScenarioError::Io {
        file: file.clone(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["timestamp", "value"]).map_err(io)?;
    for (ts, v) in series {
        w.write_record([format_ts(*ts), format!("{v:?}")]).map_err(io)?;
    }
    w.flush().map_err(|source| ScenarioError::Io {
        file: file.clone(),
        source,
    })
}

/// Writes a bundle directory with config and series files.
pub fn write_bundle(cfg: &BundleConfig, dir: &Path) -> Result<(), ScenarioError> {
    let dfile = dir.display().to_string();
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        file: dfile.clone(),
        source,
    })?;
    let text = toml::to_string(cfg).map_err(|e| ScenarioError::Parse {
        file: dfile.clone(),
        msg: e.to_string(),
    })?;
    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, text).map_err(|source| ScenarioError::Io {
        file: cfg_path.display().to_string(),
        source,
    })?;
    for (id, series) in &cfg.prices {
        write_series(&dir.join(format!("prices_{id}.csv")), series)?;
    }
    for (id, series) in &cfg.pv {
        write_series(&dir.join(format!("pv_{id}.csv")), series)?;
    }
    Ok(())
}

/// Writes `s` as a canonical-unit bundle into `dir`.
pub fn save_scenario(s: &Scenario, dir: impl AsRef<Path>) -> Result<(), ScenarioError> {
    write_bundle(&scenario_to_config(s), dir.as_ref())
}
