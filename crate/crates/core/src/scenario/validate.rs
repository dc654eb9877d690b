// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use super::Scenario;
use crate::linearize;

/// One failed invariant. `code` is stable and machine-readable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationRecord {
    pub code: &'static str,
    pub message: String,
}

impl std::fmt::Display for ViolationRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

const EPS: f64 = 1e-9;

fn frac_ok(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn eff_ok(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}

/// Checks every structural invariant of a scenario. The returned list is
/// empty iff the scenario can be assembled into a model.
pub fn validate_scenario(s: &Scenario) -> Vec<ViolationRecord> {
    let mut out = Vec::new();
    let mut push = |code: &'static str, message: String| out.push(ViolationRecord { code, message });
    let g = &s.grid;
    if g.periods == 0 {
        push("grid_empty", "time grid has no periods".into());
    }
    if !(g.step > 0.0) || !g.step.is_finite() {
        push("grid_step", format!("period length {} h is not positive", g.step));
    }
    let horizon = g.horizon_hours();

    for p in &s.ports {
        let id = &p.id;
        for (name, v) in [
            ("max_grid_power", p.max_grid_power_bound),
            ("max_pv", p.max_pv_bound),
            ("max_storage", p.max_storage_bound),
            ("storage_power", p.storage_power_bound),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                push("port_bound", format!("port {id}: {name} = {v} must be finite and >= 0"));
            }
        }
        if !eff_ok(p.charge_eff) || !eff_ok(p.discharge_eff) {
            push(
                "port_efficiency",
                format!(
                    "port {id}: efficiencies ({}, {}) must lie in (0,1]",
                    p.charge_eff, p.discharge_eff
                ),
            );
        }
        if !eff_ok(p.feed_in_ratio) {
            push(
                "port_feed_in_ratio",
                format!("port {id}: feed-in ratio {} must lie in (0,1]", p.feed_in_ratio),
            );
        }
        if !frac_ok(p.storage_soc_min_frac) || !frac_ok(p.storage_soc_init_frac) {
            push("port_soc_fraction", format!("port {id}: storage SoC fractions must lie in [0,1]"));
        } else if p.storage_soc_min_frac > p.storage_soc_init_frac {
            push(
                "port_soc_fraction",
                format!("port {id}: storage minimum fraction exceeds the initial fraction"),
            );
        }
        if p.prices.len() != g.periods {
            push(
                "series_length",
                format!("port {id}: price series has {} values, expected {}", p.prices.len(), g.periods),
            );
        }
        if p.pv_profile.len() != g.periods {
            push(
                "series_length",
                format!("port {id}: PV series has {} values, expected {}", p.pv_profile.len(), g.periods),
            );
        }
        if let Some(v) = p.prices.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            push("price_negative", format!("port {id}: price {v} must be finite and >= 0"));
        }
        if let Some(v) = p.pv_profile.iter().find(|v| !frac_ok(**v)) {
            push("capacity_factor_range", format!("port {id}: capacity factor {v} out of [0,1]"));
        }
    }
    for (k, p) in s.ports.iter().enumerate() {
        if s.ports[..k].iter().any(|q| q.id == p.id) {
            push("duplicate_id", format!("port id {} appears twice", p.id));
        }
    }

    if s.legs.len() != s.vessels.len() {
        push(
            "itinerary_count",
            format!("{} itineraries for {} vessels", s.legs.len(), s.vessels.len()),
        );
    }
    for (vi, v) in s.vessels.iter().enumerate() {
        let id = &v.id;
        if s.vessels[..vi].iter().any(|q| q.id == v.id) {
            push("duplicate_id", format!("vessel id {id} appears twice"));
        }
        if !(v.battery_bound_max > 0.0) || !v.battery_bound_max.is_finite() {
            push("vessel_bound", format!("vessel {id}: battery bound must be positive"));
        }
        if !(v.soc_min >= 0.0) {
            push("vessel_bound", format!("vessel {id}: soc_min must be >= 0"));
        }
        let cap = v.fixed_battery().min(v.battery_bound_max);
        if v.soc_min >= cap {
            push(
                "dod_exceeds_capacity",
                format!("vessel {id}: DoD exceeds capacity (soc_min {} >= battery {})", v.soc_min, cap),
            );
        }
        if let Some(b) = v.battery_fixed.filter(|b| *b > v.battery_bound_max + EPS) {
            push(
                "vessel_bound",
                format!("vessel {id}: fixed battery {b} exceeds the sizing bound {}", v.battery_bound_max),
            );
        }
        if !(v.speed_min > 0.0) || !(v.speed_min < v.speed_max) {
            push(
                "speed_bounds",
                format!("vessel {id}: speed bounds ({}, {}) invalid", v.speed_min, v.speed_max),
            );
        }
        if !(v.friction_const > 0.0) || !v.friction_const.is_finite() {
            push("friction_const", format!("vessel {id}: friction constant must be positive"));
        }
        if !(v.displacement > 0.0) {
            push("vessel_bound", format!("vessel {id}: displacement must be positive"));
        }
        if !frac_ok(v.periodic_frac) || !frac_ok(v.soc_init_frac) {
            push("vessel_soc_fraction", format!("vessel {id}: SoC fractions must lie in [0,1]"));
        }
        let legs = s.legs.get(vi).map(Vec::as_slice).unwrap_or(&[]);
        if legs.is_empty() {
            push("vessel_no_legs", format!("vessel {id} has no legs"));
        }
        for (k, l) in legs.iter().enumerate() {
            let tag = format!("vessel {id} leg {}", k + 1);
            if l.vessel != vi || l.seq != k + 1 {
                push("leg_index", format!("{tag}: stored as vessel {} leg {}", l.vessel, l.seq));
            }
            if l.origin >= s.ports.len() || l.destination >= s.ports.len() {
                push("leg_unknown_port", format!("{tag}: port index out of range"));
                continue;
            }
            if l.origin == l.destination {
                push("leg_same_port", format!("{tag}: origin equals destination"));
            }
            if !(l.distance > 0.0) || !l.distance.is_finite() {
                push("leg_distance", format!("{tag}: distance {} must be positive", l.distance));
            }
            if !(l.displacement > 0.0) {
                push("leg_displacement", format!("{tag}: displacement must be positive"));
            }
            if !(l.dep_window.0 <= l.dep_window.1) || !(l.arr_window.0 <= l.arr_window.1) {
                push("leg_window_order", format!("{tag}: window earliest after latest"));
            }
            let inside = |w: (f64, f64)| w.0 >= -EPS && w.1 <= horizon + EPS;
            if !inside(l.dep_window) || !inside(l.arr_window) {
                push("leg_window_outside_grid", format!("{tag}: window outside the time grid"));
            }
            let (tmin, tmax) = l.travel_time_bounds;
            if !(tmin > 0.0) || !(tmin <= tmax) {
                push("leg_travel_bounds", format!("{tag}: travel time bounds ({tmin}, {tmax}) invalid"));
            } else if v.speed_min > 0.0
                && v.speed_min < v.speed_max
                && l.distance > 0.0
                && g.step > 0.0
                && linearize::travel_options(l, v, g).is_err()
            {
                push(
                    "leg_travel_infeasible",
                    format!("{tag}: no travel time on the grid satisfies the time and speed bounds"),
                );
            }
            if k > 0 {
                let prev = &legs[k - 1];
                if prev.destination != l.origin {
                    let name = |i: usize| s.ports.get(i).map_or("?", |p| p.id.as_str());
                    push(
                        "leg_chain_discontinuity",
                        format!(
                            "{tag}: leg chain discontinuity, departs {} but previous leg ends at {}",
                            name(l.origin),
                            name(prev.destination)
                        ),
                    );
                }
                if l.dep_window.1 < prev.arr_window.0 - EPS {
                    push(
                        "leg_window_sequence",
                        format!("{tag}: latest departure precedes the previous leg's earliest arrival"),
                    );
                }
            }
        }
    }

    let c = &s.costs;
    for (name, v) in [
        ("storage_capex", c.storage_capex),
        ("pv_capex", c.pv_capex),
        ("grid_capex", c.grid_capex),
        ("vessel_battery_capex", c.vessel_batt_capex),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            push("cost_negative", format!("{name} = {v} must be finite and >= 0"));
        }
    }
    if !(c.amort_infra_years > 0.0) || !(c.amort_vessel_years > 0.0) {
        push("amortization", "amortization periods must be positive".into());
    }
    out
}
