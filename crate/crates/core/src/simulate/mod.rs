//! Independent replay of a solution. Everything here is recomputed from the
//! flow, design and schedule values; solver state columns (storage energy,
//! vessel leg energies) are never read except by [`compare_with_solver`].

mod brute;
mod check;
mod cost;
mod export;

use std::collections::BTreeMap;

pub use brute::{brute_force, brute_force_model, MAX_FREE_BINARIES};
pub use check::{check, compare_with_solver, CheckFamily, Violation, DEFAULT_TOLERANCE};
pub use cost::{recompute_cost, CostBreakdown, PortCost};
pub use export::write_traces;

use crate::linearize;
use crate::model::{Shape, VarKey, VarKind};
use crate::scenario::Scenario;
use crate::solver::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PortDesign {
    pub grid_power: f64,
    pub pv: f64,
    pub storage: f64,
}

/// Per-period flows and storage state of one port. All vectors have length T.
#[derive(Debug, Clone, PartialEq)]
pub struct PortTrace {
    pub port: usize,
    pub design: PortDesign,
    pub g2v: Vec<f64>,
    pub pv2v: Vec<f64>,
    pub b2v: Vec<f64>,
    pub g2b: Vec<f64>,
    pub pv2b: Vec<f64>,
    pub b2g: Vec<f64>,
    pub pv2g: Vec<f64>,
    pub grid_import: Vec<f64>,
    pub grid_export: Vec<f64>,
    pub pv: Vec<f64>,
    pub storage_in: Vec<f64>,
    pub storage_out: Vec<f64>,
    pub soc_initial: f64,
    /// End-of-period storage energy.
    pub soc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegTrace {
    pub seq: usize,
    pub origin: usize,
    pub destination: usize,
    pub departure: f64,
    pub arrival: f64,
    pub travel_time: f64,
    /// Travel time of the selected option or continuous travel variable.
    pub selected_travel_time: Option<f64>,
    pub speed: f64,
    /// Consumption law evaluated at the realized travel time.
    pub consumption: f64,
    pub e_dep: f64,
    pub e_char: f64,
    pub e_arr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VesselTrace {
    pub vessel: usize,
    pub battery: f64,
    pub soc_initial: f64,
    /// End-of-period battery energy.
    pub soc: Vec<f64>,
    /// Charging power (MW) per period.
    pub charging: Vec<f64>,
    /// Propulsion power (MW) per period: each leg's consumption spread
    /// evenly over its crossing.
    pub consumption: Vec<f64>,
    /// Port where the vessel is flagged moored in each period.
    pub moored: Vec<Option<usize>>,
    pub legs: Vec<LegTrace>,
}

/// Charging of one vessel for one leg during one period at one port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeEvent {
    pub vessel: usize,
    pub leg: usize,
    pub period: usize,
    pub port: usize,
    pub g2v: f64,
    pub pv2v: f64,
    pub b2v: f64,
    pub gate: f64,
}

impl ChargeEvent {
    pub fn power(&self) -> f64 {
        self.g2v + self.pv2v + self.b2v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchTrace {
    pub periods: usize,
    pub step: f64,
    pub ports: Vec<PortTrace>,
    pub vessels: Vec<VesselTrace>,
    pub charges: Vec<ChargeEvent>,
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Rebuilds every energy and power profile of `sol` by forward recursion.
pub fn replay(s: &Scenario, sol: &Solution) -> DispatchTrace {
    let t = s.grid.periods;
    let tau = s.grid.step;
    let get = |kind, entity, idx: usize| sol.get(&VarKey::port(kind, entity, idx));

    // charging events, from whatever vessel-side flows the solution carries
    let mut events: BTreeMap<(usize, usize, usize), ChargeEvent> = BTreeMap::new();
    for (key, &v) in &sol.values {
        if key.kind.shape() != Shape::VesselLegPeriod || key.kind == VarKind::PCh {
            continue;
        }
        let (vi, leg, p) = (key.entity, key.leg.unwrap_or(0), key.index.unwrap_or(0));
        if vi >= s.vessels.len() || leg == 0 || leg > s.legs[vi].len() || p == 0 || p > t {
            continue;
        }
        let e = events.entry((vi, leg, p)).or_insert(ChargeEvent {
            vessel: vi,
            leg,
            period: p,
            port: s.legs[vi][leg - 1].origin,
            g2v: 0.0,
            pv2v: 0.0,
            b2v: 0.0,
            gate: 0.0,
        });
        match key.kind {
            VarKind::PG2v => e.g2v = v,
            VarKind::PPv2v => e.pv2v = v,
            VarKind::PB2v => e.b2v = v,
            VarKind::Z => e.gate = v,
            _ => {}
        }
    }
    let charges: Vec<ChargeEvent> = events.into_values().collect();

    let ports = s
        .ports
        .iter()
        .enumerate()
        .map(|(i, port)| {
            let design = PortDesign {
                grid_power: sol.get(&VarKey::design(VarKind::PGMax, i)),
                pv: sol.get(&VarKey::design(VarKind::PPvMax, i)),
                storage: sol.get(&VarKey::design(VarKind::EBMax, i)),
            };
            let series = |kind| (1..=t).map(|p| get(kind, i, p)).collect::<Vec<f64>>();
            let (mut g2v, mut pv2v, mut b2v) = (vec![0.0; t], vec![0.0; t], vec![0.0; t]);
            for e in charges.iter().filter(|e| e.port == i) {
                g2v[e.period - 1] += e.g2v;
                pv2v[e.period - 1] += e.pv2v;
                b2v[e.period - 1] += e.b2v;
            }
            let g2b = series(VarKind::PG2b);
            let pv2b = series(VarKind::PPv2b);
            let b2g = series(VarKind::PB2g);
            let pv2g = series(VarKind::PPv2g);
            let grid_import: Vec<f64> = (0..t).map(|p| g2v[p] + g2b[p]).collect();
            let grid_export: Vec<f64> = (0..t).map(|p| pv2g[p] + b2g[p]).collect();
            let pv: Vec<f64> = (0..t).map(|p| pv2v[p] + pv2b[p] + pv2g[p]).collect();
            let storage_in: Vec<f64> = (0..t).map(|p| g2b[p] + pv2b[p]).collect();
            let storage_out: Vec<f64> = (0..t).map(|p| b2v[p] + b2g[p]).collect();
            let soc_initial = port.storage_soc_init_frac * design.storage;
            let mut soc = Vec::with_capacity(t);
            let mut e = soc_initial;
            for p in 0..t {
                e += tau * port.charge_eff * storage_in[p] - tau * storage_out[p] / port.discharge_eff;
                soc.push(e);
            }
            PortTrace {
                port: i,
                design,
                g2v,
                pv2v,
                b2v,
                g2b,
                pv2b,
                b2g,
                pv2g,
                grid_import,
                grid_export,
                pv,
                storage_in,
                storage_out,
                soc_initial,
                soc,
            }
        })
        .collect();

    let vessels = s
        .vessels
        .iter()
        .enumerate()
        .map(|(vi, v)| {
            let battery = sol.get(&VarKey::design(VarKind::EVMax, vi));
            let mut charging = vec![0.0; t];
            let mut moored = vec![None; t];
            let mut leg_charge = vec![0.0; s.legs[vi].len()];
            for e in charges.iter().filter(|e| e.vessel == vi) {
                charging[e.period - 1] += e.power();
                leg_charge[e.leg - 1] += tau * e.power();
                if e.gate >= 0.5 {
                    moored[e.period - 1] = Some(e.port);
                }
            }
            let soc_initial = v.soc_init_frac * battery;
            let mut e_dep = soc_initial;
            let mut legs = Vec::with_capacity(s.legs[vi].len());
            for (k, l) in s.legs[vi].iter().enumerate() {
                let seq = k + 1;
                let departure = sol.get(&VarKey::leg(VarKind::TDep, vi, seq));
                let arrival = sol.get(&VarKey::leg(VarKind::TArr, vi, seq));
                let travel_time = arrival - departure;
                let selected_travel_time = selected_travel(s, sol, vi, seq);
                let speed = if travel_time > 0.0 { l.distance / travel_time } else { f64::INFINITY };
                let consumption = linearize::consumption(v.friction_const, l.distance, speed, l.displacement);
                let e_char = leg_charge[k];
                let e_arr = e_dep + e_char - consumption;
                legs.push(LegTrace {
                    seq,
                    origin: l.origin,
                    destination: l.destination,
                    departure,
                    arrival,
                    travel_time,
                    selected_travel_time,
                    speed,
                    consumption,
                    e_dep,
                    e_char,
                    e_arr,
                });
                e_dep = e_arr;
            }
            let mut consumption = vec![0.0; t];
            for leg in legs.iter().filter(|l| l.travel_time > 0.0) {
                for (p, c) in consumption.iter_mut().enumerate() {
                    let window = (p as f64 * tau, (p + 1) as f64 * tau);
                    *c += leg.consumption * overlap(window, (leg.departure, leg.arrival)) / (leg.travel_time * tau);
                }
            }
            let mut soc = Vec::with_capacity(t);
            let mut e = soc_initial;
            for p in 0..t {
                e += tau * (charging[p] - consumption[p]);
                soc.push(e);
            }
            VesselTrace {
                vessel: vi,
                battery,
                soc_initial,
                soc,
                charging,
                consumption,
                moored,
                legs,
            }
        })
        .collect();

    DispatchTrace {
        periods: t,
        step: tau,
        ports,
        vessels,
        charges,
    }
}

/// Travel time recorded by the travel-choice selectors (the one with the
/// largest value) or by the continuous travel-time column.
fn selected_travel(s: &Scenario, sol: &Solution, vi: usize, seq: usize) -> Option<f64> {
    if let Some(t) = sol.try_get(&VarKey::leg(VarKind::TTravel, vi, seq)) {
        return Some(t);
    }
    let leg = s.leg(vi, seq);
    let options = linearize::travel_options(leg, &s.vessels[vi], &s.grid).ok()?;
    options
        .iter()
        .enumerate()
        .filter_map(|(k, o)| {
            sol.try_get(&VarKey::leg_at(VarKind::Y, vi, seq, k + 1))
                .map(|y| (y, o.travel_time))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, t)| t)
}
