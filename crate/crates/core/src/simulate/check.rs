use std::fmt;

use super::DispatchTrace;
use crate::model::{VarKey, VarKind};
use crate::scenario::Scenario;
use crate::solver::Solution;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckFamily {
    DepartureWindow,
    ArrivalWindow,
    ArrivalEqualsDeparturePlusTravel,
    LegSequence,
    SpeedBounds,
    MooringGate,
    DepthOfDischarge,
    VesselCapacity,
    PeriodicStart,
    PeriodicEnd,
    DeliveredPowerCap,
    PvAvailability,
    StorageCapacity,
    StorageMinimum,
    StorageTerminal,
    StoragePowerLimit,
    Nonnegativity,
    DesignBounds,
    SolverAgreement,
}

impl CheckFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckFamily::DepartureWindow => "DepartureWindow",
            CheckFamily::ArrivalWindow => "ArrivalWindow",
            CheckFamily::ArrivalEqualsDeparturePlusTravel => "ArrivalEqualsDeparturePlusTravel",
            CheckFamily::LegSequence => "LegSequence",
            CheckFamily::SpeedBounds => "SpeedBounds",
            CheckFamily::MooringGate => "MooringGate",
            CheckFamily::DepthOfDischarge => "DepthOfDischarge",
            CheckFamily::VesselCapacity => "VesselCapacity",
            CheckFamily::PeriodicStart => "PeriodicStart",
            CheckFamily::PeriodicEnd => "PeriodicEnd",
            CheckFamily::DeliveredPowerCap => "DeliveredPowerCap",
            CheckFamily::PvAvailability => "PvAvailability",
            CheckFamily::StorageCapacity => "StorageCapacity",
            CheckFamily::StorageMinimum => "StorageMinimum",
            CheckFamily::StorageTerminal => "StorageTerminal",
            CheckFamily::StoragePowerLimit => "StoragePowerLimit",
            CheckFamily::Nonnegativity => "Nonnegativity",
            CheckFamily::DesignBounds => "DesignBounds",
            CheckFamily::SolverAgreement => "SolverAgreement",
        }
    }
}

impl fmt::Display for CheckFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: CheckFamily,
    pub entity: String,
    pub leg: Option<usize>,
    pub period: Option<usize>,
    /// Amount by which the constraint is exceeded.
    pub residual: f64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.family, self.entity)?;
        if let Some(l) = self.leg {
            write!(f, " leg {l}")?;
        }
        if let Some(p) = self.period {
            write!(f, " period {p}")?;
        }
        write!(f, ": {} (residual {:.3e})", self.message, self.residual)
    }
}

struct Sink {
    tol: f64,
    out: Vec<Violation>,
}

impl Sink {
    /// Records a violation when `residual > tol`.
    fn test(
        &mut self,
        family: CheckFamily,
        entity: &str,
        leg: Option<usize>,
        period: Option<usize>,
        residual: f64,
        message: impl FnOnce() -> String,
    ) {
        if residual > self.tol || residual.is_nan() {
            self.out.push(Violation {
                family,
                entity: entity.to_string(),
                leg,
                period,
                residual,
                message: message(),
            });
        }
    }
}

/// Every constraint of the formulation, evaluated on recomputed quantities.
/// Design values are checked against the bounds implied by the scenario's
/// toggles.
pub fn check(trace: &DispatchTrace, s: &Scenario, tol: f64) -> Vec<Violation> {
    use CheckFamily::*;
    let mut k = Sink { tol, out: Vec::new() };
    let tau = trace.step;

    for (vi, vt) in trace.vessels.iter().enumerate() {
        let v = &s.vessels[vi];
        let id = v.id.as_str();
        let legs = &s.legs[vi];
        let bound_lo = if s.toggles.vessel_sizing_enabled { v.soc_min } else { v.fixed_battery() };
        let bound_hi = if s.toggles.vessel_sizing_enabled { v.battery_bound_max } else { v.fixed_battery() };
        k.test(DesignBounds, id, None, None, (bound_lo - vt.battery).max(vt.battery - bound_hi), || {
            format!("battery {} outside [{bound_lo}, {bound_hi}]", vt.battery)
        });
        for (n, lt) in vt.legs.iter().enumerate() {
            let l = &legs[n];
            let seq = Some(lt.seq);
            let (de, dl) = l.dep_window;
            k.test(DepartureWindow, id, seq, None, (de - lt.departure).max(lt.departure - dl), || {
                format!("departure {:.4} h outside [{de}, {dl}]", lt.departure)
            });
            let (ae, al) = l.arr_window;
            k.test(ArrivalWindow, id, seq, None, (ae - lt.arrival).max(lt.arrival - al), || {
                format!("arrival {:.4} h outside [{ae}, {al}]", lt.arrival)
            });
            match lt.selected_travel_time {
                Some(sel) => k.test(ArrivalEqualsDeparturePlusTravel, id, seq, None, (lt.travel_time - sel).abs(), || {
                    format!("arrival - departure = {:.6} h but selected travel time is {sel} h", lt.travel_time)
                }),
                None => k.test(ArrivalEqualsDeparturePlusTravel, id, seq, None, f64::INFINITY, || {
                    "no travel time selected".to_string()
                }),
            }
            if n > 0 {
                let prev = &vt.legs[n - 1];
                k.test(LegSequence, id, seq, None, prev.arrival - lt.departure, || {
                    format!("departs at {:.4} h before arriving at {:.4} h", lt.departure, prev.arrival)
                });
            }
            let (tmin, tmax) = l.travel_time_bounds;
            let time_res = (tmin - lt.travel_time).max(lt.travel_time - tmax);
            let speed_res = (v.speed_min - lt.speed).max(lt.speed - v.speed_max);
            k.test(SpeedBounds, id, seq, None, time_res.max(speed_res), || {
                format!("speed {:.4} kn over {:.4} h violates bounds", lt.speed, lt.travel_time)
            });
            k.test(DepthOfDischarge, id, seq, None, v.soc_min - lt.e_arr, || {
                format!("arrival energy {:.4} MWh below DoD limit {} MWh", lt.e_arr, v.soc_min)
            });
            k.test(VesselCapacity, id, seq, None, lt.e_dep + lt.e_char - vt.battery, || {
                format!(
                    "energy before departure {:.4} MWh exceeds battery {:.4} MWh",
                    lt.e_dep + lt.e_char,
                    vt.battery
                )
            });
            k.test(Nonnegativity, id, seq, None, -lt.e_char, || "negative charged energy".into());
        }
        if let (Some(first), Some(last)) = (vt.legs.first(), vt.legs.last()) {
            let cap = v.periodic_frac * vt.battery;
            k.test(PeriodicStart, id, Some(first.seq), None, first.e_arr - cap, || {
                format!("first arrival energy {:.4} MWh above {cap:.4} MWh", first.e_arr)
            });
            k.test(PeriodicEnd, id, Some(last.seq), None, cap - last.e_arr, || {
                format!("final arrival energy {:.4} MWh below {cap:.4} MWh", last.e_arr)
            });
        }
        for (p, &e) in vt.soc.iter().enumerate() {
            k.test(DepthOfDischarge, id, None, Some(p + 1), v.soc_min - e, || {
                format!("state of charge {e:.4} MWh below DoD limit")
            });
            k.test(VesselCapacity, id, None, Some(p + 1), e - vt.battery, || {
                format!("state of charge {e:.4} MWh above battery size")
            });
        }
    }

    // vessel charging only while moored at the leg's origin
    for e in &trace.charges {
        let id = s.vessels[e.vessel].id.as_str();
        let leg = Some(e.leg);
        let per = Some(e.period);
        for (name, f) in [("g2v", e.g2v), ("pv2v", e.pv2v), ("b2v", e.b2v)] {
            k.test(Nonnegativity, id, leg, per, -f, || format!("negative {name} flow"));
        }
        let power = e.power();
        if power <= tol {
            continue;
        }
        let vt = &trace.vessels[e.vessel];
        let open = if e.leg == 1 { 0.0 } else { vt.legs[e.leg - 2].arrival };
        let close = vt.legs[e.leg - 1].departure;
        let (ps, pe) = ((e.period - 1) as f64 * tau, e.period as f64 * tau);
        let outside = (open - ps).max(pe - close).max(0.0);
        let residual = if outside > 1e-9 || e.gate < 0.5 { power } else { 0.0 };
        k.test(MooringGate, id, leg, per, residual, || {
            format!(
                "charging {power:.4} MW in [{ps}, {pe}] h outside the mooring window [{open:.4}, {close:.4}] h or with the gate closed"
            )
        });
    }

    for (i, pt) in trace.ports.iter().enumerate() {
        let port = &s.ports[i];
        let id = port.id.as_str();
        let d = pt.design;
        let hi = |on: bool, b: f64| if on { b } else { 0.0 };
        let grid_lo = if s.toggles.grid_power_optimized { 0.0 } else { port.max_grid_power_bound };
        for (name, val, lo, top) in [
            ("grid connection", d.grid_power, grid_lo, port.max_grid_power_bound),
            ("PV", d.pv, 0.0, hi(s.toggles.pv_enabled, port.max_pv_bound)),
            ("storage", d.storage, 0.0, hi(s.toggles.storage_enabled, port.max_storage_bound)),
        ] {
            k.test(DesignBounds, id, None, None, (lo - val).max(val - top), || {
                format!("{name} design {val} outside [{lo}, {top}]")
            });
        }

        // delivered power per vessel and period
        let mut delivered: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for e in trace.charges.iter().filter(|e| e.port == i) {
            *delivered.entry((e.vessel, e.period)).or_insert(0.0) += e.power();
        }
        for (&(v, p), &pw) in &delivered {
            k.test(DeliveredPowerCap, id, None, Some(p), pw - d.grid_power, || {
                format!("{} receives {pw:.4} MW above the installed {:.4} MW", s.vessels[v].id, d.grid_power)
            });
        }

        for p in 0..trace.periods {
            let per = Some(p + 1);
            for (name, f) in [
                ("g2b", pt.g2b[p]),
                ("pv2b", pt.pv2b[p]),
                ("b2g", pt.b2g[p]),
                ("pv2g", pt.pv2g[p]),
            ] {
                k.test(Nonnegativity, id, None, per, -f, || format!("negative {name} flow"));
            }
            let avail = port.pv_profile[p] * d.pv;
            k.test(PvAvailability, id, None, per, pt.pv[p] - avail, || {
                format!("PV use {:.4} MW above available {avail:.4} MW", pt.pv[p])
            });
            let sp = port.storage_power_bound;
            k.test(StoragePowerLimit, id, None, per, pt.storage_in[p].max(pt.storage_out[p]) - sp, || {
                format!("storage power above {sp} MW")
            });
            let e = pt.soc[p];
            k.test(StorageCapacity, id, None, per, e - d.storage, || {
                format!("storage energy {e:.4} MWh above capacity {:.4} MWh", d.storage)
            });
            let floor = port.storage_soc_min_frac * d.storage;
            k.test(StorageMinimum, id, None, per, floor - e, || {
                format!("storage energy {e:.4} MWh below minimum {floor:.4} MWh")
            });
        }
        if let Some(&last) = pt.soc.last() {
            k.test(StorageTerminal, id, None, Some(trace.periods), pt.soc_initial - last, || {
                format!("final storage energy {last:.4} MWh below initial {:.4} MWh", pt.soc_initial)
            });
        }
    }
    k.out
}

/// Differences between recomputed energies and the solver's own state
/// columns, reported as `SolverAgreement` violations.
pub fn compare_with_solver(trace: &DispatchTrace, s: &Scenario, sol: &Solution, tol: f64) -> Vec<Violation> {
    let mut k = Sink { tol, out: Vec::new() };
    for vt in &trace.vessels {
        let id = s.vessels[vt.vessel].id.as_str();
        for lt in &vt.legs {
            for (kind, ours) in [
                (VarKind::EDep, lt.e_dep),
                (VarKind::EChar, lt.e_char),
                (VarKind::EArr, lt.e_arr),
            ] {
                let theirs = sol.get(&VarKey::leg(kind, vt.vessel, lt.seq));
                k.test(CheckFamily::SolverAgreement, id, Some(lt.seq), None, (ours - theirs).abs(), || {
                    format!("{kind}: replay {ours:.9} vs solver {theirs:.9}")
                });
            }
        }
    }
    for pt in &trace.ports {
        let id = s.ports[pt.port].id.as_str();
        for (p, &ours) in pt.soc.iter().enumerate() {
            let theirs = sol.get(&VarKey::port(VarKind::EB, pt.port, p + 1));
            k.test(CheckFamily::SolverAgreement, id, None, Some(p + 1), (ours - theirs).abs(), || {
                format!("E_b: replay {ours:.9} vs solver {theirs:.9}")
            });
        }
    }
    k.out
}
