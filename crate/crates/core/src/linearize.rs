//! MILP-compatible pieces for the speed/time coupling and the consumption law
//! `e = k d s^2 w^(2/3)`.

use crate::error::FerryError;
use crate::scenario::{Leg, TimeGrid, Vessel};

const TOL: f64 = 1e-9;

/// Energy (MWh) for one crossing of `distance` nmi at `speed` kn.
pub fn consumption(friction_const: f64, distance: f64, speed: f64, displacement: f64) -> f64 {
    friction_const * distance * speed * speed * displacement.powf(2.0 / 3.0)
}

/// The same law written over travel time, `E(t) = k d^3 w^(2/3) / t^2`.
pub fn consumption_at_time(friction_const: f64, distance: f64, time: f64, displacement: f64) -> f64 {
    consumption(friction_const, distance, distance / time, displacement)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravelOption {
    pub vessel: usize,
    pub leg: usize,
    /// Hours, an integer multiple of the period length.
    pub travel_time: f64,
    pub speed: f64,
    pub consumption: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSegment {
    pub t_lo: f64,
    pub t_hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl EnvelopeSegment {
    pub fn value(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

/// Continuous travel-time interval allowed by both the time and speed bounds.
pub fn travel_interval(leg: &Leg, vessel: &Vessel) -> Option<(f64, f64)> {
    let lo = leg.travel_time_bounds.0.max(leg.distance / vessel.speed_max);
    let hi = leg.travel_time_bounds.1.min(leg.distance / vessel.speed_min);
    (lo <= hi + TOL).then_some((lo, hi.max(lo)))
}

fn infeasible(leg: &Leg, vessel: &Vessel, what: &str) -> FerryError {
    FerryError::Linearize {
        vessel: vessel.id.clone(),
        leg: leg.seq,
        msg: what.to_string(),
    }
}

/// One option per multiple of the period length inside the feasible travel
/// interval, ordered by increasing travel time.
pub fn travel_options(leg: &Leg, vessel: &Vessel, grid: &TimeGrid) -> Result<Vec<TravelOption>, FerryError> {
    let (lo, hi) = travel_interval(leg, vessel)
        .ok_or_else(|| infeasible(leg, vessel, "travel time bounds and speed bounds do not intersect"))?;
    let first = (lo / grid.step - TOL).ceil().max(1.0) as u64;
    let last = (hi / grid.step + TOL).floor() as u64;
    let options: Vec<TravelOption> = (first..=last)
        .map(|m| {
            let t = m as f64 * grid.step;
            let speed = leg.distance / t;
            TravelOption {
                vessel: leg.vessel,
                leg: leg.seq,
                travel_time: t,
                speed,
                consumption: consumption(vessel.friction_const, leg.distance, speed, leg.displacement),
            }
        })
        .collect();
    if options.is_empty() {
        return Err(infeasible(leg, vessel, "no multiple of the period length lies in the travel interval"));
    }
    Ok(options)
}

/// Secants of `E(t)` between `n_breakpoints` uniformly spaced travel times.
/// The pointwise maximum of the returned lines is the piecewise-linear
/// interpolant, which lies on or above `E`.
pub fn secant_envelope(leg: &Leg, vessel: &Vessel, n_breakpoints: usize) -> Result<Vec<EnvelopeSegment>, FerryError> {
    if n_breakpoints < 2 {
        return Err(infeasible(leg, vessel, "an envelope needs at least 2 breakpoints"));
    }
    let (lo, hi) = travel_interval(leg, vessel)
        .ok_or_else(|| infeasible(leg, vessel, "travel time bounds and speed bounds do not intersect"))?;
    let e = |t: f64| consumption_at_time(vessel.friction_const, leg.distance, t, leg.displacement);
    if hi - lo <= TOL {
        return Ok(vec![EnvelopeSegment {
            t_lo: lo,
            t_hi: lo,
            slope: 0.0,
            intercept: e(lo),
        }]);
    }
    let n = n_breakpoints - 1;
    let bp: Vec<f64> = (0..=n)
        .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
        .collect();
    Ok(bp
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let slope = (e(b) - e(a)) / (b - a);
            EnvelopeSegment {
                t_lo: a,
                t_hi: b,
                slope,
                intercept: e(a) - slope * a,
            }
        })
        .collect())
}

/// Modeled consumption at travel time `t`: the maximum over all secant lines.
pub fn envelope_value(segments: &[EnvelopeSegment], t: f64) -> f64 {
    segments.iter().map(|s| s.value(t)).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_respects_speed() {
        let leg = Leg {
            vessel: 0,
            seq: 1,
            origin: 0,
            destination: 1,
            distance: 32.0,
            displacement: 2800.0,
            dep_window: (0.0, 0.0),
            arr_window: (0.0, 3.0),
            travel_time_bounds: (1.0, 2.5),
        };
        let v = Vessel {
            id: "V".into(),
            battery_bound_max: 50.0,
            battery_fixed: None,
            soc_min: 15.0,
            displacement: 2800.0,
            friction_const: 1e-5,
            periodic_frac: 0.5,
            soc_init_frac: 0.8,
            speed_min: 16.0,
            speed_max: 25.0,
        };
        assert_eq!(travel_interval(&leg, &v), Some((1.28, 2.0)));
    }
}
