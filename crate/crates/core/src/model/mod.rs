//! Assembly of the joint scheduling and sizing problem as a sparse MILP.

mod keys;

use std::collections::{BTreeMap, HashMap};

use milp::{Problem, Sense};

pub use keys::{RowFamily, Shape, VarKey, VarKind};

use crate::error::FerryError;
use crate::linearize::{self, EnvelopeSegment, TravelOption};
use crate::scenario::{validate_scenario, DesignToggles, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearizationMode {
    /// One binary per grid-aligned travel time.
    Candidates,
    /// Continuous travel time with a secant overestimator of consumption.
    Secant { breakpoints: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    pub mode: LinearizationMode,
    /// Multiplier applied to both big-M constants.
    pub big_m_scale: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            mode: LinearizationMode::Candidates,
            big_m_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LegInfo {
    pub vessel: usize,
    pub seq: usize,
    pub origin: usize,
    pub destination: usize,
    pub options: Vec<TravelOption>,
    pub envelope: Vec<EnvelopeSegment>,
    /// Periods in which charging for this leg may take place.
    pub mooring_periods: Vec<usize>,
    pub big_m_power: f64,
}

/// Column handle returned by [`var_lookup`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarRef {
    pub col: usize,
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub problem: Problem,
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    names: HashMap<String, usize>,
    families: Vec<RowFamily>,
    root_bounds: Vec<(f64, f64)>,
    vessel_fixed: Vec<f64>,
    grid_fixed: Vec<f64>,
    pub legs: Vec<Vec<LegInfo>>,
    pub options: ModelOptions,
    pub toggles: DesignToggles,
    pub experiment: Option<u8>,
    pub big_m_time: f64,
}

impl MilpModel {
    pub fn num_cols(&self) -> usize {
        self.problem.num_cols()
    }

    pub fn num_rows(&self) -> usize {
        self.problem.num_rows()
    }

    pub fn keys(&self) -> &[VarKey] {
        &self.keys
    }

    pub fn key(&self, col: usize) -> VarKey {
        self.keys[col]
    }

    pub fn col(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn col_by_name(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn row_family(&self, row: usize) -> RowFamily {
        self.families[row]
    }

    pub fn row_counts(&self) -> BTreeMap<RowFamily, usize> {
        let mut out = BTreeMap::new();
        for f in &self.families {
            *out.entry(*f).or_insert(0) += 1;
        }
        out
    }

    pub fn col_counts(&self) -> BTreeMap<VarKind, usize> {
        let mut out = BTreeMap::new();
        for k in &self.keys {
            *out.entry(k.kind).or_insert(0) += 1;
        }
        out
    }

    pub fn value(&self, x: &[f64], key: &VarKey) -> Option<f64> {
        self.col(key).map(|c| x[c])
    }

    /// Largest upper bound over columns of `kind` under the current bounds.
    pub fn kind_upper(&self, kind: VarKind) -> f64 {
        self.keys
            .iter()
            .zip(&self.problem.cols)
            .filter(|(k, _)| k.kind == kind)
            .map(|(_, c)| c.upper)
            .fold(0.0, f64::max)
    }

    fn set_bounds(&mut self, col: usize, lo: f64, hi: f64) {
        self.problem.cols[col].lower = lo;
        self.problem.cols[col].upper = hi;
    }

    fn fix_kinds(&mut self, kinds: &[VarKind], value: f64) {
        for c in 0..self.keys.len() {
            if kinds.contains(&self.keys[c].kind) {
                self.set_bounds(c, value, value);
            }
        }
    }

    /// Restores the all-features bounds, then closes off what `t` disables.
    pub fn apply_toggles(&mut self, t: DesignToggles) {
        for (c, &(lo, hi)) in self.root_bounds.clone().iter().enumerate() {
            self.set_bounds(c, lo, hi);
        }
        if !t.pv_enabled {
            self.fix_kinds(
                &[VarKind::PPvMax, VarKind::PPv, VarKind::PPv2v, VarKind::PPv2b, VarKind::PPv2g],
                0.0,
            );
        }
        if !t.storage_enabled {
            self.fix_kinds(
                &[
                    VarKind::EBMax,
                    VarKind::EB,
                    VarKind::PBPlus,
                    VarKind::PBMinus,
                    VarKind::PB2v,
                    VarKind::PG2b,
                    VarKind::PPv2b,
                    VarKind::PB2g,
                ],
                0.0,
            );
        }
        if !t.vessel_sizing_enabled {
            for v in 0..self.vessel_fixed.len() {
                let c = self.index[&VarKey::design(VarKind::EVMax, v)];
                let e = self.vessel_fixed[v];
                self.set_bounds(c, e, e);
            }
        }
        if !t.grid_power_optimized {
            for i in 0..self.grid_fixed.len() {
                let c = self.index[&VarKey::design(VarKind::PGMax, i)];
                let g = self.grid_fixed[i];
                self.set_bounds(c, g, g);
            }
        }
        self.toggles = t;
    }
}

/// Design toggles of experiments 1 to 4.
pub fn experiment_toggles(exp: u8) -> Result<DesignToggles, FerryError> {
    let t = |pv, storage, sizing, grid| DesignToggles {
        pv_enabled: pv,
        storage_enabled: storage,
        vessel_sizing_enabled: sizing,
        grid_power_optimized: grid,
    };
    match exp {
        1 => Ok(t(false, false, false, false)),
        2 => Ok(t(true, false, false, true)),
        3 => Ok(t(true, true, false, true)),
        4 => Ok(t(true, true, true, true)),
        _ => Err(FerryError::UnknownExperiment(exp)),
    }
}

/// Copy of `m` with the bounds of experiment `exp`. Only column bounds change.
pub fn fix_experiment(m: &MilpModel, exp: u8) -> Result<MilpModel, FerryError> {
    let t = experiment_toggles(exp)?;
    let mut out = m.clone();
    out.apply_toggles(t);
    out.experiment = Some(exp);
    Ok(out)
}

pub fn var_lookup(m: &MilpModel, key: &VarKey) -> Result<VarRef, FerryError> {
    let col = m
        .col(key)
        .ok_or_else(|| FerryError::UnknownVariable(format!("{key:?}")))?;
    let c = &m.problem.cols[col];
    Ok(VarRef {
        col,
        key: *key,
        lower: c.lower,
        upper: c.upper,
        binary: c.binary,
    })
}

pub fn var_lookup_name(m: &MilpModel, name: &str) -> Result<VarRef, FerryError> {
    let col = m
        .col_by_name(name)
        .ok_or_else(|| FerryError::UnknownVariable(name.to_string()))?;
    var_lookup(m, &m.keys[col])
}

struct Builder<'a> {
    s: &'a Scenario,
    p: Problem,
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    names: HashMap<String, usize>,
    families: Vec<RowFamily>,
}

impl Builder<'_> {
    fn col(&mut self, key: VarKey, lo: f64, hi: f64) -> usize {
        let name = key.name(self.s);
        let c = if key.kind.is_binary() {
            self.p.add_binary(name.clone(), 0.0)
        } else {
            self.p.add_col(name.clone(), lo, hi, 0.0)
        };
        self.keys.push(key);
        self.index.insert(key, c);
        self.names.insert(name, c);
        c
    }

    fn get(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    fn row(&mut self, family: RowFamily, ctx: &str, terms: &[(usize, f64)], sense: Sense, rhs: f64) {
        self.p
            .add_row(format!("{family}[{ctx}]"), family.as_str(), terms, sense, rhs);
        self.families.push(family);
    }
}

/// Assembles the model with every design option available, then applies the
/// scenario's own toggles as bounds.
pub fn build_model(s: &Scenario, opts: ModelOptions) -> Result<MilpModel, FerryError> {
    let violations = validate_scenario(s);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(FerryError::Invalid(text.join("; ")));
    }
    let tau = s.grid.step;
    let periods = s.grid.periods;
    let big_m_time = s.grid.horizon_hours() * opts.big_m_scale;
    const EPS: f64 = 1e-9;

    // per-leg linearization data
    let mut legs: Vec<Vec<LegInfo>> = Vec::with_capacity(s.vessels.len());
    for (vi, v) in s.vessels.iter().enumerate() {
        let mut row = Vec::with_capacity(s.legs[vi].len());
        for (k, l) in s.legs[vi].iter().enumerate() {
            let options = linearize::travel_options(l, v, &s.grid)?;
            let envelope = match opts.mode {
                LinearizationMode::Candidates => Vec::new(),
                LinearizationMode::Secant { breakpoints } => linearize::secant_envelope(l, v, breakpoints)?,
            };
            // a gate can only open once the previous leg can have arrived
            let window_start = if k == 0 {
                0.0
            } else {
                let prev = &s.legs[vi][k - 1];
                let fastest = linearize::travel_interval(prev, v).map_or(0.0, |(lo, _)| lo);
                prev.arr_window.0.max(prev.dep_window.0 + fastest)
            };
            let mooring_periods = (1..=periods)
                .filter(|&p| (p - 1) as f64 * tau >= window_start - EPS && p as f64 * tau <= l.dep_window.1 + EPS)
                .collect();
            row.push(LegInfo {
                vessel: vi,
                seq: l.seq,
                origin: l.origin,
                destination: l.destination,
                options,
                envelope,
                mooring_periods,
                big_m_power: s.ports[l.origin].max_grid_power_bound * opts.big_m_scale,
            });
        }
        legs.push(row);
    }

    let mut b = Builder {
        s,
        p: Problem::new(s.name.clone()),
        keys: Vec::new(),
        index: HashMap::new(),
        names: HashMap::new(),
        families: Vec::new(),
    };

    // design columns
    for (i, port) in s.ports.iter().enumerate() {
        b.col(VarKey::design(VarKind::EBMax, i), 0.0, port.max_storage_bound);
        b.col(VarKey::design(VarKind::PPvMax, i), 0.0, port.max_pv_bound);
        b.col(VarKey::design(VarKind::PGMax, i), 0.0, port.max_grid_power_bound);
    }
    for (vi, v) in s.vessels.iter().enumerate() {
        b.col(VarKey::design(VarKind::EVMax, vi), v.soc_min, v.battery_bound_max);
    }

    // vessel columns
    for (vi, v) in s.vessels.iter().enumerate() {
        let emax = v.battery_bound_max;
        for (k, l) in s.legs[vi].iter().enumerate() {
            let seq = k + 1;
            let info = &legs[vi][k];
            b.col(VarKey::leg(VarKind::TDep, vi, seq), l.dep_window.0, l.dep_window.1);
            b.col(VarKey::leg(VarKind::TArr, vi, seq), l.arr_window.0, l.arr_window.1);
            match opts.mode {
                LinearizationMode::Candidates => {
                    for o in 1..=info.options.len() {
                        b.col(VarKey::leg_at(VarKind::Y, vi, seq, o), 0.0, 1.0);
                    }
                }
                LinearizationMode::Secant { .. } => {
                    let (lo, hi) = linearize::travel_interval(l, v).expect("checked by travel_options");
                    b.col(VarKey::leg(VarKind::TTravel, vi, seq), lo, hi);
                    let e = |t| linearize::consumption_at_time(v.friction_const, l.distance, t, l.displacement);
                    b.col(VarKey::leg(VarKind::ECons, vi, seq), e(hi), e(lo));
                }
            }
            b.col(VarKey::leg(VarKind::EDep, vi, seq), 0.0, emax);
            b.col(VarKey::leg(VarKind::EChar, vi, seq), 0.0, emax);
            b.col(VarKey::leg(VarKind::EArr, vi, seq), 0.0, emax);
            let port = &s.ports[l.origin];
            for &p in &info.mooring_periods {
                let pv_cap = port.max_pv_bound * port.pv_profile[p - 1];
                b.col(VarKey::leg_at(VarKind::Z, vi, seq, p), 0.0, 1.0);
                b.col(VarKey::leg_at(VarKind::PCh, vi, seq, p), 0.0, port.max_grid_power_bound);
                b.col(VarKey::leg_at(VarKind::PG2v, vi, seq, p), 0.0, port.max_grid_power_bound);
                b.col(VarKey::leg_at(VarKind::PPv2v, vi, seq, p), 0.0, pv_cap);
                b.col(VarKey::leg_at(VarKind::PB2v, vi, seq, p), 0.0, port.storage_power_bound);
            }
        }
    }

    // port columns
    for (i, port) in s.ports.iter().enumerate() {
        let users = s.legs.iter().filter(|ls| ls.iter().any(|l| l.origin == i)).count() as f64;
        let sp = port.storage_power_bound;
        for p in 1..=periods {
            let pv_cap = port.max_pv_bound * port.pv_profile[p - 1];
            b.col(VarKey::port(VarKind::PGPlus, i, p), 0.0, users * port.max_grid_power_bound + sp);
            b.col(VarKey::port(VarKind::PGMinus, i, p), 0.0, pv_cap + sp);
            b.col(VarKey::port(VarKind::PPv, i, p), 0.0, pv_cap);
            b.col(VarKey::port(VarKind::PPv2g, i, p), 0.0, pv_cap);
            b.col(VarKey::port(VarKind::PPv2b, i, p), 0.0, pv_cap.min(sp));
            b.col(VarKey::port(VarKind::PG2b, i, p), 0.0, sp);
            b.col(VarKey::port(VarKind::PB2g, i, p), 0.0, sp);
            b.col(VarKey::port(VarKind::PBPlus, i, p), 0.0, sp);
            b.col(VarKey::port(VarKind::PBMinus, i, p), 0.0, sp);
            b.col(VarKey::port(VarKind::EB, i, p), 0.0, port.max_storage_bound);
        }
    }

    // vessel rows
    for (vi, v) in s.vessels.iter().enumerate() {
        let vid = v.id.clone();
        let n = s.legs[vi].len();
        let evmax = b.get(VarKey::design(VarKind::EVMax, vi));
        for (k, info) in legs[vi].iter().enumerate() {
            let seq = k + 1;
            let ctx = format!("{vid},{seq}");
            let tdep = b.get(VarKey::leg(VarKind::TDep, vi, seq));
            let tarr = b.get(VarKey::leg(VarKind::TArr, vi, seq));
            let edep = b.get(VarKey::leg(VarKind::EDep, vi, seq));
            let echar = b.get(VarKey::leg(VarKind::EChar, vi, seq));
            let earr = b.get(VarKey::leg(VarKind::EArr, vi, seq));

            // schedule and consumption
            let mut balance = vec![(earr, 1.0), (edep, -1.0), (echar, -1.0)];
            match opts.mode {
                LinearizationMode::Candidates => {
                    let ys: Vec<usize> = (1..=info.options.len())
                        .map(|o| b.get(VarKey::leg_at(VarKind::Y, vi, seq, o)))
                        .collect();
                    let choice: Vec<(usize, f64)> = ys.iter().map(|&y| (y, 1.0)).collect();
                    b.row(RowFamily::TravelChoice, &ctx, &choice, Sense::Eq, 1.0);
                    let mut arr = vec![(tarr, 1.0), (tdep, -1.0)];
                    arr.extend(ys.iter().zip(&info.options).map(|(&y, o)| (y, -o.travel_time)));
                    b.row(RowFamily::ArrivalEqualsDeparturePlusTravel, &ctx, &arr, Sense::Eq, 0.0);
                    balance.extend(ys.iter().zip(&info.options).map(|(&y, o)| (y, o.consumption)));
                }
                LinearizationMode::Secant { .. } => {
                    let tt = b.get(VarKey::leg(VarKind::TTravel, vi, seq));
                    let ec = b.get(VarKey::leg(VarKind::ECons, vi, seq));
                    b.row(
                        RowFamily::ArrivalEqualsDeparturePlusTravel,
                        &ctx,
                        &[(tarr, 1.0), (tdep, -1.0), (tt, -1.0)],
                        Sense::Eq,
                        0.0,
                    );
                    for (j, seg) in info.envelope.iter().enumerate() {
                        b.row(
                            RowFamily::ConsumptionEnvelope,
                            &format!("{ctx},{}", j + 1),
                            &[(ec, 1.0), (tt, -seg.slope)],
                            Sense::Ge,
                            seg.intercept,
                        );
                    }
                    balance.push((ec, 1.0));
                }
            }
            if k > 0 {
                let prev_arr_t = b.get(VarKey::leg(VarKind::TArr, vi, seq - 1));
                b.row(RowFamily::LegSequence, &ctx, &[(tdep, 1.0), (prev_arr_t, -1.0)], Sense::Ge, 0.0);
            }

            // energy
            b.row(RowFamily::LegEnergyBalance, &ctx, &balance, Sense::Le, 0.0);
            if k == 0 {
                b.row(
                    RowFamily::InitialCharge,
                    &ctx,
                    &[(edep, 1.0), (evmax, -v.soc_init_frac)],
                    Sense::Eq,
                    0.0,
                );
            } else {
                let prev = b.get(VarKey::leg(VarKind::EArr, vi, seq - 1));
                b.row(RowFamily::LegContinuity, &ctx, &[(edep, 1.0), (prev, -1.0)], Sense::Eq, 0.0);
            }
            let mut charged = vec![(echar, 1.0)];
            charged.extend(
                info.mooring_periods
                    .iter()
                    .map(|&p| (b.get(VarKey::leg_at(VarKind::PCh, vi, seq, p)), -tau)),
            );
            b.row(RowFamily::ChargedEnergy, &ctx, &charged, Sense::Eq, 0.0);
            b.row(RowFamily::DepthOfDischarge, &ctx, &[(earr, 1.0)], Sense::Ge, v.soc_min);
            if k == 0 {
                // the starting charge is held to the same floor
                let start = format!("{ctx},start");
                b.row(RowFamily::DepthOfDischarge, &start, &[(edep, 1.0)], Sense::Ge, v.soc_min);
            }
            b.row(
                RowFamily::VesselCapacity,
                &ctx,
                &[(edep, 1.0), (echar, 1.0), (evmax, -1.0)],
                Sense::Le,
                0.0,
            );
            if k == 0 {
                b.row(
                    RowFamily::PeriodicStart,
                    &vid,
                    &[(earr, 1.0), (evmax, -v.periodic_frac)],
                    Sense::Le,
                    0.0,
                );
            }
            if k + 1 == n {
                b.row(
                    RowFamily::PeriodicEnd,
                    &vid,
                    &[(earr, 1.0), (evmax, -v.periodic_frac)],
                    Sense::Ge,
                    0.0,
                );
            }

            // charging windows
            let prev_tarr = (k > 0).then(|| b.get(VarKey::leg(VarKind::TArr, vi, seq - 1)));
            let m_p = info.big_m_power;
            for &p in &info.mooring_periods {
                let pctx = format!("{ctx},{p}");
                let z = b.get(VarKey::leg_at(VarKind::Z, vi, seq, p));
                let pch = b.get(VarKey::leg_at(VarKind::PCh, vi, seq, p));
                let g2v = b.get(VarKey::leg_at(VarKind::PG2v, vi, seq, p));
                let pv2v = b.get(VarKey::leg_at(VarKind::PPv2v, vi, seq, p));
                let b2v = b.get(VarKey::leg_at(VarKind::PB2v, vi, seq, p));
                b.row(RowFamily::MooringGate, &pctx, &[(pch, 1.0), (z, -m_p)], Sense::Le, 0.0);
                b.row(
                    RowFamily::ChargingSourceSplit,
                    &pctx,
                    &[(pch, 1.0), (g2v, -1.0), (pv2v, -1.0), (b2v, -1.0)],
                    Sense::Eq,
                    0.0,
                );
                b.row(
                    RowFamily::DepartureLink,
                    &pctx,
                    &[(tdep, 1.0), (z, -big_m_time)],
                    Sense::Ge,
                    p as f64 * tau - big_m_time,
                );
                if let Some(ta) = prev_tarr {
                    b.row(
                        RowFamily::ArrivalLink,
                        &pctx,
                        &[(ta, 1.0), (z, big_m_time)],
                        Sense::Le,
                        (p - 1) as f64 * tau + big_m_time,
                    );
                }
            }
        }
    }

    // port rows
    for (i, port) in s.ports.iter().enumerate() {
        let pid = port.id.clone();
        let pgmax = b.get(VarKey::design(VarKind::PGMax, i));
        let pvmax = b.get(VarKey::design(VarKind::PPvMax, i));
        let ebmax = b.get(VarKey::design(VarKind::EBMax, i));
        // legs originating here, by period
        let mut at_port: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for row in &legs {
            for info in row.iter().filter(|l| l.origin == i) {
                for &p in &info.mooring_periods {
                    at_port.entry(p).or_default().push((info.vessel, info.seq));
                }
            }
        }
        for p in 1..=periods {
            let ctx = format!("{pid},{p}");
            let here = at_port.get(&p).cloned().unwrap_or_default();
            let port_col = |b: &Builder, kind| b.get(VarKey::port(kind, i, p));
            let leg_cols = |b: &Builder, kind| -> Vec<usize> {
                here.iter()
                    .map(|&(v, l)| b.get(VarKey::leg_at(kind, v, l, p)))
                    .collect()
            };

            let mut vessels_here: Vec<usize> = here.iter().map(|&(v, _)| v).collect();
            vessels_here.dedup();
            for v in vessels_here {
                let mut terms: Vec<(usize, f64)> = here
                    .iter()
                    .filter(|&&(vv, _)| vv == v)
                    .map(|&(vv, l)| (b.get(VarKey::leg_at(VarKind::PCh, vv, l, p)), 1.0))
                    .collect();
                terms.push((pgmax, -1.0));
                b.row(
                    RowFamily::DeliveredPowerCap,
                    &format!("{pid},{},{p}", s.vessels[v].id),
                    &terms,
                    Sense::Le,
                    0.0,
                );
            }

            let pgp = port_col(&b, VarKind::PGPlus);
            let pgm = port_col(&b, VarKind::PGMinus);
            let ppv = port_col(&b, VarKind::PPv);
            let pv2g = port_col(&b, VarKind::PPv2g);
            let pv2b = port_col(&b, VarKind::PPv2b);
            let g2b = port_col(&b, VarKind::PG2b);
            let b2g = port_col(&b, VarKind::PB2g);
            let pbp = port_col(&b, VarKind::PBPlus);
            let pbm = port_col(&b, VarKind::PBMinus);
            let eb = port_col(&b, VarKind::EB);

            let mut import = vec![(pgp, 1.0), (g2b, -1.0)];
            import.extend(leg_cols(&b, VarKind::PG2v).into_iter().map(|c| (c, -1.0)));
            b.row(RowFamily::GridImportBalance, &ctx, &import, Sense::Eq, 0.0);
            b.row(
                RowFamily::GridExportBalance,
                &ctx,
                &[(pgm, 1.0), (pv2g, -1.0), (b2g, -1.0)],
                Sense::Eq,
                0.0,
            );
            b.row(
                RowFamily::PvAvailability,
                &ctx,
                &[(ppv, 1.0), (pvmax, -port.pv_profile[p - 1])],
                Sense::Le,
                0.0,
            );
            let mut split = vec![(ppv, 1.0), (pv2b, -1.0), (pv2g, -1.0)];
            split.extend(leg_cols(&b, VarKind::PPv2v).into_iter().map(|c| (c, -1.0)));
            b.row(RowFamily::PvSplit, &ctx, &split, Sense::Eq, 0.0);
            let mut out = vec![(pbm, 1.0), (b2g, -1.0)];
            out.extend(leg_cols(&b, VarKind::PB2v).into_iter().map(|c| (c, -1.0)));
            b.row(RowFamily::StorageDischargeSplit, &ctx, &out, Sense::Eq, 0.0);
            b.row(
                RowFamily::StorageChargeSplit,
                &ctx,
                &[(pbp, 1.0), (g2b, -1.0), (pv2b, -1.0)],
                Sense::Eq,
                0.0,
            );
            let mut dynamics = vec![
                (eb, 1.0),
                (pbp, -tau * port.charge_eff),
                (pbm, tau / port.discharge_eff),
            ];
            if p == 1 {
                dynamics.push((ebmax, -port.storage_soc_init_frac));
            } else {
                dynamics.push((b.get(VarKey::port(VarKind::EB, i, p - 1)), -1.0));
            }
            b.row(RowFamily::StorageDynamics, &ctx, &dynamics, Sense::Eq, 0.0);
            b.row(RowFamily::StorageCapacity, &ctx, &[(eb, 1.0), (ebmax, -1.0)], Sense::Le, 0.0);
            b.row(
                RowFamily::StorageMinimum,
                &ctx,
                &[(eb, 1.0), (ebmax, -port.storage_soc_min_frac)],
                Sense::Ge,
                0.0,
            );
            if p == periods {
                b.row(
                    RowFamily::StorageTerminal,
                    &pid,
                    &[(eb, 1.0), (ebmax, -port.storage_soc_init_frac)],
                    Sense::Ge,
                    0.0,
                );
            }
        }
    }

    let Builder {
        mut p,
        keys,
        index,
        names,
        families,
        ..
    } = b;
    let costs = objective_coefficients(s, &keys);
    for (c, cost) in p.cols.iter_mut().zip(costs) {
        c.cost = cost;
    }
    p.compress();
    let root_bounds = p.cols.iter().map(|c| (c.lower, c.upper)).collect();
    let mut m = MilpModel {
        problem: p,
        keys,
        index,
        names,
        families,
        root_bounds,
        vessel_fixed: s.vessels.iter().map(|v| v.fixed_battery()).collect(),
        grid_fixed: s.ports.iter().map(|p| p.max_grid_power_bound).collect(),
        legs,
        options: opts,
        toggles: DesignToggles::ALL,
        experiment: None,
        big_m_time,
    };
    m.apply_toggles(s.toggles);
    Ok(m)
}

fn objective_coefficients(s: &Scenario, keys: &[VarKey]) -> Vec<f64> {
    let h = s.grid.horizon_hours();
    let a_v = s.costs.vessel_factor(h);
    let a_i = s.costs.infra_factor(h);
    let tau = s.grid.step;
    keys.iter()
        .map(|k| match k.kind {
            VarKind::EVMax => a_v * s.costs.vessel_batt_capex,
            VarKind::EBMax => a_i * s.costs.storage_capex,
            VarKind::PPvMax => a_i * s.costs.pv_capex,
            VarKind::PGMax => a_i * s.costs.grid_capex,
            VarKind::PGPlus => tau * s.ports[k.entity].prices[k.index.unwrap() - 1],
            VarKind::PGMinus => {
                let port = &s.ports[k.entity];
                -tau * port.feed_in_ratio * port.prices[k.index.unwrap() - 1]
            }
            _ => 0.0,
        })
        .collect()
}

/// Objective vector of `m` for scenario `s`: amortized capital plus energy
/// purchases minus feed-in revenue.
pub fn build_objective(s: &Scenario, m: &MilpModel) -> Vec<f64> {
    objective_coefficients(s, &m.keys)
}

/// Where a decision symbol of the formulation lives among the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolHousing {
    pub symbol: &'static str,
    pub housed_by: Vec<VarKind>,
}

/// Maps every decision symbol to the column families that represent it in
/// `m`. An entry with an empty `housed_by` is an unhoused symbol.
pub fn symbol_coverage(m: &MilpModel) -> Vec<SymbolHousing> {
    use VarKind::*;
    let present = m.col_counts();
    let secant = matches!(m.options.mode, LinearizationMode::Secant { .. });
    let travel: &[VarKind] = if secant { &[TTravel] } else { &[Y] };
    let cons: &[VarKind] = if secant { &[ECons] } else { &[Y] };
    let table: Vec<(&'static str, &[VarKind])> = vec![
        ("P_g,i^max", &[PGMax]),
        ("P_pv,i^max", &[PPvMax]),
        ("E_b,i^max", &[EBMax]),
        ("E_b,i(t)", &[EB]),
        ("P_b,i(t)", &[PBPlus, PBMinus]),
        ("P_b,i^+(t)", &[PBPlus]),
        ("P_b,i^-(t)", &[PBMinus]),
        ("P_g,i(t)", &[PGPlus, PGMinus]),
        ("P_g,i^+(t)", &[PGPlus]),
        ("P_g,i^-(t)", &[PGMinus]),
        ("P_pv,i(t)", &[PPv]),
        ("E_v^max", &[EVMax]),
        ("E_v(t)", &[EDep, EChar, EArr]),
        ("E_v,l^dep", &[EDep]),
        ("E_v,l^arr", &[EArr]),
        ("E_v,l^char", &[EChar]),
        ("E_v,l^cons", cons),
        ("P^ch_v,l(t)", &[PCh]),
        ("t_v,l^travel", travel),
        ("s_v,l", travel),
        ("t_v,l^dep,act", &[TDep]),
        ("t_v,l^arr,act", &[TArr]),
        ("Z_v,l(t)", &[Z]),
        ("P^g2v_i,v,l(t)", &[PG2v]),
        ("P^pv2v_i,v,l(t)", &[PPv2v]),
        ("P^b2v_i,v,l(t)", &[PB2v]),
        ("P^g2b_i(t)", &[PG2b]),
        ("P^pv2b_i(t)", &[PPv2b]),
        ("P^b2g_i(t)", &[PB2g]),
        ("P^pv2g_i(t)", &[PPv2g]),
    ];
    table
        .into_iter()
        .map(|(symbol, kinds)| SymbolHousing {
            symbol,
            housed_by: kinds.iter().copied().filter(|k| present.contains_key(k)).collect(),
        })
        .collect()
}
