use std::fmt;

use crate::error::FerryError;
use crate::scenario::Scenario;

/// Column families of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Stationary storage energy at the end of a period.
    EB,
    /// Power into stationary storage.
    PBPlus,
    /// Power out of stationary storage.
    PBMinus,
    PGPlus,
    PGMinus,
    PPv,
    PG2v,
    PPv2v,
    PB2v,
    PG2b,
    PPv2b,
    PB2g,
    PPv2g,
    EArr,
    EDep,
    EChar,
    EVMax,
    EBMax,
    PPvMax,
    PGMax,
    /// Mooring / charging-allowed binary.
    Z,
    /// Travel-option selector.
    Y,
    TDep,
    TArr,
    /// Aggregated charging power of one vessel on one leg.
    PCh,
    /// Continuous travel time (secant mode).
    TTravel,
    /// Modeled consumption (secant mode).
    ECons,
}

/// What a column is indexed by, after its entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    PortPeriod,
    PortDesign,
    VesselDesign,
    VesselLeg,
    VesselLegPeriod,
    VesselLegOption,
}

impl VarKind {
    pub const ALL: [VarKind; 27] = [
        VarKind::EB,
        VarKind::PBPlus,
        VarKind::PBMinus,
        VarKind::PGPlus,
        VarKind::PGMinus,
        VarKind::PPv,
        VarKind::PG2v,
        VarKind::PPv2v,
        VarKind::PB2v,
        VarKind::PG2b,
        VarKind::PPv2b,
        VarKind::PB2g,
        VarKind::PPv2g,
        VarKind::EArr,
        VarKind::EDep,
        VarKind::EChar,
        VarKind::EVMax,
        VarKind::EBMax,
        VarKind::PPvMax,
        VarKind::PGMax,
        VarKind::Z,
        VarKind::Y,
        VarKind::TDep,
        VarKind::TArr,
        VarKind::PCh,
        VarKind::TTravel,
        VarKind::ECons,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::EB => "E_b",
            VarKind::PBPlus => "P_b_plus",
            VarKind::PBMinus => "P_b_minus",
            VarKind::PGPlus => "P_g_plus",
            VarKind::PGMinus => "P_g_minus",
            VarKind::PPv => "P_pv",
            VarKind::PG2v => "P_g2v",
            VarKind::PPv2v => "P_pv2v",
            VarKind::PB2v => "P_b2v",
            VarKind::PG2b => "P_g2b",
            VarKind::PPv2b => "P_pv2b",
            VarKind::PB2g => "P_b2g",
            VarKind::PPv2g => "P_pv2g",
            VarKind::EArr => "E_arr",
            VarKind::EDep => "E_dep",
            VarKind::EChar => "E_char",
            VarKind::EVMax => "E_v_max",
            VarKind::EBMax => "E_b_max",
            VarKind::PPvMax => "P_pv_max",
            VarKind::PGMax => "P_g_max",
            VarKind::Z => "Z",
            VarKind::Y => "Y",
            VarKind::TDep => "t_dep",
            VarKind::TArr => "t_arr",
            VarKind::PCh => "P_ch",
            VarKind::TTravel => "t_travel",
            VarKind::ECons => "E_cons",
        }
    }

    pub fn parse(s: &str) -> Option<VarKind> {
        VarKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn shape(self) -> Shape {
        use VarKind::*;
        match self {
            EB | PBPlus | PBMinus | PGPlus | PGMinus | PPv | PG2b | PPv2b | PB2g | PPv2g => Shape::PortPeriod,
            EBMax | PPvMax | PGMax => Shape::PortDesign,
            EVMax => Shape::VesselDesign,
            EArr | EDep | EChar | TDep | TArr | TTravel | ECons => Shape::VesselLeg,
            Z | PCh | PG2v | PPv2v | PB2v => Shape::VesselLegPeriod,
            Y => Shape::VesselLegOption,
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, VarKind::Z | VarKind::Y)
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Name tuple of a column. `entity` is a port or vessel index depending on
/// the kind; `leg` is 1-based; `index` is a 1-based period or option number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub kind: VarKind,
    pub entity: usize,
    pub leg: Option<usize>,
    pub index: Option<usize>,
}

impl VarKey {
    pub fn port(kind: VarKind, port: usize, period: usize) -> Self {
        VarKey {
            kind,
            entity: port,
            leg: None,
            index: Some(period),
        }
    }

    pub fn design(kind: VarKind, entity: usize) -> Self {
        VarKey {
            kind,
            entity,
            leg: None,
            index: None,
        }
    }

    pub fn leg(kind: VarKind, vessel: usize, leg: usize) -> Self {
        VarKey {
            kind,
            entity: vessel,
            leg: Some(leg),
            index: None,
        }
    }

    pub fn leg_at(kind: VarKind, vessel: usize, leg: usize, index: usize) -> Self {
        VarKey {
            kind,
            entity: vessel,
            leg: Some(leg),
            index: Some(index),
        }
    }

    /// Human-readable name such as `Z[V1,2,10]` or `P_pv[CO,300]`.
    pub fn name(&self, s: &Scenario) -> String {
        let entity = match self.kind.shape() {
            Shape::PortPeriod | Shape::PortDesign => s.ports[self.entity].id.as_str(),
            _ => s.vessels[self.entity].id.as_str(),
        };
        let mut out = format!("{}[{}", self.kind, entity);
        if let Some(l) = self.leg {
            out.push_str(&format!(",{l}"));
        }
        if let Some(i) = self.index {
            out.push_str(&format!(",{i}"));
        }
        out.push(']');
        out
    }

    /// Inverse of [`VarKey::name`]. Only checks the syntax and that the
    /// entity exists; whether the column is in a model is up to the caller.
    pub fn parse(s: &Scenario, name: &str) -> Result<VarKey, FerryError> {
        let unknown = || FerryError::UnknownVariable(name.to_string());
        let (kind, rest) = name.split_once('[').ok_or_else(unknown)?;
        let body = rest.strip_suffix(']').ok_or_else(unknown)?;
        let kind = VarKind::parse(kind.trim()).ok_or_else(unknown)?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        let num = |p: &str| p.parse::<usize>().ok().filter(|&v| v >= 1);
        let entity = match kind.shape() {
            Shape::PortPeriod | Shape::PortDesign => s.port_index(parts[0]),
            _ => s.vessel_index(parts[0]),
        }
        .ok_or_else(unknown)?;
        let key = match (kind.shape(), parts.len()) {
            (Shape::PortPeriod, 2) => VarKey::port(kind, entity, num(parts[1]).ok_or_else(unknown)?),
            (Shape::PortDesign | Shape::VesselDesign, 1) => VarKey::design(kind, entity),
            (Shape::VesselLeg, 2) => VarKey::leg(kind, entity, num(parts[1]).ok_or_else(unknown)?),
            (Shape::VesselLegPeriod | Shape::VesselLegOption, 3) => VarKey::leg_at(
                kind,
                entity,
                num(parts[1]).ok_or_else(unknown)?,
                num(parts[2]).ok_or_else(unknown)?,
            ),
            _ => return Err(unknown()),
        };
        Ok(key)
    }
}

/// Constraint families; each row of the model carries one as its tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowFamily {
    TravelChoice,
    ArrivalEqualsDeparturePlusTravel,
    LegSequence,
    ConsumptionEnvelope,
    LegEnergyBalance,
    LegContinuity,
    InitialCharge,
    ChargedEnergy,
    DepthOfDischarge,
    VesselCapacity,
    PeriodicStart,
    PeriodicEnd,
    MooringGate,
    ChargingSourceSplit,
    DepartureLink,
    ArrivalLink,
    DeliveredPowerCap,
    GridImportBalance,
    GridExportBalance,
    PvAvailability,
    PvSplit,
    StorageDischargeSplit,
    StorageChargeSplit,
    StorageDynamics,
    StorageCapacity,
    StorageMinimum,
    StorageTerminal,
}

impl RowFamily {
    pub const ALL: [RowFamily; 27] = [
        RowFamily::TravelChoice,
        RowFamily::ArrivalEqualsDeparturePlusTravel,
        RowFamily::LegSequence,
        RowFamily::ConsumptionEnvelope,
        RowFamily::LegEnergyBalance,
        RowFamily::LegContinuity,
        RowFamily::InitialCharge,
        RowFamily::ChargedEnergy,
        RowFamily::DepthOfDischarge,
        RowFamily::VesselCapacity,
        RowFamily::PeriodicStart,
        RowFamily::PeriodicEnd,
        RowFamily::MooringGate,
        RowFamily::ChargingSourceSplit,
        RowFamily::DepartureLink,
        RowFamily::ArrivalLink,
        RowFamily::DeliveredPowerCap,
        RowFamily::GridImportBalance,
        RowFamily::GridExportBalance,
        RowFamily::PvAvailability,
        RowFamily::PvSplit,
        RowFamily::StorageDischargeSplit,
        RowFamily::StorageChargeSplit,
        RowFamily::StorageDynamics,
        RowFamily::StorageCapacity,
        RowFamily::StorageMinimum,
        RowFamily::StorageTerminal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RowFamily::TravelChoice => "TravelChoice",
            RowFamily::ArrivalEqualsDeparturePlusTravel => "ArrivalEqualsDeparturePlusTravel",
            RowFamily::LegSequence => "LegSequence",
            RowFamily::ConsumptionEnvelope => "ConsumptionEnvelope",
            RowFamily::LegEnergyBalance => "LegEnergyBalance",
            RowFamily::LegContinuity => "LegContinuity",
            RowFamily::InitialCharge => "InitialCharge",
            RowFamily::ChargedEnergy => "ChargedEnergy",
            RowFamily::DepthOfDischarge => "DepthOfDischarge",
            RowFamily::VesselCapacity => "VesselCapacity",
            RowFamily::PeriodicStart => "PeriodicStart",
            RowFamily::PeriodicEnd => "PeriodicEnd",
            RowFamily::MooringGate => "MooringGate",
            RowFamily::ChargingSourceSplit => "ChargingSourceSplit",
            RowFamily::DepartureLink => "DepartureLink",
            RowFamily::ArrivalLink => "ArrivalLink",
            RowFamily::DeliveredPowerCap => "DeliveredPowerCap",
            RowFamily::GridImportBalance => "GridImportBalance",
            RowFamily::GridExportBalance => "GridExportBalance",
            RowFamily::PvAvailability => "PvAvailability",
            RowFamily::PvSplit => "PvSplit",
            RowFamily::StorageDischargeSplit => "StorageDischargeSplit",
            RowFamily::StorageChargeSplit => "StorageChargeSplit",
            RowFamily::StorageDynamics => "StorageDynamics",
            RowFamily::StorageCapacity => "StorageCapacity",
            RowFamily::StorageMinimum => "StorageMinimum",
            RowFamily::StorageTerminal => "StorageTerminal",
        }
    }

    pub fn parse(s: &str) -> Option<RowFamily> {
        RowFamily::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for RowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
