use super::DispatchTrace;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PortCost {
    pub storage_capital: f64,
    pub pv_capital: f64,
    pub grid_capital: f64,
    /// Energy bought from the grid (C⁺).
    pub purchase: f64,
    /// Feed-in revenue (C⁻).
    pub revenue: f64,
}

impl PortCost {
    pub fn capital(&self) -> f64 {
        self.storage_capital + self.pv_capital + self.grid_capital
    }
}

/// All amounts in kUSD over the scenario horizon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostBreakdown {
    pub ports: Vec<PortCost>,
    pub vessels: Vec<f64>,
    pub capital: f64,
    pub purchase: f64,
    pub revenue: f64,
    pub total: f64,
}

/// Cost of a replayed trace: amortized capital plus purchases minus revenue.
pub fn recompute_cost(trace: &DispatchTrace, s: &Scenario) -> CostBreakdown {
    let h = trace.periods as f64 * trace.step;
    let a_i = s.costs.infra_factor(h);
    let a_v = s.costs.vessel_factor(h);
    let ports: Vec<PortCost> = trace
        .ports
        .iter()
        .map(|pt| {
            let port = &s.ports[pt.port];
            let purchase: f64 = (0..trace.periods)
                .map(|p| trace.step * port.prices[p] * pt.grid_import[p])
                .sum();
            let revenue: f64 = (0..trace.periods)
                .map(|p| trace.step * port.feed_in_ratio * port.prices[p] * pt.grid_export[p])
                .sum();
            PortCost {
                storage_capital: a_i * s.costs.storage_capex * pt.design.storage,
                pv_capital: a_i * s.costs.pv_capex * pt.design.pv,
                grid_capital: a_i * s.costs.grid_capex * pt.design.grid_power,
                purchase,
                revenue,
            }
        })
        .collect();
    let vessels: Vec<f64> = trace
        .vessels
        .iter()
        .map(|vt| a_v * s.costs.vessel_batt_capex * vt.battery)
        .collect();
    let capital = ports.iter().map(PortCost::capital).sum::<f64>() + vessels.iter().sum::<f64>();
    let purchase = ports.iter().map(|p| p.purchase).sum();
    let revenue = ports.iter().map(|p| p.revenue).sum();
    CostBreakdown {
        total: capital + purchase - revenue,
        ports,
        vessels,
        capital,
        purchase,
        revenue,
    }
}
