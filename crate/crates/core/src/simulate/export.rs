use std::path::{Path, PathBuf};

use super::DispatchTrace;
use crate::error::FerryError;
use crate::scenario::{time_of, Scenario};

fn ts(s: &Scenario, period: usize) -> String {
    time_of(&s.grid, period).format("%Y-%m-%dT%H:%M:%S").to_string()
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

/// Writes one CSV per port and per vessel named `<prefix>port_<id>.csv` and
/// `<prefix>vessel_<id>.csv`. Returns the paths in writing order.
pub fn write_traces(trace: &DispatchTrace, s: &Scenario, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, FerryError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for pt in &trace.ports {
        let path = dir.join(format!("{prefix}port_{}.csv", s.ports[pt.port].id));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            "period",
            "timestamp",
            "grid_to_vessel",
            "pv_to_vessel",
            "storage_to_vessel",
            "grid_to_storage",
            "pv_to_storage",
            "storage_to_grid",
            "pv_to_grid",
            "grid_import",
            "grid_export",
            "pv",
            "soc",
        ])?;
        for p in 0..trace.periods {
            let mut rec = vec![(p + 1).to_string(), ts(s, p + 1)];
            rec.extend(
                [
                    pt.g2v[p],
                    pt.pv2v[p],
                    pt.b2v[p],
                    pt.g2b[p],
                    pt.pv2b[p],
                    pt.b2g[p],
                    pt.pv2g[p],
                    pt.grid_import[p],
                    pt.grid_export[p],
                    pt.pv[p],
                    pt.soc[p],
                ]
                .map(num),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        written.push(path);
    }
    for vt in &trace.vessels {
        let path = dir.join(format!("{prefix}vessel_{}.csv", s.vessels[vt.vessel].id));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["period", "timestamp", "charging", "consumption", "moored_at", "soc"])?;
        for p in 0..trace.periods {
            let moored = vt.moored[p].map(|i| s.ports[i].id.clone()).unwrap_or_default();
            w.write_record([
                (p + 1).to_string(),
                ts(s, p + 1),
                num(vt.charging[p]),
                num(vt.consumption[p]),
                moored,
                num(vt.soc[p]),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
