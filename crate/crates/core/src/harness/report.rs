use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ExperimentResult, HarnessConfig};
use crate::error::FerryError;
use crate::model::LinearizationMode;
use crate::scenario::{scenario_to_config, Scenario, CONFIG_FILE};
use crate::simulate::write_traces;
use crate::solver::write_solution;

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "exp",
    "pv_limit_MW",
    "storage_limit_MWh",
    "vessel_battery_optimized",
    "charging_power_MW",
    "vessel_battery_MWh",
    "storage_MWh",
    "pv_MW",
    "revenue_kUSD",
    "purchase_kUSD",
    "total_kUSD",
];

fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // avoid "-0.00"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn set(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| fixed(*v, 2)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn rows(results: &[ExperimentResult]) -> Vec<[String; 11]> {
    results
        .iter()
        .map(|r| {
            [
                r.id.to_string(),
                fixed(r.pv_limit, 2),
                fixed(r.storage_limit, 2),
                u8::from(r.vessel_sizing).to_string(),
                set(&r.design.grid_power),
                set(&r.design.vessel_battery),
                set(&r.design.storage),
                set(&r.design.pv),
                fixed(r.cost.revenue, 4),
                fixed(r.cost.purchase, 4),
                fixed(r.cost.total, 4),
            ]
        })
        .collect()
}

pub fn summary_csv(results: &[ExperimentResult]) -> Result<String, FerryError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows(results) {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| FerryError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// The same table with aligned columns for reading in a terminal.
pub fn summary_table(results: &[ExperimentResult]) -> String {
    let body = rows(results);
    let mut widths: Vec<usize> = SUMMARY_COLUMNS.iter().map(|c| c.len()).collect();
    for r in &body {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(SUMMARY_COLUMNS.to_vec(), &mut out);
    for r in &body {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub node_limit: Option<usize>,
    pub time_limit_s: Option<f64>,
    pub batch_size: usize,
    pub parallel_nodes: bool,
    pub parallel_experiments: bool,
    pub linearization: String,
    pub big_m_scale: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentEntry {
    pub id: u8,
    pub status: String,
    pub objective: f64,
    pub gap: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// SHA-256 over the bundle files (or the canonical form when no bundle
    /// directory is known).
    pub scenario_hash: String,
    pub files: BTreeMap<String, String>,
    pub config: RunConfig,
    pub experiments: Vec<ExperimentEntry>,
    pub created: String,
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Per-file digests of a bundle directory plus one digest over all of them.
pub fn bundle_digest(dir: &Path, s: &Scenario) -> Result<(String, BTreeMap<String, String>), FerryError> {
    let mut names = vec![CONFIG_FILE.to_string()];
    for p in &s.ports {
        names.push(format!("prices_{}.csv", p.id));
        names.push(format!("pv_{}.csv", p.id));
    }
    names.sort();
    let mut all = Sha256::new();
    let mut files = BTreeMap::new();
    for name in names {
        let bytes = std::fs::read(dir.join(&name))?;
        files.insert(name.clone(), hex(&Sha256::digest(&bytes)));
        all.update(name.as_bytes());
        all.update([0u8]);
        all.update((bytes.len() as u64).to_le_bytes());
        all.update(&bytes);
    }
    Ok((hex(&all.finalize()), files))
}

fn canonical_digest(s: &Scenario) -> String {
    let cfg = scenario_to_config(s);
    let mut h = Sha256::new();
    h.update(toml::to_string(&cfg).unwrap_or_default().as_bytes());
    for (id, series) in cfg.prices.iter().chain(cfg.pv.iter()) {
        h.update(id.as_bytes());
        for (_, v) in series {
            h.update(v.to_le_bytes());
        }
    }
    hex(&h.finalize())
}

fn now_utc() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    chrono::DateTime::from_timestamp(secs, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_default()
}

/// Writes `summary.csv`, `summary.txt`, per-experiment solution and trace
/// CSVs, and `manifest.json` into `dir`. `bundle` is the scenario directory
/// when known; its files are hashed into the manifest.
pub fn emit_report(
    results: &[ExperimentResult],
    s: &Scenario,
    bundle: Option<&Path>,
    cfg: &HarnessConfig,
    dir: &Path,
) -> Result<Manifest, FerryError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.csv"), summary_csv(results)?)?;
    std::fs::write(dir.join("summary.txt"), summary_table(results))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for r in results {
        let sol_path = dir.join(format!("exp{}_solution.csv", r.id));
        write_solution(s, &r.solution, &sol_path)?;
        written.push(sol_path);
        written.extend(write_traces(&r.trace, s, dir, &format!("exp{}_", r.id))?);
    }
    let (scenario_hash, files) = match bundle {
        Some(b) => {
            let d = if b.is_dir() { b.to_path_buf() } else { b.parent().map(Path::to_path_buf).unwrap_or_default() };
            bundle_digest(&d, s)?
        }
        None => (canonical_digest(s), BTreeMap::new()),
    };
    let manifest = Manifest {
        tool: "ferry".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: s.name.clone(),
        scenario_hash,
        files,
        config: RunConfig {
            rel_gap: cfg.bnb.rel_gap,
            abs_gap: cfg.bnb.abs_gap,
            node_limit: cfg.bnb.node_limit,
            time_limit_s: cfg.bnb.time_limit.map(|d| d.as_secs_f64()),
            batch_size: cfg.bnb.batch_size,
            parallel_nodes: cfg.bnb.parallel,
            parallel_experiments: cfg.parallel,
            linearization: match cfg.model.mode {
                LinearizationMode::Candidates => "candidates".into(),
                LinearizationMode::Secant { breakpoints } => format!("secant:{breakpoints}"),
            },
            big_m_scale: cfg.model.big_m_scale,
            tolerance: cfg.tolerance,
        },
        experiments: results
            .iter()
            .map(|r| ExperimentEntry {
                id: r.id,
                status: r.stats.status.as_str().into(),
                objective: r.stats.objective,
                gap: r.stats.gap,
                nodes: r.stats.nodes,
            })
            .collect(),
        created: now_utc(),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    log::info!("wrote {} files to {}", written.len() + 3, dir.display());
    Ok(manifest)
}
