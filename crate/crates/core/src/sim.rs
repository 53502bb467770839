//! End-to-end pipeline: per stationarity region, draw GSCM paths, condense,
//! query the FER table, and aggregate over realizations into a trace with an
//! optional real-time budget report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{condense, CondensedParams, EstimatorConfig};
use crate::fer::FerTable;
use crate::gscm::{compute_paths_seeded, segment_regions, Scenario};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// GSCM realizations averaged per region (Q).
    pub realizations: u32,
    pub seed: u64,
    /// Measure per-region wall time. Off by default so trace files are a
    /// pure function of (scenario, table, seed, Q); when off, wall_ms is 0.
    pub measure_walltime: bool,
    pub estimator: EstimatorConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations must be >= 1".into()));
        }
        Ok(())
    }
}

/// One trace row per (region, link).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub region: u32,
    pub t_start_s: f64,
    pub link: u32,
    pub fer_mean: f64,
    pub fer_max: f64,
    /// Condensed parameters of the first realization.
    pub params: CondensedParams,
    pub wall_ms: f64,
    /// Set when the region carried no usable paths; FER is forced to 1.
    pub no_coverage: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FerTrace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str =
    "region,t_start_s,link,fer_mean,fer_max,rx_power_dbm,sigma_tau_ns,f_dmax_hz,k_db,f_los_hz,sigma_nu_hz,wall_ms";

impl FerTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let p = &r.params;
            out.push_str(&format!(
                "{},{:.8e},{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
                r.region,
                r.t_start_s,
                r.link,
                r.fer_mean,
                r.fer_max,
                p.rx_power_dbm,
                p.sigma_tau_s * 1e9,
                p.f_dmax_hz,
                p.k_db,
                p.f_los_hz,
                p.sigma_nu_hz,
                r.wall_ms
            ));
        }
        out
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Report of per-region wall time against the stationarity budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealtimeReport {
    pub t_stat_s: f64,
    pub per_region_wall_s: Vec<f64>,
    pub max_wall_s: f64,
    pub budget_met: bool,
    /// Indices of regions that exceeded the budget.
    pub over_budget_regions: Vec<u32>,
}

/// SNR in dB: received power minus noise power.
pub fn snr_db(p_dbm: f64, p_noise_dbm: f64) -> f64 {
    p_dbm - p_noise_dbm
}

/// Condensed parameters reported for a region with no usable paths.
fn no_coverage_params() -> CondensedParams {
    CondensedParams {
        rx_power_dbm: f64::NEG_INFINITY,
        sigma_tau_s: 0.0,
        f_dmax_hz: 0.0,
        k_db: f64::NEG_INFINITY,
        f_los_hz: 0.0,
        sigma_nu_hz: 0.0,
    }
}

/// One realization of one region: (condensed parameters, FER), or the
/// no-coverage sentinel when the region has no usable paths.
fn realize_region(
    scenario: &Scenario,
    table: &FerTable,
    est: &EstimatorConfig,
    region: u32,
    seed: u64,
) -> Result<(CondensedParams, f64, bool)> {
    let paths = compute_paths_seeded(scenario, region, seed)?;
    if paths.paths.is_empty() {
        return Ok((no_coverage_params(), 1.0, true));
    }
    match condense(&paths, &scenario.radio, est) {
        Ok(psi) => {
            let fer = table.query(&psi);
            Ok((psi, fer, false))
        }
        Err(Error::ZeroProfile) | Err(Error::EmptyRegion) => Ok((no_coverage_params(), 1.0, true)),
        Err(e) => Err(e),
    }
}

/// Per-realization FERs for one region, in realization order. The mean of
/// these equals the trace row's fer_mean.
pub fn realization_fers(
    scenario: &Scenario,
    table: &FerTable,
    cfg: &RunConfig,
    region: u32,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let est = EstimatorConfig { p_tx_dbm: scenario.p_tx_dbm, ..cfg.estimator };
    (0..cfg.realizations)
        .map(|q| {
            realize_region(scenario, table, &est, region, derive_seed(cfg.seed, &[q as u64]))
                .map(|(_, fer, _)| fer)
        })
        .collect()
}

/// Run the full pipeline: regions in parallel, Q realizations per region,
/// FER averaged (and maxed) over realizations.
pub fn run_simulation(
    scenario: &Scenario,
    table: &FerTable,
    cfg: &RunConfig,
) -> Result<(FerTrace, RealtimeReport)> {
    cfg.validate()?;
    let est = EstimatorConfig { p_tx_dbm: scenario.p_tx_dbm, ..cfg.estimator };
    let regions = segment_regions(scenario)?;
    let rows: Result<Vec<TraceRow>> = regions
        .par_iter()
        .map(|span| {
            // wall time of (paths + condense + query) for one realization
            let t0 = std::time::Instant::now();
            let first = realize_region(scenario, table, &est, span.index, derive_seed(cfg.seed, &[0]))?;
            let wall_ms = if cfg.measure_walltime {
                t0.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let (params, mut sum, mut all_dark) = (first.0, first.1, first.2);
            let mut max = first.1;
            for q in 1..cfg.realizations {
                let (_, fer, dark) =
                    realize_region(scenario, table, &est, span.index, derive_seed(cfg.seed, &[q as u64]))?;
                sum += fer;
                max = max.max(fer);
                all_dark &= dark;
            }
            Ok(TraceRow {
                region: span.index,
                t_start_s: span.t_start_s,
                link: 0,
                fer_mean: sum / cfg.realizations as f64,
                fer_max: max,
                params,
                wall_ms,
                no_coverage: all_dark,
            })
        })
        .collect();
    let trace = FerTrace { rows: rows? };
    let report = realtime_report(&trace, scenario.radio.t_stat);
    Ok((trace, report))
}

/// Compare each region's wall time against the stationarity duration.
pub fn realtime_report(trace: &FerTrace, t_stat_s: f64) -> RealtimeReport {
    let per_region: Vec<f64> = trace.rows.iter().map(|r| r.wall_ms * 1e-3).collect();
    let max_wall_s = per_region.iter().cloned().fold(0.0, f64::max);
    let over: Vec<u32> = trace
        .rows
        .iter()
        .filter(|r| r.wall_ms * 1e-3 > t_stat_s)
        .map(|r| r.region)
        .collect();
    RealtimeReport {
        t_stat_s,
        per_region_wall_s: per_region,
        max_wall_s,
        budget_met: max_wall_s <= t_stat_s,
        over_budget_regions: over,
    }
}
