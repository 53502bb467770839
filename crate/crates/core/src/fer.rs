//! FER lookup table lifecycle: grid definition, population through a
//! pluggable frame-error oracle, CSV persistence and nearest-entry queries.

use std::io::Write;
use std::path::Path;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doppler::{analytic_rms_doppler, max_exp_delay_spread, solve_tau0_for_target, DopplerEnv};
use crate::error::{Error, Result};
use crate::estimator::CondensedParams;
use crate::rng::keyed_rng;
use crate::tdl::{exp_pdp, ExpPdpConfig};

/// Discretization of the condensed-parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerGrid {
    pub sigma_tau_set_s: Vec<f64>,
    pub f_dmax_set_hz: Vec<f64>,
    /// K entries in dB; an optional leading -inf marks the NLOS condition.
    pub k_db_set: Vec<f64>,
    /// LOS Doppler as a fraction of f_Dmax.
    pub f_los_frac_set: Vec<f64>,
    pub rx_power_set_dbm: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl FerGrid {
    pub fn validate(&self) -> Result<()> {
        let axes: [(&str, &[f64]); 5] = [
            ("sigma_tau_set_s", &self.sigma_tau_set_s),
            ("f_dmax_set_hz", &self.f_dmax_set_hz),
            ("k_db_set", &self.k_db_set),
            ("f_los_frac_set", &self.f_los_frac_set),
            ("rx_power_set_dbm", &self.rx_power_set_dbm),
        ];
        for (name, set) in axes {
            if set.is_empty() {
                return Err(Error::InvalidConfig(format!("grid axis {name} is empty")));
            }
            if !strictly_increasing(set) {
                return Err(Error::InvalidConfig(format!("grid axis {name} must strictly increase")));
            }
        }
        if self.sigma_tau_set_s.iter().any(|&v| v <= 0.0)
            || self.f_dmax_set_hz.iter().any(|&v| v <= 0.0)
        {
            return Err(Error::InvalidConfig("sigma_tau and f_dmax entries must be positive".into()));
        }
        if self.k_db_set.iter().skip(1).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("only the first K entry may be -inf".into()));
        }
        if self.f_los_frac_set.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidConfig("f_los fractions must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// The measurement-campaign discretization: sigma_tau {25, 50, 82} ns,
    /// f_Dmax {10, 50, 100, 500, 1000} Hz, K {-inf, 10, 15, 20} dB,
    /// f_LOS fractions {0, 1/2, 1}, rx power -94.9..=-78.9 dBm in 2 dB steps.
    pub fn campaign_default() -> Self {
        Self {
            sigma_tau_set_s: vec![25e-9, 50e-9, 82e-9],
            f_dmax_set_hz: vec![10.0, 50.0, 100.0, 500.0, 1000.0],
            k_db_set: vec![f64::NEG_INFINITY, 10.0, 15.0, 20.0],
            f_los_frac_set: vec![0.0, 0.5, 1.0],
            rx_power_set_dbm: (0..9).map(|i| -94.9 + 2.0 * i as f64).collect(),
        }
    }

    /// Axis lengths in (sigma_tau, f_dmax, k, f_los_frac, rx_power) order.
    pub fn dims(&self) -> [usize; 5] {
        [
            self.sigma_tau_set_s.len(),
            self.f_dmax_set_hz.len(),
            self.k_db_set.len(),
            self.f_los_frac_set.len(),
            self.rx_power_set_dbm.len(),
        ]
    }

    fn dense_len(&self) -> usize {
        self.dims().iter().product()
    }

    fn dense_index(&self, i: [usize; 5]) -> usize {
        let d = self.dims();
        (((i[0] * d[1] + i[1]) * d[2] + i[2]) * d[3] + i[3]) * d[4] + i[4]
    }
}

/// One evaluated combination of condensed parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub sigma_tau_s: f64,
    pub f_dmax_hz: f64,
    pub k_db: f64,
    pub f_los_frac: f64,
    pub rx_power_dbm: f64,
}

/// Collapsed grid points in lexicographic axis order, each with the dense
/// indices it populates. NLOS rows (K = -inf) collapse the f_LOS axis to the
/// single fraction 0 and fan out over every fraction index.
fn collapsed_points(grid: &FerGrid) -> Vec<(GridPoint, Vec<usize>)> {
    let mut out = Vec::new();
    for (a, &st) in grid.sigma_tau_set_s.iter().enumerate() {
        for (b, &fd) in grid.f_dmax_set_hz.iter().enumerate() {
            for (c, &k) in grid.k_db_set.iter().enumerate() {
                let fracs: Vec<(usize, f64)> = if k.is_infinite() {
                    vec![(usize::MAX, 0.0)]
                } else {
                    grid.f_los_frac_set.iter().copied().enumerate().collect()
                };
                for (d, frac) in fracs {
                    for (e, &p) in grid.rx_power_set_dbm.iter().enumerate() {
                        let point = GridPoint {
                            sigma_tau_s: st,
                            f_dmax_hz: fd,
                            k_db: k,
                            f_los_frac: frac,
                            rx_power_dbm: p,
                        };
                        let targets: Vec<usize> = if d == usize::MAX {
                            (0..grid.f_los_frac_set.len())
                                .map(|di| grid.dense_index([a, b, c, di, e]))
                                .collect()
                        } else {
                            vec![grid.dense_index([a, b, c, d, e])]
                        };
                        out.push((point, targets));
                    }
                }
            }
        }
    }
    out
}

/// All combinations to evaluate, with the NLOS collapse applied.
pub fn enumerate_grid(grid: &FerGrid) -> Vec<GridPoint> {
    collapsed_points(grid).into_iter().map(|(p, _)| p).collect()
}

/// Frame count F = 1 / (kappa * iota) balancing the minimum resolvable FER
/// against the estimator variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBudget {
    pub kappa: f64,
    pub iota: f64,
}

impl FrameBudget {
    pub fn frames(&self) -> Result<u64> {
        required_frames(self.kappa, self.iota)
    }
}

pub fn required_frames(kappa: f64, iota: f64) -> Result<u64> {
    if !(kappa > 0.0 && iota > 0.0) {
        return Err(Error::InvalidConfig(format!("kappa and iota must be positive, got {kappa}, {iota}")));
    }
    Ok((1.0 / (kappa * iota)).round() as u64)
}

/// A frame-error-rate measurement backend.
pub trait FerOracle {
    fn id(&self) -> &str;
    /// Measured FER in [0, 1] over `frames` transmissions; deterministic
    /// given `seed` and non-increasing in rx power.
    fn fer(&self, point: &GridPoint, frames: u64, seed: u64) -> Result<f64>;
}

/// Parametric stand-in for a hardware measurement rig: per-frame error
/// probability from a logistic waterfall in SNR with a Doppler-dependent
/// error floor, sampled over F Bernoulli frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFerOracle {
    /// Receiver noise level, dBm.
    pub p_noise_dbm: f64,
    /// Waterfall midpoint base, dB.
    pub zeta0_db: f64,
    /// Waterfall width, dB.
    pub width_db: f64,
    /// Midpoint shift per unit of 1/(1+K).
    pub k_penalty_db: f64,
    /// Midpoint shift per (sigma_nu / 1 kHz).
    pub doppler_penalty_db: f64,
    /// Midpoint gain per (sigma_tau / 100 ns) of delay diversity, scaled by 1/(1+K).
    pub delay_gain_db: f64,
    /// Error-floor scale per (sigma_nu / 1 kHz)^2 / (1+K).
    pub floor_scale: f64,
}

impl Default for SyntheticFerOracle {
    fn default() -> Self {
        Self {
            p_noise_dbm: -102.0,
            zeta0_db: 8.0,
            width_db: 1.5,
            k_penalty_db: 4.0,
            doppler_penalty_db: 3.0,
            delay_gain_db: 2.0,
            floor_scale: 2.0,
        }
    }
}

impl SyntheticFerOracle {
    /// Analytic RMS Doppler spread of an exponential-PDP channel fitted to
    /// the grid point (8 taps, 100 ns spacing).
    pub fn sigma_nu_hz(&self, point: &GridPoint) -> f64 {
        let k_lin = if point.k_db.is_finite() { 10f64.powf(point.k_db / 10.0) } else { 0.0 };
        let (dt, n_taps) = (100e-9, 8);
        let max = max_exp_delay_spread(dt, n_taps);
        let target = point.sigma_tau_s.clamp(0.5e-9, 0.999 * max);
        let tau0 = solve_tau0_for_target(target, dt, n_taps).expect("clamped target is attainable");
        let taps = exp_pdp(&ExpPdpConfig { tau0_s: tau0, dt_s: dt, n_taps }).expect("valid PDP");
        let f_los = point.f_los_frac * point.f_dmax_hz;
        let env = DopplerEnv::new(point.f_dmax_hz, f_los, k_lin, taps).expect("valid environment");
        analytic_rms_doppler(&env).expect("finite spread")
    }

    /// Per-frame error probability at a grid point.
    pub fn error_probability(&self, point: &GridPoint) -> f64 {
        let k_lin = if point.k_db.is_finite() { 10f64.powf(point.k_db / 10.0) } else { 0.0 };
        let sigma_nu_k = self.sigma_nu_hz(point) / 1000.0;
        let zeta = point.rx_power_dbm - self.p_noise_dbm;
        let zeta0 = self.zeta0_db
            + self.k_penalty_db / (1.0 + k_lin)
            + self.doppler_penalty_db * sigma_nu_k
            - self.delay_gain_db * (point.sigma_tau_s / 100e-9) / (1.0 + k_lin);
        let floor = (self.floor_scale * sigma_nu_k * sigma_nu_k / (1.0 + k_lin)).min(0.9);
        let logistic = 1.0 / (1.0 + ((zeta - zeta0) / self.width_db).exp());
        (floor + (1.0 - floor) * logistic).clamp(0.0, 1.0)
    }
}

impl FerOracle for SyntheticFerOracle {
    fn id(&self) -> &str {
        "synthetic"
    }

    fn fer(&self, point: &GridPoint, frames: u64, seed: u64) -> Result<f64> {
        if frames == 0 {
            return Err(Error::InvalidConfig("frame count must be >= 1".into()));
        }
        let p = self.error_probability(point);
        let binomial = Binomial::new(frames, p)
            .map_err(|e| Error::InvalidConfig(format!("binomial setup: {e}")))?;
        let errors = binomial.sample(&mut keyed_rng(seed, &[0x4652_414d_4553]));
        Ok(errors as f64 / frames as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub oracle_id: String,
    pub seed: u64,
    pub kappa: f64,
    pub iota: f64,
}

/// A fully populated FER lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct FerTable {
    pub grid: FerGrid,
    /// Dense 5-D array in (sigma_tau, f_dmax, k, f_los_frac, rx_power) order.
    values: Vec<f64>,
    pub frames: u64,
    pub meta: TableMeta,
}

/// Populate every grid point with `oracle`, parallel over points with
/// per-point seeds derived from (seed, point index).
pub fn build_table<O: FerOracle + Sync>(
    grid: &FerGrid,
    oracle: &O,
    budget: &FrameBudget,
    seed: u64,
) -> Result<FerTable> {
    build_table_resumable(grid, oracle, budget, seed, None)
}

#[derive(Serialize, Deserialize)]
struct Progress {
    seed: u64,
    completed: Vec<Option<f64>>,
}

/// As [`build_table`], persisting progress after each chunk so an aborted
/// build restarts from the last completed chunk.
pub fn build_table_resumable<O: FerOracle + Sync>(
    grid: &FerGrid,
    oracle: &O,
    budget: &FrameBudget,
    seed: u64,
    progress_path: Option<&Path>,
) -> Result<FerTable> {
    grid.validate()?;
    let frames = budget.frames()?;
    let points = collapsed_points(grid);
    let mut completed: Vec<Option<f64>> = vec![None; points.len()];
    if let Some(path) = progress_path {
        if path.exists() {
            let p: Progress = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if p.seed == seed && p.completed.len() == points.len() {
                completed = p.completed;
            }
        }
    }

    const CHUNK: usize = 256;
    let pending: Vec<usize> = (0..points.len()).filter(|&i| completed[i].is_none()).collect();
    for chunk in pending.chunks(CHUNK) {
        let results: Vec<(usize, Result<f64>)> = chunk
            .par_iter()
            .map(|&i| (i, oracle.fer(&points[i].0, frames, crate::rng::derive_seed(seed, &[i as u64]))))
            .collect();
        for (i, r) in results {
            let fer = r.map_err(|e| Error::Oracle { index: i, msg: e.to_string() })?;
            if !(0.0..=1.0).contains(&fer) {
                return Err(Error::Oracle { index: i, msg: format!("FER {fer} outside [0, 1]") });
            }
            completed[i] = Some(fer);
        }
        if let Some(path) = progress_path {
            let tmp = serde_json::to_string(&Progress { seed, completed: completed.clone() })?;
            std::fs::write(path, tmp)?;
        }
    }

    let mut values = vec![f64::NAN; grid.dense_len()];
    for (i, (_, targets)) in points.iter().enumerate() {
        for &t in targets {
            values[t] = completed[i].unwrap();
        }
    }
    Ok(FerTable {
        grid: grid.clone(),
        values,
        frames,
        meta: TableMeta { oracle_id: oracle.id().to_string(), seed, kappa: budget.kappa, iota: budget.iota },
    })
}

/// Index of the grid value nearest to v; ties snap to the lower value.
/// -inf input matches a leading -inf entry; -inf entries are never the
/// nearest match for finite input.
fn snap_index(set: &[f64], v: f64) -> usize {
    if v == f64::NEG_INFINITY {
        // matches a leading -inf entry, or clamps to the lowest value
        return 0;
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &g) in set.iter().enumerate() {
        let d = (v - g).abs();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

impl FerTable {
    fn snap_indices(&self, psi: &CondensedParams) -> [usize; 5] {
        let g = &self.grid;
        let frac = if psi.f_dmax_hz > 0.0 {
            (psi.f_los_hz.abs() / psi.f_dmax_hz).clamp(0.0, 1.0)
        } else {
            0.0
        };
        [
            snap_index(&g.sigma_tau_set_s, psi.sigma_tau_s),
            snap_index(&g.f_dmax_set_hz, psi.f_dmax_hz),
            snap_index(&g.k_db_set, psi.k_db),
            snap_index(&g.f_los_frac_set, frac),
            snap_index(&g.rx_power_set_dbm, psi.rx_power_dbm),
        ]
    }

    /// The grid point a parameter vector snaps to.
    pub fn snap(&self, psi: &CondensedParams) -> GridPoint {
        let g = &self.grid;
        let i = self.snap_indices(psi);
        GridPoint {
            sigma_tau_s: g.sigma_tau_set_s[i[0]],
            f_dmax_hz: g.f_dmax_set_hz[i[1]],
            k_db: g.k_db_set[i[2]],
            f_los_frac: g.f_los_frac_set[i[3]],
            rx_power_dbm: g.rx_power_set_dbm[i[4]],
        }
    }

    /// Nearest-entry lookup with each axis snapped independently.
    pub fn query(&self, psi: &CondensedParams) -> f64 {
        self.values[self.grid.dense_index(self.snap_indices(psi))]
    }

    /// The dense value array, in (sigma_tau, f_dmax, k, f_los_frac, rx_power) order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, point: &GridPoint) -> f64 {
        self.query(&CondensedParams {
            rx_power_dbm: point.rx_power_dbm,
            sigma_tau_s: point.sigma_tau_s,
            f_dmax_hz: point.f_dmax_hz,
            k_db: point.k_db,
            f_los_hz: point.f_los_frac * point.f_dmax_hz,
            sigma_nu_hz: 0.0,
        })
    }

    fn fmt_k(k: f64) -> String {
        if k == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            format!("{k:.8e}")
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma_tau_ns,f_dmax_hz,k_db,f_los_frac,rx_power_dbm,fer,frames\n");
        for (point, targets) in collapsed_points(&self.grid) {
            out.push_str(&format!(
                "{:.8e},{:.8e},{},{:.8e},{:.8e},{:.8e},{}\n",
                point.sigma_tau_s * 1e9,
                point.f_dmax_hz,
                Self::fmt_k(point.k_db),
                point.f_los_frac,
                point.rx_power_dbm,
                self.values[targets[0]],
                self.frames
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        let meta_path = sidecar_path(path);
        std::fs::write(meta_path, serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    pub fn from_csv(text: &str, meta: TableMeta) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::TableFormat("empty file".into()))?;
        if header != "sigma_tau_ns,f_dmax_hz,k_db,f_los_frac,rx_power_dbm,fer,frames" {
            return Err(Error::TableFormat(format!("unexpected header: {header}")));
        }
        let mut rows: Vec<(GridPoint, f64, u64)> = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 7 {
                return Err(Error::TableFormat(format!("row {}: expected 7 columns", i + 2)));
            }
            let f = |j: usize| -> Result<f64> {
                parts[j]
                    .parse::<f64>()
                    .map_err(|e| Error::TableFormat(format!("row {}, column {}: {e}", i + 2, j + 1)))
            };
            let frames: u64 = parts[6]
                .parse()
                .map_err(|e| Error::TableFormat(format!("row {}: frames: {e}", i + 2)))?;
            rows.push((
                GridPoint {
                    sigma_tau_s: f(0)? * 1e-9,
                    f_dmax_hz: f(1)?,
                    k_db: f(2)?,
                    f_los_frac: f(3)?,
                    rx_power_dbm: f(4)?,
                },
                f(5)?,
                frames,
            ));
        }
        if rows.is_empty() {
            return Err(Error::TableFormat("no data rows".into()));
        }
        let frames = rows[0].2;
        if rows.iter().any(|r| r.2 != frames) {
            return Err(Error::TableFormat("inconsistent frame counts".into()));
        }

        let axis = |f: &dyn Fn(&GridPoint) -> f64, nlos_only: bool| -> Vec<f64> {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| !nlos_only || r.0.k_db.is_finite())
                .map(|r| f(&r.0))
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup_by(|a, b| a.to_bits() == b.to_bits());
            v
        };
        let mut frac_set = axis(&|p| p.f_los_frac, true);
        if frac_set.is_empty() {
            frac_set = vec![0.0];
        }
        let grid = FerGrid {
            sigma_tau_set_s: axis(&|p| p.sigma_tau_s, false),
            f_dmax_set_hz: axis(&|p| p.f_dmax_hz, false),
            k_db_set: axis(&|p| p.k_db, false),
            f_los_frac_set: frac_set,
            rx_power_set_dbm: axis(&|p| p.rx_power_dbm, false),
        };
        grid.validate()?;

        let find = |set: &[f64], v: f64| -> Result<usize> {
            set.iter()
                .position(|&g| g.to_bits() == v.to_bits())
                .ok_or_else(|| Error::TableFormat(format!("value {v} missing from a grid axis")))
        };
        let mut values = vec![f64::NAN; grid.dense_len()];
        for (p, fer, _) in &rows {
            if !(0.0..=1.0).contains(fer) {
                return Err(Error::TableFormat(format!("FER {fer} outside [0, 1]")));
            }
            let a = find(&grid.sigma_tau_set_s, p.sigma_tau_s)?;
            let b = find(&grid.f_dmax_set_hz, p.f_dmax_hz)?;
            let c = find(&grid.k_db_set, p.k_db)?;
            let e = find(&grid.rx_power_set_dbm, p.rx_power_dbm)?;
            let ds: Vec<usize> = if p.k_db.is_finite() {
                vec![find(&grid.f_los_frac_set, p.f_los_frac)?]
            } else {
                (0..grid.f_los_frac_set.len()).collect()
            };
            for d in ds {
                values[grid.dense_index([a, b, c, d, e])] = *fer;
            }
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::TableFormat("incomplete table: unfilled grid cells".into()));
        }
        Ok(Self { grid, values, frames, meta })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let meta_path = sidecar_path(path);
        let meta = if meta_path.exists() {
            serde_json::from_str(&std::fs::read_to_string(meta_path)?)?
        } else {
            TableMeta { oracle_id: "unknown".into(), seed: 0, kappa: 0.0, iota: 0.0 }
        };
        Self::from_csv(&text, meta)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta.json");
    std::path::PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_budget_examples() {
        assert_eq!(required_frames(2e-5, 0.01).unwrap(), 5_000_000);
        assert_eq!(required_frames(1.0, 1.0).unwrap(), 1);
        assert_eq!(required_frames(1e-4, 0.01).unwrap(), 1_000_000);
        assert!(required_frames(0.0, 0.01).is_err());
    }

    #[test]
    fn campaign_grid_point_counts() {
        let grid = FerGrid::campaign_default();
        let points = enumerate_grid(&grid);
        // counting oracle: finite-K block plus collapsed NLOS block
        let finite_k = grid.k_db_set.iter().filter(|k| k.is_finite()).count();
        let nlos = grid.k_db_set.len() - finite_k;
        let expect = grid.sigma_tau_set_s.len()
            * grid.f_dmax_set_hz.len()
            * grid.rx_power_set_dbm.len()
            * (finite_k * grid.f_los_frac_set.len() + nlos);
        assert_eq!(points.len(), expect);
        assert_eq!(points.len(), 1350);
    }

    #[test]
    fn singleton_grid_single_point() {
        let grid = FerGrid {
            sigma_tau_set_s: vec![25e-9],
            f_dmax_set_hz: vec![100.0],
            k_db_set: vec![10.0],
            f_los_frac_set: vec![0.5],
            rx_power_set_dbm: vec![-80.0],
        };
        assert_eq!(enumerate_grid(&grid).len(), 1);
    }

    #[test]
    fn fraction_semantics() {
        let grid = FerGrid::campaign_default();
        let p = enumerate_grid(&grid)
            .into_iter()
            .find(|p| p.f_dmax_hz == 500.0 && p.f_los_frac == 0.5)
            .unwrap();
        assert_eq!(p.f_los_frac * p.f_dmax_hz, 250.0);
    }

    struct ConstOracle(f64);

    impl FerOracle for ConstOracle {
        fn id(&self) -> &str {
            "const"
        }
        fn fer(&self, _: &GridPoint, _: u64, _: u64) -> Result<f64> {
            Ok(self.0)
        }
    }

    fn tiny_grid() -> FerGrid {
        FerGrid {
            sigma_tau_set_s: vec![25e-9, 82e-9],
            f_dmax_set_hz: vec![50.0, 500.0],
            k_db_set: vec![f64::NEG_INFINITY, 20.0],
            f_los_frac_set: vec![0.0, 1.0],
            rx_power_set_dbm: vec![-94.9, -86.9, -78.9],
        }
    }

    #[test]
    fn one_point_table_holds_value() {
        let grid = FerGrid {
            sigma_tau_set_s: vec![25e-9],
            f_dmax_set_hz: vec![100.0],
            k_db_set: vec![10.0],
            f_los_frac_set: vec![0.0],
            rx_power_set_dbm: vec![-80.0],
        };
        let t = build_table(&grid, &ConstOracle(0.5), &FrameBudget { kappa: 1.0, iota: 1.0 }, 1).unwrap();
        let psi = CondensedParams {
            rx_power_dbm: -80.0,
            sigma_tau_s: 25e-9,
            f_dmax_hz: 100.0,
            k_db: 10.0,
            f_los_hz: 0.0,
            sigma_nu_hz: 0.0,
        };
        assert_eq!(t.query(&psi), 0.5);
    }

    #[test]
    fn rebuild_is_bitwise_identical() {
        let grid = tiny_grid();
        let oracle = SyntheticFerOracle::default();
        let budget = FrameBudget { kappa: 1e-2, iota: 1e-2 };
        let a = build_table(&grid, &oracle, &budget, 42).unwrap();
        let b = build_table(&grid, &oracle, &budget, 42).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn query_snaps_nearest_and_clamps() {
        let oracle = SyntheticFerOracle::default();
        let t = build_table(&tiny_grid(), &oracle, &FrameBudget { kappa: 1e-2, iota: 1e-2 }, 3).unwrap();
        let base = CondensedParams {
            rx_power_dbm: -86.9,
            sigma_tau_s: 30e-9,
            f_dmax_hz: 60.0,
            k_db: 19.0,
            f_los_hz: 0.0,
            sigma_nu_hz: 0.0,
        };
        // 30 ns snaps to 25 ns; rx power above the top entry clamps
        let snapped = t.value_at(&GridPoint {
            sigma_tau_s: 25e-9,
            f_dmax_hz: 50.0,
            k_db: 20.0,
            f_los_frac: 0.0,
            rx_power_dbm: -86.9,
        });
        assert_eq!(t.query(&base), snapped);
        let high = CondensedParams { rx_power_dbm: -70.0, ..base };
        let clamped = t.value_at(&GridPoint {
            sigma_tau_s: 25e-9,
            f_dmax_hz: 50.0,
            k_db: 20.0,
            f_los_frac: 0.0,
            rx_power_dbm: -78.9,
        });
        assert_eq!(t.query(&high), clamped);
    }

    #[test]
    fn k_sentinels_snap() {
        let oracle = SyntheticFerOracle::default();
        let t = build_table(&tiny_grid(), &oracle, &FrameBudget { kappa: 1e-2, iota: 1e-2 }, 3).unwrap();
        let psi = CondensedParams {
            rx_power_dbm: -78.9,
            sigma_tau_s: 25e-9,
            f_dmax_hz: 50.0,
            k_db: 500.0,
            f_los_hz: 0.0,
            sigma_nu_hz: 0.0,
        };
        // +500 dB snaps to the largest finite K
        let finite = t.value_at(&GridPoint {
            sigma_tau_s: 25e-9,
            f_dmax_hz: 50.0,
            k_db: 20.0,
            f_los_frac: 0.0,
            rx_power_dbm: -78.9,
        });
        assert_eq!(t.query(&psi), finite);
        let nlos = CondensedParams { k_db: f64::NEG_INFINITY, ..psi };
        let nlos_val = t.value_at(&GridPoint {
            sigma_tau_s: 25e-9,
            f_dmax_hz: 50.0,
            k_db: f64::NEG_INFINITY,
            f_los_frac: 0.0,
            rx_power_dbm: -78.9,
        });
        assert_eq!(t.query(&nlos), nlos_val);
    }

    #[test]
    fn csv_round_trip_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let t = build_table(
            &tiny_grid(),
            &SyntheticFerOracle::default(),
            &FrameBudget { kappa: 1e-2, iota: 1e-2 },
            11,
        )
        .unwrap();
        t.save(&path).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let loaded = FerTable::load(&path).unwrap();
        assert_eq!(loaded.meta, t.meta);
        let path2 = dir.path().join("table2.csv");
        loaded.save(&path2).unwrap();
        assert_eq!(bytes1, std::fs::read(&path2).unwrap());
    }

    #[test]
    fn resumable_build_completes() {
        let dir = tempfile::tempdir().unwrap();
        let progress = dir.path().join("progress.json");
        let grid = tiny_grid();
        let oracle = SyntheticFerOracle::default();
        let budget = FrameBudget { kappa: 1e-2, iota: 1e-2 };
        let full = build_table(&grid, &oracle, &budget, 9).unwrap();
        // pre-seed a partial progress file (first half completed)
        let points = enumerate_grid(&grid);
        let mut completed: Vec<Option<f64>> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (i < points.len() / 2)
                    .then(|| oracle.fer(p, budget.frames().unwrap(), crate::rng::derive_seed(9, &[i as u64])).unwrap())
            })
            .collect();
        completed.resize(points.len(), None);
        std::fs::write(&progress, serde_json::to_string(&Progress { seed: 9, completed }).unwrap()).unwrap();
        let resumed = build_table_resumable(&grid, &oracle, &budget, 9, Some(&progress)).unwrap();
        assert_eq!(resumed.to_csv(), full.to_csv());
    }

    #[test]
    fn fer_monotone_in_rx_power() {
        let grid = FerGrid::campaign_default();
        let oracle = SyntheticFerOracle::default();
        for p in enumerate_grid(&grid) {
            let mut prev = f64::INFINITY;
            for &rx in &grid.rx_power_set_dbm {
                let v = oracle.error_probability(&GridPoint { rx_power_dbm: rx, ..p });
                assert!(v <= prev + 1e-15, "non-monotone at {p:?} rx={rx}");
                prev = v;
            }
        }
    }

    #[test]
    fn synthetic_trend_contracts() {
        // exact per-frame probabilities over the campaign grid
        let g = FerGrid::campaign_default();
        let oracle = SyntheticFerOracle::default();
        let eps = 1e-12;
        for &st in &g.sigma_tau_set_s {
            for &fd in &g.f_dmax_set_hz {
                for &rx in &g.rx_power_set_dbm {
                    // FER non-increasing in K (f_LOS = 0)
                    let mut prev = f64::INFINITY;
                    for &k in &g.k_db_set {
                        let v = oracle.error_probability(&GridPoint {
                            sigma_tau_s: st,
                            f_dmax_hz: fd,
                            k_db: k,
                            f_los_frac: 0.0,
                            rx_power_dbm: rx,
                        });
                        assert!(v <= prev + eps, "K trend: st={st} fd={fd} rx={rx} k={k}");
                        prev = v;
                    }
                    // FER non-decreasing in f_Dmax handled in outer loop below
                    // NLOS: FER non-increasing in sigma_tau
                    let mut prev = f64::INFINITY;
                    for &s2 in &g.sigma_tau_set_s {
                        let v = oracle.error_probability(&GridPoint {
                            sigma_tau_s: s2,
                            f_dmax_hz: fd,
                            k_db: f64::NEG_INFINITY,
                            f_los_frac: 0.0,
                            rx_power_dbm: rx,
                        });
                        assert!(v <= prev + eps, "NLOS delay trend");
                        prev = v;
                    }
                    // K = 20 dB: FER non-decreasing in f_LOS fraction
                    let mut prev = f64::NEG_INFINITY;
                    for &fr in &g.f_los_frac_set {
                        let v = oracle.error_probability(&GridPoint {
                            sigma_tau_s: st,
                            f_dmax_hz: fd,
                            k_db: 20.0,
                            f_los_frac: fr,
                            rx_power_dbm: rx,
                        });
                        assert!(v >= prev - eps, "f_LOS trend");
                        prev = v;
                    }
                }
            }
        }
        // FER non-decreasing in f_Dmax
        for &st in &g.sigma_tau_set_s {
            for &k in &g.k_db_set {
                for &fr in &g.f_los_frac_set {
                    if !k.is_finite() && fr != 0.0 {
                        continue;
                    }
                    for &rx in &g.rx_power_set_dbm {
                        let mut prev = f64::NEG_INFINITY;
                        for &fd in &g.f_dmax_set_hz {
                            let v = oracle.error_probability(&GridPoint {
                                sigma_tau_s: st,
                                f_dmax_hz: fd,
                                k_db: k,
                                f_los_frac: fr,
                                rx_power_dbm: rx,
                            });
                            assert!(v >= prev - eps, "f_Dmax trend: st={st} k={k} fr={fr} rx={rx} fd={fd}");
                            prev = v;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn synthetic_limits() {
        let oracle = SyntheticFerOracle::default();
        let good = GridPoint {
            sigma_tau_s: 25e-9,
            f_dmax_hz: 10.0,
            k_db: 20.0,
            f_los_frac: 0.0,
            rx_power_dbm: -60.0,
        };
        let fer = oracle.fer(&good, 5_000_000, 1).unwrap();
        assert!(fer <= 2e-5, "fer={fer}");
        let bad = GridPoint { rx_power_dbm: -102.0, ..good };
        let fer_bad = oracle.fer(&bad, 10_000, 1).unwrap();
        assert!(fer_bad > 0.95, "fer={fer_bad}");
    }

    #[test]
    fn seed_variation_within_binomial_bound() {
        let oracle = SyntheticFerOracle::default();
        let p = GridPoint {
            sigma_tau_s: 50e-9,
            f_dmax_hz: 500.0,
            k_db: 10.0,
            f_los_frac: 0.5,
            rx_power_dbm: -92.9,
        };
        let f = 1_000_000u64;
        let a = oracle.fer(&p, f, 1).unwrap();
        let b = oracle.fer(&p, f, 2).unwrap();
        assert_ne!(a, b);
        let bound = 6.0 * (a.max(1e-9) / f as f64).sqrt();
        assert!((a - b).abs() <= bound, "a={a} b={b} bound={bound}");
    }
}
