//! Tapped-delay-line stochastic channel model used to define the FER lookup
//! table conditions: exponentially decaying PDP, Rician first tap, Rayleigh
//! later taps, Clarke-type Doppler spectrum via sum of sinusoids.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_cir, PathKind, PropagationPath, SampledCir, SamplingConfig, StationarityRegion};
use crate::error::{Error, Result};
use crate::rng::keyed_rng;

/// Exponentially decaying power delay profile, taps at n * dt for n in 1..=n_taps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpPdpConfig {
    /// Delay parameter tau_0, seconds.
    pub tau0_s: f64,
    /// Tap spacing (equals the delay bin spacing T_c), seconds.
    pub dt_s: f64,
    pub n_taps: usize,
}

impl ExpPdpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0_s.is_finite() && self.dt_s.is_finite()) {
            return Err(Error::NonFinite("exp PDP config"));
        }
        if self.tau0_s <= 0.0 || self.dt_s <= 0.0 || self.n_taps == 0 {
            return Err(Error::InvalidConfig(format!(
                "exp PDP requires tau0 > 0, dt > 0, n_taps >= 1 (got tau0={}, dt={}, n_taps={})",
                self.tau0_s, self.dt_s, self.n_taps
            )));
        }
        Ok(())
    }
}

/// Normalized tap powers e^{-n dt / tau0} / sum, n = 1..=n_taps.
pub fn exp_pdp(cfg: &ExpPdpConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let powers: Vec<f64> = (1..=cfg.n_taps)
        .map(|n| (-(n as f64) * cfg.dt_s / cfg.tau0_s).exp())
        .collect();
    let total: f64 = powers.iter().sum();
    Ok(powers.into_iter().map(|p| p / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumSide {
    /// Angles of arrival uniform on (-pi, pi): double-sided bathtub spectrum.
    Double,
    /// Uniform on (-pi/2, pi/2): right-sided spectrum.
    Right,
    /// Uniform on (pi/2, 3 pi/2): left-sided spectrum.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdlConfig {
    pub pdp: ExpPdpConfig,
    /// Rician K of the first tap, linear scale; 0 means NLOS.
    pub k_linear: f64,
    pub f_dmax_hz: f64,
    pub f_los_hz: f64,
    /// MPCs per tap, L'.
    pub paths_per_tap: usize,
    pub spectrum_side: SpectrumSide,
    pub seed: u64,
}

impl TdlConfig {
    pub fn validate(&self) -> Result<()> {
        self.pdp.validate()?;
        if !(self.k_linear.is_finite() && self.f_dmax_hz.is_finite() && self.f_los_hz.is_finite()) {
            return Err(Error::NonFinite("TDL config"));
        }
        if self.k_linear < 0.0 {
            return Err(Error::InvalidConfig(format!("K must be >= 0, got {}", self.k_linear)));
        }
        if self.f_los_hz.abs() > self.f_dmax_hz {
            return Err(Error::InvalidConfig(format!(
                "|f_LOS| = {} exceeds f_Dmax = {}",
                self.f_los_hz.abs(),
                self.f_dmax_hz
            )));
        }
        if self.paths_per_tap < 2 && self.k_linear > 0.0 {
            return Err(Error::InvalidConfig(
                "Rician first tap needs paths_per_tap >= 2 (one LOS plus L'-1 scattered)".into(),
            ));
        }
        if self.paths_per_tap == 0 {
            return Err(Error::InvalidConfig("paths_per_tap must be >= 1".into()));
        }
        Ok(())
    }
}

fn draw_angle<R: Rng>(rng: &mut R, side: SpectrumSide) -> f64 {
    use std::f64::consts::PI;
    match side {
        SpectrumSide::Double => rng.random_range(-PI..PI),
        SpectrumSide::Right => rng.random_range(-PI / 2.0..PI / 2.0),
        SpectrumSide::Left => rng.random_range(PI / 2.0..3.0 * PI / 2.0),
    }
}

/// Draw one stationarity region of TDL paths.
///
/// Tap 1 carries one deterministic LOS component (amplitude
/// sqrt(K/(K+1) * p[1]), Doppler f_LOS) plus L'-1 scattered components; taps
/// 2..=N carry L' scattered components each. Scattered Dopplers are
/// f_Dmax * cos(beta) with beta drawn per the configured spectrum side.
/// Deterministic given (seed, region_index, tap, path).
pub fn draw_tdl_paths(cfg: &TdlConfig, region_index: u32, duration_s: f64) -> Result<StationarityRegion> {
    cfg.validate()?;
    let powers = exp_pdp(&cfg.pdp)?;
    let lp = cfg.paths_per_tap;
    let k = cfg.k_linear;
    let mut paths = Vec::new();

    for (w, &p_tap) in powers.iter().enumerate() {
        let tap = w + 1; // one-based taps: tap delays at tap * dt
        let delay = tap as f64 * cfg.pdp.dt_s;
        if tap == 1 && k > 0.0 {
            let mut rng = keyed_rng(cfg.seed, &[region_index as u64, tap as u64, 0]);
            let phase: f64 = rng.random_range(0.0..1.0);
            paths.push(PropagationPath::new(
                (k / (k + 1.0) * p_tap).sqrt(),
                phase,
                delay,
                cfg.f_los_hz,
                PathKind::Los,
            )?);
            let amp = (p_tap / ((lp - 1) as f64 * (k + 1.0))).sqrt();
            for i in 1..lp {
                let mut rng = keyed_rng(cfg.seed, &[region_index as u64, tap as u64, i as u64]);
                let beta = draw_angle(&mut rng, cfg.spectrum_side);
                let phase: f64 = rng.random_range(0.0..1.0);
                paths.push(PropagationPath::new(
                    amp,
                    phase,
                    delay,
                    cfg.f_dmax_hz * beta.cos(),
                    PathKind::Diffuse,
                )?);
            }
        } else {
            let amp = (p_tap / lp as f64).sqrt();
            for i in 0..lp {
                let mut rng = keyed_rng(cfg.seed, &[region_index as u64, tap as u64, i as u64]);
                let beta = draw_angle(&mut rng, cfg.spectrum_side);
                let phase: f64 = rng.random_range(0.0..1.0);
                paths.push(PropagationPath::new(
                    amp,
                    phase,
                    delay,
                    cfg.f_dmax_hz * beta.cos(),
                    PathKind::Diffuse,
                )?);
            }
        }
    }
    StationarityRegion::new(region_index, paths, duration_s)
}

/// Draw a region and sample its band-limited CIR.
pub fn generate_tdl_cir(cfg: &TdlConfig, sampling: &SamplingConfig) -> Result<SampledCir> {
    let region = draw_tdl_paths(cfg, 0, sampling.t_stat)?;
    sample_cir(&region, sampling)
}
