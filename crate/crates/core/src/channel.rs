//! Band-limited, sampled channel impulse response machinery.
//!
//! A stationarity region holds a set of propagation paths whose amplitudes,
//! Doppler shifts and delays are treated as constant for its duration. The
//! sampled CIR is the superposition of the paths after raised-cosine pulse
//! shaping on the delay grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Raised-cosine filter support, in delay bins on either side of a path's
/// delay. Contributions beyond this are below 1e-4 for rolloff >= 0.5.
pub const RC_SUPPORT_BINS: usize = 8;

pub type ComplexSample = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Los,
    StaticDiscrete,
    MobileDiscrete,
    Diffuse,
}

/// One multipath component within a stationarity region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    /// Linear magnitude, >= 0.
    pub amplitude: f64,
    /// Starting phase in cycles, [0, 1).
    pub phase_cycles: f64,
    /// Propagation delay in seconds, >= 0.
    pub delay_s: f64,
    /// Doppler shift in Hz (positive for a closing path).
    pub doppler_hz: f64,
    pub kind: PathKind,
}

impl PropagationPath {
    pub fn new(
        amplitude: f64,
        phase_cycles: f64,
        delay_s: f64,
        doppler_hz: f64,
        kind: PathKind,
    ) -> Result<Self> {
        if !(amplitude.is_finite() && phase_cycles.is_finite() && delay_s.is_finite() && doppler_hz.is_finite()) {
            return Err(Error::NonFinite("propagation path parameters"));
        }
        if amplitude < 0.0 {
            return Err(Error::InvalidConfig(format!("negative path amplitude {amplitude}")));
        }
        if delay_s < 0.0 {
            return Err(Error::InvalidConfig(format!("negative path delay {delay_s} s")));
        }
        Ok(Self { amplitude, phase_cycles: phase_cycles.rem_euclid(1.0), delay_s, doppler_hz, kind })
    }

    /// Complex weight |eta| * exp(j 2 pi phase).
    pub fn weight(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, 2.0 * std::f64::consts::PI * self.phase_cycles)
    }
}

/// Time/delay sampling grid for one stationarity region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Time sample spacing T_s, seconds.
    pub t_s: f64,
    /// Delay bin spacing T_c = 1/B, seconds.
    pub t_c: f64,
    /// Number of delay bins N.
    pub n_delay_bins: usize,
    /// Samples per stationarity region, M = T_stat / T_s.
    pub m_samples: usize,
    /// Stationarity region duration T_stat, seconds.
    pub t_stat: f64,
    /// Raised-cosine rolloff, [0, 1].
    pub rolloff: f64,
    /// Carrier frequency f_C, Hz.
    pub carrier_hz: f64,
    /// Communication bandwidth B, Hz.
    pub bandwidth_hz: f64,
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.t_s,
            self.t_c,
            self.t_stat,
            self.rolloff,
            self.carrier_hz,
            self.bandwidth_hz,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampling config"));
        }
        if self.t_s <= 0.0 || self.t_c <= 0.0 || self.t_stat <= 0.0 {
            return Err(Error::InvalidConfig("sampling spacings must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::InvalidConfig(format!("rolloff {} outside [0, 1]", self.rolloff)));
        }
        if self.n_delay_bins == 0 || self.m_samples == 0 {
            return Err(Error::InvalidConfig("empty sampling grid".into()));
        }
        let err = (self.m_samples as f64 * self.t_s - self.t_stat).abs();
        if err > self.t_s {
            return Err(Error::InvalidConfig(format!(
                "m_samples * t_s = {} deviates from t_stat = {} by more than one sample",
                self.m_samples as f64 * self.t_s,
                self.t_stat
            )));
        }
        Ok(())
    }

    /// Largest path delay representable on the grid.
    pub fn delay_window_s(&self) -> f64 {
        (self.n_delay_bins.saturating_sub(1)) as f64 * self.t_c
    }

    /// One-sided Doppler limit 1/(2 T_s) of the time sampling.
    pub fn doppler_nyquist_hz(&self) -> f64 {
        0.5 / self.t_s
    }
}

/// Sampled channel impulse response h[m, n] for one stationarity region.
#[derive(Debug, Clone)]
pub struct SampledCir {
    data: Vec<Complex64>,
    pub config: SamplingConfig,
    pub region_index: u32,
}

impl SampledCir {
    pub fn m_samples(&self) -> usize {
        self.config.m_samples
    }

    pub fn n_delay_bins(&self) -> usize {
        self.config.n_delay_bins
    }

    #[inline]
    pub fn at(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.config.n_delay_bins + n]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.data
    }
}

/// All paths sharing one stationarity region's validity window.
#[derive(Debug, Clone)]
pub struct StationarityRegion {
    pub index: u32,
    pub paths: Vec<PropagationPath>,
    pub duration_s: f64,
}

impl StationarityRegion {
    pub fn new(index: u32, paths: Vec<PropagationPath>, duration_s: f64) -> Result<Self> {
        if !duration_s.is_finite() || duration_s < 0.0 {
            return Err(Error::NonFinite("region duration"));
        }
        Ok(Self { index, paths, duration_s })
    }

    pub fn los_path(&self) -> Option<&PropagationPath> {
        self.paths.iter().find(|p| p.kind == PathKind::Los)
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Raised-cosine impulse response h_RC(tau).
///
/// The removable singularity at |2 * rolloff * tau / t_c| = 1 is evaluated by
/// its analytic limit pi/4 * sinc(tau / t_c).
pub fn raised_cosine(tau: f64, t_c: f64, rolloff: f64) -> Result<f64> {
    if !(tau.is_finite() && t_c.is_finite() && rolloff.is_finite()) {
        return Err(Error::NonFinite("raised_cosine arguments"));
    }
    if t_c <= 0.0 {
        return Err(Error::InvalidConfig(format!("t_c must be positive, got {t_c}")));
    }
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::InvalidConfig(format!("rolloff {rolloff} outside [0, 1]")));
    }
    Ok(rc_unchecked(tau, t_c, rolloff))
}

#[inline]
pub(crate) fn rc_unchecked(tau: f64, t_c: f64, rolloff: f64) -> f64 {
    let x = tau / t_c;
    let bx = 2.0 * rolloff * x;
    let denom = 1.0 - bx * bx;
    if denom.abs() < 1e-9 {
        // analytic limit at |2 beta tau / t_c| = 1
        std::f64::consts::FRAC_PI_4 * sinc(x)
    } else {
        sinc(x) * (rolloff * std::f64::consts::PI * x).cos() / denom
    }
}

/// h_RC(n T_c - tau), truncated to +-RC_SUPPORT_BINS bins around the path delay.
#[inline]
pub(crate) fn rc_tap(n: usize, tau: f64, cfg: &SamplingConfig) -> f64 {
    let dt = n as f64 * cfg.t_c - tau;
    if dt.abs() > RC_SUPPORT_BINS as f64 * cfg.t_c {
        0.0
    } else {
        rc_unchecked(dt, cfg.t_c, cfg.rolloff)
    }
}

/// Delay bin range [lo, hi] covered by a path's filter support.
#[inline]
pub(crate) fn support_range(tau: f64, cfg: &SamplingConfig) -> (usize, usize) {
    let center = tau / cfg.t_c;
    let lo = (center - RC_SUPPORT_BINS as f64).ceil().max(0.0) as usize;
    let hi = ((center + RC_SUPPORT_BINS as f64).floor() as usize).min(cfg.n_delay_bins - 1);
    (lo, hi.max(lo))
}

/// Delay of a path at time sample m under the constant-velocity assumption:
/// tau_l[m] = tau_l - (f_l / f_C) * m * T_s.
pub fn path_delay_at(path: &PropagationPath, m: usize, cfg: &SamplingConfig) -> f64 {
    path.delay_s - path.doppler_hz / cfg.carrier_hz * (m as f64 * cfg.t_s)
}

/// Sample the band-limited CIR of a region:
/// h[m, n] = sum_l |eta_l| e^{j 2 pi (phi_l - nu_l m)} h_RC(n T_c - tau_l).
pub fn sample_cir(region: &StationarityRegion, cfg: &SamplingConfig) -> Result<SampledCir> {
    cfg.validate()?;
    if region.paths.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let window = cfg.delay_window_s();
    for p in &region.paths {
        if p.delay_s > window {
            return Err(Error::DelayOutOfWindow { delay_s: p.delay_s, window_s: window });
        }
        if p.doppler_hz.abs() > cfg.doppler_nyquist_hz() {
            return Err(Error::InvalidConfig(format!(
                "path Doppler {} Hz exceeds the sampling Nyquist limit {} Hz",
                p.doppler_hz,
                cfg.doppler_nyquist_hz()
            )));
        }
    }

    let (m_n, n_n) = (cfg.m_samples, cfg.n_delay_bins);
    let mut data = vec![Complex64::ZERO; m_n * n_n];
    let two_pi = 2.0 * std::f64::consts::PI;
    for p in &region.paths {
        let nu = p.doppler_hz * cfg.t_s;
        let (lo, hi) = support_range(p.delay_s, cfg);
        // per-path tap values on the delay grid
        let taps: Vec<f64> = (lo..=hi).map(|n| rc_tap(n, p.delay_s, cfg)).collect();
        let step = Complex64::from_polar(1.0, -two_pi * nu);
        let mut rot = p.weight();
        for m in 0..m_n {
            let row = &mut data[m * n_n..(m + 1) * n_n];
            for (i, &t) in taps.iter().enumerate() {
                row[lo + i] += rot * t;
            }
            rot *= step;
        }
    }
    Ok(SampledCir { data, config: *cfg, region_index: region.index })
}
