//! Closed-form channel statistics: Doppler spectral density with an LOS
//! point mass, analytical RMS Doppler spread, the Clarke relation, the
//! closed-form delay spread of an exponential PDP, and the emulator
//! resolution analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tdl::{exp_pdp, ExpPdpConfig};

/// Environment for the Doppler spectral density of the TDL model.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerEnv {
    pub f_dmax_hz: f64,
    pub f_los_hz: f64,
    /// Rician K of the first tap, linear scale.
    pub k_linear: f64,
    /// Normalized tap powers |alpha[i]|^2, summing to 1.
    pub tap_powers: Vec<f64>,
}

impl DopplerEnv {
    pub fn new(f_dmax_hz: f64, f_los_hz: f64, k_linear: f64, tap_powers: Vec<f64>) -> Result<Self> {
        if !(f_dmax_hz.is_finite() && f_los_hz.is_finite() && k_linear.is_finite()) {
            return Err(Error::NonFinite("Doppler environment"));
        }
        if f_dmax_hz < 0.0 || k_linear < 0.0 {
            return Err(Error::InvalidConfig("f_Dmax and K must be non-negative".into()));
        }
        if f_los_hz.abs() > f_dmax_hz {
            return Err(Error::InvalidConfig(format!(
                "|f_LOS| = {} exceeds f_Dmax = {}",
                f_los_hz.abs(),
                f_dmax_hz
            )));
        }
        let sum: f64 = tap_powers.iter().sum();
        if tap_powers.is_empty() || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("tap powers must sum to 1, got {sum}")));
        }
        Ok(Self { f_dmax_hz, f_los_hz, k_linear, tap_powers })
    }

    /// Total weight of the continuous (bathtub) part of the density.
    pub fn continuous_weight(&self) -> f64 {
        let a1 = self.tap_powers[0];
        let rest: f64 = self.tap_powers[1..].iter().sum();
        a1 / (1.0 + self.k_linear) + rest
    }

    /// Probability mass of the LOS delta at f_LOS.
    pub fn los_point_mass(&self) -> f64 {
        self.tap_powers[0] * self.k_linear / (1.0 + self.k_linear)
    }

    /// Continuous part of the Doppler spectral probability density at f.
    /// The LOS delta is reported separately by [`Self::los_point_mass`].
    pub fn continuous_density(&self, f_hz: f64) -> Result<f64> {
        if f_hz.abs() >= self.f_dmax_hz {
            return Err(Error::Domain(format!(
                "continuous density defined for |f| < f_Dmax = {}, got {}",
                self.f_dmax_hz, f_hz
            )));
        }
        let bath = 1.0 / (std::f64::consts::PI * (self.f_dmax_hz.powi(2) - f_hz.powi(2)).sqrt());
        Ok(self.continuous_weight() * bath)
    }
}

/// RMS Doppler spread of Clarke's model: f_Dmax / sqrt(2).
pub fn clarke_rms_doppler(f_dmax_hz: f64) -> f64 {
    f_dmax_hz / std::f64::consts::SQRT_2
}

/// Analytical RMS Doppler spread of the TDL model with LOS component.
pub fn analytic_rms_doppler(env: &DopplerEnv) -> Result<f64> {
    let a1 = env.tap_powers[0];
    let rest: f64 = env.tap_powers[1..].iter().sum();
    let k = env.k_linear;
    let fd2 = env.f_dmax_hz.powi(2);
    let fl2 = env.f_los_hz.powi(2);
    let var = a1 * ((2.0 * fl2 * k + fd2) / (2.0 * (1.0 + k)) - a1 * fl2 * k * k / (1.0 + k).powi(2))
        + fd2 / 2.0 * rest;
    if var < -1e-12 {
        return Err(Error::Internal(format!("negative Doppler variance {var}")));
    }
    Ok(var.max(0.0).sqrt())
}

/// Mean and RMS spread of a discrete power profile over bins k * dt.
pub(crate) fn profile_moments(powers: &[f64], dt: f64) -> Result<(f64, f64)> {
    let total: f64 = powers.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProfile);
    }
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (k, &p) in powers.iter().enumerate() {
        let x = k as f64 * dt;
        m1 += x * p;
        m2 += x * x * p;
    }
    m1 /= total;
    m2 /= total;
    Ok((m1, (m2 - m1 * m1).max(0.0).sqrt()))
}

/// Closed-form RMS delay spread of the exponential PDP.
///
/// With q = e^{-dt/tau0}: sigma = dt / ((1-q)(1-q^N)) * sqrt(A),
/// A = q - N^2 q^N + 2 (N^2 - 1) q^{N+1} - N^2 q^{N+2} + q^{2N+1}.
/// For q -> 1 the formula cancels catastrophically; beyond q = e^{-1/20}
/// the moments are summed directly (identical value, exact in f64).
pub fn closed_form_exp_delay_spread(cfg: &ExpPdpConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.n_taps as f64;
    let x = cfg.dt_s / cfg.tau0_s;
    if cfg.n_taps == 1 {
        return Ok(0.0);
    }
    if x < 1e-9 {
        // discrete-uniform limit
        return Ok(cfg.dt_s * ((n * n - 1.0) / 12.0).sqrt());
    }
    if x < 0.05 {
        let powers: Vec<f64> = (0..cfg.n_taps).map(|k| (-(k as f64) * x).exp()).collect();
        return Ok(profile_moments(&powers, cfg.dt_s)?.1);
    }
    let q = (-x).exp();
    let qn = q.powi(cfg.n_taps as i32);
    let a = q - n * n * qn + 2.0 * (n * n - 1.0) * qn * q - n * n * qn * q * q + qn * qn * q;
    Ok(cfg.dt_s / ((1.0 - q) * (1.0 - qn)) * a.max(0.0).sqrt())
}

/// Largest delay spread attainable by an exponential PDP with the given
/// tap count and spacing (the uniform limit, tau0 -> infinity).
pub fn max_exp_delay_spread(dt_s: f64, n_taps: usize) -> f64 {
    let n = n_taps as f64;
    dt_s * ((n * n - 1.0) / 12.0).sqrt()
}

/// Solve for the tau0 whose exponential PDP has the target RMS delay spread.
/// Bisection; the spread is strictly increasing in tau0.
pub fn solve_tau0_for_target(target_sigma_tau_s: f64, dt_s: f64, n_taps: usize) -> Result<f64> {
    if !target_sigma_tau_s.is_finite() || dt_s <= 0.0 || n_taps == 0 {
        return Err(Error::InvalidConfig("invalid solve_tau0 arguments".into()));
    }
    let max = max_exp_delay_spread(dt_s, n_taps);
    if target_sigma_tau_s <= 0.0 || target_sigma_tau_s >= max {
        return Err(Error::TargetOutOfRange { target_s: target_sigma_tau_s, max_s: max });
    }
    let spread = |tau0: f64| {
        closed_form_exp_delay_spread(&ExpPdpConfig { tau0_s: tau0, dt_s, n_taps })
            .expect("valid bisection point")
    };
    let mut lo = dt_s * 1e-6;
    let mut hi = dt_s * 1e12;
    // expand lo down if needed for very small targets
    while spread(lo) > target_sigma_tau_s {
        lo *= 0.5;
        if lo < dt_s * 1e-18 {
            return Err(Error::TargetOutOfRange { target_s: target_sigma_tau_s, max_s: max });
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if spread(mid) < target_sigma_tau_s {
            lo = mid;
        } else {
            hi = mid;
        }
        if (spread(lo) - target_sigma_tau_s).abs() < 1e-15 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Result of truncating an exponential PDP to an emulator's dynamic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub target_sigma_tau_s: f64,
    pub n_taps_used: usize,
    /// Normalized tap powers with truncated taps zeroed.
    pub surviving_tap_powers: Vec<f64>,
    pub achieved_sigma_tau_s: f64,
    pub abs_error_s: f64,
    pub dynamic_range_db: f64,
}

/// Build the exponential PDP achieving the target spread, zero all taps more
/// than `dynamic_range_db` below the peak, and recompute the spread.
pub fn resolution_analysis(
    target_sigma_tau_s: f64,
    dynamic_range_db: f64,
    dt_s: f64,
    n_taps: usize,
) -> Result<ResolutionReport> {
    if dynamic_range_db <= 0.0 {
        return Err(Error::InvalidConfig("dynamic range must be positive".into()));
    }
    let tau0 = solve_tau0_for_target(target_sigma_tau_s, dt_s, n_taps)?;
    let powers = exp_pdp(&ExpPdpConfig { tau0_s: tau0, dt_s, n_taps })?;
    let peak = powers.iter().cloned().fold(0.0, f64::max);
    let floor = peak * 10f64.powf(-dynamic_range_db / 10.0);
    let surviving: Vec<f64> = powers.iter().map(|&p| if p >= floor { p } else { 0.0 }).collect();
    let n_used = surviving.iter().filter(|&&p| p > 0.0).count();
    let achieved = if n_used <= 1 { 0.0 } else { profile_moments(&surviving, dt_s)?.1 };
    Ok(ResolutionReport {
        target_sigma_tau_s,
        n_taps_used: n_used,
        surviving_tap_powers: surviving,
        achieved_sigma_tau_s: achieved,
        abs_error_s: (achieved - target_sigma_tau_s).abs(),
        dynamic_range_db,
    })
}
