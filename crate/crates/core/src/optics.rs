//! Click statistics of displaced thermal states.
//!
//! A received slot (or slice) is a coherent amplitude `φ` on top of thermal
//! background with mean occupation `N_d`. Before the on/off detector the
//! receiver applies one of three operations: a displacement, a displacement
//! followed by phase-sensitive gain `G` (squeezing phase fixed to zero), or a
//! Dolinar feedback receiver that is only described through its parity
//! statistics (see [`crate::binary`]). The detector has efficiency `η`.
//!
//! The no-click probability for the first two operations is
//!
//! ```text
//!            exp[ −η (√G + √(G−1))² N̄ / (1 + η((1+2N_d)√(G−1)(√(G−1)+√G) + N_d)) ]
//! p(φ, Γ) = ───────────────────────────────────────────────────────────────────────
//!            √[ (2G − 1 + (1 − G + N_d)η)² − (G−1)G(η−2)² ]
//! ```
//!
//! with `N̄ = |φ + Γ|²`. The radicand is the determinant of the detected
//! covariance matrix plus vacuum noise, so it is positive for any valid input.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Gains closer to one than this use the pure-displacement branch.
const UNIT_GAIN_TOLERANCE: f64 = 1e-12;

/// Thermal background and detector efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Mean thermal photon number `N_d` per slot.
    pub n_thermal: f64,
    /// Detector quantum efficiency `η`.
    pub efficiency: f64,
}

impl ChannelParams {
    /// Lossless, noiseless channel.
    pub const IDEAL: ChannelParams = ChannelParams {
        n_thermal: 0.0,
        efficiency: 1.0,
    };

    pub fn new(n_thermal: f64, efficiency: f64) -> Result<Self> {
        let channel = ChannelParams {
            n_thermal,
            efficiency,
        };
        channel.validate()?;
        Ok(channel)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_thermal >= 0.0 && self.n_thermal.is_finite()) {
            return Err(domain(
                "n_thermal",
                format!("{} is not >= 0", self.n_thermal),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(domain(
                "efficiency",
                format!("{} is not in (0, 1]", self.efficiency),
            ));
        }
        Ok(())
    }

    /// True for `N_d = 0`, `η = 1`.
    pub fn is_ideal(&self) -> bool {
        self.n_thermal == 0.0 && self.efficiency == 1.0
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// A displaced thermal state arriving at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalState {
    pub amplitude: Complex64,
    /// Mean thermal photon number of this mode.
    pub thermal: f64,
}

impl SignalState {
    pub fn new(amplitude: Complex64, thermal: f64) -> Result<Self> {
        let state = SignalState { amplitude, thermal };
        state.validate()?;
        Ok(state)
    }

    /// Coherent pulse with real amplitude `√N` over the given background.
    pub fn pulse(mean_photons: f64, thermal: f64) -> Result<Self> {
        if !(mean_photons >= 0.0) {
            return Err(domain(
                "mean_photons",
                format!("{mean_photons} is not >= 0"),
            ));
        }
        Self::new(Complex64::new(mean_photons.sqrt(), 0.0), thermal)
    }

    /// Background only.
    pub fn vacuum(thermal: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), thermal)
    }

    pub fn mean_photons(&self) -> f64 {
        self.amplitude.norm_sqr()
    }

    fn validate(&self) -> Result<()> {
        if !(self.thermal >= 0.0 && self.thermal.is_finite()) {
            return Err(domain("thermal", format!("{} is not >= 0", self.thermal)));
        }
        if !self.amplitude.norm_sqr().is_finite() {
            return Err(domain("amplitude", "mean photon number is not finite"));
        }
        Ok(())
    }
}

/// The operation applied to a mode before detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSetting {
    /// Coherent displacement by `shift`.
    Displace { shift: Complex64 },
    /// Displacement followed by phase-sensitive gain `gain ≥ 1` at phase zero.
    DisplaceSqueeze { shift: Complex64, gain: f64 },
    /// Dolinar receiver tuned to the given prior of the vacuum hypothesis.
    DolinarStats { assumed_prior: f64 },
}

impl MeasurementSetting {
    /// No operation: `Γ = 0`, `G = 1`.
    pub const NONE: MeasurementSetting = MeasurementSetting::Displace {
        shift: Complex64 { re: 0.0, im: 0.0 },
    };

    /// Real displacement.
    pub fn displace(shift: f64) -> Self {
        MeasurementSetting::Displace {
            shift: Complex64::new(shift, 0.0),
        }
    }

    /// Real displacement followed by gain.
    pub fn squeeze(shift: f64, gain: f64) -> Self {
        MeasurementSetting::DisplaceSqueeze {
            shift: Complex64::new(shift, 0.0),
            gain,
        }
    }

    pub fn dolinar(assumed_prior: f64) -> Self {
        MeasurementSetting::DolinarStats { assumed_prior }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasurementSetting::Displace { shift } => {
                if !shift.norm_sqr().is_finite() {
                    return Err(domain("shift", "not finite"));
                }
            }
            MeasurementSetting::DisplaceSqueeze { shift, gain } => {
                if !shift.norm_sqr().is_finite() {
                    return Err(domain("shift", "not finite"));
                }
                if !(gain >= 1.0 && gain.is_finite()) {
                    return Err(domain("gain", format!("{gain} is not >= 1")));
                }
            }
            MeasurementSetting::DolinarStats { assumed_prior } => {
                if !(assumed_prior > 0.0 && assumed_prior < 1.0) {
                    return Err(domain(
                        "assumed_prior",
                        format!("{assumed_prior} is not in (0, 1)"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Probability that the detector registers nothing.
///
/// The background is taken from `state.thermal`; `channel` supplies the
/// detector efficiency and is validated. Dolinar settings are rejected, their
/// statistics live in [`crate::binary`].
pub fn no_click_probability(
    state: &SignalState,
    setting: &MeasurementSetting,
    channel: &ChannelParams,
) -> Result<f64> {
    channel.validate()?;
    state.validate()?;
    setting.validate()?;
    let (shift, gain) = match *setting {
        MeasurementSetting::Displace { shift } => (shift, 1.0),
        MeasurementSetting::DisplaceSqueeze { shift, gain } => (shift, gain),
        MeasurementSetting::DolinarStats { .. } => {
            return Err(Error::UnsupportedSetting(
                "Dolinar statistics have no no-click form".into(),
            ))
        }
    };
    if gain - 1.0 >= UNIT_GAIN_TOLERANCE {
        let radicand = squeeze_radicand(gain, state.thermal, channel.efficiency);
        if !(radicand > 0.0) {
            return Err(Error::Numeric(radicand));
        }
    }
    let photons = (state.amplitude + shift).norm_sqr();
    Ok(no_click_raw(
        photons,
        gain,
        state.thermal,
        channel.efficiency,
    ))
}

/// Unchecked kernel for hot loops. Inputs must already satisfy the invariants.
pub(crate) fn no_click_raw(photons: f64, gain: f64, thermal: f64, eta: f64) -> f64 {
    if gain - 1.0 < UNIT_GAIN_TOLERANCE {
        let denom = 1.0 + eta * thermal;
        return (-eta * photons / denom).exp() / denom;
    }
    let root_g = gain.sqrt();
    let root_g1 = (gain - 1.0).sqrt();
    let amplify = (root_g + root_g1) * (root_g + root_g1);
    let spread = 1.0 + eta * ((1.0 + 2.0 * thermal) * root_g1 * (root_g1 + root_g) + thermal);
    let radicand = squeeze_radicand(gain, thermal, eta);
    debug_assert!(
        radicand > 0.0,
        "no-click radicand {radicand} is not positive"
    );
    (-eta * amplify * photons / spread).exp() / radicand.sqrt()
}

fn squeeze_radicand(gain: f64, thermal: f64, eta: f64) -> f64 {
    let lead = 2.0 * gain - 1.0 + (1.0 - gain + thermal) * eta;
    lead * lead - (gain - 1.0) * gain * (eta - 2.0) * (eta - 2.0)
}

/// Transmissivities of the `n − 1` beamsplitters that cut a mode into `n`
/// equal slices: `(n−1)/n, (n−2)/(n−1), …, 1/2`.
pub fn cascade_transmissivities(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("n", "slice count must be at least 1"));
    }
    Ok((1..n).rev().map(|k| k as f64 / (k + 1) as f64).collect())
}

/// One of the `n` identical slices: amplitude `φ/√n`, background `N_d/n`.
pub fn slice_state(state: &SignalState, n: usize) -> Result<SignalState> {
    if n == 0 {
        return Err(domain("n", "slice count must be at least 1"));
    }
    if n == 1 {
        return Ok(*state);
    }
    let scale = n as f64;
    Ok(SignalState {
        amplitude: state.amplitude / scale.sqrt(),
        thermal: state.thermal / scale,
    })
}
