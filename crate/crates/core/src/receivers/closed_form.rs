//! Closed-form error probabilities of direct detection and conditional pulse
//! nulling, and the displacement optimizations built on them.
//!
//! Notation: `p` is the no-click probability of the pulse, `q` that of a
//! background slot, both after the stated setting; a bar is the complement.
//! Subscript `Γ` is the working setting, `0` is no operation.

use crate::binary::displacement_bounds;
use crate::error::{domain, Result};
use crate::optics::{no_click_probability, ChannelParams, MeasurementSetting, SignalState};
use crate::optimize::{minimize_scalar, OptimizationSpec};

/// `(p, q)` for one slot.
fn no_click_pair(
    mean_photons: f64,
    channel: &ChannelParams,
    setting: &MeasurementSetting,
) -> Result<(f64, f64)> {
    let pulse = SignalState::pulse(mean_photons, channel.n_thermal)?;
    let vacuum = SignalState::vacuum(channel.n_thermal)?;
    Ok((
        no_click_probability(&pulse, setting, channel)?,
        no_click_probability(&vacuum, setting, channel)?,
    ))
}

fn check_slots(slots: usize) -> Result<()> {
    if slots < 2 {
        return Err(domain("slots", "need at least two slots"));
    }
    Ok(())
}

/// `Σ_{j<m} q^j`, the stable form of `(1 − q^m)/(1 − q)`.
fn geometric(q: f64, m: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..m {
        sum += term;
        term *= q;
    }
    sum
}

/// Direct detection with the same setting on every slot; a uniformly random
/// clicked slot is chosen, or any slot when none clicked.
///
/// Evaluated as `1 − p q^(M−1)/M − p̄ Σ_{j<M} q^j / M`, which has no
/// removable singularity at `q = 1`.
pub fn dd_error_closed_form(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
    setting: &MeasurementSetting,
) -> Result<f64> {
    check_slots(slots)?;
    let (p, q) = no_click_pair(mean_photons, channel, setting)?;
    Ok(dd_from_stats(slots, p, q))
}

pub(crate) fn dd_from_stats(slots: usize, p: f64, q: f64) -> f64 {
    let m = slots as f64;
    let correct = p * q.powi(slots as i32 - 1) / m + (1.0 - p) * geometric(q, slots) / m;
    (1.0 - correct).max(0.0)
}

/// The rational form `[(M − p q^(M−1)) q̄ − p̄ (1 − q^M)] / (M q̄)`. When `q̄`
/// is below `1e−12` its limit `p (M−1)/M` is returned.
pub fn dd_error_rational(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
    setting: &MeasurementSetting,
) -> Result<f64> {
    check_slots(slots)?;
    let (p, q) = no_click_pair(mean_photons, channel, setting)?;
    let m = slots as f64;
    let qb = 1.0 - q;
    if qb < 1e-12 {
        return Ok(p * (m - 1.0) / m);
    }
    let pb = 1.0 - p;
    Ok(((m - p * q.powi(slots as i32 - 1)) * qb - pb * (1.0 - q.powi(slots as i32))) / (m * qb))
}

/// Conditional pulse nulling: the hypothesized slot is measured with
/// `null_setting`; a click moves the hypothesis to the next slot (the last
/// slot keeps it), a no-click switches to plain detection for the remaining
/// slots, where the last click seen sets the hypothesis.
///
/// Evaluated per true slot `i` (1-based) as
/// `P(correct | i) = q₀^(M−i) [(1 − q̄_Γ^(i−1)) p̄₀ + q̄_Γ^(i−1) p_Γ] + [i = M] q̄_Γ^(M−1) p̄_Γ`.
pub fn cpn_error_closed_form(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
    null_setting: &MeasurementSetting,
) -> Result<f64> {
    check_slots(slots)?;
    let (pg, qg) = no_click_pair(mean_photons, channel, null_setting)?;
    let (p0, q0) = no_click_pair(mean_photons, channel, &MeasurementSetting::NONE)?;
    Ok(cpn_from_stats(slots, pg, qg, p0, q0))
}

pub(crate) fn cpn_from_stats(slots: usize, pg: f64, qg: f64, p0: f64, q0: f64) -> f64 {
    let m = slots;
    let qgb = 1.0 - qg;
    let mut correct = 0.0;
    let mut advance = 1.0; // q̄_Γ^(i−1)
    for i in 1..=m {
        let tail = q0.powi((m - i) as i32);
        correct += tail * ((1.0 - advance) * (1.0 - p0) + advance * pg);
        if i == m {
            correct += advance * (1.0 - pg);
        }
        advance *= qgb;
    }
    (1.0 - correct / m as f64).max(0.0)
}

/// The rational form with denominator `M q̄₀ (q̄_Γ − q₀)`. Ill-conditioned
/// when `q̄₀` or `q̄_Γ − q₀` is small; kept as a cross-check.
pub fn cpn_error_rational(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
    null_setting: &MeasurementSetting,
) -> Result<f64> {
    check_slots(slots)?;
    let (pg, qg) = no_click_pair(mean_photons, channel, null_setting)?;
    let (p0, q0) = no_click_pair(mean_photons, channel, &MeasurementSetting::NONE)?;
    let m = slots as f64;
    let (pgb, qgb, p0b, q0b) = (1.0 - pg, 1.0 - qg, 1.0 - p0, 1.0 - q0);
    let num = (p0b - m * q0b) * (q0 - qgb)
        + q0b * qgb.powi(slots as i32 - 1) * (pgb * q0 - p0 * qgb)
        + q0.powi(slots as i32) * (pg * q0b - p0b * qg);
    Ok(num / (m * q0b * (qgb - q0)))
}

/// Real displacement minimizing the direct-detection error.
/// Returns `(setting, error, interior)`.
pub fn optimal_dd(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
) -> Result<(MeasurementSetting, f64, bool)> {
    optimal_shift(slots, mean_photons, channel, dd_error_closed_form)
}

/// Real nulling displacement minimizing the CPN error.
pub fn optimal_cpn(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
) -> Result<(MeasurementSetting, f64, bool)> {
    optimal_shift(slots, mean_photons, channel, cpn_error_closed_form)
}

fn optimal_shift<F>(
    slots: usize,
    mean_photons: f64,
    channel: &ChannelParams,
    error: F,
) -> Result<(MeasurementSetting, f64, bool)>
where
    F: Fn(usize, f64, &ChannelParams, &MeasurementSetting) -> Result<f64>,
{
    check_slots(slots)?;
    channel.validate()?;
    SignalState::pulse(mean_photons, channel.n_thermal)?;
    let (lo, hi) = displacement_bounds(mean_photons.sqrt());
    let m = minimize_scalar(&OptimizationSpec::scalar(lo, hi), |g| {
        error(
            slots,
            mean_photons,
            channel,
            &MeasurementSetting::displace(g),
        )
        .unwrap_or(f64::NAN)
    })?;
    Ok((MeasurementSetting::displace(m.argmin), m.value, m.interior))
}
