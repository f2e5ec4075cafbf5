//! Measurement classes and the two-outcome objective shared by the greedy
//! and slicing receivers.

use serde::{Deserialize, Serialize};

use crate::binary::{displacement_bounds, GAIN_BOUNDS};
use crate::error::{Error, Result};
use crate::optics::MeasurementSetting;
use crate::optimize::{minimize_2d, minimize_scalar, OptimizationSpec};
use crate::ppm::{ClickProbs, ObservationModel};

/// Range searched for the Dolinar assumed prior.
pub const DOLINAR_PRIOR_BOUNDS: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// Family of settings a receiver may choose from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementClass {
    /// Real displacement.
    Displacement,
    /// Real displacement followed by phase-sensitive gain.
    DisplacementGain,
    /// Dolinar parity statistics, ideal channel only.
    Dolinar,
    /// A single setting, no optimization.
    Fixed(MeasurementSetting),
}

/// Which outcome moves the hypothesis to the current slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevisionRule {
    /// Option A: revise on a click.
    OnClick,
    /// Option B: revise on a no-click.
    OnNoClick,
}

impl RevisionRule {
    pub fn switches(self, click: bool) -> bool {
        match self {
            RevisionRule::OnClick => click,
            RevisionRule::OnNoClick => !click,
        }
    }

    /// Success weight of the observation: `w_keep` times the chance the
    /// background slot leaves the hypothesis alone, plus `w_switch` times
    /// the chance the pulse slot moves it.
    pub fn objective(self, probs: &ClickProbs, weights: (f64, f64)) -> f64 {
        let (keep, switch) = weights;
        match self {
            RevisionRule::OnClick => keep * (1.0 - probs.background) + switch * probs.pulse,
            RevisionRule::OnNoClick => keep * probs.background + switch * (1.0 - probs.pulse),
        }
    }
}

/// Revision ratio `r`, the likelihood of the current slot holding the pulse
/// relative to the current hypothesis. `None` is infinite.
pub(crate) fn ratio(numerator: f64, denominator: f64) -> Option<f64> {
    if denominator > 0.0 {
        Some(numerator / denominator)
    } else if numerator > 0.0 {
        None
    } else {
        Some(1.0)
    }
}

/// `(w_keep, w_switch)` proportional to `(1, r)`, scaled so the larger is 1.
pub(crate) fn weights(r: Option<f64>) -> (f64, f64) {
    match r {
        None => (0.0, 1.0),
        Some(r) if r <= 1.0 => (1.0, r),
        Some(r) => (1.0 / r, 1.0),
    }
}

/// Search resolution used per optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub grid_1d: usize,
    pub grid_2d: usize,
    pub tolerance: f64,
}

impl Tuning {
    /// Resolution for per-slice choices. Slice amplitudes are small, so the
    /// objective varies on a scale of order one across the displacement
    /// range and a coarser scan brackets the same basin.
    pub const SLICE: Tuning = Tuning {
        grid_1d: 24,
        grid_2d: 16,
        tolerance: 1e-8,
    };
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            grid_1d: crate::optimize::DEFAULT_GRID_DENSITY,
            grid_2d: 24,
            tolerance: crate::optimize::DEFAULT_TOLERANCE,
        }
    }
}

/// Best setting of the class for a fixed rule and weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassOptimum {
    pub setting: MeasurementSetting,
    pub value: f64,
    pub interior: bool,
}

/// Maximizes `rule.objective` over the class.
pub(crate) fn optimize_rule(
    model: &ObservationModel,
    class: &MeasurementClass,
    rule: RevisionRule,
    w: (f64, f64),
    tuning: &Tuning,
) -> Result<ClassOptimum> {
    optimize_class(model, class, tuning, |probs| rule.objective(probs, w))
}

/// Maximizes `score(click probabilities)` over the class parameters.
pub(crate) fn optimize_class<F>(
    model: &ObservationModel,
    class: &MeasurementClass,
    tuning: &Tuning,
    mut score: F,
) -> Result<ClassOptimum>
where
    F: FnMut(&ClickProbs) -> f64,
{
    let mut failure = None;
    let mut eval = |setting: MeasurementSetting| match model.click_probs(&setting) {
        Ok(p) => -score(&p),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let amplitude = model.pulse().amplitude.norm();
    let result = match *class {
        MeasurementClass::Fixed(setting) => {
            let value = -eval(setting);
            return match failure {
                Some(e) => Err(e),
                None => Ok(ClassOptimum {
                    setting,
                    value,
                    interior: true,
                }),
            };
        }
        MeasurementClass::Displacement => {
            let (lo, hi) = displacement_bounds(amplitude);
            let spec = OptimizationSpec::scalar(lo, hi)
                .with_grid_density(tuning.grid_1d)
                .with_tolerance(tuning.tolerance);
            minimize_scalar(&spec, |g| eval(MeasurementSetting::displace(g)))
                .map(|m| (MeasurementSetting::displace(m.argmin), m.value, m.interior))
        }
        MeasurementClass::Dolinar => {
            let (lo, hi) = DOLINAR_PRIOR_BOUNDS;
            let spec = OptimizationSpec::scalar(lo, hi)
                .with_grid_density(tuning.grid_1d)
                .with_tolerance(tuning.tolerance);
            minimize_scalar(&spec, |x| eval(MeasurementSetting::dolinar(x)))
                .map(|m| (MeasurementSetting::dolinar(m.argmin), m.value, m.interior))
        }
        MeasurementClass::DisplacementGain => {
            let spec = OptimizationSpec::plane(displacement_bounds(amplitude), GAIN_BOUNDS)
                .with_grid_density(tuning.grid_2d)
                .with_tolerance(tuning.tolerance);
            minimize_2d(&spec, |g, gain| eval(MeasurementSetting::squeeze(g, gain))).map(|m| {
                let (g, gain) = m.argmin;
                (MeasurementSetting::squeeze(g, gain), m.value, m.interior)
            })
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let (setting, value, interior) = result?;
    Ok(ClassOptimum {
        setting,
        value: -value,
        interior,
    })
}

/// Checks that the class can be used on this channel.
pub(crate) fn check_class(model: &ObservationModel, class: &MeasurementClass) -> Result<()> {
    match class {
        MeasurementClass::Dolinar if !model.config().channel.is_ideal() => {
            Err(Error::UnsupportedSetting(
                "Dolinar statistics need a lossless, noiseless channel".into(),
            ))
        }
        MeasurementClass::Fixed(s) => s.validate(),
        _ => Ok(()),
    }
}
