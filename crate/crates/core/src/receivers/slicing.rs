//! Receivers that measure every slice and keep a full posterior.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{domain, Result};
use crate::optics::MeasurementSetting;
use crate::ppm::{ClickProbs, Decision, ObservationModel, Posterior, Receiver};

use super::class::{check_class, optimize_rule, weights, MeasurementClass, RevisionRule, Tuning};

/// Entries kept in the per-slice setting cache before it is cleared.
const CACHE_LIMIT: usize = 1 << 20;

/// Per-slice greedy receiver over a posterior.
///
/// Before slice `k` of slot `j` the ratio `r = P[j] / max_{i≠j} P[i]` picks
/// the rule: revise-on-click when `r ≤ 1`, revise-on-no-click otherwise. The
/// setting maximizes that rule's success weight with weights `(1, r)`. The
/// final decision is the posterior mode.
#[derive(Debug)]
pub struct SlicingGreedy {
    class: MeasurementClass,
    tuning: Tuning,
    cache: Mutex<HashMap<(u64, RevisionRule), MeasurementSetting>>,
}

impl SlicingGreedy {
    pub fn new(class: MeasurementClass) -> Result<Self> {
        Self::with_tuning(class, Tuning::SLICE)
    }

    pub fn with_tuning(class: MeasurementClass, tuning: Tuning) -> Result<Self> {
        if class == MeasurementClass::Dolinar {
            return Err(domain(
                "class",
                "slicing supports displacement, displacement with gain, or a fixed setting",
            ));
        }
        Ok(SlicingGreedy {
            class,
            tuning,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn class(&self) -> MeasurementClass {
        self.class
    }

    /// Rule and setting for the next slice of `slot` given the posterior.
    pub fn choose(
        &self,
        model: &ObservationModel,
        posterior: &Posterior,
        slot: usize,
    ) -> Result<(RevisionRule, MeasurementSetting)> {
        let (current, rival) = posterior.contest(slot);
        let r = if rival > 0.0 {
            Some(current / rival)
        } else {
            None
        };
        let rule = match r {
            Some(r) if r <= 1.0 => RevisionRule::OnClick,
            _ => RevisionRule::OnNoClick,
        };
        if let MeasurementClass::Fixed(setting) = self.class {
            return Ok((rule, setting));
        }
        let key = (r.unwrap_or(f64::INFINITY).to_bits(), rule);
        if let Some(&s) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok((rule, s));
        }
        let best = optimize_rule(model, &self.class, rule, weights(r), &self.tuning)?;
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, best.setting);
        Ok((rule, best.setting))
    }
}

impl Receiver for SlicingGreedy {
    type State = Posterior;

    fn start(&self, model: &ObservationModel) -> Result<Self::State> {
        check_class(model, &self.class)?;
        Posterior::from_priors(&model.config().priors)
    }

    fn prepare(
        &self,
        model: &ObservationModel,
        posterior: &mut Self::State,
        index: usize,
    ) -> Result<MeasurementSetting> {
        self.choose(model, posterior, model.slot_of(index))
            .map(|(_, s)| s)
    }

    fn observe(
        &self,
        model: &ObservationModel,
        posterior: &mut Self::State,
        index: usize,
        click: bool,
        probs: &ClickProbs,
    ) -> Result<()> {
        posterior.observe_slot(model.slot_of(index), click, probs)
    }

    fn decide(&self, _: &ObservationModel, posterior: &Self::State) -> Decision {
        Decision::Slot(posterior.argmax())
    }
}

/// Direct detection of every slice with Bayesian updates and a posterior
/// mode decision. No operation is applied.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BayesianDdSlicing;

impl Receiver for BayesianDdSlicing {
    type State = Posterior;

    fn start(&self, model: &ObservationModel) -> Result<Self::State> {
        Posterior::from_priors(&model.config().priors)
    }

    fn prepare(
        &self,
        _: &ObservationModel,
        _: &mut Self::State,
        _: usize,
    ) -> Result<MeasurementSetting> {
        Ok(MeasurementSetting::NONE)
    }

    fn observe(
        &self,
        model: &ObservationModel,
        posterior: &mut Self::State,
        index: usize,
        click: bool,
        probs: &ClickProbs,
    ) -> Result<()> {
        posterior.observe_slot(model.slot_of(index), click, probs)
    }

    fn decide(&self, _: &ObservationModel, posterior: &Self::State) -> Decision {
        Decision::Slot(posterior.argmax())
    }
}
