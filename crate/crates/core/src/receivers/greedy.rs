//! Slot-by-slot greedy receiver driven by a revision ratio.
//!
//! The receiver holds a hypothesis `h` and the ratio `r` of the likelihood of
//! "the pulse is in the current slot" to that of `h`, given the outcomes so
//! far. Before each slot after the first it picks whichever revision rule,
//! with its best setting, maximizes the two-hypothesis success weight
//! `1·P(keep | background) + r·P(switch | pulse)`. Since `r` only depends on
//! the outcome that last moved the hypothesis, every prefix maps to one
//! setting and the whole receiver is a finite table.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::exact_error_with_cap;
use crate::optics::MeasurementSetting;
use crate::optimize::{minimize_2d, minimize_scalar, OptimizationSpec};
use crate::ppm::{ClickProbs, ClickSequence, Decision, ObservationModel, PpmConfig, Receiver};

use super::class::{
    check_class, optimize_rule, ratio, weights, MeasurementClass, RevisionRule, Tuning,
    DOLINAR_PRIOR_BOUNDS,
};
use super::simple::require_unsliced;
use crate::binary::{displacement_bounds, GAIN_BOUNDS};

/// Relative resolution of the revision-ratio memo.
const RATIO_QUANTUM: f64 = 1e-6;

/// Grid density of the outer search over the first slot's two parameters.
const FIRST_SLOT_GRID_2D: usize = 16;

/// Setting and revision rule for one slot. The first slot has no rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanStep {
    pub setting: MeasurementSetting,
    pub rule: Option<RevisionRule>,
}

/// Hypothesis and revision ratio before a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevisionState {
    pub hypothesis: usize,
    /// `None` when the hypothesis is ruled out by the outcomes so far.
    pub ratio: Option<f64>,
}

/// A resolved greedy receiver: one step per reachable click prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyPlan {
    pub class: MeasurementClass,
    pub slots: usize,
    table: BTreeMap<ClickSequence, PlanStep>,
    /// Optimizations whose best grid point sat on a bound.
    pub warnings: usize,
}

impl GreedyPlan {
    pub fn first_setting(&self) -> MeasurementSetting {
        self.table[&ClickSequence::new()].setting
    }

    pub fn step(&self, prefix: &ClickSequence) -> Option<&PlanStep> {
        self.table.get(prefix)
    }

    pub fn steps(&self) -> impl Iterator<Item = (&ClickSequence, &PlanStep)> {
        self.table.iter()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyState {
    prefix: ClickSequence,
    hypothesis: usize,
    rule: Option<RevisionRule>,
}

impl Receiver for GreedyPlan {
    type State = GreedyState;

    fn start(&self, model: &ObservationModel) -> Result<Self::State> {
        require_unsliced(model, "the greedy receiver")?;
        if model.slots() != self.slots {
            return Err(crate::error::domain(
                "slots",
                format!(
                    "plan built for {} slots, model has {}",
                    self.slots,
                    model.slots()
                ),
            ));
        }
        Ok(GreedyState {
            prefix: ClickSequence::new(),
            hypothesis: 0,
            rule: None,
        })
    }

    fn prepare(
        &self,
        _: &ObservationModel,
        state: &mut Self::State,
        _: usize,
    ) -> Result<MeasurementSetting> {
        let step = self
            .table
            .get(&state.prefix)
            .ok_or_else(|| Error::UndefinedPrefix(state.prefix.to_string()))?;
        state.rule = step.rule;
        Ok(step.setting)
    }

    fn observe(
        &self,
        _: &ObservationModel,
        state: &mut Self::State,
        index: usize,
        click: bool,
        _: &ClickProbs,
    ) -> Result<()> {
        if state.rule.is_some_and(|r| r.switches(click)) {
            state.hypothesis = index;
        }
        state.prefix.push(click);
        Ok(())
    }

    fn decide(&self, _: &ObservationModel, state: &Self::State) -> Decision {
        Decision::Slot(state.hypothesis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RatioKey {
    Zero,
    Infinite,
    Log(i64),
}

fn ratio_key(r: Option<f64>) -> RatioKey {
    match r {
        None => RatioKey::Infinite,
        Some(0.0) => RatioKey::Zero,
        Some(r) => RatioKey::Log((r.ln() / RATIO_QUANTUM).round() as i64),
    }
}

/// Builds plans for one model and class, memoizing the per-slot choice.
struct Builder<'a> {
    model: &'a ObservationModel,
    class: MeasurementClass,
    tuning: Tuning,
    memo: HashMap<RatioKey, (PlanStep, bool)>,
}

impl Builder<'_> {
    fn choose(&mut self, r: Option<f64>) -> Result<(PlanStep, bool)> {
        let key = ratio_key(r);
        if let Some(&hit) = self.memo.get(&key) {
            return Ok(hit);
        }
        let w = weights(r);
        let a = optimize_rule(
            self.model,
            &self.class,
            RevisionRule::OnClick,
            w,
            &self.tuning,
        )?;
        let b = optimize_rule(
            self.model,
            &self.class,
            RevisionRule::OnNoClick,
            w,
            &self.tuning,
        )?;
        let (best, rule) = if a.value >= b.value {
            (a, RevisionRule::OnClick)
        } else {
            (b, RevisionRule::OnNoClick)
        };
        let step = PlanStep {
            setting: best.setting,
            rule: Some(rule),
        };
        self.memo.insert(key, (step, !best.interior));
        Ok((step, !best.interior))
    }

    fn plan(&mut self, first: MeasurementSetting) -> Result<GreedyPlan> {
        let mut plan = GreedyPlan {
            class: self.class,
            slots: self.model.slots(),
            table: BTreeMap::new(),
            warnings: 0,
        };
        let root = ClickSequence::new();
        plan.table.insert(
            root.clone(),
            PlanStep {
                setting: first,
                rule: None,
            },
        );
        let probs = self.model.click_probs(&first)?;
        for click in [false, true] {
            let (on, off) = probs.of(click);
            let state = RevisionState {
                hypothesis: 0,
                ratio: ratio(off, on),
            };
            self.extend(&mut plan, root.with(click), 1, state)?;
        }
        Ok(plan)
    }

    fn extend(
        &mut self,
        plan: &mut GreedyPlan,
        prefix: ClickSequence,
        slot: usize,
        state: RevisionState,
    ) -> Result<()> {
        if slot == plan.slots {
            return Ok(());
        }
        let (step, warned) = self.choose(state.ratio)?;
        plan.warnings += usize::from(warned);
        plan.table.insert(prefix.clone(), step);
        let probs = self.model.click_probs(&step.setting)?;
        let rule = step.rule.expect("slots after the first carry a rule");
        for click in [false, true] {
            let next = if rule.switches(click) {
                let (on, off) = probs.of(click);
                RevisionState {
                    hypothesis: slot,
                    ratio: ratio(off, on),
                }
            } else {
                state
            };
            self.extend(plan, prefix.with(click), slot + 1, next)?;
        }
        Ok(())
    }
}

/// Greedy plan with the first slot's setting chosen to minimize the exact
/// error of the resulting receiver.
pub fn greedy_plan(config: &PpmConfig, class: MeasurementClass) -> Result<GreedyPlan> {
    greedy_plan_tuned(config, class, Tuning::default())
}

pub fn greedy_plan_tuned(
    config: &PpmConfig,
    class: MeasurementClass,
    tuning: Tuning,
) -> Result<GreedyPlan> {
    let model = ObservationModel::new(config)?;
    require_unsliced(&model, "the greedy receiver")?;
    check_class(&model, &class)?;
    let mut builder = Builder {
        model: &model,
        class,
        tuning,
        memo: HashMap::new(),
    };
    let cap = model.observations();
    let mut failure = None;
    let mut error_of = |b: &mut Builder, first: MeasurementSetting| -> f64 {
        match b
            .plan(first)
            .and_then(|p| exact_error_with_cap(&model, &p, cap))
        {
            Ok(e) => e,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let amplitude = model.pulse().amplitude.norm();
    let spec_1d = |(lo, hi): (f64, f64)| {
        OptimizationSpec::scalar(lo, hi)
            .with_grid_density(tuning.grid_1d)
            .with_tolerance(tuning.tolerance)
    };
    let outer = match class {
        MeasurementClass::Fixed(setting) => Ok((setting, true)),
        MeasurementClass::Displacement => {
            minimize_scalar(&spec_1d(displacement_bounds(amplitude)), |g| {
                error_of(&mut builder, MeasurementSetting::displace(g))
            })
            .map(|m| (MeasurementSetting::displace(m.argmin), m.interior))
        }
        MeasurementClass::Dolinar => minimize_scalar(&spec_1d(DOLINAR_PRIOR_BOUNDS), |x| {
            error_of(&mut builder, MeasurementSetting::dolinar(x))
        })
        .map(|m| (MeasurementSetting::dolinar(m.argmin), m.interior)),
        MeasurementClass::DisplacementGain => {
            let spec = OptimizationSpec::plane(displacement_bounds(amplitude), GAIN_BOUNDS)
                .with_grid_density(FIRST_SLOT_GRID_2D)
                .with_tolerance(tuning.tolerance);
            minimize_2d(&spec, |g, gain| {
                error_of(&mut builder, MeasurementSetting::squeeze(g, gain))
            })
            .map(|m| {
                (
                    MeasurementSetting::squeeze(m.argmin.0, m.argmin.1),
                    m.interior,
                )
            })
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let (first, interior) = outer?;
    let mut plan = builder.plan(first)?;
    plan.warnings += usize::from(!interior);
    Ok(plan)
}

/// Exact error of a plan on its own configuration.
pub fn greedy_error(config: &PpmConfig, plan: &GreedyPlan) -> Result<f64> {
    let model = ObservationModel::new(config)?;
    exact_error_with_cap(&model, plan, model.observations())
}
