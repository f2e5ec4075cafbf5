//! Receiver strategies for PPM demodulation.

mod class;
mod closed_form;
mod greedy;
mod simple;
mod slicing;


pub use class::{ClassOptimum, MeasurementClass, RevisionRule, Tuning, DOLINAR_PRIOR_BOUNDS};
pub use closed_form::{
    cpn_error_closed_form, cpn_error_rational, dd_error_closed_form, dd_error_rational,
    optimal_cpn, optimal_dd,
};
pub use greedy::{
    greedy_error, greedy_plan, greedy_plan_tuned, GreedyPlan, GreedyState, PlanStep, RevisionState,
};
pub use simple::{Cpn, CpnState, DirectDetection};
pub use slicing::{BayesianDdSlicing, SlicingGreedy};

use crate::error::Result;
use crate::exact;
use crate::optics::MeasurementSetting;
use crate::ppm::{ClickProbs, ClickSequence, Decision, ObservationModel, PpmConfig, Receiver};

/// A runnable receiver description.
#[derive(Debug, Clone, PartialEq)]
pub enum ReceiverStrategy {
    DirectDetection {
        setting: MeasurementSetting,
    },
    /// Nulling with `null_setting`, then detection with no operation.
    Cpn {
        null_setting: MeasurementSetting,
    },
    Greedy(GreedyPlan),
    SlicingGreedy {
        class: MeasurementClass,
    },
    BayesianDdSlicing,
}

/// Operation generic over the concrete receiver behind a strategy.
pub trait StrategyVisitor {
    type Output;
    fn visit<R: Receiver + Sync>(self, receiver: &R) -> Self::Output;
}

impl ReceiverStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ReceiverStrategy::DirectDetection { .. } => "dd",
            ReceiverStrategy::Cpn { .. } => "cpn",
            ReceiverStrategy::Greedy(_) => "greedy",
            ReceiverStrategy::SlicingGreedy { .. } => "slicing-greedy",
            ReceiverStrategy::BayesianDdSlicing => "bayesian-dd-slicing",
        }
    }

    /// True when the strategy measures slices and keeps a posterior.
    pub fn is_sliced(&self) -> bool {
        matches!(
            self,
            ReceiverStrategy::SlicingGreedy { .. } | ReceiverStrategy::BayesianDdSlicing
        )
    }

    pub fn accept<V: StrategyVisitor>(&self, visitor: V) -> Result<V::Output> {
        Ok(match self {
            ReceiverStrategy::DirectDetection { setting } => {
                visitor.visit(&DirectDetection { setting: *setting })
            }
            ReceiverStrategy::Cpn { null_setting } => visitor.visit(&Cpn {
                null_setting: *null_setting,
            }),
            ReceiverStrategy::Greedy(plan) => visitor.visit(plan),
            ReceiverStrategy::SlicingGreedy { class } => {
                visitor.visit(&SlicingGreedy::new(*class)?)
            }
            ReceiverStrategy::BayesianDdSlicing => visitor.visit(&BayesianDdSlicing),
        })
    }
}

/// Runs a receiver over one realization. `source(index, probs)` returns
/// the outcome of observation `index` given the click probabilities of the
/// chosen setting; `inspect` sees the state after every update.
pub fn drive<R, S, I>(
    model: &ObservationModel,
    receiver: &R,
    mut source: S,
    mut inspect: I,
) -> Result<Decision>
where
    R: Receiver,
    S: FnMut(usize, &ClickProbs) -> bool,
    I: FnMut(&R::State),
{
    let mut state = receiver.start(model)?;
    for index in 0..model.observations() {
        let setting = receiver.prepare(model, &mut state, index)?;
        let probs = model.click_probs(&setting)?;
        let click = source(index, &probs);
        receiver.observe(model, &mut state, index, click, &probs)?;
        inspect(&state);
    }
    Ok(receiver.decide(model, &state))
}

/// Final hypothesis of the slicing greedy receiver. `source` supplies each
/// outcome as in [`drive`].
pub fn run_slicing_greedy<S>(
    config: &PpmConfig,
    class: MeasurementClass,
    source: S,
) -> Result<usize>
where
    S: FnMut(usize, &ClickProbs) -> bool,
{
    let model = ObservationModel::new(config)?;
    let receiver = SlicingGreedy::new(class)?;
    slot_of(drive(&model, &receiver, source, |_| {})?)
}

/// Final hypothesis of Bayesian direct detection over slices.
pub fn run_bayesian_dd_slicing<S>(config: &PpmConfig, source: S) -> Result<usize>
where
    S: FnMut(usize, &ClickProbs) -> bool,
{
    let model = ObservationModel::new(config)?;
    slot_of(drive(&model, &BayesianDdSlicing, source, |_| {})?)
}

fn slot_of(decision: Decision) -> Result<usize> {
    match decision {
        Decision::Slot(s) => Ok(s),
        Decision::UniformAmong(_) => unreachable!("posterior receivers decide a single slot"),
    }
}

struct ExactError<'a> {
    model: &'a ObservationModel,
    cap: usize,
}

impl StrategyVisitor for ExactError<'_> {
    type Output = Result<f64>;
    fn visit<R: Receiver + Sync>(self, receiver: &R) -> Result<f64> {
        exact::exact_error_with_cap(self.model, receiver, self.cap)
    }
}

/// Exact error of a strategy, enumerating at most `cap` observations.
pub fn exact_error(config: &PpmConfig, strategy: &ReceiverStrategy, cap: usize) -> Result<f64> {
    let model = ObservationModel::new(config)?;
    strategy.accept(ExactError { model: &model, cap })?
}

struct Likelihood<'a> {
    model: &'a ObservationModel,
    codeword: usize,
    sequence: &'a ClickSequence,
}

impl StrategyVisitor for Likelihood<'_> {
    type Output = Result<f64>;
    fn visit<R: Receiver + Sync>(self, receiver: &R) -> Result<f64> {
        exact::sequence_likelihood(self.model, receiver, self.codeword, self.sequence)
    }
}

/// `P[c | codeword]` under a strategy.
pub fn sequence_likelihood(
    config: &PpmConfig,
    strategy: &ReceiverStrategy,
    codeword: usize,
    sequence: &ClickSequence,
) -> Result<f64> {
    let model = ObservationModel::new(config)?;
    strategy.accept(Likelihood {
        model: &model,
        codeword,
        sequence,
    })?
}
