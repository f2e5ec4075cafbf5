//! Seeded Monte Carlo estimation of error probabilities.
//!
//! Trial `t` draws from its own ChaCha8 stream (seed, stream `t`), so a plan
//! gives the same estimate for any worker count. Errors are counted as
//! integers and summed, which keeps aggregation order-free.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ppm::{ObservationModel, Posterior, PpmConfig, Receiver};
use crate::receivers::{
    drive, BayesianDdSlicing, ReceiverStrategy, SlicingGreedy, StrategyVisitor,
};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub config: PpmConfig,
    pub strategy: ReceiverStrategy,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Error probability with a 95% interval. Exact values have a zero-width
/// interval and no trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub p_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub errors: u64,
    pub seed: Option<u64>,
    pub method: Method,
}

impl ErrorEstimate {
    pub fn exact(p_error: f64) -> Self {
        ErrorEstimate {
            p_error,
            ci_low: p_error,
            ci_high: p_error,
            trials: 0,
            errors: 0,
            seed: None,
            method: Method::Exact,
        }
    }

    pub fn from_counts(errors: u64, trials: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, trials);
        ErrorEstimate {
            p_error: errors as f64 / trials as f64,
            ci_low,
            ci_high,
            trials,
            errors,
            seed: Some(seed),
            method: Method::MonteCarlo,
        }
    }

    /// True when the intervals do not overlap and this one lies below.
    pub fn separated_below(&self, other: &ErrorEstimate) -> bool {
        self.ci_high < other.ci_low
    }
}

/// Wilson score interval at 95% for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && errors <= trials);
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn draw_codeword<G: Rng + ?Sized>(model: &ObservationModel, rng: &mut G) -> Result<usize> {
    let priors = &model.config().priors;
    if model.config().is_uniform() {
        return Ok(rng.gen_range(0..priors.len()));
    }
    let dist = WeightedIndex::new(priors).map_err(|e| domain("priors", e.to_string()))?;
    Ok(dist.sample(rng))
}

/// One trial: draws the codeword, samples each outcome from the click
/// probabilities of the receiver's setting, and scores the decision.
pub fn simulate_trial<R, G>(model: &ObservationModel, receiver: &R, rng: &mut G) -> Result<bool>
where
    R: Receiver,
    G: Rng + ?Sized,
{
    let truth = draw_codeword(model, rng)?;
    let decision = drive(
        model,
        receiver,
        |index, probs| {
            let p = if model.slot_of(index) == truth {
                probs.pulse
            } else {
                probs.background
            };
            rng.gen::<f64>() < p
        },
        |_| {},
    )?;
    Ok(decision.sample(rng) == truth)
}

struct Estimate<'a> {
    model: &'a ObservationModel,
    trials: u64,
    seed: u64,
}

impl StrategyVisitor for Estimate<'_> {
    type Output = Result<u64>;
    fn visit<R: Receiver + Sync>(self, receiver: &R) -> Result<u64> {
        let Estimate {
            model,
            trials,
            seed,
        } = self;
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                simulate_trial(model, receiver, &mut rng).map(|ok| u64::from(!ok))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    }
}

/// Monte Carlo estimate on `threads` workers, or rayon's default when
/// `None`. The result does not depend on the worker count.
pub fn estimate_error(plan: &TrialPlan, threads: Option<usize>) -> Result<ErrorEstimate> {
    if plan.trials == 0 {
        return Err(domain("trials", "need at least one trial"));
    }
    let model = ObservationModel::new(&plan.config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(domain("threads", "need at least one worker"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| domain("threads", e.to_string()))?;
    let errors = pool.install(|| {
        plan.strategy.accept(Estimate {
            model: &model,
            trials: plan.trials,
            seed: plan.seed,
        })
    })??;
    Ok(ErrorEstimate::from_counts(errors, plan.trials, plan.seed))
}

/// Posterior after every slice of trial `trial`, for receivers that keep
/// one. Returns the true codeword and the trajectory.
pub fn posterior_trace(plan: &TrialPlan, trial: u64) -> Result<(usize, Vec<Vec<f64>>)> {
    let model = ObservationModel::new(&plan.config)?;
    let mut rng = trial_rng(plan.seed, trial);
    match &plan.strategy {
        ReceiverStrategy::SlicingGreedy { class } => {
            trace_with(&model, &SlicingGreedy::new(*class)?, &mut rng)
        }
        ReceiverStrategy::BayesianDdSlicing => trace_with(&model, &BayesianDdSlicing, &mut rng),
        other => Err(Error::UnsupportedSetting(format!(
            "{} keeps no posterior",
            other.name()
        ))),
    }
}

fn trace_with<R>(
    model: &ObservationModel,
    receiver: &R,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, Vec<Vec<f64>>)>
where
    R: Receiver<State = Posterior>,
{
    let truth = draw_codeword(model, rng)?;
    let mut trace = Vec::with_capacity(model.observations());
    drive(
        model,
        receiver,
        |index, probs| {
            let p = if model.slot_of(index) == truth {
                probs.pulse
            } else {
                probs.background
            };
            rng.gen::<f64>() < p
        },
        |posterior: &Posterior| trace.push(posterior.probabilities()),
    )?;
    Ok((truth, trace))
}
