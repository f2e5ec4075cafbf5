//! Exact error probability by depth-first enumeration of click outcomes.
//!
//! Each node of the outcome tree carries the prior-weighted likelihood of the
//! prefix under every hypothesis. A leaf contributes the expected number of
//! correct decisions `Σ_i P[i]·P[c | i]·P[h = i | c]`. Branches that every
//! hypothesis rules out are skipped.

use crate::error::{Error, Result};
use crate::ppm::{ClickSequence, ObservationModel, Receiver};

/// Largest `M·n` enumerated unless a different cap is given.
pub const DEFAULT_EXACT_CAP: usize = 20;

/// Below this many remaining observations the two root branches are not
/// split across threads.
const PARALLEL_MIN_DEPTH: usize = 12;

/// `P_e` of `receiver` with the default cap.
pub fn exact_error<R>(model: &ObservationModel, receiver: &R) -> Result<f64>
where
    R: Receiver + Sync,
{
    exact_error_with_cap(model, receiver, DEFAULT_EXACT_CAP)
}

pub fn exact_error_with_cap<R>(model: &ObservationModel, receiver: &R, cap: usize) -> Result<f64>
where
    R: Receiver + Sync,
{
    let observations = model.observations();
    if observations > cap {
        return Err(Error::CapExceeded { observations, cap });
    }
    let state = receiver.start(model)?;
    let weights = model.config().priors.clone();
    let correct = if observations >= PARALLEL_MIN_DEPTH {
        split_root(model, receiver, state, weights)?
    } else {
        descend(model, receiver, state, 0, &weights)?
    };
    Ok((1.0 - correct).max(0.0))
}

fn split_root<R>(
    model: &ObservationModel,
    receiver: &R,
    mut state: R::State,
    weights: Vec<f64>,
) -> Result<f64>
where
    R: Receiver + Sync,
{
    let setting = receiver.prepare(model, &mut state, 0)?;
    let probs = model.click_probs(&setting)?;
    let branch = |click: bool| -> Result<f64> {
        let Some(next) = child_weights(model, 0, click, &probs, &weights) else {
            return Ok(0.0);
        };
        let mut s = state.clone();
        receiver.observe(model, &mut s, 0, click, &probs)?;
        descend(model, receiver, s, 1, &next)
    };
    let (left, right) = rayon::join(|| branch(false), || branch(true));
    Ok(left? + right?)
}

fn descend<R: Receiver>(
    model: &ObservationModel,
    receiver: &R,
    mut state: R::State,
    index: usize,
    weights: &[f64],
) -> Result<f64> {
    if index == model.observations() {
        let decision = receiver.decide(model, &state);
        return Ok(weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * decision.probability_of(i))
            .sum());
    }
    let setting = receiver.prepare(model, &mut state, index)?;
    let probs = model.click_probs(&setting)?;
    let mut total = 0.0;
    for click in [false, true] {
        let Some(next) = child_weights(model, index, click, &probs, weights) else {
            continue;
        };
        let mut s = state.clone();
        receiver.observe(model, &mut s, index, click, &probs)?;
        total += descend(model, receiver, s, index + 1, &next)?;
    }
    Ok(total)
}

fn child_weights(
    model: &ObservationModel,
    index: usize,
    click: bool,
    probs: &crate::ppm::ClickProbs,
    weights: &[f64],
) -> Option<Vec<f64>> {
    let slot = model.slot_of(index);
    let (on, off) = probs.of(click);
    let next: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * if i == slot { on } else { off })
        .collect();
    next.iter().any(|&w| w > 0.0).then_some(next)
}

/// `P[c | i]` for a (possibly partial) click sequence under `receiver`.
///
/// Returns zero as soon as the running product vanishes, so sequences the
/// receiver cannot produce never reach its update rule.
pub fn sequence_likelihood<R: Receiver>(
    model: &ObservationModel,
    receiver: &R,
    codeword: usize,
    sequence: &ClickSequence,
) -> Result<f64> {
    if codeword >= model.slots() {
        return Err(crate::error::domain(
            "codeword",
            format!("slot {codeword} out of range for {} slots", model.slots()),
        ));
    }
    if sequence.len() > model.observations() {
        return Err(crate::error::domain(
            "sequence",
            format!(
                "{} outcomes for {} observations",
                sequence.len(),
                model.observations()
            ),
        ));
    }
    let mut state = receiver.start(model)?;
    let mut likelihood = 1.0;
    for (index, &click) in sequence.outcomes().iter().enumerate() {
        let setting = receiver.prepare(model, &mut state, index)?;
        let probs = model.click_probs(&setting)?;
        let (on, off) = probs.of(click);
        likelihood *= if model.slot_of(index) == codeword {
            on
        } else {
            off
        };
        if likelihood == 0.0 {
            return Ok(0.0);
        }
        match receiver.observe(model, &mut state, index, click, &probs) {
            Ok(()) => {}
            // Impossible under every hypothesis, hence under this one.
            Err(Error::ZeroLikelihood) => return Ok(0.0),
            Err(e) => return Err(e),
        }
    }
    Ok(likelihood)
}
