//! PPM codewords, click sequences, posteriors, and the receiver interface.
//!
//! A codeword puts a coherent pulse in one of `M` slots and background in the
//! rest. When each slot is cut into `n` slices the receiver sees `M·n` binary
//! observations in temporal order, slot by slot. Observation `k` belongs to
//! slot `k / n`; under hypothesis `i` it carries the pulse slice if that slot
//! is `i` and background otherwise.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binary::dolinar_click_probs;
use crate::error::{domain, Error, Result};
use crate::optics::{no_click_raw, slice_state, ChannelParams, MeasurementSetting, SignalState};

/// Tolerance on the prior vector summing to one.
const PRIOR_SUM_TOLERANCE: f64 = 1e-12;

/// Noise-free `M`-ary PPM error floor over all quantum measurements:
/// `(M−1)/M² · [√(1 + (M−1)e^(−N)) − √(1 − e^(−N))]²`.
pub fn helstrom_ppm(slots: usize, mean_photons: f64) -> Result<f64> {
    if slots < 2 {
        return Err(domain("slots", "need at least two slots"));
    }
    if !(mean_photons >= 0.0) {
        return Err(domain(
            "mean_photons",
            format!("{mean_photons} is not >= 0"),
        ));
    }
    let m = slots as f64;
    let overlap = (-mean_photons).exp();
    let gap = (1.0 + (m - 1.0) * overlap).sqrt() - (1.0 - overlap).sqrt();
    Ok((m - 1.0) / (m * m) * gap * gap)
}

/// Modulation, pulse energy, slicing, channel, and priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpmConfig {
    pub slots: usize,
    /// Mean photon number `N` of the pulse.
    pub mean_photons: f64,
    pub slices_per_slot: usize,
    pub channel: ChannelParams,
    pub priors: Vec<f64>,
}

impl PpmConfig {
    /// Uniform priors, unsliced.
    pub fn new(slots: usize, mean_photons: f64, channel: ChannelParams) -> Result<Self> {
        let config = PpmConfig {
            slots,
            mean_photons,
            slices_per_slot: 1,
            channel,
            priors: vec![1.0 / slots.max(1) as f64; slots],
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_slices(mut self, slices: usize) -> Result<Self> {
        self.slices_per_slot = slices;
        self.validate()?;
        Ok(self)
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self> {
        self.priors = priors;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots < 2 {
            return Err(domain("slots", "need at least two slots"));
        }
        if !(self.mean_photons >= 0.0 && self.mean_photons.is_finite()) {
            return Err(domain(
                "mean_photons",
                format!("{} is not >= 0", self.mean_photons),
            ));
        }
        if self.slices_per_slot == 0 {
            return Err(domain("slices_per_slot", "must be at least 1"));
        }
        self.channel.validate()?;
        if self.priors.len() != self.slots {
            return Err(domain(
                "priors",
                format!("{} entries for {} slots", self.priors.len(), self.slots),
            ));
        }
        if self.priors.iter().any(|&p| !(p >= 0.0)) {
            return Err(domain("priors", "entries must be nonnegative"));
        }
        let total: f64 = self.priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(domain("priors", format!("sum to {total}")));
        }
        Ok(())
    }

    /// `M·n`.
    pub fn observations(&self) -> usize {
        self.slots * self.slices_per_slot
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.slots as f64;
        self.priors.iter().all(|&p| p == u)
    }
}

/// Ordered click outcomes, `true` for a click.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClickSequence(Vec<bool>);

impl ClickSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, click: bool) {
        self.0.push(click);
    }

    pub fn with(&self, click: bool) -> Self {
        let mut next = self.clone();
        next.push(click);
        next
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.0
    }

    /// All `2^len` sequences of the given length, in binary counting order.
    pub fn all(len: usize) -> impl Iterator<Item = ClickSequence> {
        assert!(len < 64, "sequence length {len} too long to enumerate");
        (0u64..1 << len).map(move |bits| {
            ClickSequence((0..len).map(|j| bits >> (len - 1 - j) & 1 == 1).collect())
        })
    }
}

impl From<Vec<bool>> for ClickSequence {
    fn from(v: Vec<bool>) -> Self {
        ClickSequence(v)
    }
}

impl fmt::Display for ClickSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<empty>");
        }
        for &c in &self.0 {
            f.write_str(if c { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Posterior over the `M` slots, held as log weights.
///
/// Weights are shifted so the largest is zero after every update; the
/// normalized probabilities are produced on read.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    log_weights: Vec<f64>,
}

impl Posterior {
    pub fn uniform(slots: usize) -> Self {
        Posterior {
            log_weights: vec![0.0; slots],
        }
    }

    pub fn from_priors(priors: &[f64]) -> Result<Self> {
        if priors.is_empty() || priors.iter().any(|&p| !(p >= 0.0)) {
            return Err(domain("priors", "need nonnegative entries"));
        }
        let mut post = Posterior {
            log_weights: priors.iter().map(|p| p.ln()).collect(),
        };
        post.shift()?;
        Ok(post)
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let max = self.max_log();
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    /// Bayes update for one outcome, returning the new posterior.
    /// `click_probs[i]` is the click probability under hypothesis `i`.
    pub fn update(&self, click: bool, click_probs: &[f64]) -> Result<Posterior> {
        let mut next = self.clone();
        next.observe(click, click_probs)?;
        Ok(next)
    }

    /// In-place form of [`Posterior::update`].
    pub fn observe(&mut self, click: bool, click_probs: &[f64]) -> Result<()> {
        if click_probs.len() != self.len() {
            return Err(domain(
                "click_probs",
                format!(
                    "{} entries for {} hypotheses",
                    click_probs.len(),
                    self.len()
                ),
            ));
        }
        if click_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(domain("click_probs", "entries must lie in [0, 1]"));
        }
        for (lw, &p) in self.log_weights.iter_mut().zip(click_probs) {
            *lw += outcome_probability(click, p).ln();
        }
        self.shift()
    }

    /// Update where hypothesis `slot` has `pulse` and all others `background`
    /// click probability.
    pub(crate) fn observe_slot(
        &mut self,
        slot: usize,
        click: bool,
        probs: &ClickProbs,
    ) -> Result<()> {
        let on = outcome_probability(click, probs.pulse).ln();
        let off = outcome_probability(click, probs.background).ln();
        for (i, lw) in self.log_weights.iter_mut().enumerate() {
            *lw += if i == slot { on } else { off };
        }
        self.shift()
    }

    /// Most probable slot, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &lw) in self.log_weights.iter().enumerate() {
            if lw > self.log_weights[best] {
                best = i;
            }
        }
        best
    }

    /// `(P[slot], max over j ≠ slot of P[j])`.
    pub fn contest(&self, slot: usize) -> (f64, f64) {
        let max = self.max_log();
        let mut total = 0.0;
        let mut rival = 0.0f64;
        for (j, &lw) in self.log_weights.iter().enumerate() {
            let w = (lw - max).exp();
            total += w;
            if j != slot {
                rival = rival.max(w);
            }
        }
        ((self.log_weights[slot] - max).exp() / total, rival / total)
    }

    fn max_log(&self) -> f64 {
        self.log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn shift(&mut self) -> Result<()> {
        let max = self.max_log();
        if max == f64::NEG_INFINITY {
            return Err(Error::ZeroLikelihood);
        }
        if max != 0.0 {
            for lw in &mut self.log_weights {
                *lw -= max;
            }
        }
        Ok(())
    }
}

fn outcome_probability(click: bool, click_prob: f64) -> f64 {
    if click {
        click_prob
    } else {
        1.0 - click_prob
    }
}

/// Click probabilities of one observation under the two kinds of state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickProbs {
    /// The observation carries (a slice of) the pulse.
    pub pulse: f64,
    /// The observation carries background only.
    pub background: f64,
}

impl ClickProbs {
    /// Probabilities of `click` as `(pulse, background)`.
    pub fn of(&self, click: bool) -> (f64, f64) {
        (
            outcome_probability(click, self.pulse),
            outcome_probability(click, self.background),
        )
    }
}

/// Per-observation states derived from a [`PpmConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    config: PpmConfig,
    pulse: SignalState,
    background: SignalState,
}

impl ObservationModel {
    pub fn new(config: &PpmConfig) -> Result<Self> {
        config.validate()?;
        let n = config.slices_per_slot;
        let thermal = config.channel.n_thermal;
        Ok(ObservationModel {
            config: config.clone(),
            pulse: slice_state(&SignalState::pulse(config.mean_photons, thermal)?, n)?,
            background: slice_state(&SignalState::vacuum(thermal)?, n)?,
        })
    }

    pub fn config(&self) -> &PpmConfig {
        &self.config
    }

    pub fn slots(&self) -> usize {
        self.config.slots
    }

    pub fn slices(&self) -> usize {
        self.config.slices_per_slot
    }

    pub fn observations(&self) -> usize {
        self.config.observations()
    }

    pub fn slot_of(&self, index: usize) -> usize {
        index / self.config.slices_per_slot
    }

    /// State of a pulse-bearing observation.
    pub fn pulse(&self) -> &SignalState {
        &self.pulse
    }

    /// State of a background observation.
    pub fn background(&self) -> &SignalState {
        &self.background
    }

    pub fn click_probs(&self, setting: &MeasurementSetting) -> Result<ClickProbs> {
        setting.validate()?;
        let eta = self.config.channel.efficiency;
        let (shift, gain) = match *setting {
            MeasurementSetting::Displace { shift } => (shift, 1.0),
            MeasurementSetting::DisplaceSqueeze { shift, gain } => (shift, gain),
            MeasurementSetting::DolinarStats { assumed_prior } => {
                return self.dolinar_click_probs(assumed_prior)
            }
        };
        let on = no_click_raw(
            (self.pulse.amplitude + shift).norm_sqr(),
            gain,
            self.pulse.thermal,
            eta,
        );
        let off = no_click_raw(
            (self.background.amplitude + shift).norm_sqr(),
            gain,
            self.background.thermal,
            eta,
        );
        Ok(ClickProbs {
            pulse: 1.0 - on,
            background: 1.0 - off,
        })
    }

    fn dolinar_click_probs(&self, assumed_prior: f64) -> Result<ClickProbs> {
        if !self.config.channel.is_ideal() {
            return Err(Error::UnsupportedSetting(
                "Dolinar statistics need a lossless, noiseless channel".into(),
            ));
        }
        let overlap = (self.pulse.amplitude - self.background.amplitude).norm_sqr();
        match dolinar_click_probs(assumed_prior, overlap) {
            Ok((background, pulse)) => Ok(ClickProbs { pulse, background }),
            // Identical states: parity carries no information.
            Err(Error::DegenerateProblem(_)) => {
                let p = if assumed_prior < 0.5 {
                    1.0
                } else if assumed_prior > 0.5 {
                    0.0
                } else {
                    0.5
                };
                Ok(ClickProbs {
                    pulse: p,
                    background: p,
                })
            }
            Err(e) => Err(e),
        }
    }
}

/// Final decision of a receiver.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Slot(usize),
    /// Uniformly random among the listed slots.
    UniformAmong(Vec<usize>),
}

impl Decision {
    pub fn probability_of(&self, slot: usize) -> f64 {
        match self {
            Decision::Slot(s) => f64::from(u8::from(*s == slot)),
            Decision::UniformAmong(set) => {
                if set.contains(&slot) {
                    1.0 / set.len() as f64
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Decision::Slot(s) => *s,
            Decision::UniformAmong(set) => set[rng.gen_range(0..set.len())],
        }
    }
}

/// A demodulation strategy driven observation by observation.
///
/// The driver calls [`prepare`](Receiver::prepare) for the setting of
/// observation `index`, draws or enumerates the outcome, then calls
/// [`observe`](Receiver::observe) with the click probabilities that setting
/// produced. After the last observation [`decide`](Receiver::decide) gives
/// the hypothesis.
pub trait Receiver {
    type State: Clone + Send + Sync;

    fn start(&self, model: &ObservationModel) -> Result<Self::State>;

    fn prepare(
        &self,
        model: &ObservationModel,
        state: &mut Self::State,
        index: usize,
    ) -> Result<MeasurementSetting>;

    fn observe(
        &self,
        model: &ObservationModel,
        state: &mut Self::State,
        index: usize,
        click: bool,
        probs: &ClickProbs,
    ) -> Result<()>;

    fn decide(&self, model: &ObservationModel, state: &Self::State) -> Decision;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn helstrom_ppm_examples() {
        assert!((helstrom_ppm(4, 0.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(helstrom_ppm(4, 800.0).unwrap() < 1e-300);
        // 30-digit evaluation at M = 4, N = 1
        assert!((helstrom_ppm(4, 1.0).unwrap() - 0.080_523_847_728_177_55).abs() < 1e-16);
        assert!(helstrom_ppm(1, 1.0).is_err());
        assert!(helstrom_ppm(4, -1.0).is_err());
    }

    #[test]
    fn helstrom_ppm_scales_as_twice_photon_number() {
        let ns: Vec<f64> = (0..=50).map(|k| 5.0 + 0.1 * k as f64).collect();
        let ys: Vec<f64> = ns
            .iter()
            .map(|&n| helstrom_ppm(4, n).unwrap().ln())
            .collect();
        let mx = ns.iter().sum::<f64>() / ns.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = ns.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = ns.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((slope + 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn config_validation() {
        let ch = ChannelParams::IDEAL;
        assert!(PpmConfig::new(1, 1.0, ch).is_err());
        assert!(PpmConfig::new(4, -1.0, ch).is_err());
        let c = PpmConfig::new(4, 1.0, ch).unwrap();
        assert!(c.clone().with_slices(0).is_err());
        assert!(c.clone().with_priors(vec![0.5, 0.5, 0.0, 0.1]).is_err());
        assert!(c.clone().with_priors(vec![0.5, 0.5]).is_err());
        assert!(c.with_priors(vec![0.7, 0.1, 0.1, 0.1]).is_ok());
    }

    #[test]
    fn sequences_enumerate_in_order() {
        let all: Vec<String> = ClickSequence::all(2).map(|s| s.to_string()).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
        assert_eq!(ClickSequence::new().to_string(), "<empty>");
    }

    #[test]
    fn posterior_examples() {
        let u = Posterior::uniform(4);
        let same = u.update(true, &[0.3; 4]).unwrap();
        for p in same.probabilities() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let certain = Posterior::uniform(2).update(true, &[1.0, 0.0]).unwrap();
        assert_eq!(certain.probabilities(), vec![1.0, 0.0]);
        assert!(matches!(
            Posterior::uniform(2).update(true, &[0.0, 0.0]),
            Err(Error::ZeroLikelihood)
        ));
        assert!(Posterior::uniform(2).update(true, &[1.5, 0.0]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(Posterior::uniform(5).argmax(), 0);
        let p = Posterior::from_priors(&[0.1, 0.4, 0.4, 0.1]).unwrap();
        assert_eq!(p.argmax(), 1);
    }

    #[test]
    fn chained_updates_match_one_shot_bayes() {
        let priors = [0.1, 0.2, 0.3, 0.4];
        let probs = [
            [0.9, 0.1, 0.2, 0.05],
            [0.3, 0.3, 0.6, 0.01],
            [0.5, 0.02, 0.7, 0.2],
        ];
        let clicks = [true, false, true];
        let mut post = Posterior::from_priors(&priors).unwrap();
        let mut joint = priors.to_vec();
        for (c, ps) in clicks.iter().zip(&probs) {
            post.observe(*c, ps).unwrap();
            for (j, p) in joint.iter_mut().zip(ps) {
                *j *= if *c { *p } else { 1.0 - p };
            }
        }
        let total: f64 = joint.iter().sum();
        for (a, b) in post.probabilities().iter().zip(&joint) {
            assert!((a - b / total).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn long_chains_stay_normalized(
            seq in proptest::collection::vec((any::<bool>(), 0usize..4, 1e-4f64..0.5, 1e-6f64..0.5), 1..4000)
        ) {
            let mut post = Posterior::uniform(4);
            for (click, slot, pulse, background) in seq {
                post.observe_slot(slot, click, &ClickProbs { pulse, background }).unwrap();
                let p = post.probabilities();
                let s: f64 = p.iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-10);
                prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }
    }
}
