//! Discriminating vacuum from a coherent pulse.
//!
//! Every adaptive PPM receiver in this crate decides slot by slot, so each
//! step is a binary test between `|0⟩` (prior `ξ`) and `|α⟩` (prior `1 − ξ`).
//! This module holds the three reference points for that test: the quantum
//! optimum, on/off detection after a Gaussian operation, and the Dolinar
//! feedback receiver described through its click-parity statistics.

use crate::error::{domain, Error, Result};
use crate::optics::{no_click_probability, ChannelParams, MeasurementSetting, SignalState};
use crate::optimize::{minimize_2d, minimize_scalar, OptimizationSpec};

/// Values of `4ξ(1−ξ)e^(−N₀)` at or above this are treated as degenerate.
const DEGENERACY_LIMIT: f64 = 1.0 - 1e-15;

/// Priors and state overlap of a vacuum-versus-pulse test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryProblem {
    /// Prior probability of the vacuum state.
    pub prior_vacuum: f64,
    /// `N₀` with `⟨ψ₀|ψ₁⟩ = e^(−N₀)`; equals `|α|²` for the pulse alphabet.
    pub overlap_exponent: f64,
}

impl BinaryProblem {
    pub fn new(prior_vacuum: f64, overlap_exponent: f64) -> Result<Self> {
        check_prior("prior_vacuum", prior_vacuum)?;
        check_overlap(overlap_exponent)?;
        Ok(BinaryProblem {
            prior_vacuum,
            overlap_exponent,
        })
    }

    /// Equal priors.
    pub fn balanced(overlap_exponent: f64) -> Result<Self> {
        Self::new(0.5, overlap_exponent)
    }
}

fn check_prior(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(name, format!("{p} is not in (0, 1)")))
    }
}

fn check_overlap(n0: f64) -> Result<()> {
    if n0 >= 0.0 && !n0.is_nan() {
        Ok(())
    } else {
        Err(domain("overlap_exponent", format!("{n0} is not >= 0")))
    }
}

/// Minimum error over all quantum measurements.
pub fn helstrom_binary(problem: &BinaryProblem) -> f64 {
    let xi = problem.prior_vacuum;
    let overlap = (-problem.overlap_exponent).exp();
    0.5 * (1.0 - (1.0 - 4.0 * xi * (1.0 - xi) * overlap).sqrt())
}

/// Conditional odd-parity probabilities of a Dolinar receiver tuned to
/// `assumed_prior`, as the pair `(P₀_odd, P₁_odd)`:
///
/// ```text
/// P₀_odd = ½ (1 − (1 − 2ξ₁e^(−N₀)) / S)
/// P₁_odd = ½ (1 + (1 − 2(1−ξ₁)e^(−N₀)) / S),    S = √(1 − 4ξ₁(1−ξ₁)e^(−N₀))
/// ```
///
/// Odd parity is read as the pulse decision: vacuum is misread with
/// probability `1 − P₁_odd`, the pulse with `P₀_odd` (see [`dolinar_error`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityProbs {
    pub p0_odd: f64,
    pub p1_odd: f64,
}

impl ParityProbs {
    pub fn p0_even(&self) -> f64 {
        1.0 - self.p0_odd
    }

    pub fn p1_even(&self) -> f64 {
        1.0 - self.p1_odd
    }
}

pub fn dolinar_parity_probs(assumed_prior: f64, overlap_exponent: f64) -> Result<ParityProbs> {
    check_prior("assumed_prior", assumed_prior)?;
    check_overlap(overlap_exponent)?;
    let xi = assumed_prior;
    let overlap = (-overlap_exponent).exp();
    let product = 4.0 * xi * (1.0 - xi) * overlap;
    if product >= DEGENERACY_LIMIT {
        return Err(Error::DegenerateProblem(product));
    }
    let s = (1.0 - product).sqrt();
    Ok(ParityProbs {
        p0_odd: 0.5 * (1.0 - (1.0 - 2.0 * xi * overlap) / s),
        p1_odd: 0.5 * (1.0 + (1.0 - 2.0 * (1.0 - xi) * overlap) / s),
    })
}

/// Average error of a Dolinar receiver tuned to `assumed_prior` when the
/// vacuum actually has prior `true_prior`.
///
/// The receiver declares the pulse on odd parity. Its error given vacuum is
/// `1 − P₁_odd` and given the pulse is `P₀_odd`, so with matched priors the
/// result equals [`helstrom_binary`].
pub fn dolinar_error(true_prior: f64, assumed_prior: f64, overlap_exponent: f64) -> Result<f64> {
    check_prior("true_prior", true_prior)?;
    let parity = dolinar_parity_probs(assumed_prior, overlap_exponent)?;
    Ok(true_prior * parity.p1_even() + (1.0 - true_prior) * parity.p0_odd)
}

/// Odd-parity ("click") probabilities `(given vacuum, given pulse)`.
pub fn dolinar_click_probs(assumed_prior: f64, overlap_exponent: f64) -> Result<(f64, f64)> {
    let parity = dolinar_parity_probs(assumed_prior, overlap_exponent)?;
    Ok((parity.p1_even(), parity.p0_even()))
}

/// Error of a single on/off detection after `setting`, deciding each outcome
/// for the hypothesis with the larger joint probability.
pub fn direct_detection_binary(
    problem: &BinaryProblem,
    setting: &MeasurementSetting,
    channel: &ChannelParams,
) -> Result<f64> {
    let vacuum = SignalState::vacuum(channel.n_thermal)?;
    let pulse = SignalState::pulse(problem.overlap_exponent, channel.n_thermal)?;
    let q = no_click_probability(&vacuum, setting, channel)?;
    let p = no_click_probability(&pulse, setting, channel)?;
    let xi = problem.prior_vacuum;
    let on_silence = (xi * q).min((1.0 - xi) * p);
    let on_click = (xi * (1.0 - q)).min((1.0 - xi) * (1.0 - p));
    Ok(on_silence + on_click)
}

/// Displacement search interval `[−(√N + 5), √N + 5]` for amplitude `√N`.
pub fn displacement_bounds(amplitude: f64) -> (f64, f64) {
    let reach = amplitude.abs() + 5.0;
    (-reach, reach)
}

/// Gain search interval.
pub const GAIN_BOUNDS: (f64, f64) = (1.0, 10.0);

/// Direct detection with the displacement chosen to minimize error.
/// Returns `(shift, error)`.
pub fn optimal_displacement_binary(
    problem: &BinaryProblem,
    channel: &ChannelParams,
) -> Result<(f64, f64)> {
    channel.validate()?;
    let (lo, hi) = displacement_bounds(problem.overlap_exponent.sqrt());
    let m = minimize_scalar(&OptimizationSpec::scalar(lo, hi), |g| {
        direct_detection_binary(problem, &MeasurementSetting::displace(g), channel)
            .unwrap_or(f64::NAN)
    })?;
    Ok((m.argmin, m.value))
}

/// Joint displacement and gain. Returns `((shift, gain), error)`.
pub fn optimal_squeeze_binary(
    problem: &BinaryProblem,
    channel: &ChannelParams,
) -> Result<((f64, f64), f64)> {
    channel.validate()?;
    let spec = OptimizationSpec::plane(
        displacement_bounds(problem.overlap_exponent.sqrt()),
        GAIN_BOUNDS,
    );
    let m = minimize_2d(&spec, |g, gain| {
        direct_detection_binary(problem, &MeasurementSetting::squeeze(g, gain), channel)
            .unwrap_or(f64::NAN)
    })?;
    Ok((m.argmin, m.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRIORS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    const OVERLAPS: [f64; 4] = [0.01, 0.1, 1.0, 5.0];

    fn helstrom(xi: f64, n: f64) -> f64 {
        helstrom_binary(&BinaryProblem::new(xi, n).unwrap())
    }

    #[test]
    fn helstrom_examples() {
        assert_eq!(helstrom(0.5, 0.0), 0.5);
        assert!(helstrom(0.5, 800.0) < 1e-300);
        // 30-digit evaluation: ½(1 − √(1 − e^(−1)))
        assert!((helstrom(0.5, 1.0) - 0.102_469_951_189_674_95).abs() < 1e-16);
    }

    #[test]
    fn parity_examples() {
        let far = dolinar_parity_probs(0.5, 800.0).unwrap();
        assert!(far.p0_odd.abs() < 1e-15 && (far.p1_odd - 1.0).abs() < 1e-15);
        let p = dolinar_parity_probs(0.5, 1.0).unwrap();
        let e = (-1.0f64).exp();
        let want = 0.5 * (1.0 - (1.0 - e) / (1.0 - e).sqrt());
        assert!((p.p0_odd - want).abs() < 1e-16);
        assert!((p.p0_odd - 0.102_469_951_189_674_95).abs() < 1e-15);
        for xi in PRIORS {
            for n in OVERLAPS {
                let p = dolinar_parity_probs(xi, n).unwrap();
                assert!((0.0..=1.0).contains(&p.p0_odd) && (0.0..=1.0).contains(&p.p1_odd));
            }
        }
    }

    #[test]
    fn degenerate_problem_is_rejected() {
        assert!(matches!(
            dolinar_parity_probs(0.5, 0.0),
            Err(Error::DegenerateProblem(_))
        ));
        assert!(dolinar_parity_probs(0.3, 0.0).is_ok());
        assert!(dolinar_parity_probs(0.0, 1.0).is_err());
    }

    #[test]
    fn dolinar_matches_helstrom_when_tuned() {
        for xi in PRIORS {
            for n in OVERLAPS {
                let d = dolinar_error(xi, xi, n).unwrap();
                assert!((d - helstrom(xi, n)).abs() < 1e-10, "xi={xi} n={n}");
            }
        }
        assert!((dolinar_error(0.5, 0.5, 1.0).unwrap() - 0.102_469_951_189_674_95).abs() < 1e-15);
    }

    #[test]
    fn mistuned_dolinar_is_worse() {
        assert!(dolinar_error(0.5, 0.4, 1.0).unwrap() > helstrom(0.5, 1.0));
        for xi in PRIORS {
            for assumed in PRIORS {
                for n in OVERLAPS {
                    let d = dolinar_error(xi, assumed, n).unwrap();
                    assert!(d >= helstrom(xi, n) - 1e-12);
                    if assumed != xi {
                        assert!(d > helstrom(xi, n));
                    }
                }
            }
        }
    }

    #[test]
    fn click_probs_limits() {
        let (vac, pulse) = dolinar_click_probs(0.5, 40.0).unwrap();
        assert!(vac < 1e-15 && (pulse - 1.0).abs() < 1e-15);
    }

    #[test]
    fn direct_detection_examples() {
        let ideal = ChannelParams::IDEAL;
        let dd = |n: f64| {
            direct_detection_binary(
                &BinaryProblem::balanced(n).unwrap(),
                &MeasurementSetting::NONE,
                &ideal,
            )
            .unwrap()
        };
        assert!((dd(1.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(dd(0.0), 0.5);
    }

    #[test]
    fn direct_detection_dominates_helstrom() {
        let channels = [ChannelParams::IDEAL, ChannelParams::new(0.1, 0.9).unwrap()];
        let settings = [
            MeasurementSetting::NONE,
            MeasurementSetting::displace(-0.7),
            MeasurementSetting::displace(0.4),
            MeasurementSetting::squeeze(-0.3, 2.0),
        ];
        for xi in PRIORS {
            for n in OVERLAPS {
                let problem = BinaryProblem::new(xi, n).unwrap();
                for ch in &channels {
                    for s in &settings {
                        let e = direct_detection_binary(&problem, s, ch).unwrap();
                        assert!(e >= helstrom_binary(&problem) - 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn optimized_displacement_beats_plain_detection() {
        let problem = BinaryProblem::balanced(1.0).unwrap();
        let ideal = ChannelParams::IDEAL;
        let (_, opt) = optimal_displacement_binary(&problem, &ideal).unwrap();
        // Fine-grid oracle over the same interval.
        let (lo, hi) = displacement_bounds(1.0);
        let grid_min = (0..100_000)
            .map(|i| lo + (hi - lo) * i as f64 / 99_999.0)
            .map(|g| {
                direct_detection_binary(&problem, &MeasurementSetting::displace(g), &ideal).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(opt <= grid_min + 1e-12, "opt={opt} grid={grid_min}");
        assert!(opt < 0.5 * (-1.0f64).exp());
        assert!(opt > helstrom_binary(&problem));
    }

    #[test]
    fn squeezing_nests_displacement() {
        let problem = BinaryProblem::balanced(1.0).unwrap();
        let ideal = ChannelParams::IDEAL;
        let (_, disp) = optimal_displacement_binary(&problem, &ideal).unwrap();
        let ((_, _), joint) = optimal_squeeze_binary(&problem, &ideal).unwrap();
        assert!(joint <= disp + 1e-15);
        assert!(joint > helstrom_binary(&problem));
        // 200×200 grid oracle.
        let (lo, hi) = displacement_bounds(1.0);
        let mut grid_min = f64::INFINITY;
        for i in 0..200 {
            let g = lo + (hi - lo) * i as f64 / 199.0;
            for j in 0..200 {
                let gain = GAIN_BOUNDS.0 + (GAIN_BOUNDS.1 - GAIN_BOUNDS.0) * j as f64 / 199.0;
                let e = direct_detection_binary(
                    &problem,
                    &MeasurementSetting::squeeze(g, gain),
                    &ideal,
                )
                .unwrap();
                grid_min = grid_min.min(e);
            }
        }
        assert!(
            (joint - grid_min).abs() < 1e-6 || joint < grid_min,
            "joint={joint} grid={grid_min}"
        );
    }

    #[test]
    fn optimized_never_worse_than_no_operation() {
        for n in OVERLAPS {
            let problem = BinaryProblem::balanced(n).unwrap();
            let none =
                direct_detection_binary(&problem, &MeasurementSetting::NONE, &ChannelParams::IDEAL)
                    .unwrap();
            let (_, opt) = optimal_displacement_binary(&problem, &ChannelParams::IDEAL).unwrap();
            assert!(opt <= none && none <= 0.5);
        }
    }
}
