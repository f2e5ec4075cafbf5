//! Evaluating an experiment into result rows.

use ppmrx::montecarlo::{estimate_error, TrialPlan};
use ppmrx::ppm::helstrom_ppm;
use ppmrx::receivers::{
    cpn_error_closed_form, dd_error_closed_form, exact_error, greedy_error, greedy_plan,
    optimal_cpn, optimal_dd, GreedyPlan,
};
use ppmrx::{ChannelParams, MeasurementSetting, PpmConfig, ReceiverStrategy};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ReceiverSpec};

pub const COLUMNS: [&str; 13] = [
    "receiver",
    "M",
    "N",
    "N_d",
    "eta",
    "n",
    "trials",
    "seed",
    "method",
    "p_error",
    "ci_low",
    "ci_high",
    "params_json",
];

/// One (receiver, channel, N) result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub receiver: String,
    #[serde(rename = "M")]
    pub slots: usize,
    #[serde(rename = "N")]
    pub mean_photons: f64,
    #[serde(rename = "N_d")]
    pub n_thermal: f64,
    pub eta: f64,
    #[serde(rename = "n")]
    pub slices: usize,
    pub trials: u64,
    pub seed: u64,
    pub method: String,
    pub p_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub params_json: String,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.method == "failed"
    }
}

struct Outcome {
    method: &'static str,
    slices: usize,
    trials: u64,
    p_error: f64,
    ci: (f64, f64),
    params: Value,
}

impl Outcome {
    fn closed(p_error: f64, params: Value) -> Self {
        Outcome {
            method: "closed_form",
            slices: 1,
            trials: 0,
            p_error,
            ci: (p_error, p_error),
            params,
        }
    }

    fn exact(p_error: f64, slices: usize, params: Value) -> Self {
        Outcome {
            method: "exact",
            slices,
            trials: 0,
            p_error,
            ci: (p_error, p_error),
            params,
        }
    }
}

fn setting_json(setting: &MeasurementSetting) -> Value {
    serde_json::to_value(setting).unwrap_or(Value::Null)
}

fn plan_json(plan: &GreedyPlan) -> Value {
    json!({
        "first_setting": setting_json(&plan.first_setting()),
        "steps": plan.len(),
        "boundary_optima": plan.warnings,
    })
}

/// Evaluates every receiver at every (channel, N). Failures become rows
/// with method `failed` and the message in `params_json`.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Vec<Row> {
    let mut rows = Vec::new();
    for channel in &config.channels {
        for spec in &config.receivers {
            for n in config.sweep.values() {
                let slices = if spec.is_sliced() {
                    config.slices.slices(n)
                } else {
                    1
                };
                let row = match evaluate(config, spec, channel, n, slices, threads) {
                    Ok(o) => Row {
                        receiver: spec.to_string(),
                        slots: config.slots,
                        mean_photons: n,
                        n_thermal: channel.n_thermal,
                        eta: channel.efficiency,
                        slices: o.slices,
                        trials: o.trials,
                        seed: config.seed,
                        method: o.method.to_string(),
                        p_error: o.p_error,
                        ci_low: o.ci.0,
                        ci_high: o.ci.1,
                        params_json: o.params.to_string(),
                    },
                    Err(e) => Row {
                        receiver: spec.to_string(),
                        slots: config.slots,
                        mean_photons: n,
                        n_thermal: channel.n_thermal,
                        eta: channel.efficiency,
                        slices,
                        trials: 0,
                        seed: config.seed,
                        method: "failed".to_string(),
                        p_error: f64::NAN,
                        ci_low: f64::NAN,
                        ci_high: f64::NAN,
                        params_json: json!({ "error": e.to_string() }).to_string(),
                    },
                };
                rows.push(row);
            }
        }
    }
    rows
}

fn evaluate(
    config: &ExperimentConfig,
    spec: &ReceiverSpec,
    channel: &ChannelParams,
    n: f64,
    slices: usize,
    threads: Option<usize>,
) -> ppmrx::Result<Outcome> {
    let m = config.slots;
    let ppm = PpmConfig::new(m, n, *channel)?;
    Ok(match *spec {
        ReceiverSpec::Helstrom => Outcome::closed(helstrom_ppm(m, n)?, json!({})),
        ReceiverSpec::Dd { displacement } => {
            let (setting, p) = match displacement {
                Some(g) => {
                    let s = MeasurementSetting::displace(g);
                    (s, dd_error_closed_form(m, n, channel, &s)?)
                }
                None => {
                    let (s, p, _) = optimal_dd(m, n, channel)?;
                    (s, p)
                }
            };
            Outcome::closed(p, json!({ "setting": setting_json(&setting) }))
        }
        ReceiverSpec::Cpn { displacement } => {
            let (setting, p) = match displacement {
                Some(g) => {
                    let s = MeasurementSetting::displace(g);
                    (s, cpn_error_closed_form(m, n, channel, &s)?)
                }
                None => {
                    let (s, p, _) = optimal_cpn(m, n, channel)?;
                    (s, p)
                }
            };
            Outcome::closed(p, json!({ "null_setting": setting_json(&setting) }))
        }
        ReceiverSpec::Greedy { class } => {
            let plan = greedy_plan(&ppm, class.class())?;
            Outcome::exact(greedy_error(&ppm, &plan)?, 1, plan_json(&plan))
        }
        ReceiverSpec::SlicingGreedy { class } => sliced(
            config,
            ppm.with_slices(slices)?,
            ReceiverStrategy::SlicingGreedy {
                class: class.class(),
            },
            json!({ "class": class.label() }),
            threads,
        )?,
        ReceiverSpec::BayesianDdSlicing => sliced(
            config,
            ppm.with_slices(slices)?,
            ReceiverStrategy::BayesianDdSlicing,
            json!({}),
            threads,
        )?,
    })
}

/// Exact when `M·n` fits under the cap, Monte Carlo otherwise.
fn sliced(
    config: &ExperimentConfig,
    ppm: PpmConfig,
    strategy: ReceiverStrategy,
    params: Value,
    threads: Option<usize>,
) -> ppmrx::Result<Outcome> {
    let slices = ppm.slices_per_slot;
    if ppm.observations() <= config.exact_cap {
        let p = exact_error(&ppm, &strategy, config.exact_cap)?;
        return Ok(Outcome::exact(p, slices, params));
    }
    let plan = TrialPlan {
        config: ppm,
        strategy,
        trials: config.trials,
        seed: config.seed,
    };
    let e = estimate_error(&plan, threads)?;
    Ok(Outcome {
        method: "monte_carlo",
        slices,
        trials: e.trials,
        p_error: e.p_error,
        ci: (e.ci_low, e.ci_high),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{OutputSpec, Scale, SliceRule, Sweep};

    fn experiment(
        receivers: Vec<ReceiverSpec>,
        min: f64,
        max: f64,
        points: usize,
    ) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            slots: 4,
            trials: 2_000,
            seed: 7,
            exact_cap: 20,
            sweep: Sweep {
                min,
                max,
                points,
                scale: Scale::Linear,
            },
            slices: SliceRule::Fixed { n: 2 },
            output: OutputSpec::default(),
            channels: vec![ChannelParams::IDEAL],
            receivers,
        }
    }

    #[test]
    fn helstrom_rows() {
        let rows = run_experiment(&experiment(vec![ReceiverSpec::Helstrom], 0.0, 1.0, 2), None);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].p_error, 0.75);
        let e1 = (-1.0f64).exp();
        let expected = 3.0 / 16.0 * ((1.0 + 3.0 * e1).sqrt() - (1.0 - e1).sqrt()).powi(2);
        assert!((rows[1].p_error - expected).abs() < 1e-15);
        assert_eq!(rows[1].method, "closed_form");
    }

    #[test]
    fn sliced_receivers_switch_to_monte_carlo_past_the_cap() {
        let mut config = experiment(vec![ReceiverSpec::BayesianDdSlicing], 1.0, 1.0, 1);
        let rows = run_experiment(&config, None);
        assert_eq!(rows[0].method, "exact");
        assert_eq!(rows[0].slices, 2);
        config.slices = SliceRule::Fixed { n: 8 };
        let rows = run_experiment(&config, None);
        assert_eq!(rows[0].method, "monte_carlo");
        assert_eq!(rows[0].trials, 2_000);
        assert!(rows[0].ci_low <= rows[0].p_error && rows[0].p_error <= rows[0].ci_high);
    }

    #[test]
    fn failures_are_rows() {
        let mut config = experiment(
            vec![
                ReceiverSpec::Greedy {
                    class: crate::config::ClassSpec::Dolinar,
                },
                ReceiverSpec::Helstrom,
            ],
            1.0,
            1.0,
            1,
        );
        config.channels = vec![ChannelParams {
            n_thermal: 0.1,
            efficiency: 1.0,
        }];
        let rows = run_experiment(&config, None);
        assert!(rows[0].failed());
        assert!(rows[0].p_error.is_nan());
        assert!(rows[0].params_json.contains("error"));
        assert!(!rows[1].failed());
    }
}
