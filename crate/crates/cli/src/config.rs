//! Experiment files and the built-in figure presets.

use std::fmt;
use std::path::{Path, PathBuf};

use ppmrx::{ChannelParams, MeasurementClass};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {source}")]
    Parse {
        origin: String,
        source: toml::de::Error,
    },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unknown preset `{0}`, expected one of: {list}", list = PRESETS.join(", "))]
    UnknownPreset(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

pub const PRESETS: [&str; 5] = ["figure3", "figure4a", "figure4b", "figure5a", "figure5b"];

/// A sweep over the pulse mean photon number and the receivers to run.
///
/// Every receiver is evaluated at every (channel, N) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub slots: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    pub sweep: Sweep,
    pub slices: SliceRule,
    #[serde(default)]
    pub output: OutputSpec,
    pub channels: Vec<ChannelParams>,
    pub receivers: Vec<ReceiverSpec>,
}

fn default_exact_cap() -> usize {
    ppmrx::exact::DEFAULT_EXACT_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.points {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * t,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Slices per slot for the sliced receivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SliceRule {
    Fixed {
        n: usize,
    },
    /// `max(1, round(per_photon · N))`.
    PerPhoton {
        per_photon: f64,
    },
}

impl SliceRule {
    pub fn slices(&self, mean_photons: f64) -> usize {
        match *self {
            SliceRule::Fixed { n } => n,
            SliceRule::PerPhoton { per_photon } => {
                ((per_photon * mean_photons).round() as usize).max(1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Measurement family of the adaptive receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassSpec {
    Displacement,
    DisplacementGain,
    Dolinar,
}

impl ClassSpec {
    pub fn class(self) -> MeasurementClass {
        match self {
            ClassSpec::Displacement => MeasurementClass::Displacement,
            ClassSpec::DisplacementGain => MeasurementClass::DisplacementGain,
            ClassSpec::Dolinar => MeasurementClass::Dolinar,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassSpec::Displacement => "displacement",
            ClassSpec::DisplacementGain => "displacement-gain",
            ClassSpec::Dolinar => "dolinar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReceiverSpec {
    Helstrom,
    /// Direct detection. Without `displacement` the displacement is optimized.
    Dd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        displacement: Option<f64>,
    },
    /// Pulse nulling. Without `displacement` the nulling displacement is optimized.
    Cpn {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        displacement: Option<f64>,
    },
    Greedy {
        class: ClassSpec,
    },
    SlicingGreedy {
        class: ClassSpec,
    },
    BayesianDdSlicing,
}

impl ReceiverSpec {
    pub fn is_sliced(&self) -> bool {
        matches!(
            self,
            ReceiverSpec::SlicingGreedy { .. } | ReceiverSpec::BayesianDdSlicing
        )
    }
}

impl fmt::Display for ReceiverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReceiverSpec::Helstrom => f.write_str("helstrom"),
            ReceiverSpec::Dd { .. } => f.write_str("dd"),
            ReceiverSpec::Cpn { .. } => f.write_str("cpn"),
            ReceiverSpec::Greedy { class } => write!(f, "greedy-{}", class.label()),
            ReceiverSpec::SlicingGreedy { class } => write!(f, "slicing-greedy-{}", class.label()),
            ReceiverSpec::BayesianDdSlicing => f.write_str("bayesian-dd-slicing"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|source| ConfigError::Parse {
                origin: origin.to_string(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// A preset name or a path to a TOML file.
    pub fn resolve(source: &str) -> Result<Self, ConfigError> {
        if PRESETS.contains(&source) {
            preset(source)
        } else if Path::new(source).exists() {
            Self::load(Path::new(source))
        } else {
            Err(ConfigError::UnknownPreset(source.to_string()))
        }
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.slots < 2 {
            return Err(invalid("slots", "need at least two slots"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed", "must fit in 63 bits"));
        }
        let s = &self.sweep;
        if s.points == 0 {
            return Err(invalid("sweep.points", "need at least one point"));
        }
        if !(s.min >= 0.0 && s.min.is_finite() && s.max.is_finite() && s.min <= s.max) {
            return Err(invalid(
                "sweep",
                format!("[{}, {}] is not a valid range", s.min, s.max),
            ));
        }
        if s.scale == Scale::Log && s.min <= 0.0 {
            return Err(invalid("sweep.min", "log sweeps need a positive minimum"));
        }
        match self.slices {
            SliceRule::Fixed { n: 0 } => return Err(invalid("slices.n", "must be at least 1")),
            SliceRule::PerPhoton { per_photon }
                if !(per_photon > 0.0 && per_photon.is_finite()) =>
            {
                return Err(invalid("slices.per_photon", "must be positive"))
            }
            _ => {}
        }
        if self.channels.is_empty() {
            return Err(invalid("channels", "need at least one channel"));
        }
        for c in &self.channels {
            c.validate()
                .map_err(|e| invalid("channels", e.to_string()))?;
        }
        if self.receivers.is_empty() {
            return Err(invalid("receivers", "need at least one receiver"));
        }
        Ok(())
    }
}

/// Command-line overrides applied on top of a file or preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub slices: Option<usize>,
    pub exact_cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn apply(&self, mut config: ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(n) = self.slices {
            config.slices = SliceRule::Fixed { n };
        }
        if let Some(c) = self.exact_cap {
            config.exact_cap = c;
        }
        if let Some(p) = &self.out {
            config.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            config.output.format = f;
        }
        config.validate()?;
        Ok(config)
    }
}

const DESK_TRIALS: u64 = 10_000;
const DEFAULT_SEED: u64 = 20_240_601;

fn base(
    name: &str,
    sweep: Sweep,
    slices: SliceRule,
    channels: Vec<ChannelParams>,
    receivers: Vec<ReceiverSpec>,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        slots: 4,
        trials: DESK_TRIALS,
        seed: DEFAULT_SEED,
        exact_cap: default_exact_cap(),
        sweep,
        slices,
        output: OutputSpec::default(),
        channels,
        receivers,
    }
}

fn channel(n_thermal: f64, efficiency: f64) -> ChannelParams {
    ChannelParams {
        n_thermal,
        efficiency,
    }
}

/// Built-in experiments at desk scale.
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    use ClassSpec::*;
    let optimized_dd = ReceiverSpec::Dd { displacement: None };
    let optimized_cpn = ReceiverSpec::Cpn { displacement: None };
    let noisy_sweep = Sweep {
        min: 0.1,
        max: 20.0,
        points: 7,
        scale: Scale::Log,
    };
    let noisy_receivers = vec![
        optimized_dd,
        optimized_cpn,
        ReceiverSpec::Greedy {
            class: Displacement,
        },
        ReceiverSpec::Greedy {
            class: DisplacementGain,
        },
        ReceiverSpec::SlicingGreedy {
            class: Displacement,
        },
    ];
    let floor_channels: Vec<ChannelParams> = [1e-3, 1e-2, 1e-1, 1.0, 10.0]
        .iter()
        .map(|&nd| channel(nd, 1.0))
        .collect();
    let floor_sweep = Sweep {
        min: 0.1,
        max: 30.0,
        points: 7,
        scale: Scale::Log,
    };
    let floor_receivers = vec![
        ReceiverSpec::BayesianDdSlicing,
        ReceiverSpec::Dd {
            displacement: Some(0.0),
        },
        ReceiverSpec::Helstrom,
    ];
    Ok(match name {
        "figure3" => base(
            name,
            Sweep {
                min: 0.0,
                max: 2.0,
                points: 9,
                scale: Scale::Linear,
            },
            SliceRule::PerPhoton { per_photon: 1000.0 },
            vec![ChannelParams::IDEAL],
            vec![
                ReceiverSpec::Helstrom,
                optimized_dd,
                optimized_cpn,
                ReceiverSpec::Greedy {
                    class: Displacement,
                },
                ReceiverSpec::Greedy {
                    class: DisplacementGain,
                },
                ReceiverSpec::Greedy { class: Dolinar },
                ReceiverSpec::SlicingGreedy {
                    class: Displacement,
                },
            ],
        ),
        "figure4a" => base(
            name,
            noisy_sweep,
            SliceRule::Fixed { n: 1000 },
            vec![channel(0.001, 0.9)],
            noisy_receivers,
        ),
        "figure4b" => base(
            name,
            noisy_sweep,
            SliceRule::Fixed { n: 1000 },
            vec![channel(0.1, 0.9)],
            noisy_receivers,
        ),
        "figure5a" => base(
            name,
            floor_sweep,
            SliceRule::Fixed { n: 10 },
            floor_channels,
            floor_receivers,
        ),
        "figure5b" => base(
            name,
            floor_sweep,
            SliceRule::Fixed { n: 1000 },
            floor_channels,
            floor_receivers,
        ),
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    })
}
