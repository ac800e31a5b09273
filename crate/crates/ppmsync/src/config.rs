//! JSON experiment configuration.

use serde::{Deserialize, Serialize};

use ppmsync_core::{Dmc, GaussianNoise, StateDistribution};

use crate::{HarnessError, Result};

/// Back-end channel after the IDC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// General DMC: one row of `w` per input symbol.
    Dmc {
        w: Vec<Vec<f64>>,
        cost: Vec<f64>,
        #[serde(default)]
        zero: usize,
    },
    /// Binary symmetric channel with costs `c(0) = 0`, `c(1) = 1` unless
    /// overridden.
    Bsc {
        crossover: f64,
        #[serde(default)]
        cost: Option<Vec<f64>>,
    },
    /// Additive white Gaussian noise with variance `eta2`.
    Gaussian { eta2: f64 },
}

impl ChannelSpec {
    pub fn dmc(&self) -> Result<Dmc> {
        match self {
            ChannelSpec::Dmc { w, cost, zero } => Ok(Dmc::new(w.clone(), cost.clone(), *zero)?),
            ChannelSpec::Bsc { crossover, cost } => {
                let bsc = Dmc::bsc(*crossover)?;
                Ok(match cost {
                    Some(c) => bsc.with_costs(c.clone())?,
                    None => bsc,
                })
            }
            ChannelSpec::Gaussian { .. } => Err(HarnessError::Config("expected a DMC, got a Gaussian channel".into())),
        }
    }

    pub fn gaussian(&self) -> Result<GaussianNoise> {
        match self {
            ChannelSpec::Gaussian { eta2 } => Ok(GaussianNoise::new(*eta2)?),
            _ => Err(HarnessError::Config("expected a Gaussian channel, got a DMC".into())),
        }
    }
}

/// State distribution of the IDC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdcSpec {
    /// Each symbol is deleted with probability `d`.
    Deletion { d: f64 },
    /// Each symbol is duplicated with probability `p`.
    Duplication { p: f64 },
    /// Every symbol is repeated exactly `k` times.
    Deterministic { k: u32 },
    /// Explicit `(state, probability)` pairs.
    Support { pmf: Vec<(u32, f64)> },
    /// `P(s = k) = (1 - q) q^k`, truncated once the tail mass drops below
    /// `tail_mass`.
    Geometric {
        q: f64,
        #[serde(default = "default_tail_mass")]
        tail_mass: f64,
    },
}

fn default_tail_mass() -> f64 {
    1e-12
}

impl IdcSpec {
    pub fn build(&self) -> Result<StateDistribution> {
        Ok(match self {
            IdcSpec::Deletion { d } => StateDistribution::deletion(*d)?,
            IdcSpec::Duplication { p } => StateDistribution::duplication(*p)?,
            IdcSpec::Deterministic { k } => StateDistribution::deterministic(*k),
            IdcSpec::Support { pmf } => StateDistribution::new(pmf.clone())?,
            IdcSpec::Geometric { q, tail_mass } => StateDistribution::geometric(*q, *tail_mass)?,
        })
    }

    /// Short label used in CSV rows.
    pub fn label(&self) -> String {
        match self {
            IdcSpec::Deletion { d } => format!("deletion(d={d})"),
            IdcSpec::Duplication { p } => format!("duplication(p={p})"),
            IdcSpec::Deterministic { k } => format!("deterministic(k={k})"),
            IdcSpec::Support { pmf } => format!("support({pmf:?})"),
            IdcSpec::Geometric { q, .. } => format!("geometric(q={q})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Dmc,
    Gauss,
    Compound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageSelection {
    Uniform,
    Fixed(usize),
    /// Trial `i` sends message `i mod M + 1`.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Materialize when the block fits under `memory_cap`, else compact.
    #[default]
    Auto,
    /// Encode, pass every symbol through the channel, decode.
    Materialized,
    /// Simulate window sums directly (Gaussian schemes only).
    Compact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub channel: ChannelSpec,
    /// IDC the trials are run against.
    pub idc: IdcSpec,
    /// IDC whose moments the dmc and gauss schemes are designed for; defaults
    /// to `idc`.
    #[serde(default)]
    pub design_idc: Option<IdcSpec>,
    pub messages: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Pulse symbol of the dmc scheme; defaults to the capacity-achieving one.
    #[serde(default)]
    pub x_star: Option<usize>,
    /// Drift interval and variance bound of the compound scheme.
    #[serde(default)]
    pub mu1: Option<f64>,
    #[serde(default)]
    pub mu2: Option<f64>,
    #[serde(default)]
    pub sigma2_bound: Option<f64>,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_selection")]
    pub message_selection: MessageSelection,
    /// Windows used to calibrate the dmc threshold.
    #[serde(default = "default_calibration")]
    pub calibration_trials: usize,
    #[serde(default)]
    pub engine: Engine,
    /// Largest block, in symbols, the materialized engine will build.
    #[serde(default = "default_memory_cap")]
    pub memory_cap: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_selection() -> MessageSelection {
    MessageSelection::Uniform
}

fn default_calibration() -> usize {
    20_000
}

fn default_memory_cap() -> u64 {
    1 << 24
}

fn default_confidence() -> f64 {
    0.95
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate_basic(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(HarnessError::Config("confidence must lie in (0, 1)".into()));
        }
        if let MessageSelection::Fixed(m) = self.message_selection {
            if m == 0 || m > self.messages {
                return Err(HarnessError::Config(format!("fixed message {m} is outside 1..={}", self.messages)));
            }
        }
        Ok(())
    }

    pub fn design_idc(&self) -> &IdcSpec {
        self.design_idc.as_ref().unwrap_or(&self.idc)
    }
}
