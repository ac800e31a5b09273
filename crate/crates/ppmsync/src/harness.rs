//! Monte Carlo trials, sweeps and the cost-equivalence check.
//!
//! Every trial draws from its own stream `root.child(1).child(i)`, so the
//! results do not depend on how trials are scheduled across threads.
//! Outcomes are collected in trial order and folded sequentially.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use ppmsync_core::channel::{cost_of, energy, idc_apply, ids_channel, sample_states};
use ppmsync_core::codec::compound::CompoundSchemeParams;
use ppmsync_core::codec::dmc::{DmcDecoder, DmcSchemeParams};
use ppmsync_core::codec::gauss::GaussSchemeParams;
use ppmsync_core::codec::{Alignment, Failure, Validity};
use ppmsync_core::compact::{self, WindowGrid};
use ppmsync_core::info::{capacity_per_unit_cost, modified_cost};
use ppmsync_core::{
    Decoded, Dmc, GaussianNoise, GaussianPulseCode, PulseLayout, StateDistribution, StreamId,
};

use crate::config::{Engine, ExperimentConfig, MessageSelection, SchemeKind};
use crate::stats::{binomial_se, wilson_interval, Moments};
use crate::{HarnessError, Result};

const CALIBRATION_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;
const COST_STREAM: u64 = 2;

/// A derived, ready-to-run scheme.
#[derive(Debug, Clone)]
pub enum Scheme {
    Dmc { params: DmcSchemeParams, channel: Dmc },
    Gauss { params: GaussSchemeParams, noise: GaussianNoise },
    Compound { params: CompoundSchemeParams, noise: GaussianNoise },
}

impl Scheme {
    pub fn layout(&self) -> &dyn PulseLayout {
        match self {
            Scheme::Dmc { params, .. } => params,
            Scheme::Gauss { params, .. } => params,
            Scheme::Compound { params, .. } => params,
        }
    }

    pub fn block_len(&self) -> u128 {
        match self {
            Scheme::Dmc { params, .. } => params.block_len() as u128,
            Scheme::Gauss { params, .. } => params.block_len(),
            Scheme::Compound { params, .. } => params.block_len(),
        }
    }

    pub fn validity(&self) -> Validity {
        match self {
            Scheme::Dmc { params, .. } => params.validity,
            Scheme::Gauss { params, .. } => params.validity,
            Scheme::Compound { params, .. } => params.validity,
        }
    }

    /// Rate per unit cost from the scheme's closed form.
    pub fn rate_identity(&self) -> f64 {
        match self {
            Scheme::Dmc { params, channel } => params.rate_per_unit_cost(channel),
            Scheme::Gauss { params, .. } => params.rate_identity(),
            Scheme::Compound { params, .. } => params.rate_identity(),
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            Scheme::Dmc { params, .. } => params.threshold,
            Scheme::Gauss { params, .. } => Some(params.threshold),
            Scheme::Compound { params, .. } => Some(params.threshold),
        }
    }

    pub fn params_json(&self) -> Value {
        let v = match self {
            Scheme::Dmc { params, .. } => serde_json::to_value(params),
            Scheme::Gauss { params, .. } => serde_json::to_value(params),
            Scheme::Compound { params, .. } => serde_json::to_value(params),
        };
        v.unwrap_or(Value::Null)
    }
}

/// Derives the scheme a config describes. The dmc threshold is calibrated
/// here.
pub fn derive_scheme(config: &ExperimentConfig) -> Result<Scheme> {
    let design = config.design_idc().build()?;
    let (m, eps, delta) = (config.messages, config.epsilon, config.delta);
    Ok(match config.scheme {
        SchemeKind::Dmc => {
            let channel = config.channel.dmc()?;
            let x_star = match config.x_star {
                Some(x) => x,
                None => capacity_per_unit_cost(&channel)?.maximizing_symbol,
            };
            let params = DmcSchemeParams::derive(m, eps, delta, &design, &channel, x_star)?;
            let root = StreamId::new(config.base_seed);
            let threshold =
                params.calibrate_threshold(&channel, config.calibration_trials, root.child(CALIBRATION_STREAM))?;
            Scheme::Dmc { params: params.with_threshold(threshold), channel }
        }
        SchemeKind::Gauss => {
            let noise = config.channel.gaussian()?;
            Scheme::Gauss { params: GaussSchemeParams::derive(m, eps, delta, &design, &noise)?, noise }
        }
        SchemeKind::Compound => {
            let noise = config.channel.gaussian()?;
            let missing = |name: &str| HarnessError::Config(format!("compound scheme needs `{name}`"));
            let mu1 = config.mu1.ok_or_else(|| missing("mu1"))?;
            let mu2 = config.mu2.ok_or_else(|| missing("mu2"))?;
            let sigma2 = config.sigma2_bound.ok_or_else(|| missing("sigma2_bound"))?;
            let params = CompoundSchemeParams::derive(m, eps, delta, mu1, mu2, sigma2, noise.eta2())?;
            Scheme::Compound { params, noise }
        }
    })
}

fn resolve_engine(config: &ExperimentConfig, scheme: &Scheme) -> Result<Engine> {
    let cap = config.memory_cap as u128;
    let fits = scheme.block_len() <= cap && scheme.layout().observation_end() <= cap;
    match (scheme, config.engine) {
        (Scheme::Dmc { .. }, Engine::Compact) => {
            Err(HarnessError::Config("the compact engine only supports the Gaussian schemes".into()))
        }
        (_, Engine::Materialized) | (Scheme::Dmc { .. }, Engine::Auto) if !fits => Err(HarnessError::Config(format!(
            "block of {} symbols exceeds the memory cap of {cap}",
            scheme.block_len()
        ))),
        (Scheme::Dmc { .. }, _) => Ok(Engine::Materialized),
        (_, Engine::Auto) => Ok(if fits { Engine::Materialized } else { Engine::Compact }),
        (_, e) => Ok(e),
    }
}

/// What happened in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub message: usize,
    pub decoded: Decoded,
    pub cost: f64,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AlignmentSummary {
    /// Trials in which the IDC stayed within the scheme's tolerances.
    pub typical_trials: usize,
    /// Typical trials in which both alignment properties held.
    pub properties_hold: usize,
    /// Typical trials with no burst symbol under a wrong region's windows.
    pub wrong_regions_clear: usize,
    /// Typical trials with enough burst overlap in the right region.
    pub pulse_captured: usize,
}

impl AlignmentSummary {
    pub fn fraction_holding(&self) -> f64 {
        if self.typical_trials == 0 {
            f64::NAN
        } else {
            self.properties_hold as f64 / self.typical_trials as f64
        }
    }
}

/// Integer tallies of a batch of trials; merging is associative and
/// commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub trials: usize,
    pub errors: usize,
    pub missed: usize,
    pub ambiguous: usize,
    pub wrong_message: usize,
    pub alignment: AlignmentSummary,
}

impl Tally {
    pub fn record(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        match o.decoded {
            Decoded::Message(m) if m == o.message => {}
            Decoded::Message(_) => {
                self.errors += 1;
                self.wrong_message += 1;
            }
            Decoded::Failure(Failure::NoDetection) => {
                self.errors += 1;
                self.missed += 1;
            }
            Decoded::Failure(Failure::Ambiguous { .. }) => {
                self.errors += 1;
                self.ambiguous += 1;
            }
        }
        let a = &o.alignment;
        if a.idc_typical {
            let s = &mut self.alignment;
            s.typical_trials += 1;
            s.properties_hold += usize::from(a.properties_hold());
            s.wrong_regions_clear += usize::from(a.wrong_regions_clear);
            s.pulse_captured += usize::from(a.pulse_captured);
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.errors += other.errors;
        self.missed += other.missed;
        self.ambiguous += other.ambiguous;
        self.wrong_message += other.wrong_message;
        let (a, b) = (&mut self.alignment, other.alignment);
        a.typical_trials += b.typical_trials;
        a.properties_hold += b.properties_hold;
        a.wrong_regions_clear += b.wrong_regions_clear;
        a.pulse_captured += b.pulse_captured;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSizes {
    pub min: u128,
    pub max: u128,
    pub total: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub validity: Validity,
    pub all_valid: bool,
    /// Sizes of `D_2, ..., D_M`.
    pub region_sizes: RegionSizes,
    pub block_len: u128,
    pub observation_end: u128,
    pub threshold: Option<f64>,
    /// Compound only: whether the trial IDC's mean lies in `[mu1, mu2]` and
    /// its variance under the bound.
    pub idc_in_family: Option<bool>,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub scheme: SchemeKind,
    pub engine: Engine,
    pub messages: usize,
    pub trials_run: usize,
    /// Decoding failures count as errors.
    pub errors: usize,
    pub missed_detections: usize,
    pub ambiguous: usize,
    pub wrong_message: usize,
    pub error_rate: f64,
    pub standard_error: f64,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_cost: f64,
    pub max_cost: f64,
    /// `log2(M) / mean_cost`.
    pub achieved_rate_per_unit_cost: f64,
    pub rate_identity: f64,
    pub alignment: AlignmentSummary,
    pub diagnostics: Diagnostics,
    pub wall_time_secs: f64,
}

impl TrialReport {
    /// Whether the error rate is at most `target` plus `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        self.error_rate <= target + k * binomial_se(target, self.trials_run)
    }
}

/// A scheme plus everything a trial needs.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub scheme: Scheme,
    pub idc: StateDistribution,
    pub engine: Engine,
    grid: Option<WindowGrid>,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate_basic()?;
        let scheme = derive_scheme(config)?;
        Self::with_scheme(config, scheme)
    }

    /// Runs `config`'s IDC against an already derived scheme.
    pub fn with_scheme(config: &ExperimentConfig, scheme: Scheme) -> Result<Self> {
        config.validate_basic()?;
        if scheme.layout().messages() != config.messages {
            return Err(HarnessError::Config("scheme and config disagree on M".into()));
        }
        let idc = config.idc.build()?;
        let engine = resolve_engine(config, &scheme)?;
        let grid = match (&scheme, engine) {
            (Scheme::Gauss { params, .. }, Engine::Compact) => Some(WindowGrid::new(params)?),
            (Scheme::Compound { params, .. }, Engine::Compact) => Some(WindowGrid::new(params)?),
            _ => None,
        };
        Ok(Experiment { config: config.clone(), scheme, idc, engine, grid })
    }

    fn message(&self, trial: u64, stream: StreamId) -> usize {
        let m = self.config.messages;
        match self.config.message_selection {
            MessageSelection::Uniform => stream.uniform_index(m) + 1,
            MessageSelection::Fixed(k) => k,
            MessageSelection::Exhaustive => (trial % m as u64) as usize + 1,
        }
    }

    fn trial_stream(&self, trial: u64) -> StreamId {
        StreamId::new(self.config.base_seed).child(TRIAL_STREAM).child(trial)
    }

    /// Runs trial `trial`. Message choice, channel and receiver padding use
    /// children 0, 1 and 2 of the trial stream.
    pub fn run_trial(&self, trial: u64, decoder: Option<&DmcDecoder<'_>>) -> Result<TrialOutcome> {
        let s = self.trial_stream(trial);
        let message = self.message(trial, s.child(0));
        let (channel_stream, padding) = (s.child(1), s.child(2));
        match &self.scheme {
            Scheme::Dmc { params, channel } => {
                let x = params.encode(message)?;
                let cost = cost_of(&x, channel.costs())?;
                let y = ids_channel(&x, &self.idc, channel, channel_stream, true)?;
                let decoded = decoder.expect("dmc trials need a decoder").decode(&y, padding);
                let alignment = params.alignment(message, y.idc_trace.as_ref().expect("trace kept"))?;
                Ok(TrialOutcome { message, decoded, cost, alignment })
            }
            Scheme::Gauss { params, noise } => self.gaussian_trial(params, noise, message, channel_stream, padding),
            Scheme::Compound { params, noise } => self.gaussian_trial(params, noise, message, channel_stream, padding),
        }
    }

    fn gaussian_trial<C: GaussianPulseCode>(
        &self,
        code: &C,
        noise: &GaussianNoise,
        message: usize,
        channel_stream: StreamId,
        padding: StreamId,
    ) -> Result<TrialOutcome> {
        match &self.grid {
            Some(grid) => {
                let t = compact::simulate(code, grid, message, &self.idc, noise, channel_stream)?;
                Ok(TrialOutcome {
                    message,
                    decoded: t.decoded,
                    cost: code.codeword_energy(message),
                    alignment: t.alignment,
                })
            }
            None => {
                let x = code.encode(message)?;
                let cost = energy(&x);
                let y = ids_channel(&x, &self.idc, noise, channel_stream, true)?;
                let decoded = code.decode(&y, padding);
                let alignment = code.alignment(message, y.idc_trace.as_ref().expect("trace kept"))?;
                Ok(TrialOutcome { message, decoded, cost, alignment })
            }
        }
    }

    /// Runs trials `range` in parallel and returns the outcomes in order.
    pub fn run_range(&self, range: std::ops::Range<u64>) -> Result<Vec<TrialOutcome>> {
        let decoder = match &self.scheme {
            Scheme::Dmc { params, channel } => Some(DmcDecoder::new(params, channel)?),
            _ => None,
        };
        range.into_par_iter().map(|i| self.run_trial(i, decoder.as_ref())).collect()
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let layout = self.scheme.layout();
        let sizes: Vec<u128> = (2..=layout.messages()).map(|m| layout.region(m).len()).collect();
        let idc_in_family = match &self.scheme {
            Scheme::Compound { params, .. } => Some(
                self.idc.mu() >= params.mu1 && self.idc.mu() <= params.mu2 && self.idc.sigma2() <= params.sigma2,
            ),
            _ => None,
        };
        let validity = self.scheme.validity();
        Diagnostics {
            validity,
            all_valid: validity.all(),
            region_sizes: RegionSizes {
                min: sizes.iter().copied().min().unwrap_or(0),
                max: sizes.iter().copied().max().unwrap_or(0),
                total: sizes.iter().sum(),
            },
            block_len: self.scheme.block_len(),
            observation_end: layout.observation_end(),
            threshold: self.scheme.threshold(),
            idc_in_family,
            params: self.scheme.params_json(),
        }
    }

    pub fn run(&self) -> Result<TrialReport> {
        let start = Instant::now();
        let outcomes = self.run_range(0..self.config.trials as u64)?;
        let mut report = self.summarize(&outcomes);
        report.wall_time_secs = start.elapsed().as_secs_f64();
        Ok(report)
    }

    pub fn summarize(&self, outcomes: &[TrialOutcome]) -> TrialReport {
        let mut tally = Tally::default();
        let mut cost = Moments::default();
        let mut max_cost = 0.0f64;
        for o in outcomes {
            tally.record(o);
            cost.push(o.cost);
            max_cost = max_cost.max(o.cost);
        }
        let n = tally.trials;
        let error_rate = tally.errors as f64 / n as f64;
        let (ci_low, ci_high) = wilson_interval(tally.errors, n, self.config.confidence);
        let log_m = (self.config.messages as f64).log2();
        TrialReport {
            scheme: self.config.scheme,
            engine: self.engine,
            messages: self.config.messages,
            trials_run: n,
            errors: tally.errors,
            missed_detections: tally.missed,
            ambiguous: tally.ambiguous,
            wrong_message: tally.wrong_message,
            error_rate,
            standard_error: binomial_se(error_rate, n),
            confidence: self.config.confidence,
            ci_low,
            ci_high,
            mean_cost: cost.mean,
            max_cost,
            achieved_rate_per_unit_cost: log_m / cost.mean,
            rate_identity: self.scheme.rate_identity(),
            alignment: tally.alignment,
            diagnostics: self.diagnostics(),
            wall_time_secs: 0.0,
        }
    }
}

/// Runs every trial of `config`.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialReport> {
    Experiment::new(config)?.run()
}

/// One grid point: a JSON object whose keys override the base config.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct SweepGrid {
    pub base: Value,
    #[serde(default)]
    pub points: Vec<Value>,
    /// Derive the scheme once from `base` and reuse it at every point, so
    /// points may only change the IDC the trials run against.
    #[serde(default)]
    pub fixed_codec: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: usize,
    pub scheme: String,
    pub messages: Option<usize>,
    pub idc: String,
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_cost: f64,
    pub achieved_rate: f64,
    pub rate_identity: f64,
    pub valid: Option<bool>,
    pub status: String,
}

fn merge(base: &Value, point: &Value) -> Result<ExperimentConfig> {
    let mut merged = base.clone();
    match (merged.as_object_mut(), point.as_object()) {
        (Some(b), Some(p)) => {
            for (k, v) in p {
                b.insert(k.clone(), v.clone());
            }
        }
        _ => return Err(HarnessError::Config("sweep base and points must be JSON objects".into())),
    }
    serde_json::from_value(merged).map_err(|e| HarnessError::Config(e.to_string()))
}

impl SweepRow {
    fn empty(point: usize) -> Self {
        SweepRow {
            point,
            scheme: String::new(),
            messages: None,
            idc: String::new(),
            trials: 0,
            errors: 0,
            error_rate: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            mean_cost: f64::NAN,
            achieved_rate: f64::NAN,
            rate_identity: f64::NAN,
            valid: None,
            status: String::from("ok"),
        }
    }

    fn describe(&mut self, c: &ExperimentConfig) {
        self.scheme = match c.scheme {
            SchemeKind::Dmc => "dmc",
            SchemeKind::Gauss => "gauss",
            SchemeKind::Compound => "compound",
        }
        .to_string();
        self.messages = Some(c.messages);
        self.idc = c.idc.label();
    }

    fn fill(&mut self, r: &TrialReport) {
        self.trials = r.trials_run;
        self.errors = r.errors;
        self.error_rate = r.error_rate;
        self.ci_low = r.ci_low;
        self.ci_high = r.ci_high;
        self.mean_cost = r.mean_cost;
        self.achieved_rate = r.achieved_rate_per_unit_cost;
        self.rate_identity = r.rate_identity;
        self.valid = Some(r.diagnostics.all_valid);
    }
}

/// Runs every grid point; a failing point yields a row with its error in
/// `status` and the sweep carries on.
pub fn sweep(grid: &SweepGrid) -> Vec<SweepRow> {
    let fixed = grid
        .fixed_codec
        .then(|| merge(&grid.base, &Value::Object(Default::default())).and_then(|c| derive_scheme(&c)));
    grid.points
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let mut row = SweepRow::empty(i);
            let outcome = merge(&grid.base, point).and_then(|c| {
                row.describe(&c);
                match &fixed {
                    None => run_trials(&c),
                    Some(Ok(scheme)) => Experiment::with_scheme(&c, scheme.clone())?.run(),
                    Some(Err(e)) => Err(HarnessError::Config(format!("fixed codec: {e}"))),
                }
            });
            match outcome {
                Ok(r) => row.fill(&r),
                Err(e) => row.status = e.to_string(),
            }
            row
        })
        .collect()
}

/// Writes sweep rows as CSV with a header row.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "point", "scheme", "messages", "idc", "trials", "errors", "error_rate", "ci_low", "ci_high", "mean_cost",
            "achieved_rate", "rate_identity", "valid", "status",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostEquivalenceReport {
    pub trials: usize,
    pub mu: f64,
    /// `E c(x)` over transmitted codewords.
    pub mean_input_cost: f64,
    pub se_input_cost: f64,
    /// `E c'(x~)` with `c' = c / mu` applied to the IDC output.
    pub mean_output_cost: f64,
    pub se_output_cost: f64,
    /// Mean of the per-trial differences `c'(x~) - c(x)`.
    pub difference: f64,
    pub se_difference: f64,
    pub max_abs_trial_difference: f64,
}

impl CostEquivalenceReport {
    pub fn within(&self, k: f64) -> bool {
        self.difference.abs() <= k * self.se_difference
    }
}

/// Compares the expected input cost of dmc codewords with the expected
/// modified cost `c / mu` of what the IDC makes of them.
pub fn verify_cost_equivalence(config: &ExperimentConfig, trials: usize) -> Result<CostEquivalenceReport> {
    if config.scheme != SchemeKind::Dmc {
        return Err(HarnessError::Config("cost equivalence is defined for the dmc scheme".into()));
    }
    if trials == 0 {
        return Err(HarnessError::Config("trials must be positive".into()));
    }
    let channel = config.channel.dmc()?;
    let idc = config.idc.build()?;
    let design = config.design_idc().build()?;
    let x_star = match config.x_star {
        Some(x) => x,
        None => capacity_per_unit_cost(&channel)?.maximizing_symbol,
    };
    let params = DmcSchemeParams::derive(config.messages, config.epsilon, config.delta, &design, &channel, x_star)?;
    let primed = modified_cost(&channel, idc.mu())?;
    let root = StreamId::new(config.base_seed).child(COST_STREAM);
    let samples: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = root.child(i);
            let m = s.child(0).uniform_index(config.messages) + 1;
            let x = params.encode(m)?;
            let states = sample_states(&idc, x.len(), s.child(1))?;
            let out = idc_apply(&x, &states)?;
            Ok((cost_of(&x, channel.costs())?, cost_of(&out, &primed)?))
        })
        .collect::<Result<_>>()?;
    let input: Moments = samples.iter().map(|s| s.0).collect();
    let output: Moments = samples.iter().map(|s| s.1).collect();
    let diff: Moments = samples.iter().map(|s| s.1 - s.0).collect();
    Ok(CostEquivalenceReport {
        trials,
        mu: idc.mu(),
        mean_input_cost: input.mean,
        se_input_cost: input.se(),
        mean_output_cost: output.mean,
        se_output_cost: output.se(),
        difference: diff.mean,
        se_difference: diff.se(),
        max_abs_trial_difference: samples.iter().map(|s| (s.1 - s.0).abs()).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"scheme":"gauss","channel":{"type":"gaussian","eta2":1.0},
                "idc":{"type":"deletion","d":0.1},"messages":64,"epsilon":0.2,"delta":0.5,
                "trials":40,"base_seed":3}"#,
        )
        .unwrap()
    }

    #[test]
    fn tally_merge_matches_single_pass() {
        let e = Experiment::new(&gauss_config()).unwrap();
        let outcomes = e.run_range(0..40).unwrap();
        let mut whole = Tally::default();
        outcomes.iter().for_each(|o| whole.record(o));
        let mut parts = [Tally::default(); 3];
        for (i, o) in outcomes.iter().enumerate() {
            parts[i % 3].record(o);
        }
        assert_eq!(parts[2].merge(parts[0]).merge(parts[1]), whole);
    }

    #[test]
    fn trials_are_independent_of_ranges() {
        let e = Experiment::new(&gauss_config()).unwrap();
        let all = e.run_range(0..40).unwrap();
        let mut split = e.run_range(0..17).unwrap();
        split.extend(e.run_range(17..40).unwrap());
        assert_eq!(all, split);
    }

    #[test]
    fn engine_selection() {
        let mut c = gauss_config();
        let e = Experiment::new(&c).unwrap();
        assert_eq!(e.engine, Engine::Materialized);
        c.memory_cap = 1000;
        assert_eq!(Experiment::new(&c).unwrap().engine, Engine::Compact);
        c.engine = Engine::Materialized;
        assert!(Experiment::new(&c).is_err());
    }

    #[test]
    fn csv_has_header_when_empty() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("point,scheme,messages"));
        assert_eq!(text.lines().count(), 1);
    }
}
