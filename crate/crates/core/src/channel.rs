//! Insertion/deletion channel, discrete memoryless channel, Gaussian noise,
//! and their concatenation.
//!
//! The insertion/deletion channel (IDC) repeats input symbol `x[t]` exactly
//! `s[t]` times, where the states `s[t]` are iid. A state of 0 deletes the
//! symbol and a state of 2 or more duplicates it. The IDC never creates
//! symbols that were not sent.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::math;
use crate::{Error, Result, StreamId, StreamRng};

/// Input/output symbols of a DMC are indices into its alphabets.
pub type Symbol = usize;

const SUM_TOLERANCE: f64 = 1e-12;

fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { what, value: p });
    }
    Ok(())
}

/// Law of the IDC state `s[t]` over a finite support of nonnegative integers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StateDistribution {
    support: Vec<(u32, f64)>,
    #[cfg_attr(feature = "serde", serde(skip))]
    cdf: Vec<f64>,
    mu: f64,
    sigma2: f64,
}

impl StateDistribution {
    /// Builds a distribution from `(state, probability)` pairs.
    ///
    /// Pairs are sorted by state and duplicate states are merged.
    pub fn new(mut support: Vec<(u32, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::NotStochastic { what: "state distribution", sum: 0.0 });
        }
        for &(_, p) in &support {
            check_probability("state probability", p)?;
        }
        support.sort_by_key(|&(k, _)| k);
        support.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        let sum: f64 = support.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotStochastic { what: "state distribution", sum });
        }
        let mu: f64 = support.iter().map(|&(k, p)| k as f64 * p).sum();
        let second: f64 = support.iter().map(|&(k, p)| (k as f64) * (k as f64) * p).sum();
        let sigma2 = (second - mu * mu).max(0.0);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = support
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        // Guard against the last cumulative value rounding below one.
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Ok(StateDistribution { support, cdf, mu, sigma2 })
    }

    /// Every symbol is repeated exactly `k` times.
    pub fn deterministic(k: u32) -> Self {
        Self::new(alloc::vec![(k, 1.0)]).expect("point mass is a distribution")
    }

    /// Deletion channel: each symbol is deleted with probability `d`.
    pub fn deletion(d: f64) -> Result<Self> {
        check_probability("deletion probability", d)?;
        Self::new(alloc::vec![(0, d), (1, 1.0 - d)])
    }

    /// Duplication channel: each symbol is sent twice with probability `p`.
    pub fn duplication(p: f64) -> Result<Self> {
        check_probability("duplication probability", p)?;
        Self::new(alloc::vec![(1, 1.0 - p), (2, p)])
    }

    /// Truncates a pmf on `{0, 1, 2, ...}` once the retained mass reaches
    /// `1 - tail_mass`, then renormalizes.
    pub fn truncated(pmf: impl Fn(u32) -> f64, tail_mass: f64) -> Result<Self> {
        if !(tail_mass > 0.0 && tail_mass < 1.0) {
            return Err(Error::OutOfRange { what: "tail mass", value: tail_mass });
        }
        const MAX_SUPPORT: u32 = 1 << 20;
        let mut support = Vec::new();
        let mut mass = 0.0;
        let mut k = 0;
        while mass < 1.0 - tail_mass {
            if k == MAX_SUPPORT {
                return Err(Error::OutOfRange { what: "tail mass", value: tail_mass });
            }
            let p = pmf(k);
            check_probability("state probability", p)?;
            if p > 0.0 {
                support.push((k, p));
                mass += p;
            }
            k += 1;
        }
        for entry in &mut support {
            entry.1 /= mass;
        }
        let sum: f64 = support.iter().map(|&(_, p)| p).sum();
        // Renormalized sums may be off by an ulp or two; fold it into the mode.
        if let Some(mode) = support
            .iter_mut()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
        {
            mode.1 += 1.0 - sum;
        }
        Self::new(support)
    }

    /// Geometric states `P(k) = (1 - q) q^k`, truncated at `tail_mass`.
    pub fn geometric(q: f64, tail_mass: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::OutOfRange { what: "geometric ratio", value: q });
        }
        Self::truncated(|k| (1.0 - q) * libm::pow(q, k as f64), tail_mass)
    }

    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    /// Mean `mu` of the state (the clock drift).
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Variance `sigma^2` of the state (the clock jitter).
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.support.len() == 1 {
            return self.support[0].0;
        }
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.support[idx.min(self.support.len() - 1)].0
    }

    /// Samples `s[1] + ... + s[n]` without drawing the individual states.
    ///
    /// The state counts are multinomial and are drawn as a chain of exact
    /// binomials. Beyond 2^53 symbols the binomials are replaced by the
    /// normal law with matching mean and variance; at that scale the relative
    /// error of the approximation is below double precision resolution of the
    /// positions it feeds.
    pub fn sample_sum<R: Rng + ?Sized>(&self, n: u128, rng: &mut R) -> u128 {
        const DIRECT: u128 = 64;
        const EXACT: u128 = 1 << 53;
        if n <= DIRECT {
            return (0..n).map(|_| self.sample(rng) as u128).sum();
        }
        if n > EXACT {
            let z: f64 = rng.sample(StandardNormal);
            let nf = n as f64;
            let v = nf * self.mu + math::sqrt(nf * self.sigma2) * z;
            return if v <= 0.0 { 0 } else { libm::round(v) as u128 };
        }
        let mut remaining = n as u64;
        let mut mass = 1.0;
        let mut total: u128 = 0;
        let last = self.support.len() - 1;
        for (i, &(k, p)) in self.support.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let count = if i == last {
                remaining
            } else {
                let q = (p / mass).clamp(0.0, 1.0);
                mass -= p;
                Binomial::new(remaining, q).expect("valid binomial").sample(rng)
            };
            remaining -= count;
            total += k as u128 * count as u128;
        }
        total
    }
}

/// Realized IDC states `s[1..=T]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateSequence(pub Vec<u32>);

impl StateSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Output length `L = sum of s[t]`.
    pub fn total(&self) -> usize {
        self.0.iter().map(|&s| s as usize).sum()
    }

    /// Sum of states over the (0-based, half-open) input range.
    pub fn total_in(&self, range: core::ops::Range<usize>) -> usize {
        self.0[range].iter().map(|&s| s as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for StateSequence {
    fn from(v: Vec<u32>) -> Self {
        StateSequence(v)
    }
}

/// Discrete memoryless channel with a cost per input symbol.
///
/// Row `x` of the transition matrix is `W(.|x)`. One input symbol is the free
/// symbol "0" with cost zero; it is usually, but not necessarily, index 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Dmc {
    w: Vec<Vec<f64>>,
    cost: Vec<f64>,
    zero: Symbol,
    #[cfg_attr(feature = "serde", serde(skip))]
    cdf: Vec<Vec<f64>>,
}

impl Dmc {
    pub fn new(w: Vec<Vec<f64>>, cost: Vec<f64>, zero: Symbol) -> Result<Self> {
        let outputs = w.first().map_or(0, Vec::len);
        if w.is_empty() || outputs == 0 {
            return Err(Error::InvalidConfig("transition matrix is empty"));
        }
        if cost.len() != w.len() {
            return Err(Error::LengthMismatch { expected: w.len(), actual: cost.len() });
        }
        if zero >= w.len() {
            return Err(Error::UnknownSymbol { symbol: zero, alphabet: w.len() });
        }
        let mut cdf = Vec::with_capacity(w.len());
        for row in &w {
            if row.len() != outputs {
                return Err(Error::LengthMismatch { expected: outputs, actual: row.len() });
            }
            for &p in row {
                check_probability("transition probability", p)?;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::NotStochastic { what: "transition matrix row", sum });
            }
            let mut acc = 0.0;
            let mut c: Vec<f64> = row
                .iter()
                .map(|&p| {
                    acc += p;
                    acc
                })
                .collect();
            // Never select a trailing zero-probability output.
            let last_positive = row.iter().rposition(|&p| p > 0.0).unwrap_or(0);
            for v in &mut c[last_positive..] {
                *v = f64::INFINITY;
            }
            cdf.push(c);
        }
        for &c in &cost {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::OutOfRange { what: "symbol cost", value: c });
            }
        }
        if cost[zero] != 0.0 {
            return Err(Error::OutOfRange { what: "cost of the free symbol", value: cost[zero] });
        }
        Ok(Dmc { w, cost, zero, cdf })
    }

    /// Binary symmetric channel with Hamming cost `c(0) = 0`, `c(1) = 1`.
    pub fn bsc(crossover: f64) -> Result<Self> {
        check_probability("crossover probability", crossover)?;
        Self::new(
            alloc::vec![
                alloc::vec![1.0 - crossover, crossover],
                alloc::vec![crossover, 1.0 - crossover],
            ],
            alloc::vec![0.0, 1.0],
            0,
        )
    }

    /// Identity channel on `n` symbols with cost `c(x) = x`.
    pub fn noiseless(n: usize) -> Result<Self> {
        let w = (0..n)
            .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(w, (0..n).map(|x| x as f64).collect(), 0)
    }

    pub fn inputs(&self) -> usize {
        self.w.len()
    }

    pub fn outputs(&self) -> usize {
        self.w[0].len()
    }

    /// The free symbol.
    pub fn zero(&self) -> Symbol {
        self.zero
    }

    /// `W(.|x)`.
    pub fn row(&self, x: Symbol) -> &[f64] {
        &self.w[x]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn cost(&self, x: Symbol) -> f64 {
        self.cost[x]
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    /// Same transition matrix with a different cost vector.
    pub fn with_costs(&self, cost: Vec<f64>) -> Result<Self> {
        Self::new(self.w.clone(), cost, self.zero)
    }

    pub fn sample_output<R: Rng + ?Sized>(&self, x: Symbol, rng: &mut R) -> Symbol {
        let u: f64 = rng.random();
        let row = &self.cdf[x];
        row.partition_point(|&c| c <= u).min(row.len() - 1)
    }
}

/// Additive white Gaussian noise with variance `eta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GaussianNoise {
    eta2: f64,
}

impl GaussianNoise {
    pub fn new(eta2: f64) -> Result<Self> {
        if !(eta2 > 0.0 && eta2.is_finite()) {
            return Err(Error::OutOfRange { what: "noise variance", value: eta2 });
        }
        Ok(GaussianNoise { eta2 })
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn eta(&self) -> f64 {
        math::sqrt(self.eta2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.eta() * z
    }
}

/// Received sequence of random length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput<S> {
    pub symbols: Vec<S>,
    /// IDC states that produced this output, kept only on request.
    pub idc_trace: Option<StateSequence>,
}

impl<S> ChannelOutput<S> {
    pub fn new(symbols: Vec<S>) -> Self {
        ChannelOutput { symbols, idc_trace: None }
    }

    /// `L`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// The memoryless stage that follows the IDC.
pub trait BackEnd {
    type Symbol: Copy;

    fn transmit(&self, input: &[Self::Symbol], stream: StreamId) -> Result<Vec<Self::Symbol>>;
}

impl BackEnd for Dmc {
    type Symbol = Symbol;

    fn transmit(&self, input: &[Symbol], stream: StreamId) -> Result<Vec<Symbol>> {
        dmc_apply(input, self, stream).map(|out| out.symbols)
    }
}

impl BackEnd for GaussianNoise {
    type Symbol = f64;

    fn transmit(&self, input: &[f64], stream: StreamId) -> Result<Vec<f64>> {
        Ok(gaussian_apply(input, self, stream).symbols)
    }
}

/// Draws `block_length` iid states.
pub fn sample_states(
    dist: &StateDistribution,
    block_length: usize,
    stream: StreamId,
) -> Result<StateSequence> {
    if block_length == 0 {
        return Err(Error::OutOfRange { what: "block length", value: 0.0 });
    }
    let mut rng = stream.rng();
    Ok(StateSequence((0..block_length).map(|_| dist.sample(&mut rng)).collect()))
}

/// Applies the IDC: `out[l] = input[t[l]]` with `t[l] = min{t : s[1] + ... + s[t] >= l}`.
pub fn idc_apply<S: Copy>(input: &[S], states: &StateSequence) -> Result<Vec<S>> {
    if input.len() != states.len() {
        return Err(Error::LengthMismatch { expected: states.len(), actual: input.len() });
    }
    let mut out = Vec::with_capacity(states.total());
    for (&x, &s) in input.iter().zip(states.as_slice()) {
        out.extend(core::iter::repeat_n(x, s as usize));
    }
    Ok(out)
}

/// Sampling times `t[1..=L]` (1-based input positions) of the IDC output.
pub fn sampling_times(states: &StateSequence) -> Vec<usize> {
    let mut times = Vec::with_capacity(states.total());
    for (t, &s) in states.as_slice().iter().enumerate() {
        times.extend(core::iter::repeat_n(t + 1, s as usize));
    }
    times
}

/// Passes every symbol independently through `W(.|x)`.
pub fn dmc_apply(input: &[Symbol], channel: &Dmc, stream: StreamId) -> Result<ChannelOutput<Symbol>> {
    if let Some(&bad) = input.iter().find(|&&x| x >= channel.inputs()) {
        return Err(Error::UnknownSymbol { symbol: bad, alphabet: channel.inputs() });
    }
    let mut rng: StreamRng = stream.rng();
    let symbols = input.iter().map(|&x| channel.sample_output(x, &mut rng)).collect();
    Ok(ChannelOutput::new(symbols))
}

/// Adds iid `N(0, eta^2)` noise to every sample.
pub fn gaussian_apply(input: &[f64], noise: &GaussianNoise, stream: StreamId) -> ChannelOutput<f64> {
    let mut rng = stream.rng();
    let eta = noise.eta();
    let symbols = input
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            x + eta * z
        })
        .collect();
    ChannelOutput::new(symbols)
}

/// Insertion/deletion/substitution channel: IDC followed by `back_end`.
///
/// States come from `stream.child(0)` and the back end from `stream.child(1)`,
/// so [`ids_channel_with_states`] reproduces this call exactly when handed
/// the same states.
pub fn ids_channel<B: BackEnd>(
    input: &[B::Symbol],
    idc: &StateDistribution,
    back_end: &B,
    stream: StreamId,
    keep_trace: bool,
) -> Result<ChannelOutput<B::Symbol>> {
    let states = sample_states(idc, input.len(), stream.child(0))?;
    ids_channel_with_states(input, states, back_end, stream, keep_trace)
}

/// [`ids_channel`] with the IDC states supplied by the caller.
pub fn ids_channel_with_states<B: BackEnd>(
    input: &[B::Symbol],
    states: StateSequence,
    back_end: &B,
    stream: StreamId,
    keep_trace: bool,
) -> Result<ChannelOutput<B::Symbol>> {
    let repeated = idc_apply(input, &states)?;
    let symbols = back_end.transmit(&repeated, stream.child(1))?;
    Ok(ChannelOutput {
        symbols,
        idc_trace: keep_trace.then_some(states),
    })
}

/// Total cost `c(x[1]) + ... + c(x[T])` of a symbol sequence.
pub fn cost_of(input: &[Symbol], cost: &[f64]) -> Result<f64> {
    input.iter().try_fold(0.0, |acc, &x| {
        cost.get(x)
            .map(|c| acc + c)
            .ok_or(Error::UnknownSymbol { symbol: x, alphabet: cost.len() })
    })
}

/// Energy `x[1]^2 + ... + x[T]^2` of a real sequence.
pub fn energy(input: &[f64]) -> f64 {
    input.iter().map(|x| x * x).sum()
}
