//! Pulse-position scheme for a DMC behind an insertion/deletion channel.
//!
//! Message `m` is a burst of `B` copies of `x*` at position `N(m-1)+1` in a
//! block of `MN` free symbols. The receiver tests windows of length
//! `floor(B mu - beta)` with a log-likelihood-ratio statistic whose threshold
//! is calibrated for a missed-detection probability of `epsilon / 4`.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    check_message, check_unit_interval, decide, Alignment, BurstPlacement, Decoded, Hypothesis, PulseLayout, Validity,
    WindowStarts,
};
use crate::channel::{ChannelOutput, Dmc, StateDistribution, StateSequence, Symbol};
use crate::info::kl_divergence;
use crate::math::{self, ceil_snapped, floor_snapped, le_approx};
use crate::{Error, Result, StreamId};

/// Every derived constant of the scheme for one `(M, epsilon, delta, x*)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DmcSchemeParams {
    pub messages: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub x_star: Symbol,
    pub zero: Symbol,
    /// `D(W(.|x*) || W(.|0))` in bits.
    pub divergence: f64,
    /// Slot length `N`.
    pub guard: usize,
    /// Burst length `B`.
    pub burst: usize,
    pub beta: f64,
    pub nu: f64,
    pub window_len: usize,
    /// LLR cutoff in bits; `None` until calibrated.
    pub threshold: Option<f64>,
    pub validity: Validity,
}

impl DmcSchemeParams {
    /// Derives the scheme for the IDC statistics of `idc`.
    pub fn derive(
        messages: usize,
        epsilon: f64,
        delta: f64,
        idc: &StateDistribution,
        channel: &Dmc,
        x_star: Symbol,
    ) -> Result<Self> {
        Self::derive_from_moments(messages, epsilon, delta, idc.mu(), idc.sigma2(), channel, x_star)
    }

    pub fn derive_from_moments(
        messages: usize,
        epsilon: f64,
        delta: f64,
        mu: f64,
        sigma2: f64,
        channel: &Dmc,
        x_star: Symbol,
    ) -> Result<Self> {
        if messages < 2 {
            return Err(Error::TooFewMessages { messages, reason: "need at least two messages" });
        }
        check_unit_interval("epsilon", epsilon)?;
        check_unit_interval("delta", delta)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::OutOfRange { what: "mu", value: mu });
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::OutOfRange { what: "sigma2", value: sigma2 });
        }
        if x_star >= channel.inputs() {
            return Err(Error::UnknownSymbol { symbol: x_star, alphabet: channel.inputs() });
        }
        if x_star == channel.zero() {
            return Err(Error::InvalidConfig("the pulse symbol must differ from the free symbol"));
        }
        let divergence = kl_divergence(channel.row(x_star), channel.row(channel.zero()))?;
        if divergence.is_infinite() {
            return Err(Error::NoiselessShortcut);
        }
        if divergence <= 0.0 {
            return Err(Error::UselessSymbol);
        }
        let m = messages as f64;
        let burst = floor_snapped((2.0 + delta) * math::log2(m) / (mu * divergence));
        if burst < 1.0 {
            return Err(Error::TooFewMessages { messages, reason: "burst length B is below one" });
        }
        // Without jitter the formula gives N = 0; the slot then only needs to
        // hold the burst.
        let guard = if sigma2 > 0.0 {
            ceil_snapped(36.0 * m * sigma2 / (mu * mu * epsilon))
        } else {
            burst
        };
        if guard * m > usize::MAX as f64 / 2.0 {
            return Err(Error::InvalidConfig("block length M*N does not fit in memory addressing"));
        }
        let beta = math::sqrt(4.0 * burst * sigma2 / epsilon);
        let nu = math::sqrt(4.0 * m * guard * sigma2 / epsilon);
        let window = floor_snapped(burst * mu - beta);
        if window < 1.0 {
            return Err(Error::TooFewMessages { messages, reason: "window length floor(B mu - beta) is below one" });
        }
        let slot = guard * mu;
        let validity = Validity {
            regions_disjoint: le_approx(3.0 * nu, slot),
            clear_of_earlier_regions: le_approx(2.0 * nu + burst * mu, slot),
            clear_of_later_regions: le_approx(2.0 * nu + burst * mu + beta, slot),
            burst_fits_slot: burst <= guard,
        };
        if !validity.burst_fits_slot {
            return Err(Error::InvalidConfig("burst length B exceeds the slot length N"));
        }
        Ok(DmcSchemeParams {
            messages,
            epsilon,
            delta,
            mu,
            sigma2,
            x_star,
            zero: channel.zero(),
            divergence,
            guard: guard as usize,
            burst: burst as usize,
            beta,
            nu,
            window_len: window as usize,
            threshold: None,
            validity,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self
    }

    /// Block length `T = M N`.
    pub fn block_len(&self) -> usize {
        self.messages * self.guard
    }

    /// Codeword of message `m`.
    pub fn encode(&self, m: usize) -> Result<Vec<Symbol>> {
        check_message(m, self.messages)?;
        let mut x = vec![self.zero; self.block_len()];
        let start = (m - 1) * self.guard;
        x[start..start + self.burst].fill(self.x_star);
        Ok(x)
    }

    /// Cost `B c(x*)` shared by every codeword.
    pub fn codeword_cost(&self, channel: &Dmc) -> f64 {
        self.burst as f64 * channel.cost(self.x_star)
    }

    /// `log2(M) / (B c(x*))`.
    pub fn rate_per_unit_cost(&self, channel: &Dmc) -> f64 {
        math::log2(self.messages as f64) / self.codeword_cost(channel)
    }

    /// Per-output log-likelihood ratios `log2(W(y|x*) / W(y|0))`.
    pub fn llr_table(&self, channel: &Dmc) -> Vec<f64> {
        let one = channel.row(self.x_star);
        let zero = channel.row(self.zero);
        one.iter()
            .zip(zero)
            .map(|(&p1, &p0)| match (p1 > 0.0, p0 > 0.0) {
                (true, true) => math::log2(p1 / p0),
                (true, false) => f64::INFINITY,
                (false, true) => f64::NEG_INFINITY,
                // never observed under either hypothesis
                (false, false) => 0.0,
            })
            .collect()
    }

    /// Picks the largest threshold whose empirical missed-detection rate over
    /// `trials` windows drawn from `W(.|x*)` is at most `epsilon / 4`.
    pub fn calibrate_threshold(&self, channel: &Dmc, trials: usize, stream: StreamId) -> Result<f64> {
        if trials == 0 {
            return Err(Error::OutOfRange { what: "calibration trials", value: 0.0 });
        }
        let llr = self.llr_table(channel);
        let mut rng = stream.rng();
        let mut stats: Vec<f64> = (0..trials)
            .map(|_| {
                window_statistic(
                    (0..self.window_len).map(|_| llr[channel.sample_output(self.x_star, &mut rng)]),
                )
            })
            .collect();
        stats.sort_by(|a, b| a.total_cmp(b));
        // At most floor(trials * eps / 4) samples may fall strictly below tau.
        let allowed = floor_snapped(trials as f64 * self.epsilon / 4.0) as usize;
        Ok(stats[allowed.min(trials - 1)])
    }

    /// LLR statistic of one window.
    pub fn statistic(&self, window: &[Symbol], channel: &Dmc) -> Result<f64> {
        if window.len() != self.window_len {
            return Err(Error::LengthMismatch { expected: self.window_len, actual: window.len() });
        }
        if let Some(&bad) = window.iter().find(|&&y| y >= channel.outputs()) {
            return Err(Error::UnknownSymbol { symbol: bad, alphabet: channel.outputs() });
        }
        let llr = self.llr_table(channel);
        Ok(window_statistic(window.iter().map(|&y| llr[y])))
    }

    pub fn hypothesis_test(&self, window: &[Symbol], channel: &Dmc) -> Result<Hypothesis> {
        let threshold = self.threshold.ok_or(Error::Uncalibrated)?;
        Ok(Hypothesis::from_statistic(self.statistic(window, channel)?, threshold))
    }

    /// Checks, from the realized IDC states, whether the IDC behaved
    /// typically for message `m` and whether the two alignment properties
    /// the error analysis relies on hold.
    pub fn alignment(&self, m: usize, states: &StateSequence) -> Result<Alignment> {
        check_message(m, self.messages)?;
        if states.len() != self.block_len() {
            return Err(Error::LengthMismatch { expected: self.block_len(), actual: states.len() });
        }
        let offset = (m - 1) * self.guard;
        let before = states.total_in(0..offset) as f64;
        let burst_len = states.total_in(offset..offset + self.burst);
        let expected_before = offset as f64 * self.mu;
        let idc_typical = (before - expected_before).abs() < self.nu
            && (burst_len as f64 - self.burst as f64 * self.mu).abs() < self.beta;
        let placement = BurstPlacement { start: before as u128 + 1, len: burst_len as u128 };
        Ok(Alignment::assess(self, m, placement, idc_typical, self.window_len as f64))
    }
}

impl PulseLayout for DmcSchemeParams {
    fn messages(&self) -> usize {
        self.messages
    }

    fn region(&self, m: usize) -> WindowStarts {
        if m == 1 {
            return WindowStarts::singleton(1);
        }
        let center = (m - 1) as f64 * self.guard as f64 * self.mu + 1.0;
        WindowStarts::centered(center, self.nu, 1)
    }

    fn window_len(&self, _m: usize) -> u128 {
        self.window_len as u128
    }
}

/// Sum of per-symbol LLRs. A window holding both an impossible-under-H0 and
/// an impossible-under-H1 output fits neither hypothesis and scores as H0.
fn window_statistic(llrs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut pos, mut neg) = (0.0, false, false);
    for v in llrs {
        if v == f64::INFINITY {
            pos = true;
        } else if v == f64::NEG_INFINITY {
            neg = true;
        } else {
            sum += v;
        }
    }
    match (pos, neg) {
        (true, false) => f64::INFINITY,
        (_, true) => f64::NEG_INFINITY,
        (false, false) => sum,
    }
}

/// Receiver for a calibrated [`DmcSchemeParams`].
#[derive(Debug, Clone)]
pub struct DmcDecoder<'a> {
    params: &'a DmcSchemeParams,
    channel: &'a Dmc,
    llr: Vec<f64>,
    threshold: f64,
}

impl<'a> DmcDecoder<'a> {
    pub fn new(params: &'a DmcSchemeParams, channel: &'a Dmc) -> Result<Self> {
        let threshold = params.threshold.ok_or(Error::Uncalibrated)?;
        if params.zero != channel.zero() || channel.inputs() <= params.x_star {
            return Err(Error::InvalidConfig("scheme was derived for a different channel"));
        }
        Ok(DmcDecoder { params, channel, llr: params.llr_table(channel), threshold })
    }

    /// Decodes one received sequence.
    ///
    /// Windows reaching past the end of `y` read fresh draws from `W(.|0)`
    /// taken from `padding`: the receiver keeps sampling an idle channel.
    pub fn decode(&self, y: &ChannelOutput<Symbol>, padding: StreamId) -> Decoded {
        let end = self.params.observation_end() as usize - 1;
        let mut scores: Vec<f64> = y.symbols.iter().map(|&s| self.llr[s]).collect();
        if scores.len() < end {
            let mut rng = padding.rng();
            let zero = self.channel.zero();
            scores.extend((y.len()..end).map(|_| self.llr[self.channel.sample_output(zero, &mut rng)]));
        }
        decide(self.params, |_, start, len| {
            let s = start as usize - 1;
            let stat = window_statistic(scores[s..s + len as usize].iter().copied());
            Hypothesis::from_statistic(stat, self.threshold)
        })
    }
}

/// Convenience wrapper around [`DmcDecoder`].
pub fn decode(y: &ChannelOutput<Symbol>, params: &DmcSchemeParams, channel: &Dmc, padding: StreamId) -> Result<Decoded> {
    Ok(DmcDecoder::new(params, channel)?.decode(y, padding))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{cost_of, ids_channel, ids_channel_with_states};
    use alloc::vec;

    /// `W(.|0) = (1/2, 1/2)`, `W(.|1) = (1, 0)`: divergence exactly one bit.
    fn one_bit_channel() -> Dmc {
        Dmc::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]], vec![0.0, 1.0], 0).unwrap()
    }

    fn jitter_quarter() -> StateDistribution {
        StateDistribution::new(vec![(0, 0.125), (1, 0.75), (2, 0.125)]).unwrap()
    }

    #[test]
    fn guard_and_burst_formulas() {
        let p = DmcSchemeParams::derive(64, 0.25, 0.5, &jitter_quarter(), &one_bit_channel(), 1).unwrap();
        assert_eq!(p.divergence, 1.0);
        // N = ceil(36 * 64 * 0.25 / 0.25)
        assert_eq!(p.guard, 2304);
        // B = floor(2.5 * 6 / 1)
        assert_eq!(p.burst, 15);
        assert!((p.nu - 768.0).abs() < 1e-9);
        assert!((p.beta - 60f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.window_len, 7);
        assert!(p.validity.all());
    }

    #[test]
    fn region_examples() {
        let p = DmcSchemeParams::derive(64, 0.25, 0.5, &jitter_quarter(), &one_bit_channel(), 1).unwrap();
        assert_eq!(p.region(1), WindowStarts::singleton(1));
        let r = p.region(2);
        // (2305 - 768, 2305 + 768)
        assert_eq!((r.first(), r.last()), (Some(1538), Some(3072)));
        for m in 1..64 {
            assert!(p.region(m).last().unwrap() < p.region(m + 1).first().unwrap());
        }
        // nu = 48 around the same center
        let narrow = WindowStarts::centered(2305.0, 48.0, 1);
        assert_eq!((narrow.first(), narrow.last()), (Some(2258), Some(2352)));
    }

    #[test]
    fn jitter_free_degenerates_to_points() {
        let p = DmcSchemeParams::derive(16, 0.25, 0.5, &StateDistribution::deterministic(1), &one_bit_channel(), 1)
            .unwrap();
        assert_eq!(p.beta, 0.0);
        assert_eq!(p.nu, 0.0);
        assert_eq!(p.guard, p.burst);
        for m in 1..=16 {
            assert_eq!(p.region(m).len(), 1);
        }
    }

    #[test]
    fn derive_errors() {
        let idc = jitter_quarter();
        assert_eq!(
            DmcSchemeParams::derive(64, 0.25, 0.5, &idc, &Dmc::noiseless(2).unwrap(), 1),
            Err(Error::NoiselessShortcut)
        );
        let useless = Dmc::new(vec![vec![0.5, 0.5]; 2], vec![0.0, 1.0], 0).unwrap();
        assert_eq!(DmcSchemeParams::derive(64, 0.25, 0.5, &idc, &useless, 1), Err(Error::UselessSymbol));
        // strong pulse, tiny M: burst shorter than one symbol
        let strong = Dmc::bsc(1e-9).unwrap();
        assert!(matches!(
            DmcSchemeParams::derive(2, 0.25, 0.5, &idc, &strong, 1),
            Err(Error::TooFewMessages { .. })
        ));
        assert!(DmcSchemeParams::derive(64, 1.5, 0.5, &idc, &one_bit_channel(), 1).is_err());
        assert!(DmcSchemeParams::derive(64, 0.25, 0.5, &idc, &one_bit_channel(), 0).is_err());
        assert!(DmcSchemeParams::derive(1, 0.25, 0.5, &idc, &one_bit_channel(), 1).is_err());
    }

    #[test]
    fn codewords() {
        let ch = one_bit_channel();
        let p = DmcSchemeParams::derive(64, 0.25, 0.5, &jitter_quarter(), &ch, 1).unwrap();
        let first = p.encode(1).unwrap();
        assert_eq!(first.len(), 64 * 2304);
        assert!(first[..15].iter().all(|&x| x == 1));
        assert!(first[15..].iter().all(|&x| x == 0));
        let last = p.encode(64).unwrap();
        assert_eq!(last.len(), 64 * 2304);
        assert_eq!(last.iter().position(|&x| x == 1), Some(63 * 2304));
        for m in [3, 17, 40] {
            assert_eq!(cost_of(&p.encode(m).unwrap(), ch.costs()).unwrap(), p.codeword_cost(&ch));
        }
        assert_eq!(p.codeword_cost(&ch), 15.0);
        assert!(p.encode(0).is_err());
        assert!(p.encode(65).is_err());
    }

    #[test]
    fn achieved_rate_bound() {
        let ch = Dmc::bsc(0.2).unwrap();
        for &(m, d) in &[(64, 0.5), (256, 0.3), (1024, 0.1)] {
            let p = DmcSchemeParams::derive(m, 0.25, d, &StateDistribution::deletion(0.1).unwrap(), &ch, 1).unwrap();
            let bound = p.mu / (2.0 + d) * p.divergence / ch.cost(1);
            assert!(p.rate_per_unit_cost(&ch) >= bound);
        }
    }

    #[test]
    fn llr_conventions() {
        let ch = one_bit_channel();
        let p = DmcSchemeParams::derive(64, 0.25, 0.5, &jitter_quarter(), &ch, 1).unwrap();
        assert_eq!(p.llr_table(&ch), vec![1.0, f64::NEG_INFINITY]);
        assert_eq!(window_statistic([1.0, f64::INFINITY].into_iter()), f64::INFINITY);
        assert_eq!(window_statistic([f64::INFINITY, f64::NEG_INFINITY].into_iter()), f64::NEG_INFINITY);
    }

    #[test]
    fn calibration_near_noiseless() {
        let ch = Dmc::bsc(1e-6).unwrap();
        let mut p = DmcSchemeParams::derive_from_moments(1 << 12, 0.2, 0.5, 1.0, 0.01, &Dmc::bsc(0.2).unwrap(), 1).unwrap();
        p.window_len = 40;
        let tau = p.calibrate_threshold(&ch, 20_000, StreamId::new(3)).unwrap();
        let mean = 40.0 * kl_divergence(ch.row(1), ch.row(0)).unwrap();
        assert!((tau - mean).abs() / mean < 0.01, "tau {tau} vs {mean}");
    }

    #[test]
    fn calibration_holds_on_fresh_samples() {
        // BSC(0.2), 60-symbol windows, epsilon = 0.2
        let ch = Dmc::bsc(0.2).unwrap();
        let mut p = DmcSchemeParams::derive_from_moments(1 << 20, 0.2, 0.5, 1.0, 0.01, &ch, 1).unwrap();
        p.window_len = 60;
        let tau = p.calibrate_threshold(&ch, 50_000, StreamId::new(11)).unwrap();
        let p = p.with_threshold(tau);
        let n = 50_000;
        let mut rng = StreamId::new(12).rng();
        let misses = (0..n)
            .filter(|_| {
                let w: Vec<Symbol> = (0..60).map(|_| ch.sample_output(1, &mut rng)).collect();
                p.hypothesis_test(&w, &ch).unwrap() == Hypothesis::H0
            })
            .count();
        let rate = misses as f64 / n as f64;
        let se = (0.05 * 0.95 / n as f64).sqrt();
        assert!(rate <= 0.05 + 2.0 * se, "missed detection {rate}");
    }

    #[test]
    fn hypothesis_test_cases() {
        let ch = Dmc::bsc(1e-6).unwrap();
        let mut p = DmcSchemeParams::derive_from_moments(1 << 12, 0.2, 0.5, 1.0, 0.01, &Dmc::bsc(0.2).unwrap(), 1).unwrap();
        p.window_len = 12;
        let w = p.window_len;
        let llr = p.llr_table(&ch)[1];
        let p = p.with_threshold(llr * (w as f64 - 2.0));
        assert_eq!(p.hypothesis_test(&vec![1; w], &ch).unwrap(), Hypothesis::H1);
        assert_eq!(p.hypothesis_test(&vec![0; w], &ch).unwrap(), Hypothesis::H0);
        assert!(p.hypothesis_test(&vec![1; w + 1], &ch).is_err());
        // statistic exactly at the threshold
        let exact = p.statistic(&vec![1; w], &ch).unwrap();
        let at = p.clone().with_threshold(exact);
        assert_eq!(at.hypothesis_test(&vec![1; w], &ch).unwrap(), Hypothesis::H1);
        let uncalibrated = DmcSchemeParams { threshold: None, ..p };
        assert_eq!(uncalibrated.hypothesis_test(&vec![1; w], &ch), Err(Error::Uncalibrated));
    }

    #[test]
    fn jitter_free_round_trip() {
        let ch = Dmc::bsc(1e-6).unwrap();
        let idc = StateDistribution::deterministic(1);
        let p = DmcSchemeParams::derive_from_moments(1024, 0.2, 0.5, 1.0, 0.0, &ch, 1).unwrap();
        let tau = p.calibrate_threshold(&ch, 2000, StreamId::new(1)).unwrap();
        let p = p.with_threshold(tau);
        let dec = DmcDecoder::new(&p, &ch).unwrap();
        for m in 1..=1024 {
            let x = p.encode(m).unwrap();
            let y = ids_channel(&x, &idc, &ch, StreamId::new(m as u64), false).unwrap();
            assert_eq!(dec.decode(&y, StreamId::new(99)), Decoded::Message(m));
        }
    }

    #[test]
    fn forced_states_round_trip() {
        // tiny hand-checkable configuration: N = 8, B = 4, window 2, nu = 1.5
        let ch = Dmc::noiseless(2).unwrap();
        let p = DmcSchemeParams {
            messages: 3,
            epsilon: 0.5,
            delta: 0.5,
            mu: 1.0,
            sigma2: 0.0,
            x_star: 1,
            zero: 0,
            divergence: 1.0,
            guard: 8,
            burst: 4,
            beta: 1.5,
            nu: 1.5,
            window_len: 2,
            threshold: Some(0.0),
            validity: Validity {
                regions_disjoint: true,
                clear_of_earlier_regions: true,
                clear_of_later_regions: true,
                burst_fits_slot: true,
            },
        };
        assert_eq!(p.region(2).iter().collect::<Vec<_>>(), [8, 9, 10]);
        assert_eq!(p.region(3).iter().collect::<Vec<_>>(), [16, 17, 18]);
        // message 2; one deletion before the burst, one duplication inside it
        let x = p.encode(2).unwrap();
        let mut s = vec![1u32; 24];
        s[3] = 0;
        s[9] = 2;
        let y = ids_channel_with_states(&x, StateSequence(s.clone()), &ch, StreamId::new(0), true).unwrap();
        // burst occupies received positions 8..=12; window [8, 9] is all ones
        assert_eq!(&y.symbols[7..12], &[1, 1, 1, 1, 1]);
        assert_eq!(decode(&y, &p, &ch, StreamId::new(1)).unwrap(), Decoded::Message(2));
        let a = p.alignment(2, &StateSequence(s)).unwrap();
        assert!(a.idc_typical && a.properties_hold());
        assert_eq!(a.placement, BurstPlacement { start: 8, len: 5 });
    }

    #[test]
    fn double_fire_is_failure() {
        let ch = Dmc::noiseless(2).unwrap();
        let p = DmcSchemeParams::derive(16, 0.25, 0.5, &StateDistribution::deterministic(1), &Dmc::bsc(0.01).unwrap(), 1)
            .unwrap()
            .with_threshold(0.0);
        let mut x = p.encode(2).unwrap();
        let third = p.encode(3).unwrap();
        for (a, b) in x.iter_mut().zip(third) {
            *a = (*a).max(b);
        }
        let y = ids_channel(&x, &StateDistribution::deterministic(1), &ch, StreamId::new(0), false).unwrap();
        let d = decode(&y, &p, &Dmc::bsc(0.01).unwrap(), StreamId::new(0)).unwrap();
        assert!(matches!(d, Decoded::Failure(super::super::Failure::Ambiguous { first: 2, second: 3 })));
    }
}
