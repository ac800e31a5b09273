//! Pulse-position scheme for the Gaussian channel when the mean `mu` of the
//! IDC is only known to lie in `[mu1, mu2]`.
//!
//! Guard spaces and bursts grow geometrically with the message index so
//! that the uncertainty in where a burst lands never reaches a neighbouring
//! decision region. Every codeword has energy `x*^2`; the receiver uses the
//! window length `floor((mu1 - delta) B_m)` in region `m` and never needs to
//! know the true `mu`.

use alloc::vec::Vec;

use super::{check_unit_interval, GaussianPulseCode, PulseLayout, Validity, WindowStarts};
use crate::math::{self, ceil_snapped, floor_snapped, le_approx, LN_2};
use crate::{Error, Result};

/// Positions above this are not representable with enough headroom.
const MAX_POSITION: f64 = 1e36;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CompoundSchemeParams {
    pub messages: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// Upper bound on the IDC variance over the family.
    pub sigma2: f64,
    pub eta2: f64,
    /// `N_1, ..., N_M`: zeros ahead of each burst.
    pub guards: Vec<u128>,
    /// `B_1, ..., B_M`.
    pub bursts: Vec<u128>,
    /// Energy-normalized pulse height; message `m` sends `x* / sqrt(B_m)`.
    pub x_star: f64,
    pub threshold: f64,
    pub validity: Validity,
}

impl CompoundSchemeParams {
    pub fn derive(
        messages: usize,
        epsilon: f64,
        delta: f64,
        mu1: f64,
        mu2: f64,
        sigma2: f64,
        eta2: f64,
    ) -> Result<Self> {
        if messages < 4 {
            return Err(Error::TooFewMessages { messages, reason: "need log2 M > 1" });
        }
        check_unit_interval("epsilon", epsilon)?;
        if !(mu1 > 0.0 && mu1.is_finite()) {
            return Err(Error::OutOfRange { what: "mu1", value: mu1 });
        }
        if !(mu2 >= mu1 && mu2.is_finite()) {
            return Err(Error::OutOfRange { what: "mu2", value: mu2 });
        }
        if !(delta >= 0.0 && delta < mu1) {
            return Err(Error::OutOfRange { what: "delta", value: delta });
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::OutOfRange { what: "sigma2", value: sigma2 });
        }
        if !(eta2 > 0.0 && eta2.is_finite()) {
            return Err(Error::OutOfRange { what: "noise variance", value: eta2 });
        }
        let m = messages as f64;
        let log_m = math::log2(m);
        let lo = mu1 - delta;
        let hi = mu2 + delta;
        let ratio = hi / lo;
        let spread = mu2 - mu1 + 2.0 * delta;

        let mut guards = Vec::with_capacity(messages);
        let mut bursts = Vec::with_capacity(messages);
        guards.push(0u128);
        bursts.push(math::floor(log_m) as u128);
        for k in 1..messages {
            let n = ceil_snapped(ratio * (guards[k - 1] + bursts[k - 1]) as f64);
            if n > MAX_POSITION {
                return Err(Error::InvalidConfig("block length overflows the position range"));
            }
            guards.push(n as u128);
            bursts.push(floor_snapped(spread * n) as u128);
        }
        if bursts.contains(&0) {
            return Err(Error::InvalidConfig("mu2 - mu1 + 2 delta is too small: some burst length B_m is zero"));
        }
        let params = CompoundSchemeParams {
            messages,
            epsilon,
            delta,
            mu1,
            mu2,
            sigma2,
            eta2,
            guards,
            bursts,
            x_star: (1.0 + delta) * math::sqrt(eta2) * math::sqrt((2.0 + delta) * math::ln(m) / lo),
            threshold: math::sqrt((2.0 + delta) * math::ln(m)),
            validity: Validity {
                regions_disjoint: true,
                clear_of_earlier_regions: true,
                clear_of_later_regions: true,
                burst_fits_slot: true,
            },
        };
        if (1..=messages).any(|k| params.window_len(k) == 0) {
            return Err(Error::InvalidConfig("window length floor((mu1 - delta) B_m) is zero"));
        }
        if let Some(k) = (2..=messages).find(|&k| params.region(k).is_empty()) {
            return Err(Error::EmptyRegion { message: k });
        }
        let validity = params.check_validity();
        Ok(CompoundSchemeParams { validity, ..params })
    }

    fn check_validity(&self) -> Validity {
        let lo = self.mu1 - self.delta;
        let hi = self.mu2 + self.delta;
        let n = |k: usize| self.guards[k - 1] as f64;
        let b = |k: usize| self.bursts[k - 1] as f64;
        let pairs = || (1..self.messages).map(|k| (k, k + 1));
        Validity {
            regions_disjoint: pairs().all(|(k, next)| match (self.region(k).last(), self.region(next).first()) {
                (Some(a), Some(b)) => a < b,
                _ => true,
            }),
            // Windows of D_k end at most at (mu2 + delta) N_k + (mu1 - delta) B_k; a
            // typical burst of message k + 1 starts after (mu1 - delta) N_{k+1}.
            clear_of_earlier_regions: pairs().all(|(k, next)| le_approx(hi * n(k) + lo * b(k), lo * n(next))),
            clear_of_later_regions: pairs().all(|(k, next)| le_approx(hi * (n(k) + b(k)), lo * n(next))),
            burst_fits_slot: pairs().all(|(k, next)| self.guards[k - 1] + self.bursts[k - 1] <= self.guards[next - 1]),
        }
    }

    /// `N_m`.
    pub fn guard(&self, m: usize) -> u128 {
        self.guards[m - 1]
    }

    /// `B_m`.
    pub fn burst(&self, m: usize) -> u128 {
        self.bursts[m - 1]
    }

    /// Window-start spacing `floor(N_m / log2 M)` of `D_m`, `m >= 2`.
    pub fn spacing(&self, m: usize) -> u128 {
        math::floor(self.guard(m) as f64 / math::log2(self.messages as f64)) as u128
    }

    /// Energy `x*^2` of every codeword.
    pub fn energy(&self) -> f64 {
        self.x_star * self.x_star
    }

    pub fn rate(&self) -> f64 {
        math::log2(self.messages as f64) / self.energy()
    }

    /// `(mu1 - delta) / ((1 + delta)^2 (2 + delta) eta^2 ln 2)`.
    pub fn rate_identity(&self) -> f64 {
        let d = self.delta;
        (self.mu1 - d) / ((1.0 + d) * (1.0 + d) * (2.0 + d) * self.eta2 * LN_2)
    }

    /// Upper bound on `|D_m|`.
    pub fn region_size_bound(&self, m: usize) -> f64 {
        let n = self.guard(m) as f64;
        let spread = self.mu2 - self.mu1 + 2.0 * self.delta;
        spread * n / (n / math::log2(self.messages as f64) - 1.0) + 1.0
    }
}

impl PulseLayout for CompoundSchemeParams {
    fn messages(&self) -> usize {
        self.messages
    }

    fn region(&self, m: usize) -> WindowStarts {
        if m == 1 {
            return WindowStarts::singleton(1);
        }
        let spacing = self.spacing(m);
        if spacing == 0 {
            return WindowStarts::EMPTY;
        }
        let n = self.guard(m) as f64;
        WindowStarts::open_interval((self.mu1 - self.delta) * n + 1.0, (self.mu2 + self.delta) * n + 1.0, spacing)
    }

    fn window_len(&self, m: usize) -> u128 {
        floor_snapped((self.mu1 - self.delta) * self.burst(m) as f64) as u128
    }
}

impl GaussianPulseCode for CompoundSchemeParams {
    fn block_len(&self) -> u128 {
        self.guard(self.messages) + self.burst(self.messages)
    }

    fn burst_offset(&self, m: usize) -> u128 {
        self.guard(m)
    }

    fn burst_len(&self, m: usize) -> u128 {
        self.burst(m)
    }

    fn amplitude(&self, m: usize) -> f64 {
        self.x_star / math::sqrt(self.burst(m) as f64)
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn eta2(&self) -> f64 {
        self.eta2
    }

    fn idc_typical(&self, m: usize, before: u128, burst: u128) -> bool {
        let lo = self.mu1 - self.delta;
        let hi = self.mu2 + self.delta;
        let inside = |x: u128, n: u128| {
            let (x, n) = (x as f64, n as f64);
            lo * n < x && x < hi * n
        };
        // The first burst has no prefix to stretch.
        let prefix_ok = if m == 1 { before == 0 } else { inside(before, self.guard(m)) };
        prefix_ok && inside(burst, self.burst(m))
    }

    fn required_overlap(&self, m: usize) -> f64 {
        self.window_len(m) as f64 - self.guard(m) as f64 / math::log2(self.messages as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{energy, ids_channel, GaussianNoise, StateDistribution};
    use crate::codec::{Decoded, Failure};
    use crate::StreamId;

    fn figure_example() -> CompoundSchemeParams {
        CompoundSchemeParams::derive(16, 0.25, 0.0, 0.5, 2.0, 0.1, 1.0).unwrap()
    }

    fn narrow() -> CompoundSchemeParams {
        CompoundSchemeParams::derive(16, 0.25, 0.1, 1.0, 1.2, 0.1, 1.0).unwrap()
    }

    #[test]
    fn recursion_example() {
        let p = figure_example();
        assert_eq!(p.burst(1), 4);
        assert_eq!(p.guard(1), 0);
        assert_eq!(p.guard(2), 16);
        assert_eq!(p.burst(2), 24);
        assert_eq!(p.guard(3), 160);
        assert_eq!(p.mu1 * p.guard(2) as f64, p.mu2 * p.burst(1) as f64);
        assert_eq!(p.window_len(1), 2);
        assert_eq!(p.window_len(2), 12);
        assert_eq!(p.region(1), WindowStarts::singleton(1));
        assert_eq!(p.region(2).iter().collect::<Vec<_>>(), [12, 16, 20, 24, 28, 32]);
        assert!(p.validity.all());
    }

    #[test]
    fn sequences_grow() {
        let p = CompoundSchemeParams::derive(64, 0.25, 0.1, 0.8, 1.1, 0.16, 1.0).unwrap();
        assert_eq!((p.burst(1), p.guard(2), p.burst(2)), (6, 11, 5));
        assert!(p.guards.windows(2).skip(1).all(|w| w[0] < w[1]));
        assert!(p.bursts.iter().all(|&b| b >= 1));
        assert!(p.validity.all());
        for m in 2..=64 {
            let r = p.region(m);
            assert!(r.len() as f64 <= p.region_size_bound(m));
            assert!(r.iter().all(|s| s % p.spacing(m) == 0));
        }
        for m in 1..64 {
            assert!(p.region(m).last().unwrap() < p.region(m + 1).first().unwrap());
        }
    }

    #[test]
    fn energy_and_rate() {
        let p = figure_example();
        for m in 1..=16 {
            assert!((p.codeword_energy(m) - p.energy()).abs() < 1e-12 * p.energy());
        }
        assert!((p.rate() - p.rate_identity()).abs() < 1e-12);
        let ratio = p.amplitude(1) / p.amplitude(2);
        assert!((ratio - (24.0f64 / 4.0).sqrt()).abs() < 1e-12);
        assert!(p.encode(1).is_err(), "block of about 1e15 samples");

        let p = narrow();
        let x1 = p.encode(1).unwrap();
        let x2 = p.encode(2).unwrap();
        assert_eq!(x1.len() as u128, p.block_len());
        assert!(x1[..4].iter().all(|&v| v > 0.0) && x1[4] == 0.0);
        assert!((energy(&x1) - energy(&x2)).abs() < 1e-9);
    }

    #[test]
    fn invalid_configs() {
        // zero-width uncertainty interval with no slack: B_m = 0
        assert!(matches!(
            CompoundSchemeParams::derive(16, 0.25, 0.0, 1.0, 1.0, 0.1, 1.0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(CompoundSchemeParams::derive(16, 0.25, 0.5, 0.5, 1.0, 0.1, 1.0).is_err());
        assert!(CompoundSchemeParams::derive(16, 0.25, 0.1, 1.0, 0.9, 0.1, 1.0).is_err());
        assert!(CompoundSchemeParams::derive(2, 0.25, 0.1, 1.0, 1.2, 0.1, 1.0).is_err());
    }

    fn round_trips(p: &CompoundSchemeParams, idc: &StateDistribution, seed: u64) {
        let noise = GaussianNoise::new(1e-6).unwrap();
        let base = StreamId::new(seed);
        for m in 1..=p.messages {
            let x = p.encode(m).unwrap();
            let stream = base.child(m as u64);
            let y = ids_channel(&x, idc, &noise, stream.child(0), true).unwrap();
            assert_eq!(p.decode(&y, stream.child(1)), Decoded::Message(m), "mu={} m={m}", idc.mu());
            let a = p.alignment(m, y.idc_trace.as_ref().unwrap()).unwrap();
            assert!(a.idc_typical && a.properties_hold());
        }
    }

    // Designed for unit noise and sent over an almost clean channel. Small M
    // loses signal to flooring, so delta is generous.

    #[test]
    fn round_trip_degenerate_interval() {
        let p = CompoundSchemeParams::derive(8, 0.25, 0.3, 1.0, 1.0, 0.0, 1.0).unwrap();
        round_trips(&p, &StateDistribution::deterministic(1), 3);
    }

    #[test]
    fn round_trip_at_both_ends() {
        let p = CompoundSchemeParams::derive(8, 0.25, 0.2, 1.0, 2.0, 0.0, 1.0).unwrap();
        round_trips(&p, &StateDistribution::deterministic(1), 4);
        round_trips(&p, &StateDistribution::deterministic(2), 5);
    }

    #[test]
    fn double_fire_is_a_failure() {
        let p = narrow();
        let mut y = p.encode(2).unwrap();
        for (a, b) in y.iter_mut().zip(p.encode(4).unwrap()) {
            *a += 1e3 * b;
        }
        for v in y.iter_mut() {
            *v *= 1e3;
        }
        let decoded = p.decode(&crate::channel::ChannelOutput::new(y), StreamId::new(2));
        assert_eq!(decoded, Decoded::Failure(Failure::Ambiguous { first: 2, second: 4 }));
    }
}
