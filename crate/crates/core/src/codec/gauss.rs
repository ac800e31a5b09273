//! Pulse-position scheme for the Gaussian channel with synchronization
//! errors.
//!
//! Same slot structure as the DMC scheme, but the burst amplitude grows like
//! `sqrt(ln M)` and the burst length like `sqrt(M)`, and the receiver uses a
//! correlator with a fixed threshold `sqrt((2 + delta) ln M)`. Only window
//! starts that are multiples of `floor(M / log2 M)` are tested.

use super::{check_message, check_unit_interval, GaussianPulseCode, PulseLayout, Validity, WindowStarts};
use crate::channel::{GaussianNoise, StateDistribution};
use crate::math::{self, ceil_snapped, floor_snapped, le_approx, LN_2};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GaussSchemeParams {
    pub messages: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub eta2: f64,
    /// Slot length `N`.
    pub guard: u128,
    /// Burst length `B`.
    pub burst: u128,
    pub beta: f64,
    pub nu: f64,
    /// Window-start spacing `floor(M / log2 M)`.
    pub spacing: u128,
    pub window_len: u128,
    /// Burst amplitude, already scaled by `eta`.
    pub x_star: f64,
    pub threshold: f64,
    pub validity: Validity,
}

impl GaussSchemeParams {
    pub fn derive(
        messages: usize,
        epsilon: f64,
        delta: f64,
        idc: &StateDistribution,
        noise: &GaussianNoise,
    ) -> Result<Self> {
        Self::derive_from_moments(messages, epsilon, delta, idc.mu(), idc.sigma2(), noise.eta2())
    }

    pub fn derive_from_moments(
        messages: usize,
        epsilon: f64,
        delta: f64,
        mu: f64,
        sigma2: f64,
        eta2: f64,
    ) -> Result<Self> {
        if messages < 4 {
            return Err(Error::TooFewMessages { messages, reason: "need log2 M > 1" });
        }
        check_unit_interval("epsilon", epsilon)?;
        check_unit_interval("delta", delta)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::OutOfRange { what: "mu", value: mu });
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::OutOfRange { what: "sigma2", value: sigma2 });
        }
        if !(eta2 > 0.0 && eta2.is_finite()) {
            return Err(Error::OutOfRange { what: "noise variance", value: eta2 });
        }
        let m = messages as f64;
        let log_m = math::log2(m);
        let spacing = math::floor(m / log_m);
        if spacing < 1.0 {
            return Err(Error::TooFewMessages { messages, reason: "window spacing floor(M / log2 M) is below one" });
        }
        let guard = ceil_snapped(36.0 * m * sigma2 / (mu * mu * epsilon));
        let burst = floor_snapped(math::sqrt(m * guard * sigma2 / (mu * mu)));
        if burst < 1.0 {
            return Err(Error::TooFewMessages { messages, reason: "burst length B is below one" });
        }
        if burst > guard {
            return Err(Error::InvalidConfig("burst length B exceeds the slot length N"));
        }
        let beta = math::sqrt(4.0 * burst * sigma2 / epsilon);
        let nu = math::sqrt(4.0 * m * guard * sigma2 / epsilon);
        let window = floor_snapped(burst * mu - beta);
        if window < 1.0 {
            return Err(Error::TooFewMessages { messages, reason: "window length floor(B mu - beta) is below one" });
        }
        let ln_m = math::ln(m);
        let eta = math::sqrt(eta2);
        let slot = guard * mu;
        let params = GaussSchemeParams {
            messages,
            epsilon,
            delta,
            mu,
            sigma2,
            eta2,
            guard: guard as u128,
            burst: burst as u128,
            beta,
            nu,
            spacing: spacing as u128,
            window_len: window as u128,
            x_star: (1.0 + delta) * eta * math::sqrt((2.0 + delta) * ln_m / (burst * mu)),
            threshold: math::sqrt((2.0 + delta) * ln_m),
            validity: Validity {
                regions_disjoint: le_approx(3.0 * nu, slot),
                clear_of_earlier_regions: le_approx(2.0 * nu + burst * mu, slot),
                clear_of_later_regions: le_approx(2.0 * nu + burst * mu + beta, slot),
                burst_fits_slot: true,
            },
        };
        if let Some(m) = (2..=messages).find(|&m| params.region(m).is_empty()) {
            return Err(Error::EmptyRegion { message: m });
        }
        Ok(params)
    }

    /// Energy `B x*^2` of every codeword.
    pub fn energy(&self) -> f64 {
        self.burst as f64 * self.x_star * self.x_star
    }

    /// `log2(M)` per unit energy.
    pub fn rate(&self) -> f64 {
        math::log2(self.messages as f64) / self.energy()
    }

    /// Closed form of [`rate`](Self::rate):
    /// `mu / ((1 + delta)^2 (2 + delta) eta^2 ln 2)`.
    pub fn rate_identity(&self) -> f64 {
        let d = self.delta;
        self.mu / ((1.0 + d) * (1.0 + d) * (2.0 + d) * self.eta2 * LN_2)
    }

    /// Correlator statistic of one window.
    pub fn correlate(&self, window: &[f64]) -> Result<f64> {
        if window.len() as u128 != self.window_len {
            return Err(Error::LengthMismatch { expected: self.window_len as usize, actual: window.len() });
        }
        Ok(self.statistic(window.iter().sum(), self.window_len))
    }

    /// Upper bound `2 nu / (spacing - 1) + 1` on `|D_m|`.
    pub fn region_size_bound(&self) -> f64 {
        2.0 * self.nu / (self.spacing as f64 - 1.0) + 1.0
    }

    /// Position of the first burst symbol of message `m` (1-based).
    pub fn burst_start(&self, m: usize) -> Result<u128> {
        check_message(m, self.messages)?;
        Ok(self.burst_offset(m) + 1)
    }
}

impl PulseLayout for GaussSchemeParams {
    fn messages(&self) -> usize {
        self.messages
    }

    fn region(&self, m: usize) -> WindowStarts {
        if m == 1 {
            return WindowStarts::singleton(1);
        }
        let center = (m - 1) as f64 * self.guard as f64 * self.mu + 1.0;
        WindowStarts::centered(center, self.nu, self.spacing)
    }

    fn window_len(&self, _m: usize) -> u128 {
        self.window_len
    }
}

impl GaussianPulseCode for GaussSchemeParams {
    fn block_len(&self) -> u128 {
        self.messages as u128 * self.guard
    }

    fn burst_offset(&self, m: usize) -> u128 {
        (m as u128 - 1) * self.guard
    }

    fn burst_len(&self, _m: usize) -> u128 {
        self.burst
    }

    fn amplitude(&self, _m: usize) -> f64 {
        self.x_star
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn eta2(&self) -> f64 {
        self.eta2
    }

    fn idc_typical(&self, m: usize, before: u128, burst: u128) -> bool {
        let expected = self.burst_offset(m) as f64 * self.mu;
        (before as f64 - expected).abs() < self.nu && (burst as f64 - self.burst as f64 * self.mu).abs() < self.beta
    }

    fn required_overlap(&self, _m: usize) -> f64 {
        let m = self.messages as f64;
        self.window_len as f64 - m / math::log2(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{energy, ids_channel, ChannelOutput};
    use crate::codec::{Decoded, Failure};
    use crate::math::q_function;
    use crate::StreamId;
    use alloc::vec;
    use alloc::vec::Vec;

    fn acceptance_params() -> GaussSchemeParams {
        let idc = StateDistribution::deletion(0.1).unwrap();
        GaussSchemeParams::derive(256, 0.2, 0.5, &idc, &GaussianNoise::new(1.0).unwrap()).unwrap()
    }

    #[test]
    fn derived_constants() {
        let p = acceptance_params();
        assert_eq!(p.guard, 5120);
        assert_eq!(p.burst, 381);
        assert_eq!(p.spacing, 32);
        assert_eq!(p.window_len, 316);
        assert!((p.nu - 1536.0).abs() < 1e-9);
        assert!((p.beta - 685.8f64.sqrt()).abs() < 1e-12);
        assert!((p.threshold - 3.723_297).abs() < 1e-6);
        assert!(p.validity.all());
    }

    #[test]
    fn energy_and_rate_identities() {
        let p = acceptance_params();
        let expected = 1.5f64.powi(2) * 2.5 * 256f64.ln() / 0.9;
        assert!((p.energy() - expected).abs() < 1e-9 * expected);
        assert!((p.rate() - p.rate_identity()).abs() < 1e-12);
        let scaled = GaussSchemeParams::derive_from_moments(256, 0.2, 0.5, 0.9, 0.09, 2.0).unwrap();
        assert!((scaled.energy() - 2.0 * expected).abs() < 1e-9 * expected);
        for m in [1, 7, 256] {
            assert_eq!(p.codeword_energy(m), p.energy());
        }
    }

    #[test]
    fn codewords() {
        let p = acceptance_params();
        let x = p.encode(1).unwrap();
        assert_eq!(x.len(), 256 * 5120);
        assert!(x[..381].iter().all(|&v| v == p.x_star));
        assert_eq!(x[381], 0.0);
        let x = p.encode(200).unwrap();
        assert!((energy(&x) - p.energy()).abs() < 1e-9);
        assert_eq!(p.burst_start(200).unwrap(), 199 * 5120 + 1);
        assert!(p.encode(0).is_err());
        assert!(p.encode(257).is_err());
    }

    #[test]
    fn regions() {
        let p = acceptance_params();
        assert_eq!(p.region(1), WindowStarts::singleton(1));
        for m in [2, 3, 128, 256] {
            let r = p.region(m);
            assert!(r.iter().all(|s| s % 32 == 0));
            assert!(r.len() as f64 <= p.region_size_bound());
            let center = (m - 1) as f64 * 5120.0 * 0.9 + 1.0;
            assert!(r.iter().all(|s| (s as f64 - center).abs() < p.nu));
        }
        for m in 1..256 {
            assert!(p.region(m).last().unwrap() < p.region(m + 1).first().unwrap());
        }
    }

    #[test]
    fn chernoff_bound_on_threshold() {
        for m in [4usize, 16, 64, 256, 1024, 1 << 16] {
            for delta in [0.1, 0.5, 0.9] {
                let mf = m as f64;
                let q = q_function(math::sqrt((2.0 + delta) * mf.ln()));
                assert!(q <= mf.powf(-(1.0 + delta / 2.0)), "M={m} delta={delta}");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            GaussSchemeParams::derive_from_moments(2, 0.2, 0.5, 1.0, 0.1, 1.0),
            Err(Error::TooFewMessages { .. })
        ));
        assert!(matches!(
            GaussSchemeParams::derive_from_moments(256, 0.2, 0.5, 1.0, 0.0, 1.0),
            Err(Error::TooFewMessages { .. })
        ));
        assert!(GaussSchemeParams::derive_from_moments(256, 0.2, 0.5, 1.0, 0.1, 0.0).is_err());
        assert!(GaussSchemeParams::derive_from_moments(256, 0.0, 0.5, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn correlator() {
        let p = acceptance_params();
        let w = p.window_len as usize;
        assert_eq!(p.correlate(&vec![0.0; w]).unwrap(), 0.0);
        let full = p.correlate(&vec![p.x_star; w]).unwrap();
        assert!((full - p.x_star * (w as f64).sqrt()).abs() < 1e-9);
        assert!(p.correlate(&[0.0; 3]).is_err());
        let noise = GaussianNoise::new(1.0).unwrap();
        let mut rng = StreamId::new(11).rng();
        let stats: Vec<f64> = (0..20_000)
            .map(|_| {
                let window: Vec<f64> = (0..w).map(|_| noise.sample(&mut rng)).collect();
                p.correlate(&window).unwrap()
            })
            .collect();
        let mean = stats.iter().sum::<f64>() / stats.len() as f64;
        let var = stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (stats.len() - 1) as f64;
        assert!(mean.abs() < 0.03);
        assert!((0.96..1.04).contains(&var));
    }

    #[test]
    fn near_noiseless_round_trip() {
        // A point mass at one has no jitter, so borrow the moments of a
        // slightly jittery IDC for the design and send over the clean one.
        // The amplitude scales with eta, so the design keeps unit noise.
        let p = GaussSchemeParams::derive_from_moments(64, 0.2, 0.5, 1.0, 0.05, 1.0).unwrap();
        let idc = StateDistribution::deterministic(1);
        let noise = GaussianNoise::new(1e-6).unwrap();
        let base = StreamId::new(5);
        for m in 1..=64 {
            let x = p.encode(m).unwrap();
            let y = ids_channel(&x, &idc, &noise, base.child(m as u64), true).unwrap();
            assert_eq!(p.decode(&y, base.child(1000 + m as u64)), Decoded::Message(m), "m={m}");
            let a = p.alignment(m, y.idc_trace.as_ref().unwrap()).unwrap();
            assert!(a.idc_typical && a.properties_hold());
        }
    }

    #[test]
    fn double_fire_is_a_failure() {
        let p = GaussSchemeParams::derive_from_moments(64, 0.2, 0.5, 1.0, 0.05, 1e-6).unwrap();
        let mut y = p.encode(2).unwrap();
        let third = p.encode(3).unwrap();
        for (a, b) in y.iter_mut().zip(&third) {
            *a += b;
        }
        let decoded = p.decode(&ChannelOutput::new(y), StreamId::new(1));
        assert_eq!(decoded, Decoded::Failure(Failure::Ambiguous { first: 2, second: 3 }));
    }
}
