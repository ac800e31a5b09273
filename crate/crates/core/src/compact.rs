//! Trial simulation for Gaussian pulse codes without materializing the block.
//!
//! The decoder only ever looks at window sums. Given the number of IDC
//! outputs ahead of the burst and the stretched burst length, every window
//! sum is the burst overlap times the amplitude plus a sum of independent
//! noise samples. Cutting the output axis at every window endpoint leaves
//! segments whose noise sums are independent `N(0, len eta^2)`, so one normal
//! draw per segment reproduces the joint law of all window statistics. This
//! makes codes with astronomically long blocks simulable.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::channel::{GaussianNoise, StateDistribution};
use crate::codec::{check_message, decide, Alignment, BurstPlacement, Decoded, GaussianPulseCode, Hypothesis};
use crate::math;
use crate::{Error, Result, StreamId};

/// Largest number of window endpoints one trial may track.
pub const MAX_ENDPOINTS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactTrial {
    pub decoded: Decoded,
    pub alignment: Alignment,
}

/// Window endpoints of a code, shared across trials.
#[derive(Debug, Clone)]
pub struct WindowGrid {
    /// Sorted distinct prefix positions `start - 1` and `start + len - 1`.
    points: Vec<u128>,
}

impl WindowGrid {
    pub fn new<C: GaussianPulseCode + ?Sized>(code: &C) -> Result<Self> {
        let total: u128 = (1..=code.messages()).map(|k| code.region(k).len()).sum();
        if total.saturating_mul(2) + 1 > MAX_ENDPOINTS as u128 {
            return Err(Error::InvalidConfig("too many windows for the compact simulator"));
        }
        let mut points = Vec::with_capacity(2 * total as usize + 1);
        points.push(0);
        for k in 1..=code.messages() {
            let len = code.window_len(k);
            for s in code.region(k).iter() {
                points.push(s - 1);
                points.push(s + len - 1);
            }
        }
        points.sort_unstable();
        points.dedup();
        Ok(WindowGrid { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn index(&self, p: u128) -> usize {
        self.points.binary_search(&p).expect("window endpoint is on the grid")
    }
}

/// Sends message `m` through the IDC `idc` and Gaussian noise `noise`, then
/// decodes. IDC states come from `stream.child(0)` and noise from
/// `stream.child(1)`.
pub fn simulate<C: GaussianPulseCode + ?Sized>(
    code: &C,
    grid: &WindowGrid,
    m: usize,
    idc: &StateDistribution,
    noise: &GaussianNoise,
    stream: StreamId,
) -> Result<CompactTrial> {
    check_message(m, code.messages())?;
    let mut rng = stream.child(0).rng();
    let before = idc.sample_sum(code.burst_offset(m), &mut rng);
    let burst = idc.sample_sum(code.burst_len(m), &mut rng);
    let placement = BurstPlacement { start: before + 1, len: burst };

    let mut rng = stream.child(1).rng();
    let eta = noise.eta();
    let mut prefix = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut last = 0u128;
    for &p in &grid.points {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += z * eta * math::sqrt((p - last) as f64);
        prefix.push(acc);
        last = p;
    }

    let amplitude = code.amplitude(m);
    let threshold = code.threshold();
    let decoded = decide(code, |_, start, len| {
        let noise_sum = prefix[grid.index(start + len - 1)] - prefix[grid.index(start - 1)];
        let sum = amplitude * placement.overlap(start, len) as f64 + noise_sum;
        Hypothesis::from_statistic(code.statistic(sum, len), threshold)
    });
    Ok(CompactTrial { decoded, alignment: code.alignment_from(m, before, burst) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::compound::CompoundSchemeParams;
    use crate::codec::gauss::GaussSchemeParams;
    use crate::codec::PulseLayout;

    #[test]
    fn grid_covers_every_window() {
        let p = GaussSchemeParams::derive_from_moments(64, 0.2, 0.5, 1.0, 0.05, 1.0).unwrap();
        let grid = WindowGrid::new(&p).unwrap();
        for k in 1..=64 {
            for s in p.region(k).iter() {
                grid.index(s - 1);
                grid.index(s + p.window_len - 1);
            }
        }
        assert!(grid.points.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn clean_channel_decodes() {
        let p = GaussSchemeParams::derive_from_moments(64, 0.2, 0.5, 1.0, 0.05, 1.0).unwrap();
        let grid = WindowGrid::new(&p).unwrap();
        let idc = StateDistribution::deterministic(1);
        let noise = GaussianNoise::new(1e-6).unwrap();
        for m in 1..=64 {
            let t = simulate(&p, &grid, m, &idc, &noise, StreamId::new(m as u64)).unwrap();
            assert_eq!(t.decoded, Decoded::Message(m));
            assert_eq!(t.alignment.placement, BurstPlacement { start: (m as u128 - 1) * p.guard + 1, len: p.burst });
        }
    }

    #[test]
    fn huge_compound_block() {
        let p = CompoundSchemeParams::derive(64, 0.25, 0.1, 0.8, 1.1, 0.16, 1.0).unwrap();
        assert!(p.block_len() > 1u128 << 80);
        let grid = WindowGrid::new(&p).unwrap();
        let idc = StateDistribution::deletion(0.05).unwrap();
        let noise = GaussianNoise::new(1.0).unwrap();
        let t = simulate(&p, &grid, 64, &idc, &noise, StreamId::new(3)).unwrap();
        let expected = 0.95 * p.guard(64) as f64;
        assert!((t.alignment.placement.start as f64 - expected).abs() < 1e-6 * expected);
        assert!(t.alignment.idc_typical);
    }

    #[test]
    fn deterministic_in_stream() {
        let p = GaussSchemeParams::derive_from_moments(64, 0.2, 0.5, 0.9, 0.09, 1.0).unwrap();
        let grid = WindowGrid::new(&p).unwrap();
        let idc = StateDistribution::deletion(0.1).unwrap();
        let noise = GaussianNoise::new(1.0).unwrap();
        let a = simulate(&p, &grid, 17, &idc, &noise, StreamId::new(8)).unwrap();
        let b = simulate(&p, &grid, 17, &idc, &noise, StreamId::new(8)).unwrap();
        assert_eq!(a, b);
    }
}
