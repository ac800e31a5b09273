//! Pulse-position schemes and the machinery they share.
//!
//! Every scheme sends one burst of nonzero symbols whose position encodes the
//! message. The receiver slides a window over the channel output, runs a
//! binary hypothesis test at every window start of every decision region
//! `D_m`, and declares `m` iff some test in `D_m` fires and no test in any
//! other region does.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{ChannelOutput, GaussianNoise, StateSequence};
use crate::math;
use crate::StreamId;

pub mod compound;
pub mod dmc;
pub mod gauss;

/// Outcome of one window test: `H0` means "only free symbols", `H1` means
/// "the pulse".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    /// Ties go to `H1`.
    #[inline]
    pub fn from_statistic(statistic: f64, threshold: f64) -> Self {
        if statistic >= threshold {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

/// Why the receiver declared an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Failure {
    /// No region fired.
    NoDetection,
    /// At least two regions fired; the first two are reported.
    Ambiguous { first: usize, second: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Decoded {
    Message(usize),
    Failure(Failure),
}

impl Decoded {
    pub fn message(self) -> Option<usize> {
        match self {
            Decoded::Message(m) => Some(m),
            Decoded::Failure(_) => None,
        }
    }
}

/// Window starts of a decision region: an arithmetic progression of
/// 1-based output positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WindowStarts {
    first: u128,
    step: u128,
    count: u128,
}

impl WindowStarts {
    pub const EMPTY: WindowStarts = WindowStarts { first: 1, step: 1, count: 0 };

    pub fn singleton(start: u128) -> Self {
        WindowStarts { first: start, step: 1, count: 1 }
    }

    /// Multiples of `step` (all integers when `step == 1`) that are at least 1
    /// and lie strictly inside `(lo, hi)`.
    pub fn open_interval(lo: f64, hi: f64, step: u128) -> Self {
        debug_assert!(step >= 1);
        let lo_int = if lo < 0.0 { 1 } else { (math::floor(lo) as u128 + 1).max(1) };
        if hi <= 1.0 {
            return Self::EMPTY;
        }
        let hi_int = math::ceil(hi) as u128 - 1;
        if hi_int < lo_int {
            return Self::EMPTY;
        }
        let k_lo = lo_int.div_ceil(step);
        let k_hi = hi_int / step;
        if k_hi < k_lo {
            return Self::EMPTY;
        }
        WindowStarts { first: k_lo * step, step, count: k_hi - k_lo + 1 }
    }

    /// Points within distance `radius` of `center`, restricted to multiples
    /// of `step`. A zero radius yields the closed singleton `{center}` when
    /// `center` is such a point.
    pub fn centered(center: f64, radius: f64, step: u128) -> Self {
        if radius > 0.0 {
            return Self::open_interval(center - radius, center + radius, step);
        }
        let c = math::floor_snapped(center);
        if c >= 1.0 && math::ceil_snapped(center) == c && (c as u128) % step == 0 {
            Self::singleton(c as u128)
        } else {
            Self::EMPTY
        }
    }

    pub fn len(&self) -> u128 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn step(&self) -> u128 {
        self.step
    }

    pub fn first(&self) -> Option<u128> {
        (self.count > 0).then_some(self.first)
    }

    pub fn last(&self) -> Option<u128> {
        (self.count > 0).then(|| self.first + (self.count - 1) * self.step)
    }

    pub fn contains(&self, x: u128) -> bool {
        self.count > 0
            && x >= self.first
            && (x - self.first) % self.step == 0
            && (x - self.first) / self.step < self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = u128> + '_ {
        (0..self.count).map(move |k| self.first + k * self.step)
    }

    /// Largest start `<= x`.
    pub fn floor_le(&self, x: i128) -> Option<u128> {
        let first = self.first as i128;
        if self.count == 0 || x < first {
            return None;
        }
        let k = ((x - first) as u128 / self.step).min(self.count - 1);
        Some(self.first + k * self.step)
    }

    /// Smallest start `>= x`.
    pub fn ceil_ge(&self, x: i128) -> Option<u128> {
        if self.count == 0 {
            return None;
        }
        if x <= self.first as i128 {
            return Some(self.first);
        }
        let k = (x as u128 - self.first).div_ceil(self.step);
        (k < self.count).then(|| self.first + k * self.step)
    }

    /// Whether any start lies in the closed range `[lo, hi]`.
    pub fn any_in(&self, lo: i128, hi: i128) -> bool {
        self.ceil_ge(lo).is_some_and(|s| s as i128 <= hi)
    }
}

/// Geometry of a pulse-position code as seen by the receiver.
pub trait PulseLayout {
    /// Number of messages `M`.
    fn messages(&self) -> usize;

    /// Decision region `D_m`, `1 <= m <= M`.
    fn region(&self, m: usize) -> WindowStarts;

    /// Length of the windows tested in `D_m`.
    fn window_len(&self, m: usize) -> u128;

    /// One past the last output position any window reads.
    fn observation_end(&self) -> u128 {
        (1..=self.messages())
            .filter_map(|m| self.region(m).last().map(|s| s + self.window_len(m)))
            .max()
            .unwrap_or(1)
    }
}

/// Applies the unique-region rule.
///
/// `test(m, start, len)` evaluates the window of length `len` starting at
/// output position `start` (1-based) that belongs to `D_m`. Regions are
/// scanned in increasing order and a region stops being scanned at its first
/// `H1`.
pub fn decide<L, F>(layout: &L, mut test: F) -> Decoded
where
    L: PulseLayout + ?Sized,
    F: FnMut(usize, u128, u128) -> Hypothesis,
{
    let mut fired: Option<usize> = None;
    for m in 1..=layout.messages() {
        let len = layout.window_len(m);
        let hit = layout.region(m).iter().any(|start| test(m, start, len) == Hypothesis::H1);
        if hit {
            if let Some(first) = fired {
                return Decoded::Failure(Failure::Ambiguous { first, second: m });
            }
            fired = Some(m);
        }
    }
    match fired {
        Some(m) => Decoded::Message(m),
        None => Decoded::Failure(Failure::NoDetection),
    }
}

/// Where the burst landed at the IDC output: positions
/// `start ..= start + len - 1` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BurstPlacement {
    pub start: u128,
    pub len: u128,
}

impl BurstPlacement {
    /// Number of burst symbols inside the window `[start, start + len - 1]`.
    pub fn overlap(&self, start: u128, len: u128) -> u128 {
        if self.len == 0 || len == 0 {
            return 0;
        }
        let lo = start.max(self.start);
        let hi = (start + len).min(self.start + self.len);
        hi.saturating_sub(lo)
    }

    /// Whether no window of any region other than `D_m` touches the burst.
    pub fn clear_of_wrong_regions<L: PulseLayout + ?Sized>(&self, layout: &L, m: usize) -> bool {
        if self.len == 0 {
            return true;
        }
        let burst_end = (self.start + self.len - 1) as i128;
        (1..=layout.messages()).filter(|&k| k != m).all(|k| {
            let w = layout.window_len(k) as i128;
            !layout.region(k).any_in(self.start as i128 - w + 1, burst_end)
        })
    }

    /// Largest overlap between the burst and a window of `D_m`.
    pub fn best_overlap<L: PulseLayout + ?Sized>(&self, layout: &L, m: usize) -> u128 {
        let region = layout.region(m);
        let w = layout.window_len(m);
        if self.len == 0 || region.is_empty() {
            return 0;
        }
        // The overlap is a trapezoid in the window start; its plateau is
        // [plateau_lo, plateau_hi] and it is monotone on either side.
        let bs = self.start as i128;
        let be = bs + self.len as i128 - 1;
        let (plateau_lo, plateau_hi) = if self.len >= w {
            (bs, be - w as i128 + 1)
        } else {
            (be - w as i128 + 1, bs)
        };
        [region.floor_le(plateau_hi), region.ceil_ge(plateau_lo)]
            .into_iter()
            .flatten()
            .map(|s| self.overlap(s, w))
            .max()
            .unwrap_or(0)
    }
}

/// IDC behaviour for one transmission, as used by the error analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Alignment {
    /// The prefix and the burst were stretched within the scheme's tolerances
    /// (neither of the IDC error events occurred).
    pub idc_typical: bool,
    /// Every window outside `D_m` sees only free symbols.
    pub wrong_regions_clear: bool,
    /// Some window in `D_m` overlaps the burst by at least the amount the
    /// scheme's analysis guarantees.
    pub pulse_captured: bool,
    pub placement: BurstPlacement,
}

impl Alignment {
    pub fn assess<L: PulseLayout + ?Sized>(
        layout: &L,
        m: usize,
        placement: BurstPlacement,
        idc_typical: bool,
        required_overlap: f64,
    ) -> Self {
        Alignment {
            idc_typical,
            wrong_regions_clear: placement.clear_of_wrong_regions(layout, m),
            pulse_captured: placement.best_overlap(layout, m) as f64 >= required_overlap,
            placement,
        }
    }

    pub fn properties_hold(&self) -> bool {
        self.wrong_regions_clear && self.pulse_captured
    }
}

/// Largest number of samples [`GaussianPulseCode`] will allocate.
pub const MATERIALIZE_LIMIT: u128 = 1 << 30;

/// A pulse-position code for the Gaussian back end: message `m` is
/// `burst_offset(m)` zeros followed by `burst_len(m)` copies of
/// `amplitude(m)`, padded with zeros to `block_len()`.
///
/// The receiver tests `sum(window) / (eta sqrt(len)) >= threshold()`.
pub trait GaussianPulseCode: PulseLayout {
    fn block_len(&self) -> u128;
    fn burst_offset(&self, m: usize) -> u128;
    fn burst_len(&self, m: usize) -> u128;
    fn amplitude(&self, m: usize) -> f64;
    fn threshold(&self) -> f64;
    /// Noise variance `eta^2` the code was designed for.
    fn eta2(&self) -> f64;
    /// Whether `before` output symbols ahead of the burst and a burst
    /// stretched to `burst` symbols are within the scheme's tolerances.
    fn idc_typical(&self, m: usize, before: u128, burst: u128) -> bool;
    /// Overlap with the burst that the analysis guarantees to some window of
    /// `D_m` when the IDC behaves typically.
    fn required_overlap(&self, m: usize) -> f64;

    fn codeword_energy(&self, m: usize) -> f64 {
        let a = self.amplitude(m);
        self.burst_len(m) as f64 * a * a
    }

    /// Normalized window statistic from a window sum.
    fn statistic(&self, sum: f64, len: u128) -> f64 {
        sum / (math::sqrt(self.eta2()) * math::sqrt(len as f64))
    }

    /// Codeword of message `m`.
    fn encode(&self, m: usize) -> crate::Result<Vec<f64>> {
        check_message(m, self.messages())?;
        if self.block_len() > MATERIALIZE_LIMIT {
            return Err(crate::Error::InvalidConfig("block length is too large to materialize"));
        }
        let t = self.block_len() as usize;
        let mut x = vec![0.0; t];
        let start = self.burst_offset(m) as usize;
        x[start..start + self.burst_len(m) as usize].fill(self.amplitude(m));
        Ok(x)
    }

    /// Decodes a received sequence. Windows reaching past its end read fresh
    /// `N(0, eta^2)` samples drawn from `padding`.
    ///
    /// # Panics
    ///
    /// If the observation window exceeds [`MATERIALIZE_LIMIT`] samples, which
    /// only happens for codes whose block cannot be materialized either.
    fn decode(&self, y: &ChannelOutput<f64>, padding: StreamId) -> Decoded {
        let end = self.observation_end();
        assert!(end <= MATERIALIZE_LIMIT, "observation window too large to materialize");
        let end = end as usize;
        let noise = GaussianNoise::new(self.eta2()).expect("eta2 was validated at derivation");
        let mut rng = padding.rng();
        let mut prefix = Vec::with_capacity(end.max(y.len() + 1));
        let mut acc = 0.0;
        prefix.push(acc);
        for i in 0..end.max(y.len() + 1) - 1 {
            acc += match y.symbols.get(i) {
                Some(&v) => v,
                None => noise.sample(&mut rng),
            };
            prefix.push(acc);
        }
        let threshold = self.threshold();
        decide(self, |_, start, len| {
            let s = start as usize;
            let sum = prefix[s + len as usize - 1] - prefix[s - 1];
            Hypothesis::from_statistic(self.statistic(sum, len), threshold)
        })
    }

    /// Alignment for message `m` from the realized prefix and burst lengths
    /// at the IDC output.
    fn alignment_from(&self, m: usize, before: u128, burst: u128) -> Alignment {
        let placement = BurstPlacement { start: before + 1, len: burst };
        Alignment::assess(self, m, placement, self.idc_typical(m, before, burst), self.required_overlap(m))
    }

    /// Alignment for message `m` from the realized IDC states.
    fn alignment(&self, m: usize, states: &StateSequence) -> crate::Result<Alignment> {
        check_message(m, self.messages())?;
        if states.len() as u128 != self.block_len() {
            return Err(crate::Error::LengthMismatch { expected: self.block_len() as usize, actual: states.len() });
        }
        let offset = self.burst_offset(m) as usize;
        let before = states.total_in(0..offset) as u128;
        let burst = states.total_in(offset..offset + self.burst_len(m) as usize) as u128;
        Ok(self.alignment_from(m, before, burst))
    }
}

/// Finite-M sufficiency checks reported by every scheme.
///
/// The schemes' guarantees hold "for M large enough"; these are the
/// inequalities that make the guard spaces large enough at the configured M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Validity {
    /// Decision regions are pairwise disjoint.
    pub regions_disjoint: bool,
    /// A typical burst cannot reach back into an earlier region.
    pub clear_of_earlier_regions: bool,
    /// A typical burst cannot reach into a later region.
    pub clear_of_later_regions: bool,
    /// The burst fits inside its slot.
    pub burst_fits_slot: bool,
}

impl Validity {
    pub fn all(&self) -> bool {
        self.regions_disjoint
            && self.clear_of_earlier_regions
            && self.clear_of_later_regions
            && self.burst_fits_slot
    }
}

pub(crate) fn check_message(m: usize, messages: usize) -> crate::Result<()> {
    if m == 0 || m > messages {
        return Err(crate::Error::MessageOutOfRange { message: m, messages });
    }
    Ok(())
}

pub(crate) fn check_unit_interval(what: &'static str, v: f64) -> crate::Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(crate::Error::OutOfRange { what, value: v })
    }
}
