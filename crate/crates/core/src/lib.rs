//! Pulse-position coding over channels with synchronization errors.
//!
//! The crate models an insertion/deletion channel (IDC) feeding either a
//! discrete memoryless channel or additive Gaussian noise, computes
//! capacity-per-unit-cost quantities for these channels, and implements three
//! pulse-position-modulation schemes whose receivers locate the pulse with a
//! bank of sliding-window hypothesis tests:
//!
//! * [`codec::dmc`] for a general DMC with a free input symbol,
//! * [`codec::gauss`] for Gaussian noise with known drift `mu`,
//! * [`codec::compound`] for Gaussian noise when `mu` is only known to lie in
//!   an interval.
//!
//! The crate is `no_std` with `alloc`. All randomness is drawn from explicit
//! [`StreamId`]s, so every operation is a pure function of its arguments.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod codec;
pub mod compact;
mod error;
pub mod info;
pub mod math;
mod rng;

pub use channel::{
    ChannelOutput, Dmc, GaussianNoise, StateDistribution, StateSequence, Symbol,
};
pub use codec::{Decoded, GaussianPulseCode, Hypothesis, PulseLayout, WindowStarts};
pub use error::{Error, Result};
pub use rng::{StreamId, StreamRng};
