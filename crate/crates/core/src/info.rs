//! Capacity per unit cost and related bounds.
//!
//! All divergences and capacities are in bits. `f64::INFINITY` is a regular
//! value here: a noiseless channel has infinite capacity per unit cost.

use alloc::vec::Vec;

use crate::channel::{Dmc, Symbol};
use crate::math::{self, LN_2};
use crate::{Error, Result};

/// Kullback-Leibler divergence `D(p || q)` in bits.
///
/// Uses `0 log(0/q) = 0` and `p log(p/0) = +inf` for `p > 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { expected: p.len(), actual: q.len() });
    }
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        d += pi * math::log2(pi / qi);
    }
    // Rounding can leave a tiny negative value for p == q.
    Ok(d.max(0.0))
}

/// `sup_{x != 0} D(W(.|x) || W(.|0)) / c(x)` with its maximizer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CapacityReport {
    pub value: f64,
    pub maximizing_symbol: Symbol,
    /// One entry per nonzero input symbol that has a defined ratio.
    pub per_symbol_ratios: Vec<(Symbol, f64)>,
}

/// Capacity per unit cost of a DMC with a free symbol.
///
/// Symbols with zero cost and zero divergence are skipped; a zero-cost symbol
/// with positive divergence has ratio `+inf`. Ties go to the smallest index.
pub fn capacity_per_unit_cost(channel: &Dmc) -> Result<CapacityReport> {
    let zero_row = channel.row(channel.zero());
    let mut ratios = Vec::with_capacity(channel.inputs());
    for x in (0..channel.inputs()).filter(|&x| x != channel.zero()) {
        let d = kl_divergence(channel.row(x), zero_row)?;
        let c = channel.cost(x);
        let ratio = if c > 0.0 {
            d / c
        } else if d > 0.0 {
            f64::INFINITY
        } else {
            continue;
        };
        ratios.push((x, ratio));
    }
    if !channel.costs().iter().any(|&c| c > 0.0) {
        return Err(Error::UndefinedRatio);
    }
    let mut best: Option<(Symbol, f64)> = None;
    for &(x, r) in &ratios {
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((x, r));
        }
    }
    let (maximizing_symbol, value) = best.ok_or(Error::UndefinedRatio)?;
    Ok(CapacityReport { value, maximizing_symbol, per_symbol_ratios: ratios })
}

/// Lower and upper bound on the capacity per unit cost of an IDC with mean
/// `mu` followed by a DMC: `(mu / 2) C(W) <= C <= mu C(W)`.
///
/// The bounds do not depend on the variance of the IDC.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    pub dmc: CapacityReport,
}

pub fn ids_capacity_bounds(mu: f64, channel: &Dmc) -> Result<BoundsReport> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::OutOfRange { what: "mu", value: mu });
    }
    let dmc = capacity_per_unit_cost(channel)?;
    let upper = mu * dmc.value;
    Ok(BoundsReport { lower: upper / 2.0, upper, mu, dmc })
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value: v })
    }
}

/// Capacity per unit energy `mu / (2 eta^2 ln 2)` of the Gaussian channel
/// with synchronization errors.
pub fn gaussian_capacity_per_unit_energy(mu: f64, eta2: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    check_positive("noise variance", eta2)?;
    Ok(mu / (2.0 * eta2 * LN_2))
}

/// Compound capacity per unit energy when `mu` is only known to lie in
/// `[mu1, mu2]`: the worst member of the family, `mu1 / (2 eta^2 ln 2)`.
pub fn compound_gaussian_capacity(mu1: f64, eta2: f64) -> Result<f64> {
    gaussian_capacity_per_unit_energy(mu1, eta2)
}

/// Cost function `c'(x) = c(x) / mu` under which a DMC simulates the IDC
/// followed by that DMC with the same expected cost.
pub fn modified_cost(channel: &Dmc, mu: f64) -> Result<Vec<f64>> {
    check_positive("mu", mu)?;
    Ok(channel.costs().iter().map(|&c| c / mu).collect())
}
