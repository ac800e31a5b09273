//! Scalar helpers usable without `std`.
//!
//! Logarithms in reports are base 2. `ln` appears only where the schemes'
//! formulas use natural logs (thresholds and burst amplitudes).

pub const LN_2: f64 = core::f64::consts::LN_2;

/// Relative slack used when rounding formula values to integers.
///
/// Closed-form values such as `36 * 256 * 0.09 / (0.81 * 0.2)` are exact integers
/// but land a few ulps away in binary floating point.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

fn snap(x: f64) -> Option<f64> {
    let r = libm::round(x);
    let scale = if x.abs() > 1.0 { x.abs() } else { 1.0 };
    ((x - r).abs() <= SNAP_TOLERANCE * scale).then_some(r)
}

/// `floor(x)`, treating values within [`SNAP_TOLERANCE`] of an integer as that integer.
pub fn floor_snapped(x: f64) -> f64 {
    snap(x).unwrap_or_else(|| floor(x))
}

/// `ceil(x)`, treating values within [`SNAP_TOLERANCE`] of an integer as that integer.
pub fn ceil_snapped(x: f64) -> f64 {
    snap(x).unwrap_or_else(|| ceil(x))
}

/// Gaussian tail probability `Q(x) = P(Z >= x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// `a <= b` up to a relative tolerance of [`SNAP_TOLERANCE`].
pub fn le_approx(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    a <= b + SNAP_TOLERANCE * scale
}
