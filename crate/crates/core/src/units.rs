//! Information units. Everything entropic in this crate is stored in bits;
//! formulas written with `2^(.)` take bits and formulas with `e^(.)` take
//! nats. Conversions go through here and nowhere else.

use std::f64::consts::LN_2;

#[inline]
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * LN_2
}

#[inline]
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

/// `p * log2(p / q)` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn xlog2_ratio(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / q).log2()
    }
}
