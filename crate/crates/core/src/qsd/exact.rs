//! Fixed-point accumulation so that ensemble sums are exactly associative.

use serde::{Deserialize, Serialize};

const FRACTION_BITS: i32 = 80;

/// Sum of `f64` values stored as an `i128` multiple of `2^-80`.
///
/// Each addend is rounded once on entry (absolute error below `1e-24`); after
/// that, addition is integer addition, so the total is independent of the order
/// and grouping in which trajectories are absorbed. Addends must satisfy
/// `|x| < 2^40`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExactSum(#[serde(with = "i128_hex")] i128);

impl ExactSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        debug_assert!(x.is_finite() && x.abs() < 2f64.powi(40));
        self.0 += (x * 2f64.powi(FRACTION_BITS)).round() as i128;
    }

    #[inline]
    pub fn merge(&mut self, other: ExactSum) {
        self.0 += other.0;
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 * 2f64.powi(-FRACTION_BITS)
    }

    pub fn difference(self, other: ExactSum) -> ExactSum {
        ExactSum(self.0 - other.0)
    }
}

mod i128_hex {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
        let s = String::deserialize(d)?;
        // `{:x}` on i128 prints the two's complement bit pattern
        u128::from_str_radix(&s, 16).map(|u| u as i128).map_err(D::Error::custom)
    }
}
