// SPDX-License-Identifier: Apache-2.0

//! Numeric scalar used for ratios in analysis reports.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A number type able to hold a count ratio: `f32`, `f64`, or an exact
/// rational such as `Ratio<u64>`.
pub trait Scalar: Num + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug {
    /// `numerator / denominator`, or zero when the denominator is zero.
    fn ratio(numerator: u64, denominator: u64) -> Self {
        if denominator == 0 {
            return Self::zero();
        }
        let n = Self::from_u64(numerator).expect("count representable in scalar");
        let d = Self::from_u64(denominator).expect("count representable in scalar");
        n / d
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Ratio<u64> {}
impl Scalar for Ratio<i64> {}
