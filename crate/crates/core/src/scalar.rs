//! Scalar abstraction shared by the bound calculus and the LP solver.
//!
//! Every formula in [`crate::bounds`] and the dense simplex in
//! [`crate::frlp`] is written once against [`Scalar`]. Floating point types
//! give fast production paths; [`num_rational::BigRational`] gives exact
//! answers for small instances, which the tests use to rule out false
//! failures near ties.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// An ordered field element usable by the bound formulas and the simplex.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute slack for "equal within rounding" comparisons. Zero for exact types.
    fn slack() -> Self;

    /// Exact `num / den` when the type can represent it.
    fn ratio(num: i64, den: i64) -> Self;

    /// Converts an `f64`; exact types take its binary value verbatim.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("finite value")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn slack() -> Self {
        1e-12
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for f32 {
    fn slack() -> Self {
        1e-5
    }

    fn ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
}

impl Scalar for BigRational {
    fn slack() -> Self {
        BigRational::zero()
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// `base^exp` by repeated squaring.
pub fn powi<S: Scalar>(base: &S, exp: usize) -> S {
    num_traits::pow(base.clone(), exp)
}

/// `C(n, k)` built by the multiplicative formula, so it is exact for exact types.
pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = S::one();
    for i in 0..k {
        acc = acc * S::from_usize(n - i).unwrap() / S::from_usize(i + 1).unwrap();
    }
    acc
}

/// `a <= b` up to the scalar's slack.
pub fn le_slack<S: Scalar>(a: &S, b: &S) -> bool {
    *a <= b.clone() + S::slack()
}
