//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts an integer into the working scalar.
#[inline]
pub fn int<T: Scalar>(x: i64) -> T {
    T::from_i64(x).expect("integer representable in scalar type")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `|x|^p` with the common exponents special-cased.
#[inline]
pub fn abs_pow<T: Scalar>(x: T, p: T) -> T {
    let a = x.abs();
    if p == lit(2.0) {
        a * a
    } else if p == T::one() {
        a
    } else {
        a.powf(p)
    }
}

/// `|v|^p` for the Euclidean norm of `v`.
#[inline]
pub fn norm_pow<T: Scalar>(v: &[T], p: T) -> T {
    let sq = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
    if p == lit(2.0) {
        sq
    } else {
        sq.sqrt().powf(p)
    }
}

#[inline]
pub fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

const LEAF: usize = 8;

/// Pairwise summation with a tree shape fixed by the slice length alone.
///
/// The result only depends on the order and values of `xs`, never on how the
/// inputs were produced, so serial and parallel producers agree bitwise.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn abs_pow_special_cases() {
        assert_eq!(abs_pow(-3.0_f64, 2.0), 9.0);
        assert_eq!(abs_pow(-3.0_f64, 1.0), 3.0);
        assert!((abs_pow(2.0_f64, 3.0) - 8.0).abs() < 1e-12);
        assert!((norm_pow(&[3.0_f64, 4.0], 1.0) - 5.0).abs() < 1e-15);
    }
}
