use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type the iterations and integrators are generic over.
///
/// Implemented for `f64` and for [`DoubleDouble`] (about 31 significant
/// digits). Algorithm coefficients are always `f64`; only states, gradients
/// and cost values use `Self`.
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn abs(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }

    /// Multiplication by an `f64` coefficient.
    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Double-double floating point number.
pub type DoubleDouble = qd::Quad;

impl Real for DoubleDouble {
    #[inline]
    fn from_f64(v: f64) -> Self {
        qd::Quad::from_f64(v)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
    #[inline]
    fn sqrt(self) -> Self {
        qd::Quad::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Self {
        qd::Quad::ln(self)
    }
    #[inline]
    fn exp(self) -> Self {
        qd::Quad::exp(self)
    }
    #[inline]
    fn abs(self) -> Self {
        qd::Quad::abs(self)
    }
    fn is_finite(self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_log_is_accurate() {
        let ln2 = DoubleDouble::from_f64(2.0).ln();
        let err = ln2 - DoubleDouble::LN_2;
        assert!(err.to_f64().abs() < 1e-30);
        let x = DoubleDouble::from_f64(7.3);
        assert!((x.ln().exp() - x).to_f64().abs() < 1e-29);
    }

    #[test]
    fn f64_roundtrip() {
        assert_eq!(<f64 as Real>::from_f64(1.5).to_f64(), 1.5);
        assert_eq!(Real::sqrt(4.0_f64), 2.0);
    }
}
