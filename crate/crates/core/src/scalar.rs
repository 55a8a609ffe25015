//! The field the matrices live over.
//!
//! Three realizations are provided: [`C64`] (complex double precision, the
//! default numeric backend), [`DoubleDouble`] (real, ~32 significant digits,
//! used where f64 cancellation would swamp high-order corrections) and
//! [`crate::expr::Expr`] (real-valued expression graphs, the parametric backend).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub use num_complex::Complex64 as C64;
pub use twofloat::TwoFloat as DoubleDouble;

/// Field element used by every matrix algorithm in the crate.
///
/// `abs`, `re` and `sign` return real values embedded back into `Self`. For
/// real scalars `conj` and `re` are the identity.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn conj(&self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn re(&self) -> Self;
    /// `+1` when the real part is `>= 0`, `-1` otherwise.
    fn sign(&self) -> Self;
    /// Exact (structural) zero test.
    fn is_zero(&self) -> bool;
    /// The value as a complex double, if it is known without evaluation.
    fn value(&self) -> Option<C64>;
    /// Whether two entries agree: numerically within `tol` relative to
    /// `max(1, |a|)`, or structurally for symbolic scalars.
    fn same_entry(&self, other: &Self, tol: f64) -> bool;

    /// `|x|^2` as a real scalar.
    fn norm_sqr(&self) -> Self {
        (self.clone() * self.conj()).re()
    }
}

/// Scalars that always carry a concrete value, so magnitudes can be compared.
pub trait NumericScalar: Scalar + Copy {
    fn modulus(&self) -> f64;
    fn real(&self) -> f64;
    fn to_c64(&self) -> C64;
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn conj(&self) -> Self {
        C64::conj(self)
    }
    fn abs(&self) -> Self {
        C64::new(self.norm(), 0.0)
    }
    fn sqrt(&self) -> Self {
        if self.im == 0.0 && self.re >= 0.0 {
            C64::new(self.re.sqrt(), 0.0)
        } else {
            C64::sqrt(*self)
        }
    }
    fn re(&self) -> Self {
        C64::new(self.re, 0.0)
    }
    fn sign(&self) -> Self {
        C64::new(if self.re >= 0.0 { 1.0 } else { -1.0 }, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn value(&self) -> Option<C64> {
        Some(*self)
    }
    fn same_entry(&self, other: &Self, tol: f64) -> bool {
        (self - other).norm() <= tol * self.norm().max(1.0)
    }
    fn norm_sqr(&self) -> Self {
        C64::new(C64::norm_sqr(self), 0.0)
    }
}

impl NumericScalar for C64 {
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn real(&self) -> f64 {
        self.re
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

impl Scalar for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from(0.0)
    }
    fn one() -> Self {
        DoubleDouble::from(1.0)
    }
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from(x)
    }
    fn conj(&self) -> Self {
        *self
    }
    fn abs(&self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(&self) -> Self {
        DoubleDouble::sqrt(*self)
    }
    fn re(&self) -> Self {
        *self
    }
    fn sign(&self) -> Self {
        if *self >= 0.0 {
            DoubleDouble::from(1.0)
        } else {
            DoubleDouble::from(-1.0)
        }
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0 && self.lo() == 0.0
    }
    fn value(&self) -> Option<C64> {
        Some(C64::new(self.hi() + self.lo(), 0.0))
    }
    fn same_entry(&self, other: &Self, tol: f64) -> bool {
        (*self - *other).modulus() <= tol * self.modulus().max(1.0)
    }
    fn norm_sqr(&self) -> Self {
        *self * *self
    }
}

impl NumericScalar for DoubleDouble {
    fn modulus(&self) -> f64 {
        (self.hi() + self.lo()).abs()
    }
    fn real(&self) -> f64 {
        self.hi() + self.lo()
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.hi() + self.lo(), 0.0)
    }
}
