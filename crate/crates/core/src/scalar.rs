//! Scalar abstractions.
//!
//! Geometry is written against [`Real`] so that it runs in `f32` or `f64`;
//! formal Euler-factor arithmetic is written against [`Ring`] so that the
//! same identity checks run in floating complex arithmetic or exactly over
//! the (complex) rationals.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed};
use std::fmt::Debug;

/// Floating point scalar for geometry: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}
impl Real for f32 {}
impl Real for f64 {}

/// Commutative ring with division by units, as used by formal power series.
pub trait Ring: Num + Clone + Debug + Send + Sync {
    /// Distance from zero, used to report coefficient deviations.
    fn magnitude(&self) -> f64;
    /// Embed a real number. Exact types round to a nearby rational.
    fn from_real(x: f64) -> Self;
}

impl Ring for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Ring for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

impl Ring for BigRational {
    fn magnitude(&self) -> f64 {
        let a = self.abs();
        let n: f64 = a.numer().to_string().parse().unwrap_or(f64::INFINITY);
        let d: f64 = a.denom().to_string().parse().unwrap_or(f64::INFINITY);
        n / d
    }
    fn from_real(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
    }
}

/// Complex numbers with exact rational parts.
pub type ComplexRational = Complex<BigRational>;

impl Ring for ComplexRational {
    fn magnitude(&self) -> f64 {
        self.re.magnitude().hypot(self.im.magnitude())
    }
    fn from_real(x: f64) -> Self {
        Complex::new(BigRational::from_real(x), BigRational::from_real(0.0))
    }
}

/// The exact value of a floating complex number.
pub fn complex_rational(z: Complex64) -> Option<ComplexRational> {
    Some(Complex::new(
        BigRational::from_float(z.re)?,
        BigRational::from_float(z.im)?,
    ))
}
