//! Special functions: gamma, Riemann zeta and its completion, K-Bessel
//! functions of complex order and twisted divisor sums.

mod bessel;
mod gamma;
mod zeta;

pub use bessel::{bessel_k, BESSEL_MAX_IMAG_ORDER};
pub use gamma::{bernoulli, gamma, ln_gamma};
pub use zeta::{completed_zeta, zeta, zeta_with_order};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Complex scalar used for spectral parameters.
pub type ComplexValue = Complex64;

/// Build a complex value, rejecting NaN and infinite parts.
pub fn complex(re: f64, im: f64) -> Result<ComplexValue> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::Domain(format!(
            "non-finite complex value ({re}, {im})"
        )))
    }
}

/// `sigma_nu(n) = sum_{d | n} d^nu`.
pub fn divisor_sigma(nu: ComplexValue, n: u64) -> Result<ComplexValue> {
    if n == 0 {
        return Err(Error::Domain("divisor_sigma needs n >= 1".into()));
    }
    Ok(crate::arith::divisors(n)
        .into_iter()
        .map(|d| (nu * (d as f64).ln()).exp())
        .sum())
}
