//! Truncated power series in the local variable `X = p^{-s}`.

use crate::scalar::Ring;
use std::ops::{Add, Mul, Sub};

/// `sum_{k <= K} c_k X^k` at a fixed prime, closed under arithmetic at
/// order `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalEulerFactor<T> {
    pub prime: u64,
    coeffs: Vec<T>,
}

impl<T: Ring> FormalEulerFactor<T> {
    /// Series from its leading coefficients, zero-padded or cut to order `order`.
    pub fn new(prime: u64, order: usize, mut coeffs: Vec<T>) -> Self {
        coeffs.resize(order + 1, T::zero());
        Self { prime, coeffs }
    }

    pub fn zero(prime: u64, order: usize) -> Self {
        Self::new(prime, order, Vec::new())
    }

    pub fn one(prime: u64, order: usize) -> Self {
        Self::new(prime, order, vec![T::one()])
    }

    /// The monomial `X`.
    pub fn x(prime: u64, order: usize) -> Self {
        Self::new(prime, order, vec![T::zero(), T::one()])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            prime: self.prime,
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// Multiplicative inverse; `None` when the constant term is zero.
    pub fn inverse(&self) -> Option<Self> {
        let c0 = self.coeffs[0].clone();
        if c0.is_zero() {
            return None;
        }
        let inv0 = T::one() / c0;
        let mut out: Vec<T> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for k in 1..self.coeffs.len() {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * out[k - j].clone();
            }
            out.push(T::zero() - acc * inv0.clone());
        }
        Some(Self {
            prime: self.prime,
            coeffs: out,
        })
    }

    pub fn quotient(&self, other: &Self) -> Option<Self> {
        Some(self * &other.inverse()?)
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "Euler factors at different primes");
        assert_eq!(
            self.coeffs.len(),
            other.coeffs.len(),
            "Euler factors of different order"
        );
    }
}

impl<T: Ring> Add for &FormalEulerFactor<T> {
    type Output = FormalEulerFactor<T>;
    fn add(self, o: Self) -> FormalEulerFactor<T> {
        self.check(o);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        FormalEulerFactor {
            prime: self.prime,
            coeffs,
        }
    }
}

impl<T: Ring> Sub for &FormalEulerFactor<T> {
    type Output = FormalEulerFactor<T>;
    fn sub(self, o: Self) -> FormalEulerFactor<T> {
        self.check(o);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        FormalEulerFactor {
            prime: self.prime,
            coeffs,
        }
    }
}

impl<T: Ring> Mul for &FormalEulerFactor<T> {
    type Output = FormalEulerFactor<T>;
    fn mul(self, o: Self) -> FormalEulerFactor<T> {
        self.check(o);
        let n = self.coeffs.len();
        let mut coeffs = vec![T::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                coeffs[i + j] =
                    coeffs[i + j].clone() + self.coeffs[i].clone() * o.coeffs[j].clone();
            }
        }
        FormalEulerFactor {
            prime: self.prime,
            coeffs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn geometric_inverse() {
        // (1 - X)^{-1} = 1 + X + X^2 + ...
        let f = FormalEulerFactor::new(2, 6, vec![1.0, -1.0]);
        let inv = f.inverse().unwrap();
        assert_eq!(inv.coefficients(), &[1.0; 7]);
        assert!(FormalEulerFactor::new(2, 3, vec![0.0, 1.0])
            .inverse()
            .is_none());
    }

    #[test]
    fn exact_rational_arithmetic() {
        // (1 - X/2)(1 - X/2)^{-1} = 1 exactly.
        let f = FormalEulerFactor::new(3, 10, vec![q(1, 1), q(-1, 2)]);
        let g = &f * &f.inverse().unwrap();
        assert_eq!(g, FormalEulerFactor::one(3, 10));
        assert_eq!(g.max_deviation(&FormalEulerFactor::one(3, 10)), 0.0);
    }

    #[test]
    fn multiplication_truncates() {
        let x = FormalEulerFactor::<f64>::x(5, 2);
        let x2 = &x * &x;
        let x4 = &x2 * &x2;
        assert_eq!(x2.coefficients(), &[0.0, 0.0, 1.0]);
        assert_eq!(x4, FormalEulerFactor::zero(5, 2));
    }

    #[test]
    #[should_panic]
    fn mismatched_primes_panic() {
        let _ = &FormalEulerFactor::<f64>::one(2, 2) + &FormalEulerFactor::one(3, 2);
    }
}
