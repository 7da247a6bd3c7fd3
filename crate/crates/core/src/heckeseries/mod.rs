//! Synthetic Hecke eigenvalue data and the Dirichlet series of level-`q`
//! oldforms built from it.
//!
//! A [`HeckeSequence`] stores `λ(p)` for every prime `p <= P` and extends it
//! to all `P`-smooth integers through the Hecke recursion. Everything
//! downstream treats the sequence as an Euler product over `p <= P`, so the
//! identities checked here are exact statements about finite products.

mod contribution;
mod formal;
mod lemma;

pub use contribution::{oldform_contribution_215, oldform_decay, slope, Contribution215, DecayFit};
pub use formal::FormalEulerFactor;
pub use lemma::{
    lemma24_euler_factor_check, lemma24_euler_factor_check_f64, lemma24_exact_euler_factor_check,
    lemma24_lhs, lemma24_lhs_truncated, lemma24_rhs, lemma24_rhs_closed, AlphaReading, Display,
    FactorCheck, LocalData, TildeConvention, TruncatedSum, FACTOR_TOL,
};

use crate::arith::{factorize, gcd, primes_up_to};
use crate::error::{Error, Result};
use crate::specfun::ComplexValue;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest admissible exponent towards Ramanujan–Petersson.
pub const THETA_MAX: f64 = 7.0 / 64.0;

/// Granularity used by [`HeckeSequence::dyadic`].
pub const DYADIC_DENOMINATOR: f64 = 1024.0;

/// Prime eigenvalues of a level-one Hecke eigenform, truncated at `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeckeSequence {
    prime_values: BTreeMap<u64, f64>,
    theta: f64,
    tau1: ComplexValue,
    max_prime: u64,
}

/// `p^θ + p^{-θ}`.
pub fn ramanujan_bound(p: u64, theta: f64) -> f64 {
    let a = (p as f64).powf(theta);
    a + 1.0 / a
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=THETA_MAX).contains(&theta) {
        return Err(Error::Domain(format!(
            "theta must lie in [0, 7/64] (got {theta})"
        )));
    }
    Ok(())
}

/// Sequence with `λ(p) = B_p cos θ_p`, the angles Sato–Tate distributed and
/// drawn deterministically from `seed`; `B_p = p^θ + p^{-θ}`.
pub fn make_hecke_sequence(seed: u64, max_prime: u64, theta: f64) -> Result<HeckeSequence> {
    if max_prime < 2 {
        return Err(Error::Domain(format!(
            "prime bound must be at least 2 (got {max_prime})"
        )));
    }
    check_theta(theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prime_values = BTreeMap::new();
    for p in primes_up_to(max_prime) {
        let angle = loop {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let u: f64 = rng.gen();
            if u <= a.sin().powi(2) {
                break a;
            }
        };
        prime_values.insert(p, ramanujan_bound(p, theta) * angle.cos());
    }
    Ok(HeckeSequence {
        prime_values,
        theta,
        tau1: Complex64::new(1.0, 0.0),
        max_prime,
    })
}

impl HeckeSequence {
    /// Sequence from explicit prime values; every prime up to `max_prime`
    /// must be present.
    pub fn from_prime_values(
        prime_values: BTreeMap<u64, f64>,
        max_prime: u64,
        theta: f64,
    ) -> Result<Self> {
        check_theta(theta)?;
        for p in primes_up_to(max_prime) {
            if !prime_values.contains_key(&p) {
                return Err(Error::Domain(format!("missing eigenvalue at p = {p}")));
            }
        }
        if let Some(&k) = prime_values
            .keys()
            .find(|&&k| k > max_prime || factorize(k).len() != 1 || factorize(k)[0].1 != 1)
        {
            return Err(Error::Domain(format!(
                "{k} is not a prime up to {max_prime}"
            )));
        }
        let mut seq = Self {
            prime_values: BTreeMap::new(),
            theta,
            tau1: Complex64::new(1.0, 0.0),
            max_prime,
        };
        for (p, l) in prime_values {
            seq = seq.with_prime_value(p, l)?;
        }
        Ok(seq)
    }

    /// Constant sequence `λ(p) = c` for all `p <= max_prime`.
    pub fn constant(c: f64, max_prime: u64) -> Result<Self> {
        let values = primes_up_to(max_prime)
            .into_iter()
            .map(|p| (p, c))
            .collect();
        Self::from_prime_values(values, max_prime, 0.0)
    }

    /// Replace one prime value, checking the bound.
    pub fn with_prime_value(mut self, p: u64, value: f64) -> Result<Self> {
        if p > self.max_prime {
            return Err(Error::Capability(format!(
                "prime {p} exceeds the bound {}",
                self.max_prime
            )));
        }
        let bound = ramanujan_bound(p, self.theta);
        if !value.is_finite() || value.abs() > bound * (1.0 + 1e-15) {
            return Err(Error::Domain(format!(
                "|λ({p})| = {} exceeds p^θ + p^-θ = {bound}",
                value.abs()
            )));
        }
        self.prime_values.insert(p, value);
        Ok(self)
    }

    pub fn with_tau1(mut self, tau1: ComplexValue) -> Result<Self> {
        if !(tau1.re.is_finite() && tau1.im.is_finite()) || tau1 == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("τ(1) must be finite and nonzero".into()));
        }
        self.tau1 = tau1;
        Ok(self)
    }

    /// Round every prime value towards zero to a multiple of `1/1024`, so
    /// that the values and all their sums and products are exact rationals.
    pub fn dyadic(mut self) -> Self {
        for v in self.prime_values.values_mut() {
            *v = (*v * DYADIC_DENOMINATOR).trunc() / DYADIC_DENOMINATOR;
        }
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau1(&self) -> ComplexValue {
        self.tau1
    }

    pub fn max_prime(&self) -> u64 {
        self.max_prime
    }

    pub fn prime_values(&self) -> &BTreeMap<u64, f64> {
        &self.prime_values
    }

    /// `λ(p)`.
    pub fn lambda_prime(&self, p: u64) -> Result<f64> {
        self.prime_values.get(&p).copied().ok_or_else(|| {
            Error::Capability(format!(
                "no eigenvalue stored for {p} (bound {})",
                self.max_prime
            ))
        })
    }

    /// `λ(p^k)` from the recursion `λ(p^{k+1}) = λ(p)λ(p^k) - λ(p^{k-1})`.
    pub fn lambda_prime_power(&self, p: u64, k: u32) -> Result<f64> {
        let l = self.lambda_prime(p)?;
        let (mut prev, mut cur) = (0.0, 1.0);
        for _ in 0..k {
            let next = l * cur - prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// `λ(n)` for `P`-smooth `n`.
    pub fn lambda_at(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("λ(n) needs n >= 1".into()));
        }
        factorize(n)
            .into_iter()
            .try_fold(1.0, |acc, (p, k)| Ok(acc * self.lambda_prime_power(p, k)?))
    }

    /// `λ(n)` in exact rational arithmetic, each stored `λ(p)` read as the
    /// rational number its binary representation denotes.
    pub fn lambda_at_exact(&self, n: u64) -> Result<BigRational> {
        if n == 0 {
            return Err(Error::Domain("λ(n) needs n >= 1".into()));
        }
        let mut acc = BigRational::one();
        for (p, k) in factorize(n) {
            let l =
                BigRational::from_float(self.lambda_prime(p)?).expect("stored values are finite");
            let (mut prev, mut cur) = (BigRational::zero(), BigRational::one());
            for _ in 0..k {
                let next = &l * &cur - prev;
                prev = cur;
                cur = next;
            }
            acc *= cur;
        }
        Ok(acc)
    }

    /// `τ(n) = τ(1) λ(n)`.
    pub fn tau_at(&self, n: u64) -> Result<ComplexValue> {
        Ok(self.tau1 * self.lambda_at(n)?)
    }

    /// True when every prime factor of `n` is at most `P`.
    pub fn is_smooth(&self, n: u64) -> bool {
        n >= 1 && factorize(n).iter().all(|&(p, _)| p <= self.max_prime)
    }

    /// `Σ_{d | gcd(m,n)} λ(mn/d²)`, the right side of the Hecke relation.
    pub fn hecke_composition(&self, m: u64, n: u64) -> Result<f64> {
        let g = gcd(m, n);
        let mut acc = 0.0;
        for d in crate::arith::divisors(g) {
            acc += self.lambda_at(m / d * (n / d))?;
        }
        Ok(acc)
    }
}

/// Coefficients `ρ(n) = q^{1/2} τ(n/q)` of `v(qz)`, zero when `q ∤ n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OldformCoefficients {
    pub underlying: HeckeSequence,
    pub level: u64,
}

impl OldformCoefficients {
    /// The level must be a prime covered by the sequence.
    pub fn new(underlying: HeckeSequence, level: u64) -> Result<Self> {
        crate::halfplane::validate_level(level)?;
        if level == 1 {
            return Err(Error::Domain("oldforms need a prime level".into()));
        }
        if level > underlying.max_prime {
            return Err(Error::Capability(format!(
                "level {level} exceeds the prime bound {} of the sequence",
                underlying.max_prime
            )));
        }
        Ok(Self { underlying, level })
    }

    pub fn rho(&self, n: u64) -> Result<ComplexValue> {
        if n == 0 {
            return Err(Error::Domain("ρ(n) needs n >= 1".into()));
        }
        if n % self.level != 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok((self.level as f64).sqrt() * self.underlying.tau_at(n / self.level)?)
    }

    /// `τ̃(q)` under the chosen convention.
    pub fn tau_tilde(&self, convention: TildeConvention) -> Result<ComplexValue> {
        let l = self.underlying.lambda_prime(self.level)?;
        Ok(match convention {
            TildeConvention::Normalized => Complex64::new(l, 0.0),
            TildeConvention::Raw => self.underlying.tau1 * l,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq() -> HeckeSequence {
        make_hecke_sequence(7, 100, 0.0).unwrap()
    }

    #[test]
    fn small_values() {
        let s = seq();
        assert_eq!(s.lambda_at(1).unwrap(), 1.0);
        for p in [2, 3, 5, 97] {
            let l = s.lambda_prime(p).unwrap();
            assert!((s.lambda_at(p * p).unwrap() - (l * l - 1.0)).abs() < 1e-15);
            assert!((s.lambda_at(p * p * p).unwrap() - (l * l * l - 2.0 * l)).abs() < 1e-14);
        }
        assert_eq!(
            s.lambda_at(12).unwrap(),
            s.lambda_at(4).unwrap() * s.lambda_at(3).unwrap()
        );
    }

    #[test]
    fn beyond_bound_is_capability_error() {
        let s = seq();
        assert!(matches!(s.lambda_at(101), Err(Error::Capability(_))));
        assert!(matches!(s.lambda_at(2 * 103), Err(Error::Capability(_))));
        assert!(matches!(
            OldformCoefficients::new(s.clone(), 101),
            Err(Error::Capability(_))
        ));
        assert!(matches!(
            OldformCoefficients::new(s, 12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn deterministic_and_bounded() {
        assert_eq!(
            make_hecke_sequence(3, 500, 0.05).unwrap(),
            make_hecke_sequence(3, 500, 0.05).unwrap()
        );
        assert_ne!(
            make_hecke_sequence(3, 500, 0.0).unwrap(),
            make_hecke_sequence(4, 500, 0.0).unwrap()
        );
        let s = make_hecke_sequence(11, 2000, THETA_MAX).unwrap();
        for (&p, &l) in s.prime_values() {
            assert!(l.abs() <= ramanujan_bound(p, THETA_MAX));
        }
        assert!(make_hecke_sequence(1, 1, 0.0).is_err());
        assert!(make_hecke_sequence(1, 10, 0.2).is_err());
    }

    #[test]
    fn sato_tate_moments() {
        // E[λ²] = 1 and E[λ⁴] = 2 for the semicircle law on [-2, 2].
        let s = make_hecke_sequence(5, 200_000, 0.0).unwrap();
        let n = s.prime_values().len() as f64;
        let m2: f64 = s.prime_values().values().map(|l| l * l).sum::<f64>() / n;
        let m4: f64 = s.prime_values().values().map(|l| l.powi(4)).sum::<f64>() / n;
        assert!((m2 - 1.0).abs() < 0.03, "{m2}");
        assert!((m4 - 2.0).abs() < 0.08, "{m4}");
    }

    #[test]
    fn bound_enforced() {
        assert!(seq().with_prime_value(2, 2.5).is_err());
        assert!(seq().with_prime_value(2, -2.0).is_ok());
        assert!(seq().with_tau1(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn oldform_support() {
        let s = seq().with_tau1(Complex64::new(0.5, -2.0)).unwrap();
        let old = OldformCoefficients::new(s.clone(), 11).unwrap();
        assert_eq!(old.rho(5).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(old.rho(11).unwrap(), 11f64.sqrt() * s.tau1());
        let r = old.rho(11 * 6).unwrap();
        assert!((r - 11f64.sqrt() * s.tau1() * s.lambda_at(6).unwrap()).norm() < 1e-15);
        let l11 = s.lambda_prime(11).unwrap();
        assert_eq!(
            old.tau_tilde(TildeConvention::Normalized).unwrap(),
            Complex64::new(l11, 0.0)
        );
        assert_eq!(old.tau_tilde(TildeConvention::Raw).unwrap(), s.tau1() * l11);
    }

    #[test]
    fn dyadic_values_are_exact_multiplicatively() {
        let s = seq().dyadic();
        for (&p, &l) in s.prime_values() {
            assert_eq!(l * DYADIC_DENOMINATOR, (l * DYADIC_DENOMINATOR).trunc());
            assert!(l.abs() <= 2.0 && p <= 100);
        }
        assert_eq!(
            s.lambda_at(2 * 3 * 5 * 7).unwrap(),
            s.lambda_at(6).unwrap() * s.lambda_at(35).unwrap()
        );
    }

    fn smooth_pair() -> impl Strategy<Value = (u64, u64)> {
        let small = prop::collection::vec(prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]), 0..6);
        (small.clone(), small).prop_map(|(a, b)| (a.iter().product(), b.iter().product()))
    }

    proptest! {
        #[test]
        fn multiplicative_on_coprime_pairs((m, n) in smooth_pair(), seed in 0u64..50) {
            let s = make_hecke_sequence(seed, 13, 0.0).unwrap();
            prop_assume!(gcd(m, n) == 1);
            prop_assert_eq!(s.lambda_at_exact(m * n).unwrap(), s.lambda_at_exact(m).unwrap() * s.lambda_at_exact(n).unwrap());
            let (a, b) = (s.lambda_at(m * n).unwrap(), s.lambda_at(m).unwrap() * s.lambda_at(n).unwrap());
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }

        #[test]
        fn hecke_relation((m, n) in smooth_pair(), seed in 0u64..50) {
            let s = make_hecke_sequence(seed, 13, 0.0).unwrap();
            let lhs = s.lambda_at(m).unwrap() * s.lambda_at(n).unwrap();
            prop_assert!((lhs - s.hecke_composition(m, n).unwrap()).abs() < 1e-10);
        }
    }
}
