//! Dirichlet series of oldform coefficients twisted by divisor sums, their
//! closed forms, and prime-by-prime comparison of the two.
//!
//! Write `X = p^{-s}`. Away from the level the `p`-factor of both sides is
//! `(1 - p^ν X²) / ((1 - λX + X²)(1 - λp^ν X + p^{2ν} X²))`. At `p = q` the
//! common scalar `τ(1) q^{1/2}` is divided out and the factor keeps its
//! leading `X`.

use super::{FormalEulerFactor, OldformCoefficients};
use crate::arith::{factorize, primes_up_to};
use crate::error::{Error, Result};
use crate::scalar::{complex_rational, ComplexRational, Ring};
use crate::specfun::ComplexValue;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Which of the two twisted series is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Display {
    /// `Σ ρ(n) σ_ν(n) n^{-s}`.
    Plain,
    /// `Σ ρ(n) σ_ν(n q^{-α}) n^{-s}`.
    QFree,
}

/// Reading of the exponent `α` in `σ_ν(n q^{-α})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AlphaReading {
    /// `α = v_q(n)`: the divisor sum sees only the part of `n` prime to `q`.
    #[default]
    Valuation,
    /// `α = v_q(n) - 1`: one factor of `q` is kept.
    ValuationMinusOne,
}

/// Meaning of `τ̃(q)` in the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TildeConvention {
    /// `τ(q)/τ(1) = λ(q)`.
    #[default]
    Normalized,
    /// `τ(q) = τ(1)λ(q)`.
    Raw,
}

/// Local data at one prime, in the coefficient ring `T`.
#[derive(Debug, Clone)]
pub struct LocalData<T> {
    pub prime: u64,
    pub is_level: bool,
    pub lambda: T,
    /// `p^ν`.
    pub p_nu: T,
    pub tau1: T,
}

impl LocalData<Complex64> {
    pub fn new(old: &OldformCoefficients, p: u64, nu: ComplexValue) -> Result<Self> {
        check_prime(p)?;
        Ok(Self {
            prime: p,
            is_level: p == old.level,
            lambda: Complex64::new(old.underlying.lambda_prime(p)?, 0.0),
            p_nu: (nu * (p as f64).ln()).exp(),
            tau1: old.underlying.tau1(),
        })
    }
}

impl LocalData<ComplexRational> {
    /// The floating data of [`LocalData::new`], each entry read as the exact
    /// rational it stores. Both sides of an identity are then computed
    /// without rounding from the same inputs.
    pub fn rounded(old: &OldformCoefficients, p: u64, nu: ComplexValue) -> Result<Self> {
        let d = LocalData::new(old, p, nu)?;
        let rat = |z: Complex64| {
            complex_rational(z).ok_or_else(|| Error::Domain(format!("{z} is not finite")))
        };
        Ok(Self {
            prime: d.prime,
            is_level: d.is_level,
            lambda: rat(d.lambda)?,
            p_nu: rat(d.p_nu)?,
            tau1: rat(d.tau1)?,
        })
    }
}

impl LocalData<BigRational> {
    /// Exact data for `ν = -nu_exponent`. The stored eigenvalues are binary
    /// floating point numbers and hence exact rationals; `τ(1)` must be real.
    pub fn exact(old: &OldformCoefficients, p: u64, nu_exponent: u32) -> Result<Self> {
        check_prime(p)?;
        let tau1 = old.underlying.tau1();
        if tau1.im != 0.0 {
            return Err(Error::Domain("exact arithmetic needs a real τ(1)".into()));
        }
        let rat = |x: f64| {
            BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
        };
        Ok(Self {
            prime: p,
            is_level: p == old.level,
            lambda: rat(old.underlying.lambda_prime(p)?)?,
            p_nu: BigRational::new(BigInt::from(1), BigInt::from(p).pow(nu_exponent)),
            tau1: rat(tau1.re)?,
        })
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p < 2 || !crate::halfplane::is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    Ok(())
}

impl<T: Ring> LocalData<T> {
    /// `λ(p^k)` for `k = 0..=order`.
    fn lambda_powers(&self, order: usize) -> Vec<T> {
        let mut out = vec![T::one(), self.lambda.clone()];
        while out.len() <= order {
            let k = out.len();
            out.push(self.lambda.clone() * out[k - 1].clone() - out[k - 2].clone());
        }
        out.truncate(order + 1);
        out
    }

    /// `σ_ν(p^k) = Σ_{j <= k} p^{jν}` for `k = 0..=order`.
    fn sigma_powers(&self, order: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(order + 1);
        let (mut acc, mut pw) = (T::one(), T::one());
        out.push(acc.clone());
        for _ in 0..order {
            pw = pw * self.p_nu.clone();
            acc = acc + pw.clone();
            out.push(acc.clone());
        }
        out
    }

    fn tau_tilde(&self, convention: TildeConvention) -> T {
        match convention {
            TildeConvention::Normalized => self.lambda.clone(),
            TildeConvention::Raw => self.tau1.clone() * self.lambda.clone(),
        }
    }

    fn poly(&self, order: usize, coeffs: Vec<T>) -> FormalEulerFactor<T> {
        FormalEulerFactor::new(self.prime, order, coeffs)
    }

    /// Local factor of `L(s)L(s-ν)/ζ(2s-ν)`.
    pub fn standard_factor(&self, order: usize) -> FormalEulerFactor<T> {
        let zero = T::zero();
        let one = T::one();
        let num = self.poly(
            order,
            vec![one.clone(), zero.clone(), zero.clone() - self.p_nu.clone()],
        );
        let d1 = self.poly(
            order,
            vec![one.clone(), zero.clone() - self.lambda.clone(), one.clone()],
        );
        let d2 = self.poly(
            order,
            vec![
                one,
                zero - self.lambda.clone() * self.p_nu.clone(),
                self.p_nu.clone() * self.p_nu.clone(),
            ],
        );
        let den = &d1 * &d2;
        num.quotient(&den).expect("unit constant term")
    }

    /// Local factor of the left side, read off from the coefficients.
    pub fn lhs_factor(
        &self,
        display: Display,
        alpha: AlphaReading,
        order: usize,
    ) -> FormalEulerFactor<T> {
        let lam = self.lambda_powers(order);
        let sig = self.sigma_powers(order + 1);
        if !self.is_level {
            let c = (0..=order)
                .map(|k| lam[k].clone() * sig[k].clone())
                .collect();
            return self.poly(order, c);
        }
        // n = q^{k+1} m contributes λ(q^k) times the divisor sum at q.
        let mut c = vec![T::zero()];
        for k in 0..order {
            let s = match (display, alpha) {
                (Display::Plain, _) => sig[k + 1].clone(),
                (Display::QFree, AlphaReading::Valuation) => sig[0].clone(),
                (Display::QFree, AlphaReading::ValuationMinusOne) => sig[1].clone(),
            };
            c.push(lam[k].clone() * s);
        }
        self.poly(order, c)
    }

    /// Local factor of the closed form.
    pub fn rhs_factor(
        &self,
        display: Display,
        convention: TildeConvention,
        order: usize,
    ) -> FormalEulerFactor<T> {
        let std = self.standard_factor(order);
        if !self.is_level {
            return std;
        }
        let zero = T::zero();
        let one = T::one();
        let tt = self.tau_tilde(convention) * self.p_nu.clone();
        let bracket = match display {
            Display::Plain => self.poly(
                order,
                vec![
                    zero.clone(),
                    one.clone() + self.p_nu.clone(),
                    zero.clone() - tt,
                ],
            ),
            Display::QFree => {
                let a = one.clone() + self.p_nu.clone();
                self.poly(order, vec![zero.clone(), a.clone(), zero.clone() - a * tt])
            }
        };
        let den = self.poly(order, vec![one, zero.clone(), zero - self.p_nu.clone()]);
        &bracket.quotient(&den).expect("unit constant term") * &std
    }
}

/// Outcome of comparing the two sides at one prime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCheck {
    pub prime: u64,
    pub display: Display,
    pub order: usize,
    pub max_deviation: f64,
    pub agrees: bool,
}

/// Absolute coefficient tolerance.
pub const FACTOR_TOL: f64 = 1e-12;

/// Compare the `p`-factors of both sides of `display` to order `order`.
///
/// `λ(p)`, `p^ν` and `τ(1)` are rounded to double precision once; both
/// sides are then expanded in exact complex rational arithmetic, so a true
/// identity shows zero deviation and the reported deviation of a false one
/// carries no roundoff. Plain double precision loses about `2e-14` relative
/// on coefficients that reach a few hundred at order 10, which is above the
/// absolute tolerance; see [`lemma24_euler_factor_check_f64`].
pub fn lemma24_euler_factor_check(
    old: &OldformCoefficients,
    p: u64,
    order: usize,
    nu: ComplexValue,
    display: Display,
    alpha: AlphaReading,
    convention: TildeConvention,
) -> Result<FactorCheck> {
    let data = LocalData::rounded(old, p, nu)?;
    let dev = data
        .lhs_factor(display, alpha, order)
        .max_deviation(&data.rhs_factor(display, convention, order));
    Ok(FactorCheck {
        prime: p,
        display,
        order,
        max_deviation: dev,
        agrees: dev < FACTOR_TOL,
    })
}

/// The same comparison carried out entirely in double precision.
pub fn lemma24_euler_factor_check_f64(
    old: &OldformCoefficients,
    p: u64,
    order: usize,
    nu: ComplexValue,
    display: Display,
    alpha: AlphaReading,
    convention: TildeConvention,
) -> Result<FactorCheck> {
    let data = LocalData::new(old, p, nu)?;
    let dev = data
        .lhs_factor(display, alpha, order)
        .max_deviation(&data.rhs_factor(display, convention, order));
    Ok(FactorCheck {
        prime: p,
        display,
        order,
        max_deviation: dev,
        agrees: dev < FACTOR_TOL,
    })
}

/// Same comparison over the rationals with `ν = -nu_exponent`; agreement
/// means equality.
pub fn lemma24_exact_euler_factor_check(
    old: &OldformCoefficients,
    p: u64,
    order: usize,
    nu_exponent: u32,
    display: Display,
    alpha: AlphaReading,
    convention: TildeConvention,
) -> Result<FactorCheck> {
    let data = LocalData::exact(old, p, nu_exponent)?;
    let lhs = data.lhs_factor(display, alpha, order);
    let rhs = data.rhs_factor(display, convention, order);
    Ok(FactorCheck {
        prime: p,
        display,
        order,
        max_deviation: lhs.max_deviation(&rhs),
        agrees: lhs == rhs,
    })
}

/// Partial sum together with a bound on the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSum {
    pub value: ComplexValue,
    pub tail: f64,
    pub terms: usize,
}

fn pow_c(p: u64, z: Complex64) -> Complex64 {
    (z * (p as f64).ln()).exp()
}

/// `Σ_{n <= N} ρ(n) σ_ν(n) n^{-s}` over the integers on which the sequence
/// is defined.
pub fn lemma24_lhs_truncated(
    old: &OldformCoefficients,
    s: ComplexValue,
    nu: ComplexValue,
    n_max: u64,
) -> Result<TruncatedSum> {
    lemma24_lhs(old, s, nu, n_max, Display::Plain, AlphaReading::Valuation)
}

/// As [`lemma24_lhs_truncated`] for either display.
pub fn lemma24_lhs(
    old: &OldformCoefficients,
    s: ComplexValue,
    nu: ComplexValue,
    n_max: u64,
    display: Display,
    alpha: AlphaReading,
) -> Result<TruncatedSum> {
    let q = old.level;
    if s.re < 2.5 || (s - nu.re).re < 1.5 {
        return Err(Error::Domain(format!(
            "need Re s >= 2.5 and Re(s - Re ν) >= 1.5 (s = {s}, ν = {nu})"
        )));
    }
    if n_max < q {
        return Err(Error::Domain(format!(
            "truncation {n_max} is below the level {q}"
        )));
    }
    let seq = &old.underlying;
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    for m in 1..=n_max / q {
        if !seq.is_smooth(m) {
            continue;
        }
        let n = m * q;
        let mut sigma = Complex64::new(1.0, 0.0);
        for (p, e) in factorize(n) {
            let e = if p == q && display == Display::QFree {
                match alpha {
                    AlphaReading::Valuation => 0,
                    AlphaReading::ValuationMinusOne => 1,
                }
            } else {
                e
            };
            let pn = pow_c(p, nu);
            let (mut acc, mut pw) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            for _ in 0..e {
                pw *= pn;
                acc += pw;
            }
            sigma *= acc;
        }
        value += old.rho(n)? * sigma * pow_c(n, -s);
        terms += 1;
    }
    Ok(TruncatedSum {
        value,
        tail: rankin_tail(old, s.re, nu.re, n_max),
        terms,
    })
}

/// Bound on `Σ_{n > N} |ρ(n) σ_ν(n)| n^{-σ}` from `Σ_{n > N} |a_n| <= N^{-δ} Σ |a_n| n^δ`
/// and the majorants `|λ(p^k)| <= (k+1)p^{kθ}`, `|σ_ν(p^k)| <= (k+1)p^{k max(0, Re ν)}`.
fn rankin_tail(old: &OldformCoefficients, sigma: f64, nu_re: f64, n_max: u64) -> f64 {
    let seq = &old.underlying;
    let q = old.level;
    let a = nu_re.max(0.0);
    let room = sigma - seq.theta() - a;
    let primes = primes_up_to(seq.max_prime());
    let log_bound = |delta: f64| -> f64 {
        let e = seq.theta() + a - sigma + delta;
        let mut acc = -delta * (n_max as f64).ln() + 0.5 * (q as f64).ln() + seq.tau1().norm().ln();
        for &p in &primes {
            let r = (p as f64).powf(e);
            if p == q {
                acc += (a - sigma + delta) * (q as f64).ln() + 2f64.ln() - 3.0 * (1.0 - r).ln();
            } else {
                acc += (1.0 + r).ln() - 3.0 * (1.0 - r).ln();
            }
        }
        acc
    };
    let steps = 400;
    (1..steps)
        .map(|i| log_bound(room * i as f64 / steps as f64))
        .fold(f64::INFINITY, f64::min)
        .exp()
}

/// Closed form of the first display, with `L`-values as Euler products
/// over the primes carried by the sequence.
pub fn lemma24_rhs_closed(
    old: &OldformCoefficients,
    s: ComplexValue,
    nu: ComplexValue,
) -> Result<ComplexValue> {
    lemma24_rhs(old, s, nu, Display::Plain, TildeConvention::Normalized)
}

/// Closed form of either display.
pub fn lemma24_rhs(
    old: &OldformCoefficients,
    s: ComplexValue,
    nu: ComplexValue,
    display: Display,
    convention: TildeConvention,
) -> Result<ComplexValue> {
    let q = old.level;
    let one = Complex64::new(1.0, 0.0);
    let den = one - pow_c(q, nu - 2.0 * s);
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!(
            "1 - q^(ν-2s) vanishes at s = {s}, ν = {nu}"
        )));
    }
    let tt = old.tau_tilde(convention)? * pow_c(q, nu - s);
    let qn = pow_c(q, nu);
    let bracket = match display {
        Display::Plain => one + qn - tt,
        Display::QFree => (one + qn) * (one - tt),
    };
    let global = global_factor(old, s, nu)?;
    Ok(old.underlying.tau1() * pow_c(q, 0.5 - s) * bracket / den * global)
}

/// `Π_{p <= P} (1 - p^{ν-2s}) / ((1 - λ(p)p^{-s} + p^{-2s})(1 - λ(p)p^{ν-s} + p^{2ν-2s}))`.
pub(crate) fn global_factor(
    old: &OldformCoefficients,
    s: ComplexValue,
    nu: ComplexValue,
) -> Result<ComplexValue> {
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    for (&p, &l) in old.underlying.prime_values() {
        let x = pow_c(p, -s);
        let y = pow_c(p, nu - s);
        let d = (one - l * x + x * x) * (one - l * y + y * y);
        if d.norm() < 1e-300 {
            return Err(Error::Pole(format!("local L-factor at p = {p} vanishes")));
        }
        acc *= (one - pow_c(p, nu - 2.0 * s)) / d;
    }
    Ok(acc)
}
