//! Fourier coefficients of `E_{q,k}(z, s)` at the cusp infinity.
//!
//! At cusp infinity the expansion reads
//!
//! ```text
//! E_k(z, s) = d_k y^s + phi_k(s) y^{1-s}
//!           + sum_{n != 0} a_n 2 sqrt(|n| y) K_{s-1/2}(2 pi |n| y) e(nx)
//! a_n = pi^s / Gamma(s) |n|^{s-1} D_k(n, s)
//! D_k(n, s) = sum_{gamma in C(k, inf)} S_k(0, n; gamma) gamma^{-2s}
//! ```
//!
//! The modulus sum is a Dirichlet series whose factors away from `q` are
//! those of level one, `sigma_{1-2s}(n) / zeta(2s)`. Its `q`-factor is
//! assembled from Ramanujan sums `c_{q^k}(n)` restricted to the valuations
//! `k` that occur in `C(k, inf)`, which are read off from
//! [`allowed_moduli`](crate::halfplane::allowed_moduli).

use crate::arith::{self, ramanujan_sum};
use crate::error::{Error, Result};
use crate::halfplane::{allowed_moduli, is_allowed_modulus, validate_level, Cusp};
use crate::specfun::{completed_zeta, divisor_sigma, ln_gamma, zeta};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Distance from a zero of `zeta(2s)` below which coefficients are refused.
pub const CONDITIONING_MARGIN: f64 = 1e-3;

/// Shape of `C(k, inf)`: `gamma = scale * c` with `c >= 1` and
/// `v_q(c)` either `0` or at least `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliClass {
    pub scale: f64,
    pub valuation: ValuationRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValuationRule {
    /// Every positive integer (level one).
    Any,
    /// Integers prime to `q`.
    Coprime,
    /// Multiples of `q`.
    Multiple,
}

impl ValuationRule {
    fn admits(&self, k: u32) -> bool {
        match self {
            ValuationRule::Any => true,
            ValuationRule::Coprime => k == 0,
            ValuationRule::Multiple => k >= 1,
        }
    }
}

/// Classify `C(k, inf)`: the smallest modulus fixes the scale, and one
/// representative prime to `q` and one divisible by `q` are tested for
/// membership.
pub fn moduli_class(q: u64, cusp: Cusp) -> Result<ModuliClass> {
    if q == 1 {
        return Ok(ModuliClass {
            scale: 1.0,
            valuation: ValuationRule::Any,
        });
    }
    let rq = (q as f64).sqrt();
    let moduli = allowed_moduli(cusp, Cusp::Infinity, q, q as f64 + 1.0)?;
    let first = *moduli
        .first()
        .ok_or_else(|| Error::Capability("empty moduli set".into()))?;
    let in_units_of_root = first / rq;
    let scale = if (in_units_of_root - in_units_of_root.round()).abs() < 1e-9
        && in_units_of_root.round() as u64 % q != 0
    {
        rq
    } else {
        1.0
    };
    let range = 8 * q as i64 + 8;
    let coprime = is_allowed_modulus(cusp, Cusp::Infinity, q, scale, range)?;
    let multiple = is_allowed_modulus(cusp, Cusp::Infinity, q, scale * q as f64, range)?;
    let valuation = match (coprime, multiple) {
        (true, true) => ValuationRule::Any,
        (true, false) => ValuationRule::Coprime,
        (false, true) => ValuationRule::Multiple,
        _ => {
            return Err(Error::Capability(format!(
                "no modulus of scale {scale} found"
            )))
        }
    };
    Ok(ModuliClass { scale, valuation })
}

/// Closed-form coefficient model of one Eisenstein series at cusp infinity.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    pub level: u64,
    pub cusp: Cusp,
    pub s: Complex64,
    pub class: ModuliClass,
    /// `1` for the series attached to infinity, `0` otherwise.
    pub c_plus: Complex64,
    /// Coefficient of `y^{1-s}`: a scattering matrix entry.
    pub c_minus: Complex64,
    /// `pi^s / (Gamma(s) zeta(2s))`; zero at `s = 1/2`.
    prefactor: Complex64,
    q_pow_minus_2s: Complex64,
    scale_pow: Complex64,
}

fn cpow(base: f64, e: Complex64) -> Complex64 {
    (e * base.ln()).exp()
}

impl CoefficientModel {
    pub fn new(q: u64, cusp: Cusp, s: Complex64) -> Result<Self> {
        validate_level(q)?;
        if q == 1 && cusp == Cusp::Zero {
            return Err(Error::Domain("level 1 has the single cusp infinity".into()));
        }
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::Domain("s must be finite".into()));
        }
        if (s - 1.0).norm() < 1e-12 {
            return Err(Error::Pole("Eisenstein series has a pole at s = 1".into()));
        }
        let class = moduli_class(q, cusp)?;
        let at_centre = (s - 0.5).norm() < 1e-14;
        let two_s = 2.0 * s;
        let (prefactor, phi) = if at_centre {
            // zeta(2s) has its pole here: the modes vanish and
            // phi(1/2) = -1.
            (Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0))
        } else {
            let z2s = zeta(two_s)?;
            if z2s.norm() < CONDITIONING_MARGIN {
                return Err(Error::Conditioning(format!(
                    "s = {s} is within {CONDITIONING_MARGIN} of a zero of zeta(2s)"
                )));
            }
            let pre = (s * PI.ln() - ln_gamma(s)).exp() / z2s;
            // phi(s) = xi(2s - 1) / xi(2s) = xi(2 - 2s) / xi(2s)
            let phi = completed_zeta(2.0 - two_s)? / completed_zeta(two_s)?;
            (pre, phi)
        };
        let q_pow_minus_2s = cpow(q as f64, -two_s);
        let scale_pow = cpow(class.scale, -two_s);
        let mut model = CoefficientModel {
            level: q,
            cusp,
            s,
            class,
            c_plus: Complex64::new(if cusp == Cusp::Infinity { 1.0 } else { 0.0 }, 0.0),
            c_minus: Complex64::new(0.0, 0.0),
            prefactor,
            q_pow_minus_2s,
            scale_pow,
        };
        model.c_minus = phi * model.constant_correction();
        Ok(model)
    }

    /// `q`-part of the totient series restricted to `C(k, inf)` over the
    /// full `q`-part, times `scale^{-2s}`.
    fn constant_correction(&self) -> Complex64 {
        let q = self.level;
        if q == 1 {
            return Complex64::new(1.0, 0.0);
        }
        // sum_{k>=0} phi(q^k) q^{-2ks} = (1 - x/q) / (1 - x), x = q^{1-2s}.
        // Ratios are formed symbolically so that |x| = 1 is harmless.
        let x = cpow(q as f64, 1.0 - 2.0 * self.s);
        let qf = q as f64;
        let inv_full = (1.0 - x) / (1.0 - x / qf);
        let restricted_over_full = match self.class.valuation {
            ValuationRule::Any => Complex64::new(1.0, 0.0),
            ValuationRule::Coprime => inv_full,
            // (full - 1) / full
            ValuationRule::Multiple => (1.0 - 1.0 / qf) * x / (1.0 - x / qf),
        };
        self.scale_pow * restricted_over_full
    }

    /// `q`-part correction of the modulus series at frequency `n != 0`.
    fn mode_correction(&self, n: u64) -> Complex64 {
        let q = self.level;
        if q == 1 {
            return Complex64::new(1.0, 0.0);
        }
        let v = arith::valuation(n, q);
        let mut full = Complex64::new(0.0, 0.0);
        let mut restricted = Complex64::new(0.0, 0.0);
        let mut qk = 1u64;
        let mut weight = Complex64::new(1.0, 0.0);
        // c_{q^k}(n) vanishes once k > v + 1.
        for k in 0..=v + 1 {
            let term = weight * ramanujan_sum(qk, n) as f64;
            full += term;
            if self.class.valuation.admits(k) {
                restricted += term;
            }
            qk *= q;
            weight *= self.q_pow_minus_2s;
        }
        self.scale_pow * restricted / full
    }

    /// `a_n`; even in `n` by construction through `|n|`.
    pub fn mode(&self, n: i64) -> Complex64 {
        assert!(n != 0, "mode index must be nonzero");
        if self.prefactor == Complex64::new(0.0, 0.0) {
            return self.prefactor;
        }
        let m = n.unsigned_abs();
        let sigma = divisor_sigma(1.0 - 2.0 * self.s, m).expect("m >= 1");
        let abs_pow = cpow(m as f64, self.s - 1.0);
        self.prefactor * abs_pow * sigma * self.mode_correction(m)
    }

    /// Upper bound on `|a_n|` valid for every `n <= n_max`, up to the
    /// divisor-function factor.
    fn mode_envelope(&self, n: u64) -> f64 {
        let sig = self.s.re;
        let growth = (n as f64).powf(sig - 1.0) * (n as f64).powf((1.0 - 2.0 * sig).max(0.0));
        let mut corr: f64 = 0.0;
        if self.level == 1 {
            corr = 1.0;
        } else {
            let mut m = 1u64;
            for _ in 0..4 {
                corr = corr.max(self.mode_correction(m).norm());
                m *= self.level;
            }
        }
        self.prefactor.norm() * growth * 2.0 * (n as f64).sqrt() * corr
    }

    /// Smallest `N` such that the modes `|n| > N` contribute less than `tol`
    /// at height `y`, using `|K_{nu}(x)| <= sqrt(2 pi / x) e^{-x + (Re nu)^2 / (2x)}`.
    pub fn truncation_for(&self, y: f64, tol: f64) -> usize {
        if self.prefactor.norm() == 0.0 {
            return 0;
        }
        let order_re = (self.s.re - 0.5).abs();
        let bound = |n: u64| {
            let x = 2.0 * PI * n as f64 * y;
            let k = (2.0 * PI / x).sqrt() * (-x + order_re * order_re / (2.0 * x)).exp();
            // +-n, divisor function, 2 sqrt(|n| y)
            2.0 * self.mode_envelope(n) * k * 2.0 * (n as f64 * y).sqrt()
        };
        let mut n = 1u64;
        loop {
            // Tail from n on: the terms decay at least geometrically with
            // ratio e^{-2 pi y} times a polynomial factor.
            let b = bound(n);
            let ratio = (bound(n + 1) / b).min(1.0);
            if ratio < 0.9 && b / (1.0 - ratio) < tol {
                return (n - 1) as usize;
            }
            n += 1;
            if n > 1_000_000 {
                return n as usize;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classes_from_enumeration() {
        assert_eq!(
            moduli_class(1, Cusp::Infinity).unwrap().valuation,
            ValuationRule::Any
        );
        let inf = moduli_class(5, Cusp::Infinity).unwrap();
        assert_eq!(
            inf,
            ModuliClass {
                scale: 1.0,
                valuation: ValuationRule::Multiple
            }
        );
        let zero = moduli_class(7, Cusp::Zero).unwrap();
        assert!((zero.scale - 7f64.sqrt()).abs() < 1e-12);
        assert_eq!(zero.valuation, ValuationRule::Coprime);
        for q in [101, 1009, 10007] {
            assert_eq!(
                moduli_class(q, Cusp::Infinity).unwrap(),
                ModuliClass {
                    scale: 1.0,
                    valuation: ValuationRule::Multiple
                }
            );
            let zero = moduli_class(q, Cusp::Zero).unwrap();
            assert_eq!(zero.valuation, ValuationRule::Coprime);
            assert!((zero.scale - (q as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn modes_are_even() {
        for (q, cusp) in [(1, Cusp::Infinity), (5, Cusp::Infinity), (5, Cusp::Zero)] {
            let m = CoefficientModel::new(q, cusp, c(0.5, 3.0)).unwrap();
            for n in 1..30 {
                assert_eq!(m.mode(n), m.mode(-n));
            }
        }
    }

    #[test]
    fn level_one_ratio_matches_divisor_form() {
        // a_n ∝ |n|^{s-1} sigma_{1-2s}(n): at s = 2, a_2/a_1 = 2 * (1 + 2^-3).
        let m = CoefficientModel::new(1, Cusp::Infinity, c(2.0, 0.0)).unwrap();
        let r = m.mode(2) / m.mode(1);
        assert!((r - c(2.0 * 1.125, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn level_q_matches_oldform_combination() {
        // E_inf = (q^s E(qz) - E(z)) / (q^{2s} - 1),
        // E_0   = (q^s E(z) - E(qz)) / (q^{2s} - 1).
        // In the normalisation above E(qz) has mode n = mq with coefficient
        // a_m^{(1)}, since 2 sqrt(|n| y) = 2 sqrt(|m| q y).
        for s in [c(2.0, 0.0), c(0.5, 4.0), c(0.7, -1.3)] {
            let one = CoefficientModel::new(1, Cusp::Infinity, s).unwrap();
            for q in [2u64, 5, 11] {
                let qs = cpow(q as f64, s);
                let den = qs * qs - 1.0;
                let inf = CoefficientModel::new(q, Cusp::Infinity, s).unwrap();
                let zero = CoefficientModel::new(q, Cusp::Zero, s).unwrap();
                for n in 1..=(3 * q as i64) {
                    let scaled = if n % q as i64 == 0 {
                        one.mode(n / q as i64)
                    } else {
                        c(0.0, 0.0)
                    };
                    let want_inf = (qs * scaled - one.mode(n)) / den;
                    let want_zero = (qs * one.mode(n) - scaled) / den;
                    assert!(
                        (inf.mode(n) - want_inf).norm() < 1e-12 * want_inf.norm().max(1e-3),
                        "q={q} n={n} s={s}"
                    );
                    assert!(
                        (zero.mode(n) - want_zero).norm() < 1e-12 * want_zero.norm().max(1e-3),
                        "q={q} n={n} s={s}"
                    );
                }
                let phi = one.c_minus;
                let want = phi * (q as f64 - 1.0) / den;
                assert!((inf.c_minus - want).norm() < 1e-12 * want.norm());
                let want = phi * (qs - cpow(q as f64, 1.0 - s)) / den;
                assert!((zero.c_minus - want).norm() < 1e-12 * want.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn centre_of_critical_strip() {
        let m = CoefficientModel::new(1, Cusp::Infinity, c(0.5, 0.0)).unwrap();
        assert_eq!(m.c_minus, c(-1.0, 0.0));
        assert_eq!(m.mode(3), c(0.0, 0.0));
        let m = CoefficientModel::new(7, Cusp::Infinity, c(0.5, 0.0)).unwrap();
        assert!((m.c_minus + 1.0).norm() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            CoefficientModel::new(1, Cusp::Infinity, c(1.0, 0.0)),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            CoefficientModel::new(6, Cusp::Infinity, c(2.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            CoefficientModel::new(1, Cusp::Zero, c(2.0, 0.0)),
            Err(Error::Domain(_))
        ));
        // First zero of zeta at 1/2 + 14.1347i: s = 1/4 + 7.06736i.
        let near = c(0.25, 14.134_725_141_734_693 / 2.0);
        assert!(matches!(
            CoefficientModel::new(1, Cusp::Infinity, near),
            Err(Error::Conditioning(_))
        ));
    }
}
