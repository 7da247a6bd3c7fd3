use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::PI;
use std::sync::OnceLock;

const BERNOULLI_COUNT: usize = 40;

fn bernoulli_table() -> &'static [f64; BERNOULLI_COUNT + 1] {
    static TABLE: OnceLock<[f64; BERNOULLI_COUNT + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Akiyama-Tanigawa, exact rationals.
        let mut out = [0.0; BERNOULLI_COUNT + 1];
        let mut a: Vec<BigRational> = Vec::with_capacity(BERNOULLI_COUNT + 1);
        for m in 0..=BERNOULLI_COUNT {
            a.push(BigRational::new(
                BigInt::from(1),
                BigInt::from(m as u64 + 1),
            ));
            for j in (1..=m).rev() {
                let diff = &a[j - 1] - &a[j];
                a[j - 1] = diff * BigRational::from_integer(BigInt::from(j as u64));
            }
            out[m] = a[0].to_f64().unwrap_or(f64::NAN);
        }
        // The recurrence yields B_1 = +1/2; the usual convention is -1/2.
        out[1] = -0.5;
        out
    })
}

/// Bernoulli number `B_n` for `n <= 40`.
pub fn bernoulli(n: usize) -> f64 {
    bernoulli_table()[n]
}

/// Logarithm of the gamma function (some branch; `exp` of it is exact).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let mut w = z;
    let mut shift = Complex64::zero();
    while w.norm() < 12.0 || w.re < 8.0 {
        shift += w.ln();
        w += 1.0;
    }
    let mut series = Complex64::zero();
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut pow = inv;
    for k in 1..=12 {
        let b = bernoulli(2 * k);
        series += pow * (b / ((2 * k) as f64 * (2 * k - 1) as f64));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), 1.0);
        assert!((bernoulli(2) - 1.0 / 6.0).abs() < 1e-16);
        assert!((bernoulli(4) + 1.0 / 30.0).abs() < 1e-16);
        assert_eq!(bernoulli(3), 0.0);
        assert!((bernoulli(12) + 691.0 / 2730.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_values() {
        let close = |a: Complex64, b: Complex64, tol: f64| (a - b).norm() <= tol * b.norm();
        assert!(close(
            gamma(Complex64::new(5.0, 0.0)),
            Complex64::new(24.0, 0.0),
            1e-14
        ));
        assert!(close(
            gamma(Complex64::new(0.5, 0.0)),
            Complex64::new(PI.sqrt(), 0.0),
            1e-14
        ));
        assert!(close(
            gamma(Complex64::new(-0.5, 0.0)),
            Complex64::new(-2.0 * PI.sqrt(), 0.0),
            1e-14
        ));
        // Reference values from mpmath.gamma at 30 digits.
        let g = gamma(Complex64::new(0.5, 10.0));
        assert!(
            close(
                g,
                Complex64::new(3.378724376234236e-7, 1.689369839038919e-7),
                1e-12
            ),
            "{g}"
        );
        let g = gamma(Complex64::new(0.25, 0.0));
        assert!(close(g, Complex64::new(3.625609908221908, 0.0), 1e-14));
    }

    #[test]
    fn modulus_on_critical_line() {
        // |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
        for t in [0.3, 4.0, 25.0, 60.0] {
            let g = gamma(Complex64::new(0.5, t)).norm_sqr();
            let want = PI / (PI * t).cosh();
            assert!((g - want).abs() <= 1e-12 * want, "t = {t}");
        }
    }
}
