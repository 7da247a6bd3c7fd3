use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Largest `|Im(order)|` accepted by [`bessel_k`].
pub const BESSEL_MAX_IMAG_ORDER: f64 = 100.0;

const MAX_LEVELS: usize = 14;

/// Modified Bessel function of the second kind `K_nu(x)`, `x > 0`.
///
/// Uses `K_nu(x) = 1/2 int_R exp(-x cosh w - nu w) dw` on the shifted line
/// `w = u - i theta`. For `nu = sigma + it` the shift pulls out a factor
/// `e^{-t theta}`, so choosing `theta` near the saddle removes almost all
/// of the cancellation that makes the real-line integral useless for large
/// `|t|`. The shifted integrand is analytic and decays doubly
/// exponentially, so the trapezoid rule converges geometrically; the step
/// is halved until two successive sums agree.
pub fn bessel_k(order: Complex64, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "K-Bessel argument must be positive (got {x})"
        )));
    }
    if !order.re.is_finite() || !order.im.is_finite() {
        return Err(Error::Domain("K-Bessel order must be finite".into()));
    }
    if order.im.abs() > BESSEL_MAX_IMAG_ORDER || order.re.abs() > BESSEL_MAX_IMAG_ORDER {
        return Err(Error::Capability(format!(
            "K-Bessel order {order} outside the supported range |Re|, |Im| <= {BESSEL_MAX_IMAG_ORDER}"
        )));
    }
    // K_nu = K_{-nu}: work with Im(nu) >= 0.
    let nu = if order.im < 0.0 { -order } else { order };
    let t = nu.im;
    let sigma = nu.re;

    let delta = if t > 0.0 {
        (2.5 / t).min(FRAC_PI_2)
    } else {
        FRAC_PI_2
    };
    let saddle = if t < x { (t / x).asin() } else { FRAC_PI_2 };
    let theta = saddle.min(FRAC_PI_2 - delta).max(0.0);
    let (sin_t, cos_t) = theta.sin_cos();

    // Integrand on the shifted line, with e^{-t theta} pulled out.
    let shift = Complex64::new(0.0, -theta);
    let f = |u: f64| -> Complex64 {
        let w = Complex64::new(u, 0.0) + shift;
        let arg = -x * w.cosh() - nu * w;
        (arg + t * theta).exp()
    };
    let log_mag = |u: f64| -x * cos_t * u.cosh() - sigma * u;

    // Integration window: where the magnitude is within e^-44 of its peak.
    let peak = {
        // log_mag is concave, maximised where x cos(theta) sinh u = -sigma.
        let u0 = (-sigma / (x * cos_t)).asinh();
        log_mag(u0)
    };
    let cut = peak - 44.0;
    let mut lo = 0.0f64;
    while log_mag(lo) > cut || log_mag(lo - 0.5) > log_mag(lo) {
        lo -= 0.5;
    }
    let mut hi = 0.0f64;
    while log_mag(hi) > cut || log_mag(hi + 0.5) > log_mag(hi) {
        hi += 0.5;
    }

    // Initial step resolves the fastest oscillation inside the window.
    let freq = (x * sin_t * lo.abs().max(hi).cosh() + t).max(1.0);
    let mut h = (0.5f64).min(2.0 / freq);
    let n0 = ((hi - lo) / h).ceil() as usize;
    h = (hi - lo) / n0 as f64;
    let mut sum: Complex64 = (0..=n0).map(|k| f(lo + k as f64 * h)).sum();
    let mut abs_sum: f64 = (0..=n0).map(|k| f(lo + k as f64 * h).norm()).sum();
    let mut estimate = sum * h;
    let mut count = n0;
    let mut prev_change = f64::INFINITY;
    for level in 0..MAX_LEVELS {
        let half = h / 2.0;
        let mut mid = Complex64::new(0.0, 0.0);
        let mut mid_abs = 0.0;
        for k in 0..count {
            let v = f(lo + (2 * k + 1) as f64 * half);
            mid += v;
            mid_abs += v.norm();
        }
        sum += mid;
        abs_sum += mid_abs;
        count *= 2;
        h = half;
        let next = sum * h;
        let scale = abs_sum * h;
        let change = (next - estimate).norm();
        estimate = next;
        // Once resolved, each halving squares the error; a change that no
        // longer shrinks is rounding noise.
        let plateau = change <= 1e-12 * scale && change >= 0.25 * prev_change;
        if level >= 1 && (change <= 1e-15 * scale || plateau) {
            break;
        }
        prev_change = change;
        if level + 1 == MAX_LEVELS {
            return Err(Error::Capability(format!(
                "K-Bessel quadrature failed to converge for order {order}, x = {x}"
            )));
        }
    }
    let mut value = estimate * 0.5 * (-t * theta).exp();
    if nu.im == 0.0 || nu.re == 0.0 {
        value.im = 0.0;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn half_integer_order_closed_form() {
        let k = bessel_k(c(0.5, 0.0), 2.0).unwrap();
        let want = (PI / 4.0).sqrt() * (-2.0f64).exp();
        assert!((k.re - want).abs() < 1e-14 * want);
        // K_{3/2}(x) = sqrt(pi/2x) e^-x (1 + 1/x)
        for x in [0.3, 2.0, 9.0] {
            let k = bessel_k(c(1.5, 0.0), x).unwrap().re;
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
            assert!((k - want).abs() < 1e-13 * want, "x = {x}");
        }
    }

    #[test]
    fn order_zero_against_plain_quadrature() {
        // Oracle: trapezoid on the real line for int_0^inf e^{-cosh u} du,
        // fine enough that the doubly-exponential decay gives full accuracy.
        let h = 1e-3;
        let f = |u: f64| (-u.cosh()).exp();
        let oracle = h * (0.5 * f(0.0) + (1..=8000).map(|k| f(k as f64 * h)).sum::<f64>());
        let k = bessel_k(c(0.0, 0.0), 1.0).unwrap().re;
        assert!((k - oracle).abs() < 1e-12, "{k} vs {oracle}");
        assert!((k - 0.421_024_438_240_708_33).abs() < 1e-14);
    }

    #[test]
    fn imaginary_order_is_real_and_even() {
        let a = bessel_k(c(0.0, 5.0), 3.0).unwrap();
        let b = bessel_k(c(0.0, -5.0), 3.0).unwrap();
        assert_eq!(a.im, 0.0);
        assert_eq!(a, b);
        assert!((a.re - 3.794_167_468_892_008e-4).abs() < 1e-10 * 3.79e-4);
    }

    #[test]
    fn reference_values_from_mpmath() {
        let cases = [
            (c(0.0, 40.0), 5.5, c(-1.782_917_311_480_906e-28, 0.0)),
            (c(0.0, 40.0), 60.0, c(1.483_114_784_334_450e-33, 0.0)),
            (c(0.0, 50.0), 0.5, c(2.415_896_114_956_703e-35, 0.0)),
            (c(0.0, 100.0), 80.0, c(-1.210_348_227_991_852e-69, 0.0)),
            (
                c(0.5, 3.0),
                1.5,
                c(0.006_006_809_983_486_037, 0.014_547_496_886_611_646),
            ),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(nu, x).unwrap();
            // Relative to the natural scale e^{-pi |t| / 2} of the oscillatory regime.
            let scale = want.norm().max((-PI * nu.im.abs() / 2.0).exp() * 1e-3);
            assert!(
                (got - want).norm() < 1e-10 * scale,
                "K_{nu}({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_k(c(0.0, 1.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(c(0.0, 1.0), -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            bessel_k(c(0.0, 150.0), 1.0),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn three_term_recurrence() {
        // K_{nu-1} - K_{nu+1} = -(2 nu / y) K_nu on nu = 1/2 + it.
        for t in [0.0, 1.0, 5.0, 20.0] {
            for y in [0.5, 2.0, 7.0, 15.0, 30.0] {
                let nu = c(0.5, t);
                let km = bessel_k(nu - 1.0, y).unwrap();
                let kp = bessel_k(nu + 1.0, y).unwrap();
                let k = bessel_k(nu, y).unwrap();
                let lhs = km - kp;
                let rhs = -(nu * 2.0 / y) * k;
                let scale = lhs.norm().max(rhs.norm()).max(kp.norm());
                assert!(
                    (lhs - rhs).norm() <= 1e-8 * scale,
                    "t={t} y={y}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn large_argument_envelope() {
        // K_{it}(y) e^y sqrt(y) tends to sqrt(pi/2).
        for t in [1.0, 5.0] {
            let mut prev = None;
            for y in [10.0, 20.0, 40.0, 80.0, 160.0] {
                let v = bessel_k(c(0.0, t), y).unwrap().re * y.exp() * y.sqrt();
                assert!(v > 0.0 && v < 2.0);
                if let Some(p) = prev {
                    assert!((v - p as f64).abs() < 0.5);
                }
                prev = Some(v);
            }
            let first_order = (4.0 * t * t + 1.0) / (8.0 * 160.0);
            assert!(
                (prev.unwrap() - (PI / 2.0).sqrt()).abs() < 1.5 * first_order * (PI / 2.0).sqrt()
            );
        }
    }

    #[test]
    fn rounding_limited_arguments_terminate() {
        // Here the trapezoid sums stall at the rounding level before the
        // strict stopping rule is met.
        let k = bessel_k(c(0.0, 20.0), 17.80654716054695).unwrap().re;
        assert!((k - 1.8136813153262323e-14).abs() < 1e-12 * 1.8136813153262323e-14);
        for i in 0..400 {
            let x = 0.1 + 0.25 * i as f64;
            for t in [7.0, 20.0, 45.0] {
                assert!(bessel_k(c(0.0, t), x).is_ok(), "t = {t}, x = {x}");
            }
        }
    }
}
