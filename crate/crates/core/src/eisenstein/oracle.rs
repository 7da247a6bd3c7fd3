//! Direct coset summation in the region of absolute convergence.

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::halfplane::{validate_level, Cusp, HalfPlanePoint};
use crate::specfun::ln_gamma;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Partial coset sum and a rigorous bound on everything left out.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CosetSum {
    pub value: Complex64,
    pub tail: f64,
    pub terms: u64,
}

/// `sum Im(sigma_k^{-1} gamma z)^s` over cosets `Gamma_k \ Gamma_0(q)` whose
/// lower-left entry (after conjugation by `sigma_k^{-1}`) is at most
/// `bound`.
///
/// Cusp infinity: `y^s / |cz + d|^{2s}` over coprime `(c, d)`, `q | c`,
/// `c > 0`, plus the identity coset. Cusp zero: `(y/q)^s / |az + b|^{2s}`
/// over coprime `(a, b)` with `a > 0`, `q` not dividing `a`; the lower-left
/// entry is `sqrt(q) a`. For each row, `d` (or `b`) runs over
/// `|cx + d| <= bound`.
pub fn coset_sum_eval(
    q: u64,
    cusp: Cusp,
    z: &HalfPlanePoint<f64>,
    s: Complex64,
    bound: f64,
) -> Result<CosetSum> {
    validate_level(q)?;
    if s.re < 1.5 {
        return Err(Error::Domain(format!(
            "coset sum needs Re(s) >= 1.5 (got {s})"
        )));
    }
    if !(bound >= 1.0) {
        return Err(Error::Domain("bound must be at least 1".into()));
    }
    if q == 1 && cusp == Cusp::Zero {
        return Err(Error::Domain("level 1 has the single cusp infinity".into()));
    }
    let (x, y) = (z.x(), z.y());
    let sigma = s.re;
    let (height_scale, row_max, row_step, row_ok): (f64, u64, u64, Box<dyn Fn(u64) -> bool>) =
        match cusp {
            Cusp::Infinity => (1.0, bound.floor() as u64, q, Box::new(|_| true)),
            Cusp::Zero => (
                1.0 / q as f64,
                (bound / (q as f64).sqrt()).floor() as u64,
                1,
                Box::new(move |a: u64| a % q != 0),
            ),
        };
    let yy = y * height_scale;
    let real_s = s.im == 0.0;
    let power = |den: f64| -> Complex64 {
        // (yy / den)^s with den = |cz + d|^2
        let r = yy / den;
        if real_s {
            Complex64::new(r.powf(sigma), 0.0)
        } else {
            (s * r.ln()).exp()
        }
    };

    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0u64;
    if cusp == Cusp::Infinity {
        value += power(1.0);
        terms += 1;
    }
    let window = bound;
    let mut rows = 0u64;
    let mut c = row_step;
    while c <= row_max {
        if row_ok(c) {
            rows += 1;
            let cf = c as f64;
            let lo = (-cf * x - window).ceil() as i64;
            let hi = (-cf * x + window).floor() as i64;
            for d in lo..=hi {
                if gcd(c, d.unsigned_abs()) != 1 {
                    continue;
                }
                let re = cf * x + d as f64;
                let im = cf * y;
                value += power(re * re + im * im);
                terms += 1;
            }
        }
        c += row_step;
    }

    // Rows already visited: |cx + d| > W contributes at most
    // 2 yy^sigma (W^{-2 sigma} + W^{1 - 2 sigma} / (2 sigma - 1)).
    let per_row = 2.0
        * yy.powf(sigma)
        * (window.powf(-2.0 * sigma) + window.powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0));
    // Rows beyond the bound, all d: sum over a lattice line of a unimodal
    // function is at most its integral plus its maximum.
    let beta = (0.5 * PI.ln() + ln_gamma(Complex64::new(sigma - 0.5, 0.0))
        - ln_gamma(Complex64::new(sigma, 0.0)))
    .exp()
    .re;
    let cmax = row_max as f64;
    let c_tail = yy.powf(sigma)
        * (y.powf(1.0 - 2.0 * sigma) * beta * cmax.powf(2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0)
            + y.powf(-2.0 * sigma) * cmax.powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0));
    let tail = rows as f64 * per_row + c_tail;
    Ok(CosetSum { value, tail, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::zeta;

    fn pt(x: f64, y: f64) -> HalfPlanePoint<f64> {
        HalfPlanePoint::new(x, y).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent route: the full lattice sum over (m, n) != 0 equals
    /// 2 zeta(2s) E(z, s).
    fn lattice_sum(z: &HalfPlanePoint<f64>, s: f64, bound: i64) -> (f64, f64) {
        let (x, y) = (z.x(), z.y());
        let mut acc = 0.0;
        for m in -bound..=bound {
            for n in -bound..=bound {
                if m == 0 && n == 0 {
                    continue;
                }
                let re = m as f64 * x + n as f64;
                let im = m as f64 * y;
                acc += y.powf(s) / (re * re + im * im).powf(s);
            }
        }
        // Points outside the box have |mz + n| >= B * min(y, 1) / 2 roughly;
        // bound their contribution by the annulus-counting integral.
        let r = bound as f64 * y.min(1.0) / 2.0;
        let tail = y.powf(s) * 2.0 * PI / (y * (2.0 * s - 2.0)) * r.powf(2.0 - 2.0 * s) * 4.0;
        (acc, tail)
    }

    #[test]
    fn level_one_matches_lattice_sum() {
        let z = pt(0.0, 1.0);
        let coset = coset_sum_eval(1, Cusp::Infinity, &z, c(2.0, 0.0), 200.0).unwrap();
        let (lat, lat_tail) = lattice_sum(&z, 2.0, 400);
        let z4 = zeta(c(4.0, 0.0)).unwrap().re;
        let from_lattice = lat / (2.0 * z4);
        assert!(coset.tail < 1e-4);
        let diff = (coset.value.re - from_lattice).abs();
        assert!(
            diff <= coset.tail + lat_tail / (2.0 * z4),
            "{diff} > {} + {}",
            coset.tail,
            lat_tail
        );
        assert!(coset.value.re > 1.0);
    }

    #[test]
    fn level_q_is_a_subsum() {
        let z = pt(0.0, 1.0);
        let one = coset_sum_eval(1, Cusp::Infinity, &z, c(2.0, 0.0), 100.0).unwrap();
        let five = coset_sum_eval(5, Cusp::Infinity, &z, c(2.0, 0.0), 100.0).unwrap();
        assert!(five.value.re < one.value.re);
    }

    #[test]
    fn invariant_under_gamma0() {
        // gamma = (1, 0; 5, 1): gamma z = z / (5z + 1)
        let z = pt(0.1, 1.2);
        let g = crate::halfplane::IntMatrix::new(1, 0, 5, 1).unwrap();
        let gz = crate::halfplane::act_int(&g, &z).unwrap();
        let a = coset_sum_eval(5, Cusp::Infinity, &z, c(2.0, 0.0), 300.0).unwrap();
        let b = coset_sum_eval(5, Cusp::Infinity, &gz, c(2.0, 0.0), 300.0).unwrap();
        assert!((a.value - b.value).norm() <= a.tail + b.tail);
    }

    #[test]
    fn rejects_slow_convergence() {
        assert!(coset_sum_eval(1, Cusp::Infinity, &pt(0.0, 1.0), c(1.2, 0.0), 10.0).is_err());
    }
}
