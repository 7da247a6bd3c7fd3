//! Hyperbolic quadrature on the modular surface: areas, integrals of
//! `|E|²` over regions and against test functions, and the experiments
//! built on them.
//!
//! The outer integral runs over height. Below `y = 1` the height is
//! parametrized as `y = cos u` (`u <= 0`) and above it as `y = 1/(1 - u)`,
//! so the arc bounding `F` produces no square-root endpoint behaviour and
//! unbounded regions map to a finite interval. The inner integral over
//! `x` is taken in closed form from the Fourier row wherever the weight is
//! constant.

mod adaptive;
mod region;
mod test_function;

pub use adaptive::{gauss_legendre8, integrate_segments, Quadrature, DEFAULT_PANEL_BUDGET};
pub use region::{hyperbolic_area, in_f, Rect, Region};
pub use test_function::{smooth_step, TestFunction};

use crate::eisenstein::{EisensteinSeries, FourierRow};
use crate::error::{Error, Result};
use crate::halfplane::Cusp;
use crate::heckeseries::slope;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use test_function::{Piece, Weight};

/// Smallest tolerance accepted for integrals of `|E|²`.
pub const MIN_ABS2_TOL: f64 = 1e-8;

/// Truncation tolerance of the Fourier rows used inside quadrature.
const ROW_TOL: f64 = 1e-12;

/// What is integrated against `dμ`.
#[derive(Debug, Clone)]
pub enum Integrand {
    /// The constant 1; integrals become hyperbolic areas (calibration).
    One,
    /// `|E_{q,κ}(z, 1/2 + it)|²`.
    Abs2(EisensteinSeries),
}

impl Integrand {
    pub fn abs2(q: u64, cusp: Cusp, t: f64) -> Result<Self> {
        Ok(Self::Abs2(EisensteinSeries::new(
            q,
            cusp,
            Complex64::new(0.5, t),
        )?))
    }

    fn row(&self, y: f64) -> Result<FourierRow> {
        match self {
            Self::One => Ok(FourierRow {
                constant: Complex64::new(1.0, 0.0),
                modes: Vec::new(),
            }),
            Self::Abs2(series) => series.row(y, ROW_TOL),
        }
    }

    fn oscillation(&self) -> f64 {
        match self {
            Self::One => 0.0,
            Self::Abs2(series) => series.s().im.abs(),
        }
    }
}

fn y_of_u(u: f64) -> f64 {
    if u <= 0.0 {
        u.cos()
    } else {
        1.0 / (1.0 - u)
    }
}

fn u_of_y(y: f64) -> f64 {
    if y <= 1.0 {
        -y.acos()
    } else if y.is_infinite() {
        1.0
    } else {
        1.0 - 1.0 / y
    }
}

/// `dμ / (dx du)`.
fn jacobian(u: f64) -> f64 {
    if u <= 0.0 {
        -u.sin() / u.cos().powi(2)
    } else {
        1.0
    }
}

/// Lowest point of `F`.
fn f_floor() -> f64 {
    0.75f64.sqrt()
}

fn segments(range: (f64, f64), mut breaks: Vec<f64>) -> Vec<(f64, f64)> {
    let lo = range.0.max(f_floor());
    let hi = range.1;
    breaks.extend([lo, hi, 1.0]);
    let mut us: Vec<f64> = breaks
        .into_iter()
        .filter(|b| *b >= lo && *b <= hi)
        .map(u_of_y)
        .collect();
    us.sort_by(f64::total_cmp);
    us.dedup();
    us.windows(2).map(|w| (w[0], w[1])).collect()
}

fn integrate_pieces<'a, P>(
    integrand: &Integrand,
    range: (f64, f64),
    breaks: Vec<f64>,
    pieces_at: P,
    tol: f64,
) -> Result<Quadrature>
where
    P: Fn(f64, &mut Vec<Piece<'a>>) + Sync,
{
    let inner_tol = tol * 1e-3;
    let f = |u: f64| -> Result<f64> {
        let y = y_of_u(u);
        let mut pieces = Vec::new();
        pieces_at(y, &mut pieces);
        if pieces.is_empty() {
            return Ok(0.0);
        }
        let row = integrand.row(y)?;
        let mut acc = 0.0;
        for p in &pieces {
            acc += match p.weight {
                Weight::Const(c) => c * row.abs2_integral(p.u, p.v),
                w => {
                    let g = |x: f64| Ok(w.at(x) * row.abs2(x));
                    integrate_segments(&g, &[(p.u, p.v)], 2, inner_tol, DEFAULT_PANEL_BUDGET)?.value
                }
            };
        }
        Ok(acc * jacobian(u))
    };
    let initial = 2 + (integrand.oscillation() / 2.0).ceil() as usize;
    integrate_segments(
        &f,
        &segments(range, breaks),
        initial,
        tol,
        DEFAULT_PANEL_BUDGET,
    )
}

/// `∫_R (integrand) dμ` over a region.
pub fn integrate_region(integrand: &Integrand, region: &Region, tol: f64) -> Result<Quadrature> {
    if matches!(integrand, Integrand::Abs2(_)) && !region.is_bounded() {
        return Err(Error::Domain(
            "|E|² is not integrable over an unbounded region".into(),
        ));
    }
    let pieces_at = |y: f64, out: &mut Vec<Piece<'_>>| {
        for r in region.rects() {
            for (u, v) in r.section(y) {
                out.push(Piece {
                    u,
                    v,
                    weight: Weight::Const(1.0),
                });
            }
        }
    };
    integrate_pieces(
        integrand,
        region.y_range(),
        region.y_breaks(),
        pieces_at,
        tol,
    )
}

/// `∫ φ (integrand) dμ`.
pub fn integrate_against<'a>(
    integrand: &Integrand,
    phi: &'a TestFunction,
    tol: f64,
) -> Result<Quadrature> {
    let pieces_at = |y: f64, out: &mut Vec<Piece<'a>>| phi.pieces(y, 1.0, out);
    integrate_pieces(integrand, phi.y_range(), phi.y_breaks(), pieces_at, tol)
}

fn check_abs2_tol(tol: f64) -> Result<()> {
    if !(tol >= MIN_ABS2_TOL) {
        return Err(Error::Domain(format!(
            "tolerance must be at least {MIN_ABS2_TOL} (got {tol})"
        )));
    }
    Ok(())
}

/// `∫_R |E_{q,κ}(z, 1/2+it)|² dμ`.
pub fn integrate_abs2(q: u64, cusp: Cusp, t: f64, region: &Region, tol: f64) -> Result<Quadrature> {
    check_abs2_tol(tol)?;
    integrate_region(&Integrand::abs2(q, cusp, t)?, region, tol)
}

/// `⟨|E|², φ⟩ = ∫ φ |E_{q,κ}(z, 1/2+it)|² dμ`.
pub fn inner_product_phi(
    q: u64,
    cusp: Cusp,
    t: f64,
    phi: &TestFunction,
    tol: f64,
) -> Result<Quadrature> {
    check_abs2_tol(tol)?;
    integrate_against(&Integrand::abs2(q, cusp, t)?, phi, tol)
}

/// `∫ φ dμ`.
pub fn phi_mass(phi: &TestFunction, tol: f64) -> Result<f64> {
    Ok(integrate_against(&Integrand::One, phi, tol)?.value)
}

/// Mass ratio of two regions against the ratio of their areas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueRatio {
    pub ratio: f64,
    pub target: f64,
    pub numerator: Quadrature,
    pub denominator: Quadrature,
}

impl QueRatio {
    pub fn deviation(&self) -> f64 {
        (self.ratio - self.target).abs()
    }
}

pub fn que_ratio(q: u64, cusp: Cusp, t: f64, a: &Region, b: &Region, tol: f64) -> Result<QueRatio> {
    check_abs2_tol(tol)?;
    let integrand = Integrand::abs2(q, cusp, t)?;
    let numerator = integrate_region(&integrand, a, tol)?;
    let denominator = integrate_region(&integrand, b, tol)?;
    if denominator.value <= 0.0 {
        return Err(Error::Conditioning(
            "mass of the reference region vanishes".into(),
        ));
    }
    Ok(QueRatio {
        ratio: numerator.value / denominator.value,
        target: hyperbolic_area(a) / hyperbolic_area(b),
        numerator,
        denominator,
    })
}

/// One line of a Luo–Sarnak scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    pub lhs: f64,
    pub error: f64,
    /// `(3/π) log(1/4 + t²) ∫ φ dμ`.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuoSarnakScan {
    pub rows: Vec<ScanRow>,
    pub phi_mass: f64,
    /// Least-squares slope of `lhs / ∫ φ dμ` against `log(1/4 + t²)`.
    pub slope: f64,
}

/// The constant `3/π` of the level-one asymptotic.
pub const LUO_SARNAK_CONSTANT: f64 = 3.0 / PI;

/// `⟨|E(·, 1/2+it)|², φ⟩` at level one for each `t`.
pub fn luo_sarnak_scan(t_values: &[f64], phi: &TestFunction, tol: f64) -> Result<LuoSarnakScan> {
    if t_values.len() < 2 {
        return Err(Error::Domain(
            "a scan needs at least two values of t".into(),
        ));
    }
    if let Some(t) = t_values.iter().find(|t| !(5.0..=50.0).contains(*t)) {
        return Err(Error::Domain(format!("t = {t} is outside [5, 50]")));
    }
    let mass = phi_mass(phi, tol * 1e-3)?;
    if mass <= 0.0 {
        return Err(Error::Domain("test function has no mass".into()));
    }
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let r = inner_product_phi(1, Cusp::Infinity, t, phi, tol)?;
        let log_t = (0.25 + t * t).ln();
        rows.push(ScanRow {
            t,
            lhs: r.value,
            error: r.error,
            predicted: LUO_SARNAK_CONSTANT * log_t * mass,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (0.25 + r.t * r.t).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.lhs / mass).collect();
    Ok(LuoSarnakScan {
        slope: slope(&xs, &ys),
        rows,
        phi_mass: mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn height_map_round_trip() {
        for y in [0.87, 0.95, 1.0, 1.3, 7.0] {
            assert!((y_of_u(u_of_y(y)) - y).abs() < 1e-14);
        }
        assert_eq!(u_of_y(f64::INFINITY), 1.0);
        assert!((u_of_y(f_floor()) + PI / 6.0).abs() < 1e-15);
        assert!(jacobian(-PI / 6.0) > 0.0);
    }

    #[test]
    fn calibration_on_random_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x1 = rng.gen_range(-0.7..0.3);
            let x2 = x1 + rng.gen_range(0.05..0.6);
            let y1 = rng.gen_range(0.75..1.6);
            let y2 = y1 + rng.gen_range(0.1..3.0);
            let Ok(r) = Region::from_boxes(&[(x1, x2, y1, y2)]) else {
                continue;
            };
            let q = integrate_region(&Integrand::One, &r, 1e-11).unwrap();
            assert!(
                (q.value - hyperbolic_area(&r)).abs() < 1e-9,
                "{r}: {} vs {}",
                q.value,
                hyperbolic_area(&r)
            );
        }
        let full = integrate_region(&Integrand::One, &Region::fundamental_domain(), 1e-12).unwrap();
        assert!((full.value - PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn vanishes_at_the_centre_at_level_one() {
        let r = Region::from_boxes(&[(0.0, 0.5, 2.0, 3.0)]).unwrap();
        let q = integrate_abs2(1, Cusp::Infinity, 0.0, &r, 1e-8).unwrap();
        assert!(q.value.abs() < 1e-12, "{q:?}");
    }

    #[test]
    fn refinement_is_stable() {
        let r = Region::from_boxes(&[(0.0, 0.5, 2.0, 3.0)]).unwrap();
        let coarse = integrate_abs2(1, Cusp::Infinity, 3.0, &r, 1e-5).unwrap();
        let fine = integrate_abs2(1, Cusp::Infinity, 3.0, &r, 1e-7).unwrap();
        let rel = (coarse.value - fine.value).abs() / fine.value;
        assert!(rel < 1e-4, "{rel}");
        assert!((coarse.value - fine.value).abs() <= coarse.error);
    }

    #[test]
    fn even_in_x() {
        let r = Region::from_boxes(&[(-0.4, 0.1, 0.9, 1.7)]).unwrap();
        for (q, cusp) in [(1, Cusp::Infinity), (11, Cusp::Infinity), (11, Cusp::Zero)] {
            let a = integrate_abs2(q, cusp, 2.0, &r, 1e-8).unwrap();
            let b = integrate_abs2(q, cusp, 2.0, &r.reflected(), 1e-8).unwrap();
            assert!(
                (a.value - b.value).abs() < a.error + b.error + 1e-12,
                "{q} {cusp:?}"
            );
        }
    }

    #[test]
    fn ratio_identities() {
        let a = Region::from_boxes(&[(0.0, 0.4, 1.2, 2.0)]).unwrap();
        let b = Region::from_boxes(&[(-0.5, 0.5, 1.0, 3.0)]).unwrap();
        let same = que_ratio(11, Cusp::Infinity, 1.0, &a, &a, 1e-8).unwrap();
        assert_eq!((same.ratio, same.target), (1.0, 1.0));
        let ab = que_ratio(11, Cusp::Infinity, 1.0, &a, &b, 1e-8).unwrap();
        let ba = que_ratio(11, Cusp::Infinity, 1.0, &b, &a, 1e-8).unwrap();
        assert!((ab.ratio * ba.ratio - 1.0).abs() < 1e-14);
        assert_eq!(
            ab,
            que_ratio(11, Cusp::Infinity, 1.0, &a, &b, 1e-8).unwrap()
        );
    }

    #[test]
    fn test_function_integrals() {
        let region = Region::from_boxes(&[(-0.2, 0.3, 1.1, 1.8)]).unwrap();
        let zero = TestFunction::default_profile().scaled(0.0);
        assert_eq!(
            inner_product_phi(1, Cusp::Infinity, 6.0, &zero, 1e-8)
                .unwrap()
                .value,
            0.0
        );
        let sharp = integrate_abs2(1, Cusp::Infinity, 6.0, &region, 1e-8)
            .unwrap()
            .value;
        let mut last = f64::INFINITY;
        for delta in [0.05, 0.02, 0.01] {
            let phi = TestFunction::smoothed_indicator(region.clone(), delta).unwrap();
            let v = inner_product_phi(1, Cusp::Infinity, 6.0, &phi, 1e-8)
                .unwrap()
                .value;
            let gap = (v - sharp).abs();
            assert!(gap < last, "δ = {delta}: {gap}");
            last = gap;
        }
        assert!(last < 0.02 * sharp);
        let p1 = TestFunction::default_profile();
        let p2 = TestFunction::smoothed_indicator(region, 0.05).unwrap();
        let sum = TestFunction::Sum(vec![p1.clone(), p2.clone()]);
        let i = |f: &TestFunction| {
            inner_product_phi(5, Cusp::Zero, 2.0, f, 1e-8)
                .unwrap()
                .value
        };
        assert!((i(&sum) - i(&p1) - i(&p2)).abs() < 3e-8);
        assert!((i(&p1.clone().scaled(2.0)) - 2.0 * i(&p1)).abs() < 3e-8);
        assert!(
            (phi_mass(&p1.clone().scaled(2.0), 1e-12).unwrap()
                - 2.0 * phi_mass(&p1, 1e-12).unwrap())
            .abs()
                < 1e-11
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let r = Region::fundamental_domain();
        assert!(integrate_abs2(1, Cusp::Infinity, 1.0, &r, 1e-6).is_err());
        let b = Region::from_boxes(&[(0.0, 0.4, 1.2, 2.0)]).unwrap();
        assert!(integrate_abs2(1, Cusp::Infinity, 1.0, &b, 1e-9).is_err());
        assert!(integrate_abs2(4, Cusp::Infinity, 1.0, &b, 1e-6).is_err());
        assert!(luo_sarnak_scan(&[3.0, 10.0], &TestFunction::default_profile(), 1e-6).is_err());
    }
}
