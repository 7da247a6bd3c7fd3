//! Adaptive Gauss–Legendre quadrature with dyadic panel refinement.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Default cap on the number of panels.
pub const DEFAULT_PANEL_BUDGET: usize = 20_000;

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Order-8 Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre8<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        acc += w * (f(c - h * x)? + f(c + h * x)?);
    }
    Ok(acc * h)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    /// Sum of the rule on the two halves.
    fine: f64,
    /// The two halves, kept so that splitting reuses them.
    left: f64,
    right: f64,
    err: f64,
}

fn halves<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    Ok((gauss_legendre8(f, a, m)?, gauss_legendre8(f, m, b)?))
}

fn panel<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, whole: f64) -> Result<Panel> {
    let (left, right) = halves(f, a, b)?;
    let fine = left + right;
    Ok(Panel {
        a,
        b,
        fine,
        left,
        right,
        err: (fine - whole).abs(),
    })
}

/// Integrate `f` over the union of `segments` to absolute error `tol`.
///
/// Each panel is compared with the sum over its halves; panels whose
/// share of the error is too large are split until the summed estimates
/// fall below `tol`. Panel evaluation runs in parallel, and all sums are
/// taken in panel order, so results do not depend on scheduling.
pub fn integrate_segments<F>(
    f: &F,
    segments: &[(f64, f64)],
    initial: usize,
    tol: f64,
    budget: usize,
) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive (got {tol})"
        )));
    }
    let mut starts = Vec::new();
    for &(a, b) in segments {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!("segment [{a}, {b}] is not finite")));
        }
        if b <= a {
            continue;
        }
        let k = initial.max(1);
        for i in 0..k {
            starts.push((
                a + (b - a) * i as f64 / k as f64,
                a + (b - a) * (i + 1) as f64 / k as f64,
            ));
        }
    }
    let mut panels: Vec<Panel> = starts
        .par_iter()
        .map(|&(a, b)| {
            let whole = gauss_legendre8(f, a, b)?;
            panel(f, a, b, whole)
        })
        .collect::<Result<_>>()?;
    loop {
        let error: f64 = panels.iter().map(|p| p.err).sum();
        let value: f64 = panels.iter().map(|p| p.fine).sum();
        if !(value.is_finite() && error.is_finite()) {
            return Err(Error::Conditioning(
                "integrand produced a non-finite value".into(),
            ));
        }
        if error <= tol || panels.is_empty() {
            return Ok(Quadrature {
                value,
                error,
                panels: panels.len(),
            });
        }
        let share = tol / panels.len() as f64;
        let split: Vec<bool> = panels.iter().map(|p| p.err > share).collect();
        let grow = split.iter().filter(|s| **s).count();
        if panels.len() + grow > budget {
            return Err(Error::Budget {
                estimate: value,
                error,
            });
        }
        let next: Vec<Vec<Panel>> = panels
            .par_iter()
            .zip(split.par_iter())
            .map(|(p, &s)| {
                if !s {
                    return Ok(vec![*p]);
                }
                let m = 0.5 * (p.a + p.b);
                Ok(vec![panel(f, p.a, m, p.left)?, panel(f, m, p.b, p.right)?])
            })
            .collect::<Result<_>>()?;
        panels = next.into_iter().flatten().collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_fifteen() {
        let f = |x: f64| Ok(x.powi(15) + 3.0 * x.powi(4));
        let v = gauss_legendre8(&f, 0.0, 1.0).unwrap();
        assert!((v - (1.0 / 16.0 + 0.6)).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        assert!((2.0 * GL8_WEIGHTS.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_a_square_root() {
        let f = |x: f64| Ok(x.sqrt());
        let q = integrate_segments(&f, &[(0.0, 1.0)], 1, 1e-10, 10_000).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-10, "{:?}", q);
        assert!(q.panels > 1);
    }

    #[test]
    fn oscillatory() {
        let f = |x: f64| Ok((40.0 * x).cos());
        let q = integrate_segments(&f, &[(0.0, 1.0), (1.0, 3.0)], 2, 1e-12, 10_000).unwrap();
        assert!((q.value - (120.0f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn budget_and_errors() {
        let f = |x: f64| Ok(1.0 / x.abs().sqrt().max(1e-300));
        match integrate_segments(&f, &[(-1.0, 1.0 + 1e-9)], 1, 1e-14, 50) {
            Err(Error::Budget { estimate, error }) => assert!(estimate > 0.0 && error > 0.0),
            other => panic!("expected budget error, got {other:?}"),
        }
        let g = |_: f64| Err(Error::Domain("nope".into()));
        assert!(integrate_segments(&g, &[(0.0, 1.0)], 1, 1e-6, 10).is_err());
        assert!(integrate_segments(&|_| Ok(1.0), &[(0.0, 1.0)], 1, 0.0, 10).is_err());
    }
}
