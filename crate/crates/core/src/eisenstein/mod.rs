//! Real-analytic Eisenstein series `E_{q,k}(z, s)` on `Gamma_0(q)` for `q = 1`
//! or `q` prime, cusps infinity and zero.
//!
//! Both series are expanded at the cusp infinity (see [`coefficients`]).
//! Points outside the fundamental domain are first reduced by SL2(Z); the
//! coset of the reducing element in `Gamma_0(q) \ SL2(Z)` then decides
//! whether the Fricke involution `sigma_0` swaps the two series.

pub mod coefficients;
mod oracle;

pub use coefficients::{moduli_class, CoefficientModel, ModuliClass, ValuationRule};
pub use oracle::{coset_sum_eval, CosetSum};

use crate::error::{Error, Result};
use crate::halfplane::{reduce_to_fundamental_domain, Cusp, HalfPlanePoint, IntMatrix};
use crate::specfun::bessel_k;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Height above which every point of the standard fundamental domain lies.
pub const MIN_DOMAIN_HEIGHT: f64 = 0.866_025_403_784_438_6;

/// Truncated Fourier expansion at the cusp infinity.
#[derive(Debug, Clone, Serialize)]
pub struct FourierExpansion {
    pub level: u64,
    pub cusp: Cusp,
    pub s: Complex64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// `a_1, ..., a_N`; `a_{-n} = a_n`.
    modes: Vec<Complex64>,
}

impl FourierExpansion {
    pub fn truncation(&self) -> usize {
        self.modes.len()
    }

    /// `a_n` for `1 <= |n| <= N`.
    pub fn coefficient(&self, n: i64) -> Option<Complex64> {
        if n == 0 {
            return None;
        }
        self.modes.get(n.unsigned_abs() as usize - 1).copied()
    }

    /// Evaluate the truncated expansion at `z`.
    pub fn evaluate(&self, z: &HalfPlanePoint<f64>) -> Result<Complex64> {
        let row = row_from_modes(self.s, self.c_plus, self.c_minus, &self.modes, z.y())?;
        Ok(row.value(z.x()))
    }
}

/// Fourier data at one height: `E(x + iy) = c_0 + 2 sum_n b_n cos(2 pi n x)`.
#[derive(Debug, Clone)]
pub struct FourierRow {
    pub constant: Complex64,
    /// `b_n = a_n 2 sqrt(n y) K_{s-1/2}(2 pi n y)` for `n = 1..=N`.
    pub modes: Vec<Complex64>,
}

impl FourierRow {
    pub fn value(&self, x: f64) -> Complex64 {
        let mut v = self.constant;
        for (k, b) in self.modes.iter().enumerate() {
            v += b * (2.0 * (2.0 * PI * (k + 1) as f64 * x).cos());
        }
        v
    }

    pub fn abs2(&self, x: f64) -> f64 {
        self.value(x).norm_sqr()
    }

    /// `int_{x1}^{x2} |E(x + iy)|^2 dx`, exactly for the truncated row.
    pub fn abs2_integral(&self, x1: f64, x2: f64) -> f64 {
        let n = self.modes.len() as i64;
        let beta = |k: i64| -> Complex64 {
            if k == 0 {
                self.constant
            } else {
                self.modes[k.unsigned_abs() as usize - 1]
            }
        };
        // int e(j x) over [x1, x2]
        let weight = |j: i64| -> Complex64 {
            if j == 0 {
                Complex64::new(x2 - x1, 0.0)
            } else {
                let w = 2.0 * PI * j as f64;
                let e = |x: f64| Complex64::new(0.0, w * x).exp();
                (e(x2) - e(x1)) / Complex64::new(0.0, w)
            }
        };
        let weights: Vec<Complex64> = (-2 * n..=2 * n).map(weight).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for j in -n..=n {
            let bj = beta(j);
            for k in -n..=n {
                total += bj * beta(k).conj() * weights[(j - k + 2 * n) as usize];
            }
        }
        total.re
    }
}

fn row_from_modes(
    s: Complex64,
    c_plus: Complex64,
    c_minus: Complex64,
    modes: &[Complex64],
    y: f64,
) -> Result<FourierRow> {
    let ln_y = y.ln();
    let constant = c_plus * (s * ln_y).exp() + c_minus * ((1.0 - s) * ln_y).exp();
    let order = s - 0.5;
    let mut out = Vec::with_capacity(modes.len());
    for (k, a) in modes.iter().enumerate() {
        let n = (k + 1) as f64;
        if *a == Complex64::new(0.0, 0.0) {
            out.push(*a);
            continue;
        }
        let kb = bessel_k(order, 2.0 * PI * n * y)?;
        out.push(a * kb * (2.0 * (n * y).sqrt()));
    }
    Ok(FourierRow {
        constant,
        modes: out,
    })
}

/// An Eisenstein series with its closed-form coefficients, evaluable at
/// any point of the upper half-plane.
#[derive(Debug, Clone)]
pub struct EisensteinSeries {
    model: CoefficientModel,
    /// The series attached to the other cusp, used after a Fricke swap.
    partner: Option<CoefficientModel>,
}

impl EisensteinSeries {
    pub fn new(q: u64, cusp: Cusp, s: Complex64) -> Result<Self> {
        let model = CoefficientModel::new(q, cusp, s)?;
        let partner = if q == 1 {
            None
        } else {
            let other = match cusp {
                Cusp::Infinity => Cusp::Zero,
                Cusp::Zero => Cusp::Infinity,
            };
            Some(CoefficientModel::new(q, other, s)?)
        };
        Ok(Self { model, partner })
    }

    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    pub fn level(&self) -> u64 {
        self.model.level
    }

    pub fn s(&self) -> Complex64 {
        self.model.s
    }

    pub fn expansion(&self, n: usize) -> FourierExpansion {
        expansion_of(&self.model, n)
    }

    pub fn truncation_for(&self, y: f64, tol: f64) -> usize {
        self.model.truncation_for(y, tol)
    }

    /// Fourier row at height `y`, truncated so the discarded modes are
    /// below `tol`.
    pub fn row(&self, y: f64, tol: f64) -> Result<FourierRow> {
        let n = self.truncation_for(y, tol);
        let modes: Vec<Complex64> = (1..=n as i64).map(|k| self.model.mode(k)).collect();
        row_from_modes(
            self.model.s,
            self.model.c_plus,
            self.model.c_minus,
            &modes,
            y,
        )
    }

    /// Sum the expansion at cusp infinity directly at `z`.
    pub fn eval_expansion(&self, z: &HalfPlanePoint<f64>, tol: f64) -> Result<Complex64> {
        Ok(self.row(z.y(), tol)?.value(z.x()))
    }

    /// Evaluate at any point: reduce into the fundamental domain, then use
    /// the coset of the reducing element.
    pub fn eval_anywhere(&self, w: &HalfPlanePoint<f64>, tol: f64) -> Result<Complex64> {
        let q = self.model.level;
        let (z, g) = reduce_to_fundamental_domain(w);
        // w = h z with h = g^{-1}.
        let h = g.inverse();
        if q == 1 || h.c.rem_euclid(q as i64) == 0 {
            return self.eval_expansion(&z, tol);
        }
        // h = gamma S T^j with gamma in Gamma_0(q), j = d c^{-1} mod q.
        let qi = q as i64;
        let c_inv = mod_inverse(h.c.rem_euclid(qi), qi).expect("q prime and q does not divide c");
        let j = (h.d.rem_euclid(qi) * c_inv).rem_euclid(qi);
        let st = IntMatrix {
            a: 0,
            b: -1,
            c: 1,
            d: j,
        };
        let gamma = h * st.inverse();
        debug_assert!(gamma.c.rem_euclid(qi) == 0);
        // S(z + j) = sigma_0 v with v = (z + j) / q, and E_k(sigma_0 v) is the
        // partner series at v.
        let v = HalfPlanePoint::new((z.x() + j as f64) / q as f64, z.y() / q as f64)?;
        let partner = self.partner.as_ref().expect("prime level has a partner");
        let n = partner.truncation_for(v.y(), tol);
        let modes: Vec<Complex64> = (1..=n as i64).map(|k| partner.mode(k)).collect();
        Ok(row_from_modes(partner.s, partner.c_plus, partner.c_minus, &modes, v.y())?.value(v.x()))
    }
}

fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    (1..m).find(|x| (a * x).rem_euclid(m) == 1)
}

fn expansion_of(model: &CoefficientModel, n: usize) -> FourierExpansion {
    FourierExpansion {
        level: model.level,
        cusp: model.cusp,
        s: model.s,
        c_plus: model.c_plus,
        c_minus: model.c_minus,
        modes: (1..=n as i64).map(|k| model.mode(k)).collect(),
    }
}

/// Constant term and first `n` modes of `E_{q,k}(., s)` at cusp infinity.
pub fn cusp_expansion(q: u64, cusp: Cusp, s: Complex64, n: usize) -> Result<FourierExpansion> {
    if n == 0 {
        return Err(Error::Domain("truncation must be positive".into()));
    }
    Ok(expansion_of(&CoefficientModel::new(q, cusp, s)?, n))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 1e-12) || !tol.is_finite() {
        return Err(Error::Domain(format!(
            "tolerance must be at least 1e-12 (got {tol})"
        )));
    }
    Ok(())
}

/// `E_{q,k}(z, s)` for `z` in the region `y >= sqrt(3)/2`.
pub fn eval_eisenstein(
    q: u64,
    cusp: Cusp,
    z: &HalfPlanePoint<f64>,
    s: Complex64,
    tol: f64,
) -> Result<Complex64> {
    check_tol(tol)?;
    if z.y() < MIN_DOMAIN_HEIGHT - 1e-12 {
        return Err(Error::Domain(format!(
            "evaluation point must have y >= sqrt(3)/2 (got {})",
            z.y()
        )));
    }
    EisensteinSeries::new(q, cusp, s)?.eval_expansion(z, tol)
}

/// Default absolute tolerance of [`eval_abs2`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// `|E_{q,k}(z, 1/2 + it)|^2`.
pub fn eval_abs2(q: u64, cusp: Cusp, z: &HalfPlanePoint<f64>, t: f64) -> Result<f64> {
    eval_abs2_tol(q, cusp, z, t, DEFAULT_TOL)
}

pub fn eval_abs2_tol(q: u64, cusp: Cusp, z: &HalfPlanePoint<f64>, t: f64, tol: f64) -> Result<f64> {
    Ok(eval_eisenstein(q, cusp, z, Complex64::new(0.5, t), tol)?.norm_sqr())
}

/// The 2x2 matrix of `y^{1-s}` coefficients across the two cusps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScatteringMatrix {
    /// Rows: series attached to (infinity, zero); columns: expansion cusp
    /// (infinity, zero).
    pub entries: [[Complex64; 2]; 2],
}

impl ScatteringMatrix {
    /// Frobenius norm of `Phi Phi^* - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.entries;
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut v = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    v += m[i][k] * m[j][k].conj();
                }
                if i == j {
                    v -= 1.0;
                }
                acc += v.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Scattering matrix at prime level. The column at cusp zero comes from
/// automorphy: `E_inf(sigma_0 z) = E_0(z)` and `E_0(sigma_0 z) = E_inf(z)`.
pub fn scattering_matrix(q: u64, s: Complex64) -> Result<ScatteringMatrix> {
    if q == 1 {
        return Err(Error::Domain(
            "scattering matrix needs a prime level".into(),
        ));
    }
    let inf = CoefficientModel::new(q, Cusp::Infinity, s)?;
    let zero = CoefficientModel::new(q, Cusp::Zero, s)?;
    Ok(ScatteringMatrix {
        entries: [[inf.c_minus, zero.c_minus], [zero.c_minus, inf.c_minus]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(x: f64, y: f64) -> HalfPlanePoint<f64> {
        HalfPlanePoint::new(x, y).unwrap()
    }

    #[test]
    fn constant_term_dominates_high_up() {
        let s = c(0.5, 3.0);
        let y = 10.0;
        let v = eval_eisenstein(1, Cusp::Infinity, &pt(0.2, y), s, 1e-12).unwrap();
        let model = CoefficientModel::new(1, Cusp::Infinity, s).unwrap();
        let constant = (s * y.ln()).exp() + model.c_minus * ((1.0 - s) * y.ln()).exp();
        assert!((v - constant).norm() < 1e-8);
    }

    #[test]
    fn conjugation_symmetry() {
        for (q, cusp) in [(1, Cusp::Infinity), (11, Cusp::Zero)] {
            let z = pt(0.13, 1.1);
            let a = eval_abs2(q, cusp, &z, 2.5).unwrap();
            let b = eval_abs2(q, cusp, &z, -2.5).unwrap();
            assert!((a - b).abs() < 1e-9 * a.max(1.0));
            assert!(a >= 0.0);
        }
    }

    #[test]
    fn vanishes_at_centre() {
        let z = pt(0.0, 1.0);
        let coarse = eval_abs2_tol(1, Cusp::Infinity, &z, 0.0, 1e-8).unwrap();
        let fine = eval_abs2_tol(1, Cusp::Infinity, &z, 0.0, 1e-10).unwrap();
        assert!(coarse < 1e-20 && fine < 1e-20);
        assert!((coarse - fine).abs() < 1e-7);
    }

    #[test]
    fn rejects_points_below_domain() {
        assert!(eval_eisenstein(1, Cusp::Infinity, &pt(0.0, 0.5), c(2.0, 0.0), 1e-10).is_err());
        assert!(eval_eisenstein(1, Cusp::Infinity, &pt(0.0, 1.0), c(2.0, 0.0), 1e-14).is_err());
        assert!(cusp_expansion(1, Cusp::Infinity, c(2.0, 0.0), 0).is_err());
    }

    #[test]
    fn row_integral_matches_pointwise_quadrature() {
        let series = EisensteinSeries::new(5, Cusp::Infinity, c(0.5, 4.0)).unwrap();
        let row = series.row(0.9, 1e-12).unwrap();
        let (x1, x2) = (-0.31, 0.42);
        let n = 4000;
        let h = (x2 - x1) / n as f64;
        // composite Simpson
        let mut acc = row.abs2(x1) + row.abs2(x2);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * row.abs2(x1 + k as f64 * h);
        }
        let simpson = acc * h / 3.0;
        assert!((simpson - row.abs2_integral(x1, x2)).abs() < 1e-10 * simpson);
    }

    #[test]
    fn scattering_closed_form_is_unitary() {
        for q in [2u64, 5, 11, 101] {
            for t in [0.3, 1.0, 5.0, 10.0, 30.0] {
                let m = scattering_matrix(q, c(0.5, t)).unwrap();
                assert!(m.unitarity_defect() < 1e-10, "q={q} t={t}");
            }
        }
    }

    #[test]
    fn fricke_route_matches_direct_expansion() {
        // A point of F pushed away by an SL2(Z) element outside Gamma_0(q):
        // eval_anywhere must recover the value at the original point only for
        // Gamma_0(q) elements, and must agree with the direct expansion for
        // points high enough that no reduction happens.
        let series = EisensteinSeries::new(5, Cusp::Zero, c(0.5, 2.0)).unwrap();
        let z = pt(0.21, 1.3);
        let direct = series.eval_expansion(&z, 1e-12).unwrap();
        let routed = series.eval_anywhere(&z, 1e-12).unwrap();
        assert!((direct - routed).norm() < 1e-12);
    }
}
