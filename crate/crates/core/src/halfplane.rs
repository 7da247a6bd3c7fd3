//! Upper half-plane geometry: Moebius action, reduction into the standard
//! fundamental domain of SL2(Z), the cusps of Gamma_0(q) for prime q, their
//! scaling matrices and the sets of allowed moduli.

use crate::arith::ext_gcd;
use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

/// A point `x + iy` with `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint<T> {
    x: T,
    y: T,
}

impl<T: Real> HalfPlanePoint<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if !(y > T::zero()) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!(
                "point must satisfy y > 0 (got x = {x:?}, y = {y:?})"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn abs2(&self) -> T {
        self.x * self.x + self.y * self.y
    }

    /// Membership in the closed region `|x| <= 1/2`, `|z| >= 1`.
    pub fn in_closed_fundamental_domain(&self, slack: T) -> bool {
        self.x.abs() <= T::lit(0.5) + slack && self.abs2() >= T::one() - slack
    }
}

/// A real 2x2 matrix acting on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> GroupElement<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let g = Self { a, b, c, d };
        if g.det() == T::zero() {
            return Err(Error::Domain("singular matrix".into()));
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        Self {
            a: T::one(),
            b: T::zero(),
            c: T::zero(),
            d: T::one(),
        }
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        }
    }
}

impl<T: Real> Mul for GroupElement<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// An integer matrix of determinant one, i.e. an element of SL2(Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix {
    pub const IDENTITY: IntMatrix = IntMatrix {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };
    /// `z -> -1/z`
    pub const S: IntMatrix = IntMatrix {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };
    /// `z -> z + 1`
    pub const T: IntMatrix = IntMatrix {
        a: 1,
        b: 1,
        c: 0,
        d: 1,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let m = Self { a, b, c, d };
        if m.det() != 1 {
            return Err(Error::Domain(format!(
                "integer matrix has determinant {} != 1",
                m.det()
            )));
        }
        Ok(m)
    }

    pub fn translation(n: i64) -> Self {
        Self {
            a: 1,
            b: n,
            c: 0,
            d: 1,
        }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn to_real<T: Real>(&self) -> GroupElement<T> {
        let f = |v: i64| T::from_i64(v).expect("entry representable");
        GroupElement {
            a: f(self.a),
            b: f(self.b),
            c: f(self.c),
            d: f(self.d),
        }
    }

    pub fn is_identity_up_to_sign(&self) -> bool {
        *self == Self::IDENTITY
            || *self
                == Self {
                    a: -1,
                    b: 0,
                    c: 0,
                    d: -1,
                }
    }
}

impl Mul for IntMatrix {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}; {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// The cusps used at prime level. Level one only has `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cusp {
    Infinity,
    Zero,
}

impl Cusp {
    pub fn all_for_level(q: u64) -> &'static [Cusp] {
        if q == 1 {
            &[Cusp::Infinity]
        } else {
            &[Cusp::Infinity, Cusp::Zero]
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Cusp::Infinity => "inf",
            Cusp::Zero => "zero",
        }
    }
}

impl std::str::FromStr for Cusp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "oo" => Ok(Cusp::Infinity),
            "0" | "zero" => Ok(Cusp::Zero),
            other => Err(Error::Domain(format!(
                "unknown cusp '{other}' (expected inf or zero)"
            ))),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Levels supported throughout: 1 or a prime.
pub fn validate_level(q: u64) -> Result<()> {
    if q == 1 || is_prime(q) {
        Ok(())
    } else {
        Err(Error::Domain(format!("level must be 1 or prime (got {q})")))
    }
}

/// Uniform sample from the part of the fundamental domain with `y < 2.5`.
pub fn random_point_in_f<R: Rng>(rng: &mut R) -> HalfPlanePoint<f64> {
    loop {
        let x = rng.gen_range(-0.5..0.5);
        let y = rng.gen_range(0.86..2.5);
        if x * x + y * y >= 1.0 {
            return HalfPlanePoint { x, y };
        }
    }
}

/// Random element of `Gamma_0(q)` with entries bounded by `bound` and
/// `c != 0`.
pub fn random_gamma0<R: Rng>(q: u64, bound: i64, rng: &mut R) -> IntMatrix {
    let q = q as i64;
    assert!(bound >= q, "bound must allow a nonzero multiple of q");
    loop {
        let c = q * rng.gen_range(-bound / q..=bound / q);
        let d: i64 = rng.gen_range(-bound..=bound);
        if c == 0 || d == 0 {
            continue;
        }
        let (g, a, b) = ext_gcd(d, -c);
        if g.abs() != 1 {
            continue;
        }
        let m = IntMatrix {
            a: a * g,
            b: b * g,
            c,
            d,
        };
        if m.det() == 1 && m.a.abs() <= bound && m.b.abs() <= bound {
            return m;
        }
    }
}

pub fn is_in_gamma0(g: &IntMatrix, q: u64) -> bool {
    g.det() == 1 && g.c.rem_euclid(q as i64) == 0
}

/// Apply `g` to `z`. Requires `det g > 0`.
pub fn mobius_act<T: Real>(
    g: &GroupElement<T>,
    z: &HalfPlanePoint<T>,
) -> Result<HalfPlanePoint<T>> {
    let det = g.det();
    if !(det > T::zero()) {
        return Err(Error::Domain(
            "Moebius action needs positive determinant".into(),
        ));
    }
    let re = g.c * z.x + g.d;
    let im = g.c * z.y;
    let den = re * re + im * im;
    if den == T::zero() {
        return Err(Error::MapsToCusp);
    }
    let num_re = g.a * z.x + g.b;
    let num_im = g.a * z.y;
    let x = (num_re * re + num_im * im) / den;
    let y = det * z.y / den;
    HalfPlanePoint::new(x, y)
}

pub fn act_int<T: Real>(g: &IntMatrix, z: &HalfPlanePoint<T>) -> Result<HalfPlanePoint<T>> {
    mobius_act(&g.to_real(), z)
}

/// Reduce `z` into the fundamental domain `-1/2 <= x < 1/2`, `|z| >= 1`,
/// where on the unit circle only `x <= 0` is kept. Returns the reduced
/// point and the element `g` of SL2(Z) with `g z = z'`.
pub fn reduce_to_fundamental_domain<T: Real>(
    z: &HalfPlanePoint<T>,
) -> (HalfPlanePoint<T>, IntMatrix) {
    let half = T::lit(0.5);
    let mut g = IntMatrix::IDENTITY;
    let (mut x, mut y) = (z.x, z.y);
    // Each inversion strictly increases y, so this terminates; the cap only
    // guards against NaN-free but pathological float inputs.
    for _ in 0..10_000 {
        let n = (x + half).floor();
        if n != T::zero() {
            x = x - n;
            let n = n.to_i64().expect("translation fits i64");
            g = IntMatrix::translation(-n) * g;
        }
        if x >= half {
            x = x - T::one();
            g = IntMatrix::translation(-1) * g;
        }
        let r2 = x * x + y * y;
        if r2 < T::one() {
            x = -x / r2;
            y = y / r2;
            g = IntMatrix::S * g;
            continue;
        }
        if r2 == T::one() && x > T::zero() {
            x = -x;
            g = IntMatrix::S * g;
        }
        break;
    }
    (HalfPlanePoint { x, y }, g)
}

/// Scaling matrix `sigma_k` of a cusp with its level kept exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMatrix {
    pub cusp: Cusp,
    pub level: u64,
    pub matrix: GroupElement<f64>,
}

/// `sigma_inf = 1`, `sigma_0 = (0, -1/sqrt q; sqrt q, 0)`.
pub fn scaling_matrix(cusp: Cusp, q: u64) -> Result<ScalingMatrix> {
    validate_level(q)?;
    let matrix = match cusp {
        Cusp::Infinity => GroupElement::identity(),
        Cusp::Zero => {
            if q == 1 {
                return Err(Error::Domain("level 1 has the single cusp infinity".into()));
            }
            let r = (q as f64).sqrt();
            GroupElement {
                a: 0.0,
                b: -1.0 / r,
                c: r,
                d: 0.0,
            }
        }
    };
    Ok(ScalingMatrix {
        cusp,
        level: q,
        matrix,
    })
}

impl ScalingMatrix {
    /// Image of the cusp at infinity, `None` standing for infinity itself.
    pub fn image_of_infinity(&self) -> Option<f64> {
        let m = &self.matrix;
        if m.c == 0.0 {
            None
        } else {
            Some(m.a / m.c)
        }
    }

    /// `sigma_k^{-1} g sigma_k'` for an integer matrix `g`.
    pub fn conjugate(&self, g: &IntMatrix, other: &ScalingMatrix) -> GroupElement<f64> {
        self.matrix.inverse() * g.to_real() * other.matrix
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let m = m.abs();
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    A,
    B,
    C,
    D,
}

/// Search for an element of Gamma_0(q) whose entry `entry` equals `v`,
/// letting one complementary entry range over `[-range, range]`.
fn witness(entry: Entry, v: i64, q: i64, range: i64) -> Option<IntMatrix> {
    let check = |m: IntMatrix| (m.det() == 1 && m.c.rem_euclid(q) == 0).then_some(m);
    match entry {
        Entry::C => {
            if v == 0 {
                return check(IntMatrix::IDENTITY);
            }
            if v.rem_euclid(q) != 0 {
                return None;
            }
            (-range..=range).find_map(|d| {
                if gcd(d, v) != 1 {
                    return None;
                }
                let a = mod_inverse(d, v)?;
                let b = (a * d - 1) / v;
                check(IntMatrix { a, b, c: v, d })
            })
        }
        Entry::A | Entry::D => (-range..=range).find_map(|k| {
            let c = q * k;
            let m = if c == 0 {
                if v.abs() != 1 {
                    return None;
                }
                IntMatrix {
                    a: v,
                    b: 0,
                    c: 0,
                    d: v,
                }
            } else {
                if gcd(v, c) != 1 {
                    return None;
                }
                let other = mod_inverse(v, c)?;
                let b = (v * other - 1) / c;
                if entry == Entry::A {
                    IntMatrix {
                        a: v,
                        b,
                        c,
                        d: other,
                    }
                } else {
                    IntMatrix {
                        a: other,
                        b,
                        c,
                        d: v,
                    }
                }
            };
            check(m)
        }),
        Entry::B => (-range..=range).find_map(|k| {
            let c = q * k;
            check(IntMatrix {
                a: 1,
                b: v,
                c,
                d: 1 + v * c,
            })
        }),
    }
}

/// Positive lower-left entries `gamma <= bound` of
/// `sigma_k^{-1} Gamma_0(q) sigma_k'`, in increasing order.
///
/// The lower-left entry is linear in the entries of the group element; its
/// coefficients are read off by conjugating the unit matrices. Every
/// candidate value of the contributing entry is then certified by an
/// explicit witness in Gamma_0(q).
pub fn allowed_moduli(k1: Cusp, k2: Cusp, q: u64, bound: f64) -> Result<Vec<f64>> {
    if !(bound > 0.0) {
        return Err(Error::Domain("bound must be positive".into()));
    }
    let form = LowerLeftForm::new(k1, k2, q)?;
    let vmax = (bound / form.weight.abs() + 1e-9).floor() as i64;
    let range = (2.0 * bound * (q as f64).sqrt()).ceil() as i64 + 1;
    let mut out: Vec<f64> = Vec::new();
    for v in 1..=vmax {
        if let Some(gamma) = form.certify(v, range) {
            if gamma <= bound * (1.0 + 1e-12) {
                out.push(gamma);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    Ok(out)
}

/// Whether `gamma` lies in `C(k1, k2)`, certified by a witness whose free
/// entry is searched in `[-range, range]`. A `false` answer means no
/// witness was found in that window.
pub fn is_allowed_modulus(k1: Cusp, k2: Cusp, q: u64, gamma: f64, range: i64) -> Result<bool> {
    let form = LowerLeftForm::new(k1, k2, q)?;
    let v = gamma / form.weight.abs();
    if !(v > 0.5) || (v - v.round()).abs() > 1e-9 * v {
        return Ok(false);
    }
    Ok(form
        .certify(v.round() as i64, range)
        .is_some_and(|g| (g - gamma).abs() <= 1e-9 * gamma))
}

/// The lower-left entry of `σ_{k1}^{-1} g σ_{k2}` as a multiple of one
/// entry of `g`.
struct LowerLeftForm {
    s1: ScalingMatrix,
    s2: ScalingMatrix,
    entry: Entry,
    weight: f64,
    q: i64,
}

impl LowerLeftForm {
    fn new(k1: Cusp, k2: Cusp, q: u64) -> Result<Self> {
        let s1 = scaling_matrix(k1, q)?;
        let s2 = scaling_matrix(k2, q)?;
        let lower_left = |a: f64, b: f64, c: f64, d: f64| {
            (s1.matrix.inverse() * GroupElement { a, b, c, d } * s2.matrix).c
        };
        let coeffs = [
            (Entry::A, lower_left(1.0, 0.0, 0.0, 0.0)),
            (Entry::B, lower_left(0.0, 1.0, 0.0, 0.0)),
            (Entry::C, lower_left(0.0, 0.0, 1.0, 0.0)),
            (Entry::D, lower_left(0.0, 0.0, 0.0, 1.0)),
        ];
        let active: Vec<_> = coeffs.iter().filter(|(_, w)| w.abs() > 1e-12).collect();
        if active.len() != 1 {
            return Err(Error::Capability(
                "lower-left entry depends on several entries".into(),
            ));
        }
        let (entry, weight) = *active[0];
        Ok(Self {
            s1,
            s2,
            entry,
            weight,
            q: q as i64,
        })
    }

    /// The modulus realised by entry value `v`, if a witness exists.
    fn certify(&self, v: i64, range: i64) -> Option<f64> {
        let g = witness(self.entry, v, self.q, range)?;
        let gamma = self.s1.conjugate(&g, &self.s2).c.abs();
        (gamma > 0.0).then_some(gamma)
    }
}
