//! Test functions on the modular surface, described on `F` by their
//! horizontal sections.

use super::region::{arc_height, clip_to_section, Rect, Region};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `C^∞` step rising from 0 at `u = -1/2` to 1 at `u = 1/2`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= -0.5 {
        return 0.0;
    }
    if u >= 0.5 {
        return 1.0;
    }
    let g = |v: f64| if v <= 0.0 { 0.0 } else { (-1.0 / v).exp() };
    let a = g(u + 0.5);
    a / (a + g(0.5 - u))
}

/// `exp(1 - 1/(1 - v²))` on `|v| < 1`, peak value 1.
fn bump(v: f64) -> f64 {
    if v.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - v * v)).exp()
    }
}

/// A compactly supported function on `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// Indicator of a region with every interior edge smoothed over width
    /// `delta`. Edges on `x = ±1/2` are left sharp, since those sides are
    /// glued together, and so is the arc.
    SmoothedIndicator {
        region: Region,
        delta: f64,
    },
    /// `φ(x + iy) = bump((2y - a - b)/(b - a))`, independent of `x`; needs `a >= 1`.
    VerticalProfile {
        a: f64,
        b: f64,
    },
    Scaled(f64, Box<TestFunction>),
    Sum(Vec<TestFunction>),
}

/// Part of a horizontal section on which the weight is either constant
/// or has to be evaluated pointwise.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece<'a> {
    pub u: f64,
    pub v: f64,
    pub weight: Weight<'a>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Weight<'a> {
    Const(f64),
    /// `scale * rect_x_profile(x)`; the y-factor is already in `scale`.
    Smooth {
        rect: &'a Rect,
        delta: f64,
        scale: f64,
    },
}

impl Weight<'_> {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Weight::Const(c) => c,
            Weight::Smooth { rect, delta, scale } => scale * x_profile(rect, delta, x),
        }
    }
}

fn interior(e: f64) -> bool {
    e > -0.5 && e < 0.5
}

fn x_profile(r: &Rect, delta: f64, x: f64) -> f64 {
    let lo = if interior(r.x1) {
        smooth_step((x - r.x1) / delta)
    } else {
        1.0
    };
    let hi = if interior(r.x2) {
        smooth_step((r.x2 - x) / delta)
    } else {
        1.0
    };
    lo * hi
}

fn y_profile(r: &Rect, delta: f64, y: f64) -> f64 {
    let top = if r.y2.is_finite() {
        smooth_step((r.y2 - y) / delta)
    } else {
        1.0
    };
    smooth_step((y - r.y1) / delta) * top
}

impl TestFunction {
    pub fn smoothed_indicator(region: Region, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!(
                "smoothing width must be positive (got {delta})"
            )));
        }
        if !region.is_bounded() {
            return Err(Error::Domain(
                "smoothed indicator needs a bounded region".into(),
            ));
        }
        for r in region.rects() {
            if delta >= (r.x2 - r.x1) || delta >= (r.y2 - r.y1) || r.y1 - delta / 2.0 <= 0.0 {
                return Err(Error::Domain(format!(
                    "smoothing width {delta} too large for box {r:?}"
                )));
            }
        }
        Ok(Self::SmoothedIndicator { region, delta })
    }

    pub fn vertical_profile(a: f64, b: f64) -> Result<Self> {
        if !(a >= 1.0 && b > a && b.is_finite()) {
            return Err(Error::Domain(format!(
                "vertical profile needs 1 <= a < b < inf (got [{a}, {b}])"
            )));
        }
        Ok(Self::VerticalProfile { a, b })
    }

    /// Profile on `[1.2, 2.8]`.
    pub fn default_profile() -> Self {
        Self::VerticalProfile { a: 1.2, b: 2.8 }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self::Scaled(c, Box::new(self))
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        if !super::region::in_f(x, y) {
            return 0.0;
        }
        match self {
            Self::SmoothedIndicator { region, delta } => region
                .rects()
                .iter()
                .map(|r| y_profile(r, *delta, y) * x_profile(r, *delta, x))
                .sum(),
            Self::VerticalProfile { a, b } => bump((2.0 * y - a - b) / (b - a)),
            Self::Scaled(c, f) => c * f.value(x, y),
            Self::Sum(fs) => fs.iter().map(|f| f.value(x, y)).sum(),
        }
    }

    /// Bounds on the height of the support.
    pub(crate) fn y_range(&self) -> (f64, f64) {
        match self {
            Self::SmoothedIndicator { region, delta } => {
                let (lo, hi) = region.y_range();
                (lo - delta / 2.0, hi + delta / 2.0)
            }
            Self::VerticalProfile { a, b } => (*a, *b),
            Self::Scaled(_, f) => f.y_range(),
            Self::Sum(fs) => fs
                .iter()
                .map(|f| f.y_range())
                .fold((f64::INFINITY, 0.0), |(l, h), (a, b)| (l.min(a), h.max(b))),
        }
    }

    pub(crate) fn y_breaks(&self) -> Vec<f64> {
        match self {
            Self::SmoothedIndicator { region, delta } => {
                let d = delta / 2.0;
                let mut out = Vec::new();
                for r in region.rects() {
                    out.extend([r.y1 - d, r.y1 + d, r.y2 - d, r.y2 + d]);
                    for e in [r.x1, r.x2] {
                        let cuts = if interior(e) {
                            vec![e - d, e + d]
                        } else {
                            vec![e.clamp(-0.5, 0.5)]
                        };
                        out.extend(cuts.into_iter().map(arc_height));
                    }
                }
                out
            }
            Self::VerticalProfile { a, b } => vec![*a, *b],
            Self::Scaled(_, f) => f.y_breaks(),
            Self::Sum(fs) => fs.iter().flat_map(|f| f.y_breaks()).collect(),
        }
    }

    pub(crate) fn pieces<'a>(&'a self, y: f64, scale: f64, out: &mut Vec<Piece<'a>>) {
        match self {
            Self::SmoothedIndicator { region, delta } => {
                let d = delta / 2.0;
                for r in region.rects() {
                    let sy = scale * y_profile(r, *delta, y);
                    if sy == 0.0 {
                        continue;
                    }
                    let lo = if interior(r.x1) { r.x1 + d } else { r.x1 };
                    let hi = if interior(r.x2) { r.x2 - d } else { r.x2 };
                    let mut spans = vec![(lo, hi, Weight::Const(sy))];
                    let smooth = Weight::Smooth {
                        rect: r,
                        delta: *delta,
                        scale: sy,
                    };
                    if interior(r.x1) {
                        spans.push((r.x1 - d, r.x1 + d, smooth));
                    }
                    if interior(r.x2) {
                        spans.push((r.x2 - d, r.x2 + d, smooth));
                    }
                    for (a, b, weight) in spans {
                        for (u, v) in clip_to_section(a, b, y) {
                            out.push(Piece { u, v, weight });
                        }
                    }
                }
            }
            Self::VerticalProfile { a, b } => {
                let h = scale * bump((2.0 * y - a - b) / (b - a));
                if h != 0.0 {
                    out.push(Piece {
                        u: -0.5,
                        v: 0.5,
                        weight: Weight::Const(h),
                    });
                }
            }
            Self::Scaled(c, f) => f.pieces(y, scale * c, out),
            Self::Sum(fs) => fs.iter().for_each(|f| f.pieces(y, scale, out)),
        }
    }
}
