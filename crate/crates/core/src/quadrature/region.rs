//! Unions of boxes on the standard fundamental domain and their hyperbolic
//! areas.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Axis-aligned box `[x1, x2] × [y1, y2]`; `y2` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

/// `√(1 - x²)` for `|x| < 1`, else 0: the height of the unit circle.
pub(crate) fn arc_height(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).sqrt()
    }
}

impl Rect {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Self> {
        if !(x1.is_finite() && x2.is_finite() && y1.is_finite()) || y2.is_nan() {
            return Err(Error::Domain(format!(
                "box [{x1}, {x2}] x [{y1}, {y2}] has non-finite corners"
            )));
        }
        if !(x1 < x2 && y1 < y2 && y1 > 0.0) {
            return Err(Error::Domain(format!(
                "box [{x1}, {x2}] x [{y1}, {y2}] needs x1 < x2, 0 < y1 < y2"
            )));
        }
        Ok(Self { x1, x2, y1, y2 })
    }

    /// The x-range after clipping to `|x| <= 1/2`, if nonempty.
    fn clipped_x(&self) -> Option<(f64, f64)> {
        let a = self.x1.max(-0.5);
        let b = self.x2.min(0.5);
        (a < b).then_some((a, b))
    }

    /// Intersection with `F` at height `y`, as disjoint x-intervals.
    pub fn section(&self, y: f64) -> Vec<(f64, f64)> {
        if y < self.y1 || y > self.y2 {
            return Vec::new();
        }
        match self.clipped_x() {
            Some((a, b)) => clip_to_section(a, b, y),
            None => Vec::new(),
        }
    }

    /// Hyperbolic area of the box intersected with `F`, in closed form.
    pub fn area(&self) -> f64 {
        let Some((a, b)) = self.clipped_x() else {
            return 0.0;
        };
        let inv_top = if self.y2.is_infinite() {
            0.0
        } else {
            1.0 / self.y2
        };
        let mut cuts = vec![a, b];
        for h in [self.y1, self.y2] {
            if h < 1.0 {
                let r = arc_height(h);
                cuts.extend([-r, r]);
            }
        }
        cuts.retain(|c| *c >= a && *c <= b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (u, v) = (w[0], w[1]);
            let mid = 0.5 * (u + v);
            let floor = arc_height(mid);
            if floor >= self.y2 {
                continue;
            }
            total += if floor > self.y1 {
                u.asin().mul_add(-1.0, v.asin()) - (v - u) * inv_top
            } else {
                (v - u) * (1.0 / self.y1 - inv_top)
            };
        }
        total
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x1 && x <= self.x2 && y >= self.y1 && y <= self.y2 && in_f(x, y)
    }
}

/// Membership in the closed standard fundamental domain.
pub fn in_f(x: f64, y: f64) -> bool {
    x.abs() <= 0.5 && x * x + y * y >= 1.0
}

/// `[a, b] ∩ {|x| <= 1/2, x² + y² >= 1}`.
pub(crate) fn clip_to_section(a: f64, b: f64, y: f64) -> Vec<(f64, f64)> {
    let (a, b) = (a.max(-0.5), b.min(0.5));
    if a >= b {
        return Vec::new();
    }
    if y >= 1.0 {
        return vec![(a, b)];
    }
    let r = arc_height(y);
    let mut out = Vec::new();
    if a < -r {
        out.push((a, b.min(-r)));
    }
    if b > r {
        out.push((a.max(r), b));
    }
    out
}

/// Finite union of boxes, each implicitly intersected with `F`, with
/// pairwise overlaps of zero area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    rects: Vec<Rect>,
}

impl Region {
    pub fn new(rects: Vec<Rect>) -> Result<Self> {
        if rects.is_empty() {
            return Err(Error::Domain("region needs at least one box".into()));
        }
        for (i, r) in rects.iter().enumerate() {
            if r.area() <= 0.0 {
                return Err(Error::Domain(format!(
                    "box {i} does not meet the fundamental domain"
                )));
            }
            for (j, s) in rects.iter().enumerate().skip(i + 1) {
                let (x1, x2, y1, y2) = (
                    r.x1.max(s.x1),
                    r.x2.min(s.x2),
                    r.y1.max(s.y1),
                    r.y2.min(s.y2),
                );
                if x1 < x2 && y1 < y2 && (Rect { x1, x2, y1, y2 }).area() > 1e-15 {
                    return Err(Error::Domain(format!("boxes {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { rects })
    }

    /// Convenience constructor from `(x1, x2, y1, y2)` tuples.
    pub fn from_boxes(boxes: &[(f64, f64, f64, f64)]) -> Result<Self> {
        let rects = boxes
            .iter()
            .map(|&(a, b, c, d)| Rect::new(a, b, c, d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rects)
    }

    /// The whole fundamental domain.
    pub fn fundamental_domain() -> Self {
        Self {
            rects: vec![Rect {
                x1: -0.5,
                x2: 0.5,
                y1: 0.75f64.sqrt(),
                y2: f64::INFINITY,
            }],
        }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn is_bounded(&self) -> bool {
        self.rects.iter().all(|r| r.y2.is_finite())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }

    /// Mirror image under `x ↦ -x`.
    pub fn reflected(&self) -> Self {
        let rects = self
            .rects
            .iter()
            .map(|r| Rect {
                x1: -r.x2,
                x2: -r.x1,
                ..*r
            })
            .collect();
        Self { rects }
    }

    /// Heights at which some section changes shape.
    pub(crate) fn y_breaks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for r in &self.rects {
            out.extend([r.y1, r.y2]);
            if let Some((a, b)) = r.clipped_x() {
                out.extend([arc_height(a), arc_height(b)]);
            }
        }
        out
    }

    pub(crate) fn y_range(&self) -> (f64, f64) {
        let lo = self
            .rects
            .iter()
            .map(|r| r.y1)
            .fold(f64::INFINITY, f64::min);
        let hi = self.rects.iter().map(|r| r.y2).fold(0.0, f64::max);
        (lo, hi)
    }
}

/// Hyperbolic area `∫∫ dx dy / y²` of the region.
pub fn hyperbolic_area(region: &Region) -> f64 {
    region.rects.iter().map(Rect::area).sum()
}

impl FromStr for Region {
    type Err = Error;

    /// `"x1,x2,y1,y2;x1,x2,y1,y2;..."`; `inf` is accepted for `y2`.
    fn from_str(s: &str) -> Result<Self> {
        let mut boxes = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let v: Vec<f64> = part
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Domain(format!("bad number {t:?} in region")))
                })
                .collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(Error::Domain(format!(
                    "box {part:?} needs four numbers x1,x2,y1,y2"
                )));
            }
            boxes.push((v[0], v[1], v[2], v[3]));
        }
        Self::from_boxes(&boxes)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rects
            .iter()
            .map(|r| format!("{},{},{},{}", r.x1, r.x2, r.y1, r.y2))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}
