use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::quadrature::{segment_nodes, QuadNode};

/// Axis-aligned box. In 1D only the first coordinate is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn interval(a: f64, b: f64) -> Self {
        Self {
            lo: [a, 0.0],
            hi: [b, 0.0],
        }
    }

    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    pub fn volume(&self, dim: usize) -> f64 {
        let wx = (self.hi[0] - self.lo[0]).max(0.0);
        if dim == 1 {
            wx
        } else {
            wx * (self.hi[1] - self.lo[1]).max(0.0)
        }
    }

    /// Closed containment with a small absolute slack.
    pub fn contains(&self, p: Point, dim: usize) -> bool {
        const SLACK: f64 = 1e-12;
        let inx = p[0] >= self.lo[0] - SLACK && p[0] <= self.hi[0] + SLACK;
        inx && (dim == 1 || (p[1] >= self.lo[1] - SLACK && p[1] <= self.hi[1] + SLACK))
    }

    pub fn contains_open(&self, p: Point, dim: usize) -> bool {
        let inx = p[0] > self.lo[0] && p[0] < self.hi[0];
        inx && (dim == 1 || (p[1] > self.lo[1] && p[1] < self.hi[1]))
    }

    pub fn intersect(&self, other: &Rect, dim: usize) -> Option<Rect> {
        let lo = [self.lo[0].max(other.lo[0]), self.lo[1].max(other.lo[1])];
        let hi = [self.hi[0].min(other.hi[0]), self.hi[1].min(other.hi[1])];
        let empty = hi[0] <= lo[0] || (dim == 2 && hi[1] <= lo[1]);
        (!empty).then_some(Rect { lo, hi })
    }

    pub fn center(&self) -> Point {
        [(self.lo[0] + self.hi[0]) / 2.0, (self.lo[1] + self.hi[1]) / 2.0]
    }
}

/// Boundary quadrature node with its inner unit normal `ν_Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub x: Point,
    pub w: f64,
    pub normal: [f64; 2],
}

/// Bounded box domain `Ω` (interval or rectangle) with its quadrature
/// resolution (cells per axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    rect: Rect,
    resolution: usize,
}

impl Domain {
    pub fn interval(a: f64, b: f64, resolution: usize) -> Result<Self> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidDomain(format!("empty interval ({a}, {b})")));
        }
        if resolution == 0 {
            return Err(Error::InvalidDomain("resolution must be positive".into()));
        }
        Ok(Self {
            dim: 1,
            rect: Rect::interval(a, b),
            resolution,
        })
    }

    pub fn rectangle(lo: Point, hi: Point, resolution: usize) -> Result<Self> {
        if !(hi[0] > lo[0] && hi[1] > lo[1]) || lo.iter().chain(hi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain(format!("degenerate rectangle {lo:?}..{hi:?}")));
        }
        if resolution == 0 {
            return Err(Error::InvalidDomain("resolution must be positive".into()));
        }
        Ok(Self {
            dim: 2,
            rect: Rect::new(lo, hi),
            resolution,
        })
    }

    pub fn unit_interval(resolution: usize) -> Self {
        Self::interval(0.0, 1.0, resolution).expect("unit interval is valid")
    }

    pub fn unit_square(resolution: usize) -> Self {
        Self::rectangle([0.0, 0.0], [1.0, 1.0], resolution).expect("unit square is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn with_resolution(&self, resolution: usize) -> Self {
        Self {
            resolution: resolution.max(1),
            ..*self
        }
    }

    pub fn volume(&self) -> f64 {
        self.rect.volume(self.dim)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.rect.contains(p, self.dim)
    }

    /// `true` when `outer` strictly contains this domain's closure.
    pub fn strictly_inside(&self, outer: &Domain) -> bool {
        if outer.dim != self.dim {
            return false;
        }
        let (a, b) = (self.rect, outer.rect);
        let x = b.lo[0] < a.lo[0] && a.hi[0] < b.hi[0];
        x && (self.dim == 1 || (b.lo[1] < a.lo[1] && a.hi[1] < b.hi[1]))
    }

    /// Inner unit normal at a boundary point (`None` off the boundary or at a
    /// corner, which is `H^{n-1}`-null).
    pub fn boundary_normal(&self, p: Point) -> Option<[f64; 2]> {
        const TOL: f64 = 1e-12;
        let r = self.rect;
        if self.dim == 1 {
            if (p[0] - r.lo[0]).abs() <= TOL {
                return Some([1.0, 0.0]);
            }
            if (p[0] - r.hi[0]).abs() <= TOL {
                return Some([-1.0, 0.0]);
            }
            return None;
        }
        let on = [
            ((p[0] - r.lo[0]).abs() <= TOL, [1.0, 0.0]),
            ((p[0] - r.hi[0]).abs() <= TOL, [-1.0, 0.0]),
            ((p[1] - r.lo[1]).abs() <= TOL, [0.0, 1.0]),
            ((p[1] - r.hi[1]).abs() <= TOL, [0.0, -1.0]),
        ];
        let hits: Vec<[f64; 2]> = on.iter().filter(|(h, _)| *h).map(|(_, n)| *n).collect();
        (hits.len() == 1 && self.contains(p)).then(|| hits[0])
    }

    /// Quadrature on `∂Ω` for `H^{n-1}`: the two end points (unit weight) in
    /// 1D, Gauss–Legendre on each side in 2D. Extra breakpoints split sides.
    pub fn boundary_nodes(&self, extra_x: &[f64], extra_y: &[f64]) -> Vec<BoundaryNode> {
        let r = self.rect;
        if self.dim == 1 {
            return vec![
                BoundaryNode {
                    x: [r.lo[0], 0.0],
                    w: 1.0,
                    normal: [1.0, 0.0],
                },
                BoundaryNode {
                    x: [r.hi[0], 0.0],
                    w: 1.0,
                    normal: [-1.0, 0.0],
                },
            ];
        }
        let params = |lo: f64, hi: f64, extra: &[f64]| -> Vec<f64> {
            extra.iter().map(|b| (b - lo) / (hi - lo)).filter(|t| *t > 0.0 && *t < 1.0).collect()
        };
        let px = params(r.lo[0], r.hi[0], extra_x);
        let py = params(r.lo[1], r.hi[1], extra_y);
        let sides: [(Point, Point, &Vec<f64>, [f64; 2]); 4] = [
            ([r.lo[0], r.lo[1]], [r.hi[0], r.lo[1]], &px, [0.0, 1.0]),
            ([r.hi[0], r.lo[1]], [r.hi[0], r.hi[1]], &py, [-1.0, 0.0]),
            ([r.lo[0], r.hi[1]], [r.hi[0], r.hi[1]], &px, [0.0, -1.0]),
            ([r.lo[0], r.lo[1]], [r.lo[0], r.hi[1]], &py, [1.0, 0.0]),
        ];
        let mut out = Vec::new();
        for (a, b, extra, normal) in sides {
            for QuadNode { x, w } in segment_nodes(a, b, self.resolution, extra) {
                out.push(BoundaryNode { x, w, normal });
            }
        }
        out
    }

    /// `H^{n-1}(∂Ω)`: 2 in 1D, the perimeter in 2D.
    pub fn boundary_measure(&self) -> f64 {
        if self.dim == 1 {
            2.0
        } else {
            let r = self.rect;
            2.0 * ((r.hi[0] - r.lo[0]) + (r.hi[1] - r.lo[1]))
        }
    }

    /// The boxes tiling `self ∖ inner` (assumes `inner` strictly inside).
    pub fn complement_boxes(&self, inner: &Domain) -> Vec<Rect> {
        let (o, i) = (self.rect, inner.rect);
        if self.dim == 1 {
            return vec![Rect::interval(o.lo[0], i.lo[0]), Rect::interval(i.hi[0], o.hi[0])];
        }
        vec![
            Rect::new([o.lo[0], o.lo[1]], [o.hi[0], i.lo[1]]),
            Rect::new([o.lo[0], i.hi[1]], [o.hi[0], o.hi[1]]),
            Rect::new([o.lo[0], i.lo[1]], [i.lo[0], i.hi[1]]),
            Rect::new([i.hi[0], i.lo[1]], [o.hi[0], i.hi[1]]),
        ]
    }
}
