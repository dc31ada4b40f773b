//! Singular carriers (points and segments) interned in a process-wide
//! registry, so that "same carrier" is decided by id rather than by
//! floating-point geometry.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use once_cell::sync::Lazy;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::quadrature::{segment_nodes, QuadNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CarrierId(pub u32);

impl fmt::Display for CarrierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarrierGeometry {
    Point(Point),
    /// Canonically oriented so that `from < to` lexicographically.
    Segment { from: Point, to: Point },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Carrier {
    id: CarrierId,
    geometry: CarrierGeometry,
}

#[derive(Default)]
struct Registry {
    by_key: HashMap<[u64; 5], CarrierId>,
    next: u32,
}

static REGISTRY: Lazy<Mutex<Registry>> = Lazy::new(|| Mutex::new(Registry::default()));

fn canon(v: f64) -> u64 {
    // identify -0.0 with 0.0
    (if v == 0.0 { 0.0 } else { v }).to_bits()
}

fn intern(key: [u64; 5]) -> CarrierId {
    let mut reg = REGISTRY.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(id) = reg.by_key.get(&key) {
        return *id;
    }
    let id = CarrierId(reg.next);
    reg.next += 1;
    reg.by_key.insert(key, id);
    id
}

impl Carrier {
    /// Point carrier (atoms); `p[1]` is ignored by 1D domains but must be 0.
    pub fn point(p: Point) -> Result<Self> {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::InvalidMeasure(format!("non-finite atom location {p:?}")));
        }
        let id = intern([0, canon(p[0]), canon(p[1]), 0, 0]);
        Ok(Self {
            id,
            geometry: CarrierGeometry::Point(p),
        })
    }

    pub fn point_1d(x: f64) -> Result<Self> {
        Self::point([x, 0.0])
    }

    pub fn segment(a: Point, b: Point) -> Result<Self> {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidMeasure(format!("degenerate segment {a:?} -> {b:?}")));
        }
        let (from, to) = if (a[0], a[1]) <= (b[0], b[1]) { (a, b) } else { (b, a) };
        let id = intern([1, canon(from[0]), canon(from[1]), canon(to[0]), canon(to[1])]);
        Ok(Self {
            id,
            geometry: CarrierGeometry::Segment { from, to },
        })
    }

    pub fn id(&self) -> CarrierId {
        self.id
    }

    pub fn geometry(&self) -> CarrierGeometry {
        self.geometry
    }

    pub fn is_point(&self) -> bool {
        matches!(self.geometry, CarrierGeometry::Point(_))
    }

    /// `H^0` (points) or `H^1` (segments) dimension.
    pub fn hausdorff_dim(&self) -> usize {
        if self.is_point() {
            0
        } else {
            1
        }
    }

    pub fn length(&self) -> f64 {
        match self.geometry {
            CarrierGeometry::Point(_) => 0.0,
            CarrierGeometry::Segment { from, to } => ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt(),
        }
    }

    /// Unit normal `η` of a segment: the direction rotated by −90°.
    /// For points this is `+e₁` (the 1D orientation).
    pub fn normal(&self) -> [f64; 2] {
        match self.geometry {
            CarrierGeometry::Point(_) => [1.0, 0.0],
            CarrierGeometry::Segment { from, to } => {
                let l = self.length();
                [(to[1] - from[1]) / l, -(to[0] - from[0]) / l]
            }
        }
    }

    /// Quadrature nodes for integrating densities against `H^{dim}` on the
    /// carrier. A point carrier has the single node with unit weight.
    pub fn nodes(&self, subdivisions: usize) -> Vec<QuadNode> {
        match self.geometry {
            CarrierGeometry::Point(p) => vec![QuadNode { x: p, w: 1.0 }],
            CarrierGeometry::Segment { from, to } => segment_nodes(from, to, subdivisions, &[]),
        }
    }

    /// Nodes restricted to the box `[lo, hi]` (closed). Segments are also
    /// split where they cross the vertical lines `xs` and horizontal lines
    /// `ys`, so piecewise densities are integrated piece by piece.
    pub fn nodes_in(&self, lo: Point, hi: Point, dim: usize, subdivisions: usize, xs: &[f64], ys: &[f64]) -> Vec<QuadNode> {
        let inside = |p: Point| {
            p[0] >= lo[0] - 1e-12 && p[0] <= hi[0] + 1e-12 && (dim == 1 || (p[1] >= lo[1] - 1e-12 && p[1] <= hi[1] + 1e-12))
        };
        match self.geometry {
            CarrierGeometry::Point(p) => {
                if inside(p) {
                    vec![QuadNode { x: p, w: 1.0 }]
                } else {
                    vec![]
                }
            }
            CarrierGeometry::Segment { from, to } => match clip_segment(from, to, lo, hi) {
                Some((t0, t1)) => {
                    let a = lerp(from, to, t0);
                    let b = lerp(from, to, t1);
                    let mut params = Vec::new();
                    for (axis, lines) in [(0usize, xs), (1usize, ys)] {
                        let d = b[axis] - a[axis];
                        if d.abs() > 1e-300 {
                            params.extend(lines.iter().map(|l| (l - a[axis]) / d));
                        }
                    }
                    segment_nodes(a, b, subdivisions, &params)
                }
                None => vec![],
            },
        }
    }

    /// Positive-length overlap of two distinct segments (points never
    /// overlap in the `H^{n-1}` sense).
    pub fn overlaps(&self, other: &Carrier) -> bool {
        if self.id == other.id {
            return true;
        }
        let (CarrierGeometry::Segment { from: a0, to: a1 }, CarrierGeometry::Segment { from: b0, to: b1 }) =
            (self.geometry, other.geometry)
        else {
            return false;
        };
        let d = [a1[0] - a0[0], a1[1] - a0[1]];
        let cross = |p: Point| d[0] * (p[1] - a0[1]) - d[1] * (p[0] - a0[0]);
        let scale = self.length().max(1e-300);
        if cross(b0).abs() > 1e-12 * scale || cross(b1).abs() > 1e-12 * scale {
            return false;
        }
        let proj = |p: Point| (d[0] * (p[0] - a0[0]) + d[1] * (p[1] - a0[1])) / (scale * scale);
        let (s0, s1) = {
            let (u, v) = (proj(b0), proj(b1));
            (u.min(v), u.max(v))
        };
        s1.min(1.0) - s0.max(0.0) > 1e-12
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Liang–Barsky clipping of `a → b` against a box; returns the parameter
/// interval of positive length inside it.
fn clip_segment(a: Point, b: Point, lo: Point, hi: Point) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = [b[0] - a[0], b[1] - a[1]];
    for axis in 0..2 {
        if d[axis].abs() < 1e-300 {
            if a[axis] < lo[axis] - 1e-12 || a[axis] > hi[axis] + 1e-12 {
                return None;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo[axis] - a[axis]) / d[axis], (hi[axis] - a[axis]) / d[axis]);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
    }
    (t1 - t0 > 1e-14).then_some((t0, t1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_structural() {
        let a = Carrier::point_1d(0.5).unwrap();
        let b = Carrier::point_1d(0.5).unwrap();
        let c = Carrier::point_1d(0.25).unwrap();
        assert_eq!(a.id(), b.id());
        assert_ne!(a.id(), c.id());
        let s = Carrier::segment([0.5, 0.0], [0.5, 1.0]).unwrap();
        let r = Carrier::segment([0.5, 1.0], [0.5, 0.0]).unwrap();
        assert_eq!(s.id(), r.id());
        assert_eq!(Carrier::point_1d(-0.0).unwrap().id(), Carrier::point_1d(0.0).unwrap().id());
    }

    #[test]
    fn segment_normal_is_unit() {
        let s = Carrier::segment([0.5, 0.0], [0.5, 1.0]).unwrap();
        let n = s.normal();
        assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-15);
        assert_eq!(n, [1.0, 0.0]);
    }

    #[test]
    fn overlap_detection() {
        let s = Carrier::segment([0.5, 0.0], [0.5, 1.0]).unwrap();
        let t = Carrier::segment([0.5, 0.25], [0.5, 0.75]).unwrap();
        let u = Carrier::segment([0.25, 0.0], [0.25, 1.0]).unwrap();
        let v = Carrier::segment([0.5, 1.0], [0.5, 2.0]).unwrap();
        assert!(s.overlaps(&t));
        assert!(!s.overlaps(&u));
        assert!(!s.overlaps(&v));
    }

    #[test]
    fn clipping_restricts_nodes() {
        let s = Carrier::segment([0.0, 0.5], [1.0, 0.5]).unwrap();
        let nodes = s.nodes_in([0.25, 0.0], [0.75, 1.0], 2, 4, &[0.3], &[]);
        let len: f64 = nodes.iter().map(|n| n.w).sum();
        assert!((len - 0.5).abs() < 1e-14);
        assert!(s.nodes_in([0.0, 0.6], [1.0, 1.0], 2, 4, &[], &[]).is_empty());
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(Carrier::segment([0.1, 0.1], [0.1, 0.1]).is_err());
    }
}
