//! Piecewise closed-form fields on boxes.

use std::ops::AddAssign;
use std::sync::Arc;

use crate::linalg::{Mat, Point};
use crate::measures::domain::Rect;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type MatFn = Arc<dyn Fn(Point) -> Mat + Send + Sync>;

pub fn scalar_fn(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

pub fn mat_fn(f: impl Fn(Point) -> Mat + Send + Sync + 'static) -> MatFn {
    Arc::new(f)
}

/// One closed-form piece. `subdivisions` asks the quadrature grid to split
/// the piece into at least that many cells per axis.
pub struct Piece<T> {
    pub region: Rect,
    pub f: Arc<dyn Fn(Point) -> T + Send + Sync>,
    pub subdivisions: usize,
}

impl<T> Clone for Piece<T> {
    fn clone(&self) -> Self {
        Self {
            region: self.region,
            f: Arc::clone(&self.f),
            subdivisions: self.subdivisions,
        }
    }
}

const BUCKETS: usize = 2048;

/// A sum of pieces, each supported on a closed box. Evaluation at a point
/// sums every piece containing it; on a partition (the usual case) this is
/// the value of the unique piece at interior points.
pub struct PiecewiseField<T> {
    dim: usize,
    pieces: Arc<Vec<Piece<T>>>,
    extra_breaks: [Vec<f64>; 2],
    index: Arc<BucketIndex>,
}

impl<T> Clone for PiecewiseField<T> {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            pieces: Arc::clone(&self.pieces),
            extra_breaks: self.extra_breaks.clone(),
            index: Arc::clone(&self.index),
        }
    }
}

struct BucketIndex {
    lo: f64,
    width: f64,
    buckets: Vec<Vec<u32>>,
}

impl BucketIndex {
    fn build<T>(pieces: &[Piece<T>]) -> Self {
        if pieces.is_empty() {
            return Self {
                lo: 0.0,
                width: 1.0,
                buckets: vec![],
            };
        }
        let lo = pieces.iter().map(|p| p.region.lo[0]).fold(f64::INFINITY, f64::min);
        let hi = pieces.iter().map(|p| p.region.hi[0]).fold(f64::NEG_INFINITY, f64::max);
        let n = BUCKETS.min(4 * pieces.len()).max(1);
        let width = ((hi - lo) / n as f64).max(1e-300);
        let mut buckets = vec![Vec::new(); n];
        for (k, p) in pieces.iter().enumerate() {
            let a = (((p.region.lo[0] - lo) / width).floor() as isize - 1).max(0) as usize;
            let b = ((((p.region.hi[0] - lo) / width).floor() as isize) + 1).min(n as isize - 1).max(0) as usize;
            for bucket in buckets.iter_mut().take(b + 1).skip(a) {
                bucket.push(k as u32);
            }
        }
        Self { lo, width, buckets }
    }

    fn candidates(&self, x: f64) -> &[u32] {
        if self.buckets.is_empty() {
            return &[];
        }
        let k = ((x - self.lo) / self.width).floor();
        if k < -1.0 || k > self.buckets.len() as f64 {
            return &[];
        }
        let k = (k.max(0.0) as usize).min(self.buckets.len() - 1);
        &self.buckets[k]
    }
}

impl<T> PiecewiseField<T>
where
    T: Clone + AddAssign + Send + Sync + 'static,
{
    pub fn new(dim: usize, pieces: Vec<Piece<T>>) -> Self {
        let index = Arc::new(BucketIndex::build(&pieces));
        Self {
            dim,
            pieces: Arc::new(pieces),
            extra_breaks: [Vec::new(), Vec::new()],
            index,
        }
    }

    pub fn empty(dim: usize) -> Self {
        Self::new(dim, Vec::new())
    }

    /// A single piece on `region`.
    pub fn single(dim: usize, region: Rect, f: impl Fn(Point) -> T + Send + Sync + 'static) -> Self {
        Self::new(
            dim,
            vec![Piece {
                region,
                f: Arc::new(f),
                subdivisions: 1,
            }],
        )
    }

    /// Adds breakpoints the quadrature must respect (e.g. where a closure
    /// composed from several piecewise fields has kinks).
    pub fn with_breaks(mut self, xs: &[f64], ys: &[f64]) -> Self {
        self.extra_breaks[0].extend_from_slice(xs);
        self.extra_breaks[1].extend_from_slice(ys);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Concatenation: the field of the sum.
    pub fn plus(&self, other: &PiecewiseField<T>) -> Self {
        let mut pieces: Vec<Piece<T>> = self.pieces.iter().cloned().collect();
        pieces.extend(other.pieces.iter().cloned());
        let mut out = Self::new(self.dim, pieces);
        for axis in 0..2 {
            out.extra_breaks[axis].extend_from_slice(&self.extra_breaks[axis]);
            out.extra_breaks[axis].extend_from_slice(&other.extra_breaks[axis]);
        }
        out
    }

    /// Maps every piece through `g(x, value)`, keeping regions.
    pub fn map<U>(&self, g: impl Fn(Point, T) -> U + Send + Sync + Clone + 'static) -> PiecewiseField<U>
    where
        U: Clone + AddAssign + Send + Sync + 'static,
    {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let f = Arc::clone(&p.f);
                let g = g.clone();
                Piece {
                    region: p.region,
                    f: Arc::new(move |x: Point| g(x, f(x))) as Arc<dyn Fn(Point) -> U + Send + Sync>,
                    subdivisions: p.subdivisions,
                }
            })
            .collect();
        let mut out = PiecewiseField::new(self.dim, pieces);
        out.extra_breaks = self.extra_breaks.clone();
        out
    }

    /// Sum of the pieces containing `x`, or `None` if no piece does.
    pub fn eval(&self, x: Point) -> Option<T> {
        let mut acc: Option<T> = None;
        for &k in self.index.candidates(x[0]) {
            let p = &self.pieces[k as usize];
            if p.region.contains(x, self.dim) {
                let v = (p.f)(x);
                match acc.as_mut() {
                    Some(a) => *a += v,
                    None => acc = Some(v),
                }
            }
        }
        acc
    }

    /// Value of the first piece (in insertion order) whose closed region
    /// contains `x`; this is the one-sided limit when `x` is on an edge.
    pub fn eval_first(&self, x: Point) -> Option<T> {
        let mut best: Option<u32> = None;
        for &k in self.index.candidates(x[0]) {
            if self.pieces[k as usize].region.contains(x, self.dim) && best.is_none_or(|b| k < b) {
                best = Some(k);
            }
        }
        best.map(|k| (self.pieces[k as usize].f)(x))
    }

    /// Index of the first piece whose open region contains `x`.
    pub fn piece_at(&self, x: Point) -> Option<usize> {
        let mut best: Option<u32> = None;
        for &k in self.index.candidates(x[0]) {
            if self.pieces[k as usize].region.contains_open(x, self.dim) && best.is_none_or(|b| k < b) {
                best = Some(k);
            }
        }
        best.map(|k| k as usize)
    }

    /// Breakpoints along `axis`: piece edges, requested subdivisions, and
    /// explicit extra breaks.
    pub fn breaks(&self, axis: usize) -> Vec<f64> {
        let mut out = self.extra_breaks[axis].clone();
        if axis == 1 && self.dim == 1 {
            return out;
        }
        for p in self.pieces.iter() {
            let (a, b) = (p.region.lo[axis], p.region.hi[axis]);
            let n = p.subdivisions.max(1);
            for k in 0..=n {
                out.push(a + (b - a) * k as f64 / n as f64);
            }
        }
        out
    }
}

impl PiecewiseField<f64> {
    pub fn constant(dim: usize, region: Rect, c: f64) -> Self {
        Self::single(dim, region, move |_| c)
    }
}

impl PiecewiseField<Mat> {
    pub fn constant_mat(dim: usize, region: Rect, c: Mat) -> Self {
        Self::single(dim, region, move |_| c)
    }
}
