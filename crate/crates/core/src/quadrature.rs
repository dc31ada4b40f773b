//! Fixed-order quadrature on box domains and segments.
//!
//! Cells are the tensor product of the domain's uniform grid lines and any
//! breakpoints contributed by piecewise fields, so every cell lies inside a
//! single piece. Each cell (and each segment sub-interval) carries a
//! three-point Gauss–Legendre rule per axis. Summation order is fixed:
//! cells row by row (`y` outer, `x` inner), nodes within a cell likewise.

use crate::linalg::Point;
use crate::measures::domain::{Domain, Rect};

/// Gauss–Legendre abscissae on `[0, 1]`.
pub const GL3_NODES: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
/// Matching weights on `[0, 1]` (sum to one).
pub const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub x: Point,
    pub w: f64,
}

/// Sorted, de-duplicated breakpoints clipped to `[lo, hi]`, always including
/// the end points.
pub fn merge_breaks(lo: f64, hi: f64, uniform: usize, extra: &[f64]) -> Vec<f64> {
    let scale = (hi - lo).abs().max(1.0);
    let mut all: Vec<f64> = Vec::with_capacity(uniform + extra.len() + 2);
    for k in 0..=uniform {
        all.push(lo + (hi - lo) * k as f64 / uniform as f64);
    }
    all.extend(extra.iter().copied().filter(|b| *b > lo && *b < hi));
    all.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for b in all {
        match out.last() {
            Some(last) if (b - last).abs() <= 1e-13 * scale => {}
            _ => out.push(b),
        }
    }
    if let Some(last) = out.last_mut() {
        *last = hi;
    }
    out
}

#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Grid {
    /// Grid over the whole domain.
    pub fn new(domain: &Domain, extra_x: &[f64], extra_y: &[f64]) -> Self {
        Self::over(domain, domain.rect(), extra_x, extra_y)
    }

    /// Grid over a sub-box of the domain; uniform lines are still those of
    /// the domain so that nested regions share cells.
    pub fn over(domain: &Domain, region: Rect, extra_x: &[f64], extra_y: &[f64]) -> Self {
        let r = domain.resolution();
        let d = domain.rect();
        let mut ex: Vec<f64> = extra_x.to_vec();
        let uniform_x = merge_breaks(d.lo[0], d.hi[0], r, &[]);
        ex.extend(uniform_x);
        let xs = merge_breaks(region.lo[0], region.hi[0], 1, &ex);
        let ys = if domain.dim() == 2 {
            let mut ey: Vec<f64> = extra_y.to_vec();
            ey.extend(merge_breaks(d.lo[1], d.hi[1], r, &[]));
            merge_breaks(region.lo[1], region.hi[1], 1, &ey)
        } else {
            vec![0.0, 1.0]
        };
        Self { dim: domain.dim(), xs, ys }
    }

    pub fn cell_count(&self) -> usize {
        (self.xs.len() - 1) * (self.ys.len() - 1)
    }

    pub fn x_breaks(&self) -> &[f64] {
        &self.xs
    }

    /// Visits every node in the fixed order.
    pub fn for_each_node(&self, mut f: impl FnMut(QuadNode)) {
        for yc in self.ys.windows(2) {
            let (y0, hy) = (yc[0], yc[1] - yc[0]);
            for xc in self.xs.windows(2) {
                let (x0, hx) = (xc[0], xc[1] - xc[0]);
                if self.dim == 1 {
                    for (t, w) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                        f(QuadNode {
                            x: [x0 + t * hx, 0.0],
                            w: w * hx,
                        });
                    }
                } else {
                    for (ty, wy) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                        for (tx, wx) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                            f(QuadNode {
                                x: [x0 + tx * hx, y0 + ty * hy],
                                w: wx * wy * hx * hy,
                            });
                        }
                    }
                }
            }
        }
    }

    pub fn nodes(&self) -> Vec<QuadNode> {
        let per_cell = if self.dim == 1 { 3 } else { 9 };
        let mut v = Vec::with_capacity(self.cell_count() * per_cell);
        self.for_each_node(|n| v.push(n));
        v
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        let mut s = 0.0;
        self.for_each_node(|n| s += n.w * f(n.x));
        s
    }
}

/// Gauss–Legendre nodes on the segment `from → to`, split into `subdivisions`
/// equal sub-intervals plus any extra parameter breakpoints in `(0, 1)`.
/// Weights are arc length.
pub fn segment_nodes(from: Point, to: Point, subdivisions: usize, extra_params: &[f64]) -> Vec<QuadNode> {
    let len = ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt();
    let ts = merge_breaks(0.0, 1.0, subdivisions.max(1), extra_params);
    let mut out = Vec::with_capacity(3 * (ts.len() - 1));
    for w in ts.windows(2) {
        let (t0, ht) = (w[0], w[1] - w[0]);
        for (s, ws) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
            let t = t0 + s * ht;
            out.push(QuadNode {
                x: [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])],
                w: ws * ht * len,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl3_is_exact_for_quintics() {
        let d = Domain::interval(0.0, 1.0, 1).unwrap();
        let g = Grid::new(&d, &[], &[]);
        let v = g.integrate(|p| p[0].powi(5) - 2.0 * p[0].powi(4));
        assert!((v - (1.0 / 6.0 - 2.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn breaks_are_merged_and_clipped() {
        let b = merge_breaks(0.0, 1.0, 2, &[0.25, 0.5, 0.5 + 1e-16, 2.0, -1.0]);
        assert_eq!(b, vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn grid_cells_tile_the_square() {
        let d = Domain::rectangle([0.0, 0.0], [2.0, 1.0], 4).unwrap();
        let g = Grid::new(&d, &[0.3], &[0.7]);
        assert_eq!(g.cell_count(), 5 * 5);
        assert!((g.integrate(|_| 1.0) - 2.0).abs() < 1e-14);
        let v = g.integrate(|p| p[0] * p[1]);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn segment_quadrature_measures_length() {
        let nodes = segment_nodes([0.0, 0.0], [3.0, 4.0], 5, &[0.5]);
        let len: f64 = nodes.iter().map(|n| n.w).sum();
        assert!((len - 5.0).abs() < 1e-14);
    }
}
