//! Piecewise-smooth BV functions with explicit jump sets.
//!
//! A function is a list of pieces (closed-form value and gradient on a box)
//! plus jumps on registered carriers, so `Du = ∇u·L^n + (u⁺ − u⁻) ⊗ η·H^{n−1}`
//! is exact and every integral carries quadrature error only.

pub mod catalog;
pub(crate) mod convergence;
mod json;

use std::sync::Arc;

pub use catalog::{smooth_dirichlet_approximation, Sequence};
pub use convergence::{convergence_report, test_dictionary, ConvergenceReport, ConvergenceRow};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};
use crate::measures::{
    Carrier, CarrierGeometry, Domain, MatFn, MatrixMeasure, Piece, PiecewiseField, RadonMeasure, SingularPart,
};
use crate::quadrature::Grid;

/// Tolerance for one-sided traces against the adjacent pieces.
pub const TRACE_TOLERANCE: f64 = 1e-8;

/// A jump across a carrier; `plus` is the trace on the side `normal` points to.
#[derive(Clone)]
pub struct Jump {
    pub carrier: Carrier,
    pub plus: MatFn,
    pub minus: MatFn,
    normal: [f64; 2],
}

impl Jump {
    pub fn normal(&self) -> [f64; 2] {
        self.normal
    }

    /// `(u⁺ − u⁻) ⊗ η` at `x`.
    pub fn density(&self, x: Point, dim: usize) -> Mat {
        let d = (self.plus)(x) - (self.minus)(x);
        Mat::outer(d.as_slice(), &self.normal[..dim])
    }
}

/// Piecewise-`C¹` function `Ω → R^N` with jumps on registered carriers.
#[derive(Clone)]
pub struct BvFunction {
    domain: Domain,
    n_out: usize,
    values: PiecewiseField<Mat>,
    grads: PiecewiseField<Mat>,
    jumps: Vec<Jump>,
    trace: Option<MatFn>,
}

pub struct BvBuilder {
    domain: Domain,
    n_out: usize,
    values: Vec<Piece<Mat>>,
    grads: Vec<Piece<Mat>>,
    jumps: Vec<(Carrier, MatFn, MatFn, Option<[f64; 2]>)>,
    trace: Option<MatFn>,
}

impl BvBuilder {
    /// Adds a piece on `region` with value `u` (an `N×1` column) and
    /// gradient `∇u` (`N×n`).
    pub fn piece(
        self,
        region: crate::measures::Rect,
        u: impl Fn(Point) -> Mat + Send + Sync + 'static,
        grad: impl Fn(Point) -> Mat + Send + Sync + 'static,
    ) -> Self {
        self.piece_subdivided(region, u, grad, 1)
    }

    pub fn piece_subdivided(
        mut self,
        region: crate::measures::Rect,
        u: impl Fn(Point) -> Mat + Send + Sync + 'static,
        grad: impl Fn(Point) -> Mat + Send + Sync + 'static,
        subdivisions: usize,
    ) -> Self {
        self.values.push(Piece {
            region,
            f: Arc::new(u),
            subdivisions,
        });
        self.grads.push(Piece {
            region,
            f: Arc::new(grad),
            subdivisions,
        });
        self
    }

    /// Scalar affine piece `c + g·x`.
    pub fn affine_piece(self, region: crate::measures::Rect, c: f64, g: [f64; 2]) -> Self {
        let dim = self.domain.dim();
        self.piece(
            region,
            move |x| Mat::scalar(c + g[0] * x[0] + g[1] * x[1]),
            move |_| Mat::from_rows(1, dim, &g[..dim]),
        )
    }

    /// Jump with `η` the carrier's own normal.
    pub fn jump(mut self, carrier: Carrier, plus: MatFn, minus: MatFn) -> Self {
        self.jumps.push((carrier, plus, minus, None));
        self
    }

    /// Jump with an explicit unit normal (must be ± the carrier normal).
    pub fn jump_with_normal(mut self, carrier: Carrier, plus: MatFn, minus: MatFn, normal: [f64; 2]) -> Self {
        self.jumps.push((carrier, plus, minus, Some(normal)));
        self
    }

    pub fn trace(mut self, trace: MatFn) -> Self {
        self.trace = Some(trace);
        self
    }

    pub fn build(self) -> Result<BvFunction> {
        let dim = self.domain.dim();
        if self.values.is_empty() {
            return Err(Error::InvalidFunction("no pieces".into()));
        }
        let mut jumps = Vec::with_capacity(self.jumps.len());
        for (carrier, plus, minus, normal) in self.jumps {
            if carrier.is_point() && dim != 1 {
                return Err(Error::InvalidFunction("point jumps are only allowed in 1D".into()));
            }
            let own = carrier.normal();
            let (plus, minus) = match normal {
                None => (plus, minus),
                Some(n) => {
                    let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
                    let dot = n[0] * own[0] + n[1] * own[1];
                    if (len - 1.0).abs() > 1e-12 || (dot.abs() - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidFunction(format!("jump normal {n:?} is not ± the carrier normal")));
                    }
                    if dot > 0.0 {
                        (plus, minus)
                    } else {
                        (minus, plus)
                    }
                }
            };
            jumps.push(Jump {
                carrier,
                plus,
                minus,
                normal: own,
            });
        }
        let u = BvFunction {
            domain: self.domain,
            n_out: self.n_out,
            values: PiecewiseField::new(dim, self.values),
            grads: PiecewiseField::new(dim, self.grads),
            jumps,
            trace: self.trace,
        };
        u.validate()?;
        Ok(u)
    }
}

impl BvFunction {
    pub fn builder(domain: Domain, n_out: usize) -> BvBuilder {
        BvBuilder {
            domain,
            n_out,
            values: Vec::new(),
            grads: Vec::new(),
            jumps: Vec::new(),
            trace: None,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn value_field(&self) -> &PiecewiseField<Mat> {
        &self.values
    }

    pub fn grad_field(&self) -> &PiecewiseField<Mat> {
        &self.grads
    }

    fn zero(&self) -> Mat {
        Mat::zeros(self.n_out, 1)
    }

    /// `u(x)`; on piece edges the first piece in insertion order wins.
    pub fn eval(&self, x: Point) -> Mat {
        self.values.eval_first(x).unwrap_or_else(|| self.zero())
    }

    pub fn grad(&self, x: Point) -> Mat {
        self.grads
            .eval_first(x)
            .unwrap_or_else(|| Mat::zeros(self.n_out, self.domain.dim()))
    }

    /// Limit of the piece expressions at `x` from the side `dir` points to.
    pub fn one_sided(&self, x: Point, dir: [f64; 2]) -> Option<Mat> {
        let scale = {
            let r = self.domain.rect();
            (r.hi[0] - r.lo[0]).max(r.hi[1] - r.lo[1]).max(1.0)
        };
        let delta = 1e-9 * scale;
        let probe = [x[0] + delta * dir[0], x[1] + delta * dir[1]];
        let k = self.values.piece_at(probe)?;
        Some((self.values.pieces()[k].f)(x))
    }

    pub fn breaks(&self, axis: usize) -> Vec<f64> {
        self.values.breaks(axis)
    }

    fn validate(&self) -> Result<()> {
        let grid = Grid::new(&self.domain, &self.breaks(0), &self.breaks(1));
        let mut uncovered = None;
        grid.for_each_node(|n| {
            if uncovered.is_none() && self.values.eval_first(n.x).is_none() {
                uncovered = Some(n.x);
            }
        });
        if let Some(x) = uncovered {
            return Err(Error::InvalidFunction(format!("pieces do not cover {x:?}")));
        }
        let dim = self.domain.dim();
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let r = self.domain.rect();
        for j in &self.jumps {
            let eta = j.normal;
            for n in j.carrier.nodes_in(r.lo, r.hi, dim, self.domain.resolution(), &xs, &ys) {
                for (side, expected) in [(1.0, (j.plus)(n.x)), (-1.0, (j.minus)(n.x))] {
                    let dir = [side * eta[0], side * eta[1]];
                    let actual = self.one_sided(n.x, dir).ok_or_else(|| {
                        Error::InvalidFunction(format!("no piece next to jump node {:?}", n.x))
                    })?;
                    let gap = actual.max_abs_diff(&expected);
                    if !(gap <= TRACE_TOLERANCE) {
                        return Err(Error::TraceInconsistency {
                            gap,
                            x: n.x[0],
                            y: if dim == 2 { n.x[1] } else { 0.0 },
                        });
                    }
                }
            }
        }
        if let Some(tr) = &self.trace {
            for b in self.domain.boundary_nodes(&self.breaks(0), &self.breaks(1)) {
                let actual = self
                    .one_sided(b.x, b.normal)
                    .ok_or_else(|| Error::InvalidFunction(format!("no piece next to boundary node {:?}", b.x)))?;
                let gap = actual.max_abs_diff(&tr(b.x));
                if !(gap <= TRACE_TOLERANCE) {
                    return Err(Error::TraceInconsistency {
                        gap,
                        x: b.x[0],
                        y: b.x[1],
                    });
                }
            }
        }
        Ok(())
    }

    /// `Du = ∇u·L^n + Σ (u⁺ − u⁻) ⊗ η·H^{n−1}⌞J`.
    pub fn derivative(&self) -> MatrixMeasure {
        let dim = self.domain.dim();
        let mut m = MatrixMeasure::zero(self.domain, self.n_out).with_density(self.grads.clone());
        for j in &self.jumps {
            let jj = j.clone();
            m.push_part(SingularPart {
                carrier: j.carrier,
                density: Arc::new(move |x: Point| jj.density(x, dim)),
            });
        }
        m
    }

    /// Trace on `∂Ω`: the stored one if given, otherwise the limit of the
    /// adjacent piece along the inner normal.
    pub fn boundary_trace(&self, x: Point) -> Mat {
        if let Some(tr) = &self.trace {
            return tr(x);
        }
        match self.domain.boundary_normal(x) {
            Some(nu) => self.one_sided(x, nu).unwrap_or_else(|| self.eval(x)),
            None => self.eval(x),
        }
    }

    /// Residual of `∫ ∂_j ψ uⁱ dx + ∫ ψ dDuⁱ_j + ∫_{∂Ω} ψ uⁱ ν_j dH^{n−1} = 0`,
    /// where `ν` is the inner normal (the boundary term vanishes for
    /// compactly supported `ψ`).
    pub fn verify_integration_by_parts(
        &self,
        psi: impl Fn(Point) -> f64,
        dpsi: impl Fn(Point) -> [f64; 2],
        i: usize,
        j: usize,
    ) -> f64 {
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let grid = Grid::new(&self.domain, &xs, &ys);
        let lhs = grid.integrate(|x| dpsi(x)[j] * self.values.eval(x).map_or(0.0, |u| u.get(i, 0)));
        let du = self.derivative();
        let mut rhs = grid.integrate(|x| psi(x) * du.density(x).get(i, j));
        for jump in &self.jumps {
            for n in jump.carrier.nodes_in(self.domain.rect().lo, self.domain.rect().hi, self.domain.dim(), self.domain.resolution(), &xs, &ys) {
                rhs += n.w * psi(n.x) * jump.density(n.x, self.domain.dim()).get(i, j);
            }
        }
        let mut bdry = 0.0;
        for b in self.domain.boundary_nodes(&xs, &ys) {
            bdry += b.w * psi(b.x) * self.boundary_trace(b.x).get(i, 0) * b.normal[j];
        }
        (lhs + rhs + bdry).abs()
    }

    /// `‖u − v‖_{L¹}` (Euclidean norm in `R^N`).
    pub fn l1_distance(&self, other: &BvFunction) -> f64 {
        let mut xs = self.breaks(0);
        xs.extend(other.breaks(0));
        let mut ys = self.breaks(1);
        ys.extend(other.breaks(1));
        Grid::new(&self.domain, &xs, &ys).integrate(|x| (self.values.eval(x).unwrap_or(self.zero()) - other.values.eval(x).unwrap_or(other.zero())).norm())
    }

    pub fn l1_norm(&self) -> f64 {
        Grid::new(&self.domain, &self.breaks(0), &self.breaks(1)).integrate(|x| self.values.eval(x).map_or(0.0, |u| u.norm()))
    }

    /// `u + c` (constant shift).
    pub fn shifted(&self, c: Mat) -> BvFunction {
        let mut out = self.clone();
        out.values = self.values.map(move |_, v: Mat| v + c);
        out.jumps = self
            .jumps
            .iter()
            .map(|j| {
                let (p, m) = (Arc::clone(&j.plus), Arc::clone(&j.minus));
                Jump {
                    carrier: j.carrier,
                    plus: Arc::new(move |x: Point| p(x) + c),
                    minus: Arc::new(move |x: Point| m(x) + c),
                    normal: j.normal,
                }
            })
            .collect();
        out.trace = self.trace.as_ref().map(|t| {
            let t = Arc::clone(t);
            Arc::new(move |x: Point| t(x) + c) as MatFn
        });
        out
    }

    /// Extension by zero to a strictly larger box. The derivative gains the
    /// boundary part `u ⊗ ν_Ω·H^{n−1}⌞∂Ω` (`ν_Ω` the inner normal of `Ω`).
    pub fn zero_extension(&self, outer: &Domain) -> Result<BvFunction> {
        if !self.domain.strictly_inside(outer) {
            return Err(Error::InvalidDomain("extension domain must strictly contain the original".into()));
        }
        let n = self.n_out;
        let dim = self.domain.dim();
        let mut b = BvFunction::builder(*outer, n);
        for (vp, gp) in self.values.pieces().iter().zip(self.grads.pieces()) {
            b.values.push(vp.clone());
            b.grads.push(gp.clone());
        }
        for r in outer.complement_boxes(&self.domain) {
            b = b.piece(r, move |_| Mat::zeros(n, 1), move |_| Mat::zeros(n, dim));
        }
        for j in &self.jumps {
            b = b.jump(j.carrier, Arc::clone(&j.plus), Arc::clone(&j.minus));
        }
        let me = self.clone();
        let trace: MatFn = Arc::new(move |x: Point| me.boundary_trace(x));
        let zero: MatFn = Arc::new(move |_| Mat::zeros(n, 1));
        let r = self.domain.rect();
        if dim == 1 {
            b = b.jump_with_normal(Carrier::point_1d(r.lo[0])?, Arc::clone(&trace), Arc::clone(&zero), [1.0, 0.0]);
            b = b.jump_with_normal(Carrier::point_1d(r.hi[0])?, Arc::clone(&trace), Arc::clone(&zero), [-1.0, 0.0]);
        } else {
            let sides = [
                ([r.lo[0], r.lo[1]], [r.hi[0], r.lo[1]], [0.0, 1.0]),
                ([r.hi[0], r.lo[1]], [r.hi[0], r.hi[1]], [-1.0, 0.0]),
                ([r.lo[0], r.hi[1]], [r.hi[0], r.hi[1]], [0.0, -1.0]),
                ([r.lo[0], r.lo[1]], [r.lo[0], r.hi[1]], [1.0, 0.0]),
            ];
            for (a, c, nu) in sides {
                b = b.jump_with_normal(Carrier::segment(a, c)?, Arc::clone(&trace), Arc::clone(&zero), nu);
            }
        }
        b = b.trace(Arc::new(move |_| Mat::zeros(n, 1)));
        b.build()
    }

    /// `|Du|(Ω)`.
    pub fn total_variation(&self) -> f64 {
        self.derivative().total_variation(None)
    }

    /// `⟨Du⟩(Ω)`.
    pub fn area(&self) -> f64 {
        self.derivative().area_functional(None)
    }

    /// Jump carriers other than boundary sides (all of them for functions
    /// built directly).
    pub fn jump_carriers(&self) -> Vec<Carrier> {
        self.jumps.iter().map(|j| j.carrier).collect()
    }

    /// Whether every jump lies on a point carrier (1D) or segment (2D).
    pub fn is_well_formed(&self) -> bool {
        self.jumps.iter().all(|j| match j.carrier.geometry() {
            CarrierGeometry::Point(_) => self.domain.dim() == 1,
            CarrierGeometry::Segment { .. } => self.domain.dim() == 2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Rect;

    fn heaviside() -> BvFunction {
        catalog::heaviside(Domain::unit_interval(16), 0.5).unwrap()
    }

    #[test]
    fn smooth_derivative_has_no_singular_part() {
        let u = catalog::affine(Domain::unit_interval(8), 0.0, [1.0, 0.0]).unwrap();
        let du = u.derivative();
        assert!((du.total_variation(None) - 1.0).abs() < 1e-14);
        assert!(du.singular_parts().is_empty());
        assert_eq!(u.boundary_trace([0.0, 0.0]).get(0, 0), 0.0);
        assert_eq!(u.boundary_trace([1.0, 0.0]).get(0, 0), 1.0);
    }

    #[test]
    fn heaviside_derivative_is_a_unit_atom() {
        let du = heaviside().derivative();
        assert_eq!(du.singular_parts().len(), 1);
        let c = Carrier::point_1d(0.5).unwrap();
        assert_eq!(du.carrier_density(c.id(), [0.5, 0.0]).unwrap().get(0, 0), 1.0);
        let r = heaviside().verify_integration_by_parts(|x| 3.0 * x[0] * (1.0 - x[0]), |x| [3.0 * (1.0 - 2.0 * x[0]), 0.0], 0, 0);
        assert!(r < 1e-14, "{r}");
    }

    #[test]
    fn two_dimensional_step() {
        let u = catalog::step_2d(Domain::unit_square(8), 0.5).unwrap();
        let du = u.derivative();
        assert!((du.total_variation(None) - 1.0).abs() < 1e-14);
        let r = u.verify_integration_by_parts(|x| x[0] * x[1] * x[1], |x| [x[1] * x[1], 2.0 * x[0] * x[1]], 0, 0);
        assert!(r < 1e-13, "{r}");
        let r = u.verify_integration_by_parts(|x| x[0] * x[1] * x[1], |x| [x[1] * x[1], 2.0 * x[0] * x[1]], 0, 1);
        assert!(r < 1e-13, "{r}");
    }

    #[test]
    fn inconsistent_trace_is_rejected() {
        let d = Domain::unit_interval(8);
        let c = Carrier::point_1d(0.5).unwrap();
        let r = BvFunction::builder(d, 1)
            .affine_piece(Rect::interval(0.0, 0.5), 0.0, [0.0, 0.0])
            .affine_piece(Rect::interval(0.5, 1.0), 1.0, [0.0, 0.0])
            .jump(c, Arc::new(|_| Mat::scalar(2.0)), Arc::new(|_| Mat::scalar(0.0)))
            .build();
        assert!(matches!(r, Err(Error::TraceInconsistency { .. })));
    }

    #[test]
    fn zero_extension_of_constant_one() {
        let u = catalog::affine(Domain::unit_interval(8), 1.0, [0.0, 0.0]).unwrap();
        let outer = Domain::interval(-1.0, 2.0, 8).unwrap();
        let e = u.zero_extension(&outer).unwrap();
        let du = e.derivative();
        let at = |x: f64| du.carrier_density(Carrier::point_1d(x).unwrap().id(), [x, 0.0]).unwrap().get(0, 0);
        assert_eq!(at(0.0), 1.0);
        assert_eq!(at(1.0), -1.0);
        assert!((e.l1_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_extension_in_two_dimensions_adds_perimeter_mass() {
        let u = catalog::affine(Domain::unit_square(8), 2.0, [0.0, 0.0]).unwrap();
        let outer = Domain::rectangle([-1.0, -1.0], [2.0, 2.0], 8).unwrap();
        let e = u.zero_extension(&outer).unwrap();
        assert!((e.total_variation() - 8.0).abs() < 1e-13);
        let zero = catalog::affine(Domain::unit_square(8), 0.0, [0.0, 0.0]).unwrap();
        assert_eq!(zero.zero_extension(&outer).unwrap().total_variation(), 0.0);
    }
}
