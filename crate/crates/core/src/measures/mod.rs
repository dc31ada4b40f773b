//! Structured Radon measures on box domains: an absolutely continuous part
//! given by a piecewise closed-form density, plus singular parts carried by
//! registered points and segments.

pub mod carrier;
pub mod domain;
pub mod field;
mod json;

use std::sync::Arc;

pub use carrier::{Carrier, CarrierGeometry, CarrierId};
pub use domain::{BoundaryNode, Domain, Rect};
pub use field::{mat_fn, scalar_fn, MatFn, Piece, PiecewiseField, ScalarFn};
pub use json::{domain_from_json, point as json_point, rect_from_json};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};
use crate::quadrature::{Grid, QuadNode};

/// Default `ε` in the surrogate `a ≥ ε` for `L^n ≪ μ`.
pub const DEFAULT_LEBESGUE_FLOOR: f64 = 1e-12;

/// A density carried by a point or a segment (against `H^0` or `H^1`).
pub struct SingularPart<T> {
    pub carrier: Carrier,
    pub density: Arc<dyn Fn(Point) -> T + Send + Sync>,
}

impl<T> Clone for SingularPart<T> {
    fn clone(&self) -> Self {
        Self {
            carrier: self.carrier,
            density: Arc::clone(&self.density),
        }
    }
}

/// Quadrature nodes over `region ∩ Ω` respecting all the given breakpoints.
pub(crate) fn joint_grid(domain: &Domain, region: Option<Rect>, xs: &[f64], ys: &[f64]) -> Option<Grid> {
    let r = match region {
        Some(r) => r.intersect(&domain.rect(), domain.dim())?,
        None => domain.rect(),
    };
    Some(Grid::over(domain, r, xs, ys))
}

fn carrier_nodes(domain: &Domain, c: &Carrier, region: Option<Rect>, xs: &[f64], ys: &[f64]) -> Vec<QuadNode> {
    let r = region.unwrap_or_else(|| domain.rect());
    c.nodes_in(r.lo, r.hi, domain.dim(), domain.resolution(), xs, ys)
}

/// Operations shared by scalar and matrix-valued measures.
pub trait RadonMeasure {
    fn domain(&self) -> &Domain;
    /// `|density|` at `x`.
    fn density_norm(&self, x: Point) -> f64;
    fn breaks(&self, axis: usize) -> Vec<f64>;
    fn carriers(&self) -> Vec<Carrier>;
    /// `|density|` of the `k`-th singular part at `x`.
    fn singular_norm(&self, k: usize, x: Point) -> f64;

    /// `|γ|(region)`; `None` means the whole domain.
    fn total_variation(&self, region: Option<Rect>) -> f64 {
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let ac = joint_grid(self.domain(), region, &xs, &ys).map_or(0.0, |g| g.integrate(|x| self.density_norm(x)));
        ac + self.singular_mass(region)
    }

    /// Mass of the singular parts inside `region`.
    fn singular_mass(&self, region: Option<Rect>) -> f64 {
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let mut s = 0.0;
        for (k, c) in self.carriers().iter().enumerate() {
            for n in carrier_nodes(self.domain(), c, region, &xs, &ys) {
                s += n.w * self.singular_norm(k, n.x);
            }
        }
        s
    }

    /// `⟨γ⟩(region) = ∫ √(1 + |a|²) dL^n + |γ^s|(region)`.
    fn area_functional(&self, region: Option<Rect>) -> f64 {
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let ac = joint_grid(self.domain(), region, &xs, &ys)
            .map_or(0.0, |g| g.integrate(|x| (1.0 + self.density_norm(x).powi(2)).sqrt()));
        ac + self.singular_mass(region)
    }
}

/// `true` iff the two measures have no common node with both densities
/// nonzero and share no carrier.
pub fn mutually_singular(a: &dyn RadonMeasure, b: &dyn RadonMeasure) -> bool {
    let ids_a: Vec<CarrierId> = a.carriers().iter().map(|c| c.id()).collect();
    if b.carriers().iter().any(|c| ids_a.contains(&c.id())) {
        return false;
    }
    let mut xs = a.breaks(0);
    xs.extend(b.breaks(0));
    let mut ys = a.breaks(1);
    ys.extend(b.breaks(1));
    let Some(grid) = joint_grid(a.domain(), None, &xs, &ys) else {
        return true;
    };
    let mut overlap = false;
    grid.for_each_node(|n| overlap |= a.density_norm(n.x) > 0.0 && b.density_norm(n.x) > 0.0);
    !overlap
}

/// Positive scalar Radon measure `μ = a·L^n + μ^s`.
#[derive(Clone)]
pub struct ScalarMeasure {
    domain: Domain,
    density: PiecewiseField<f64>,
    singular: Vec<SingularPart<f64>>,
    floor: Option<f64>,
}

impl ScalarMeasure {
    /// The zero measure.
    pub fn zero(domain: Domain) -> Self {
        Self {
            domain,
            density: PiecewiseField::empty(domain.dim()),
            singular: Vec::new(),
            floor: None,
        }
    }

    /// `c·L^n` on the domain, flagged as dominating Lebesgue when `c > 0`.
    pub fn lebesgue(domain: Domain, c: f64) -> Result<Self> {
        let m = Self::zero(domain).with_density(PiecewiseField::constant(domain.dim(), domain.rect(), c))?;
        if c > 0.0 {
            m.dominating(DEFAULT_LEBESGUE_FLOOR)
        } else {
            Ok(m)
        }
    }

    /// Replaces the density; it must be nonnegative at every quadrature node.
    pub fn with_density(mut self, density: PiecewiseField<f64>) -> Result<Self> {
        self.density = density;
        self.check_nonnegative()?;
        Ok(self)
    }

    pub fn with_density_fn(self, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let field = PiecewiseField::single(self.domain.dim(), self.domain.rect(), f);
        self.with_density(field)
    }

    pub fn with_atom(self, x: Point, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidMeasure(format!("atom weight {weight} must be finite and nonnegative")));
        }
        let c = Carrier::point(x)?;
        self.with_carrier(c, move |_| weight)
    }

    /// Adds a nonnegative density on a carrier. Carriers lying on `∂Ω` are
    /// rejected, so `μ(∂Ω) = 0` holds by construction.
    pub fn with_carrier(mut self, carrier: Carrier, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Result<Self> {
        check_carrier_inside(&self.domain, &carrier)?;
        let density: ScalarFn = Arc::new(f);
        for n in carrier.nodes(self.domain.resolution()) {
            let v = density(n.x);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidMeasure(format!("carrier density {v} at {:?}", n.x)));
            }
        }
        self.singular.push(SingularPart { carrier, density });
        Ok(self)
    }

    /// Flags the measure as dominating `L^n` with floor `eps`, checked at
    /// every quadrature node.
    pub fn dominating(mut self, eps: f64) -> Result<Self> {
        self.floor = Some(eps);
        self.check_floor(&[], &[])?;
        Ok(self)
    }

    pub fn lebesgue_floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn density_field(&self) -> &PiecewiseField<f64> {
        &self.density
    }

    pub fn singular_parts(&self) -> &[SingularPart<f64>] {
        &self.singular
    }

    /// `a(x)`, zero where no piece is defined.
    pub fn density(&self, x: Point) -> f64 {
        self.density.eval(x).unwrap_or(0.0)
    }

    /// Sum of the densities of all parts on the carrier with this id.
    pub fn carrier_density(&self, id: CarrierId, x: Point) -> Option<f64> {
        let mut acc = None;
        for p in self.singular.iter().filter(|p| p.carrier.id() == id) {
            *acc.get_or_insert(0.0) += (p.density)(x);
        }
        acc
    }

    pub fn mass(&self) -> f64 {
        self.total_variation(None)
    }

    /// Scalar multiple `c·μ` (`c ≥ 0`).
    pub fn scaled(&self, c: f64) -> Self {
        let density = self.density.map(move |_, v| c * v);
        let singular = self
            .singular
            .iter()
            .map(|p| {
                let f = Arc::clone(&p.density);
                SingularPart {
                    carrier: p.carrier,
                    density: Arc::new(move |x: Point| c * f(x)) as ScalarFn,
                }
            })
            .collect();
        Self {
            domain: self.domain,
            density,
            singular,
            floor: self.floor.map(|e| e * c),
        }
    }

    fn check_nonnegative(&self) -> Result<()> {
        let grid = Grid::new(&self.domain, &self.density.breaks(0), &self.density.breaks(1));
        let mut bad = None;
        grid.for_each_node(|n| {
            let v = self.density(n.x);
            if bad.is_none() && (!(v >= 0.0) || !v.is_finite()) {
                bad = Some((v, n.x));
            }
        });
        match bad {
            Some((v, x)) => Err(Error::InvalidMeasure(format!("density {v} at {x:?}"))),
            None => Ok(()),
        }
    }

    /// Checks `a ≥ ε` on the grid refined by the extra breakpoints.
    pub(crate) fn check_floor(&self, xs: &[f64], ys: &[f64]) -> Result<()> {
        let eps = self.floor.unwrap_or(DEFAULT_LEBESGUE_FLOOR);
        let mut bx = self.density.breaks(0);
        bx.extend_from_slice(xs);
        let mut by = self.density.breaks(1);
        by.extend_from_slice(ys);
        let grid = Grid::new(&self.domain, &bx, &by);
        let mut bad = None;
        grid.for_each_node(|n| {
            let a = self.density(n.x);
            if bad.is_none() && !(a >= eps) {
                bad = Some((a, n.x));
            }
        });
        match bad {
            Some((density, x)) => Err(Error::NotDominating {
                density,
                x: x[0],
                y: x[1],
            }),
            None => Ok(()),
        }
    }
}

fn check_carrier_inside(domain: &Domain, c: &Carrier) -> Result<()> {
    match c.geometry() {
        CarrierGeometry::Point(p) => {
            if !domain.contains(p) {
                return Err(Error::InvalidMeasure(format!("atom {p:?} outside the domain")));
            }
            if domain.dim() == 1 && domain.boundary_normal(p).is_some() {
                return Err(Error::InvalidMeasure(format!("atom {p:?} on the boundary")));
            }
            if domain.dim() == 2 {
                let r = domain.rect();
                let on = (p[0] - r.lo[0]).abs() < 1e-12
                    || (p[0] - r.hi[0]).abs() < 1e-12
                    || (p[1] - r.lo[1]).abs() < 1e-12
                    || (p[1] - r.hi[1]).abs() < 1e-12;
                if on {
                    return Err(Error::InvalidMeasure(format!("atom {p:?} on the boundary")));
                }
            }
        }
        CarrierGeometry::Segment { from, to } => {
            if domain.dim() != 2 {
                return Err(Error::InvalidMeasure("segment carriers need a 2D domain".into()));
            }
            if !domain.contains(from) || !domain.contains(to) {
                return Err(Error::InvalidMeasure(format!("segment {from:?}..{to:?} leaves the domain")));
            }
            let mid = [(from[0] + to[0]) / 2.0, (from[1] + to[1]) / 2.0];
            if domain.boundary_normal(mid).is_some() {
                return Err(Error::InvalidMeasure(format!("segment {from:?}..{to:?} lies on the boundary")));
            }
        }
    }
    Ok(())
}

impl RadonMeasure for ScalarMeasure {
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn density_norm(&self, x: Point) -> f64 {
        self.density(x).abs()
    }
    fn breaks(&self, axis: usize) -> Vec<f64> {
        self.density.breaks(axis)
    }
    fn carriers(&self) -> Vec<Carrier> {
        self.singular.iter().map(|p| p.carrier).collect()
    }
    fn singular_norm(&self, k: usize, x: Point) -> f64 {
        (self.singular[k].density)(x).abs()
    }
}

/// `R^{N×n}`-valued Radon measure `γ = a·L^n + γ^s`.
#[derive(Clone)]
pub struct MatrixMeasure {
    domain: Domain,
    shape: (usize, usize),
    density: PiecewiseField<Mat>,
    singular: Vec<SingularPart<Mat>>,
}

impl MatrixMeasure {
    pub fn zero(domain: Domain, rows: usize) -> Self {
        Self {
            domain,
            shape: (rows, domain.dim()),
            density: PiecewiseField::empty(domain.dim()),
            singular: Vec::new(),
        }
    }

    pub fn with_density(mut self, density: PiecewiseField<Mat>) -> Self {
        self.density = density;
        self
    }

    pub fn with_density_fn(self, f: impl Fn(Point) -> Mat + Send + Sync + 'static) -> Self {
        let field = PiecewiseField::single(self.domain.dim(), self.domain.rect(), f);
        self.with_density(field)
    }

    /// Adds a density on a carrier. Point carriers are only allowed in 1D:
    /// derivatives of BV functions charge no points in higher dimension.
    pub fn with_carrier(mut self, carrier: Carrier, f: impl Fn(Point) -> Mat + Send + Sync + 'static) -> Result<Self> {
        if carrier.is_point() && self.domain.dim() != 1 {
            return Err(Error::InvalidMeasure("atomic parts are only allowed in 1D".into()));
        }
        if let CarrierGeometry::Segment { from, to } = carrier.geometry() {
            if !self.domain.contains(from) || !self.domain.contains(to) {
                return Err(Error::InvalidMeasure(format!("segment {from:?}..{to:?} leaves the domain")));
            }
        } else if let CarrierGeometry::Point(p) = carrier.geometry() {
            if !self.domain.contains(p) {
                return Err(Error::InvalidMeasure(format!("atom {p:?} outside the domain")));
            }
        }
        self.singular.push(SingularPart {
            carrier,
            density: Arc::new(f),
        });
        Ok(self)
    }

    pub fn with_atom(self, x: f64, value: Mat) -> Result<Self> {
        let c = Carrier::point_1d(x)?;
        self.with_carrier(c, move |_| value)
    }

    pub(crate) fn push_part(&mut self, part: SingularPart<Mat>) {
        self.singular.push(part);
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn density_field(&self) -> &PiecewiseField<Mat> {
        &self.density
    }

    pub fn singular_parts(&self) -> &[SingularPart<Mat>] {
        &self.singular
    }

    pub fn density(&self, x: Point) -> Mat {
        self.density.eval(x).unwrap_or_else(|| Mat::zeros(self.shape.0, self.shape.1))
    }

    /// Sum of the densities of all parts on the carrier with this id.
    pub fn carrier_density(&self, id: CarrierId, x: Point) -> Option<Mat> {
        let mut acc: Option<Mat> = None;
        for p in self.singular.iter().filter(|p| p.carrier.id() == id) {
            let v = (p.density)(x);
            match acc.as_mut() {
                Some(a) => *a += v,
                None => acc = Some(v),
            }
        }
        acc
    }

    /// Distinct carriers, first occurrence order.
    pub fn distinct_carriers(&self) -> Vec<Carrier> {
        let mut out: Vec<Carrier> = Vec::new();
        for p in &self.singular {
            if !out.iter().any(|c| c.id() == p.carrier.id()) {
                out.push(p.carrier);
            }
        }
        out
    }

    /// `⟨φ, γ⟩ = ∫ φ : dγ` for a test field `φ` (vanishing on `∂Ω`).
    pub fn pair_with_test_function(&self, phi: impl Fn(Point) -> Mat) -> f64 {
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let ac = Grid::new(&self.domain, &xs, &ys).integrate(|x| phi(x).dot(&self.density(x)));
        let mut s = ac;
        for p in &self.singular {
            for n in carrier_nodes(&self.domain, &p.carrier, None, &xs, &ys) {
                s += n.w * phi(n.x).dot(&(p.density)(n.x));
            }
        }
        s
    }

    /// `γ + δ`.
    pub fn plus(&self, other: &MatrixMeasure) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        let mut out = self.clone();
        out.density = self.density.plus(&other.density);
        out.singular.extend(other.singular.iter().cloned());
        Ok(out)
    }

    /// `γ - δ` (used for node-wise reconstruction checks).
    pub fn minus(&self, other: &MatrixMeasure) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let density = self.density.map(move |_, v: Mat| v * c);
        let singular = self
            .singular
            .iter()
            .map(|p| {
                let f = Arc::clone(&p.density);
                SingularPart {
                    carrier: p.carrier,
                    density: Arc::new(move |x: Point| f(x) * c) as MatFn,
                }
            })
            .collect();
        Self {
            domain: self.domain,
            shape: self.shape,
            density,
            singular,
        }
    }

    /// The positive measure `|γ|`.
    pub fn variation_measure(&self) -> ScalarMeasure {
        let density = self.density.map(|_, v: Mat| v.norm());
        let singular = self
            .singular
            .iter()
            .map(|p| {
                let f = Arc::clone(&p.density);
                SingularPart {
                    carrier: p.carrier,
                    density: Arc::new(move |x: Point| f(x).norm()) as ScalarFn,
                }
            })
            .collect();
        ScalarMeasure {
            domain: self.domain,
            density,
            singular,
            floor: None,
        }
    }

    /// Largest node-wise difference of densities (cells and carriers) to
    /// `other`.
    pub fn max_node_difference(&self, other: &MatrixMeasure) -> f64 {
        let mut xs = self.breaks(0);
        xs.extend(other.breaks(0));
        let mut ys = self.breaks(1);
        ys.extend(other.breaks(1));
        let mut worst = 0.0f64;
        Grid::new(&self.domain, &xs, &ys).for_each_node(|n| {
            worst = worst.max(self.density(n.x).max_abs_diff(&other.density(n.x)));
        });
        let zero = Mat::zeros(self.shape.0, self.shape.1);
        let mut carriers = self.distinct_carriers();
        for c in other.distinct_carriers() {
            if !carriers.iter().any(|d| d.id() == c.id()) {
                carriers.push(c);
            }
        }
        for c in carriers {
            for n in carrier_nodes(&self.domain, &c, None, &xs, &ys) {
                let a = self.carrier_density(c.id(), n.x).unwrap_or(zero);
                let b = other.carrier_density(c.id(), n.x).unwrap_or(zero);
                worst = worst.max(a.max_abs_diff(&b));
            }
        }
        worst
    }
}

impl RadonMeasure for MatrixMeasure {
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn density_norm(&self, x: Point) -> f64 {
        self.density(x).norm()
    }
    fn breaks(&self, axis: usize) -> Vec<f64> {
        self.density.breaks(axis)
    }
    fn carriers(&self) -> Vec<Carrier> {
        self.distinct_carriers()
    }
    fn singular_norm(&self, k: usize, x: Point) -> f64 {
        let c = self.distinct_carriers()[k];
        self.carrier_density(c.id(), x).map_or(0.0, |m| m.norm())
    }

    // Parts sharing a carrier are summed before taking norms.
    fn singular_mass(&self, region: Option<Rect>) -> f64 {
        let (xs, ys) = (self.breaks(0), self.breaks(1));
        let mut s = 0.0;
        for c in self.distinct_carriers() {
            for n in carrier_nodes(&self.domain, &c, region, &xs, &ys) {
                s += n.w * self.carrier_density(c.id(), n.x).map_or(0.0, |m| m.norm());
            }
        }
        s
    }
}

/// `dγ/dμ` on cells and on the carriers of `μ`.
#[derive(Clone)]
pub struct RelativeDensity {
    shape: (usize, usize),
    cells: PiecewiseField<Mat>,
    /// `(carrier of μ, dγ/dμ on it, μ's density on it)`.
    carriers: Vec<(Carrier, MatFn, ScalarFn)>,
}

impl RelativeDensity {
    pub fn on_cells(&self, x: Point) -> Mat {
        self.cells.eval(x).unwrap_or_else(|| Mat::zeros(self.shape.0, self.shape.1))
    }

    pub fn cell_field(&self) -> &PiecewiseField<Mat> {
        &self.cells
    }

    pub fn carriers(&self) -> &[(Carrier, MatFn, ScalarFn)] {
        &self.carriers
    }

    pub fn on_carrier(&self, id: CarrierId, x: Point) -> Option<Mat> {
        self.carriers.iter().find(|(c, _, _)| c.id() == id).map(|(_, f, _)| f(x))
    }
}

/// Output of [`rn_decompose`]: `γ = (dγ/dμ)μ + γ^{s,μ}`.
#[derive(Clone)]
pub struct Decomposition {
    pub density: RelativeDensity,
    pub remainder: MatrixMeasure,
    mu: ScalarMeasure,
}

impl Decomposition {
    pub fn mu(&self) -> &ScalarMeasure {
        &self.mu
    }

    /// The absolutely continuous part `(dγ/dμ)μ`.
    pub fn absolutely_continuous(&self) -> MatrixMeasure {
        let mu = self.mu.clone();
        let cells = self.density.cells.clone();
        let zero = Mat::zeros(self.density.shape.0, self.density.shape.1);
        let field = cells
            .map(|_, v: Mat| v)
            .with_breaks(&self.mu.density.breaks(0), &self.mu.density.breaks(1));
        let dens = field.clone();
        let mut out = MatrixMeasure::zero(*self.mu.domain(), self.density.shape.0).with_density(PiecewiseField::single(
            self.mu.domain().dim(),
            self.mu.domain().rect(),
            move |x| dens.eval(x).unwrap_or(zero) * mu.density(x),
        ));
        let mut xs = field.breaks(0);
        xs.extend(self.remainder.breaks(0));
        let mut ys = field.breaks(1);
        ys.extend(self.remainder.breaks(1));
        out.density = out.density.with_breaks(&xs, &ys);
        for (c, ratio, md) in &self.density.carriers {
            let (r, m) = (Arc::clone(ratio), Arc::clone(md));
            out.push_part(SingularPart {
                carrier: *c,
                density: Arc::new(move |x: Point| r(x) * m(x)),
            });
        }
        out
    }

    /// `(dγ/dμ)μ + γ^{s,μ}`.
    pub fn reconstruct(&self) -> MatrixMeasure {
        self.absolutely_continuous()
            .plus(&self.remainder)
            .expect("parts share the shape of γ")
    }

    /// Whether `γ ≪ μ` (the remainder carries no mass).
    pub fn remainder_is_zero(&self) -> bool {
        self.remainder.total_variation(None) == 0.0
    }
}

/// Radon–Nikodym decomposition of `γ` with respect to `μ`.
///
/// Requires `a ≥ ε` at every quadrature node (`L^n ≪ μ`). On a carrier
/// charged by both, the density is the pointwise ratio; a node where `μ`'s
/// carrier density vanishes but `γ`'s does not makes the split ill-posed at
/// this resolution and is rejected.
pub fn rn_decompose(gamma: &MatrixMeasure, mu: &ScalarMeasure) -> Result<Decomposition> {
    if gamma.domain.rect() != mu.domain.rect() || gamma.domain.dim() != mu.domain.dim() {
        return Err(Error::DimensionMismatch("measures live on different domains".into()));
    }
    let (gx, gy) = (gamma.breaks(0), gamma.breaks(1));
    mu.check_floor(&gx, &gy)?;
    for g in gamma.distinct_carriers() {
        for m in mu.carriers() {
            if g.id() != m.id() && g.overlaps(&m) {
                return Err(Error::CarrierConflict(format!(
                    "carriers {} and {} overlap on a set of positive length",
                    g.id(),
                    m.id()
                )));
            }
        }
    }
    let shape = gamma.shape;
    let zero = Mat::zeros(shape.0, shape.1);

    let mu_for_cells = mu.clone();
    let cells = gamma
        .density
        .map(move |x, v: Mat| v * (1.0 / mu_for_cells.density(x)))
        .with_breaks(&mu.density.breaks(0), &mu.density.breaks(1));

    let mut mu_carriers: Vec<Carrier> = Vec::new();
    for c in mu.carriers() {
        if !mu_carriers.iter().any(|d| d.id() == c.id()) {
            mu_carriers.push(c);
        }
    }
    let mut xs = gx.clone();
    xs.extend(mu.breaks(0));
    let mut ys = gy.clone();
    ys.extend(mu.breaks(1));

    let mut carriers = Vec::new();
    for c in &mu_carriers {
        let id = c.id();
        let charged = gamma.singular.iter().any(|p| p.carrier.id() == id);
        if charged {
            for n in carrier_nodes(&mu.domain, c, None, &xs, &ys) {
                let m = mu.carrier_density(id, n.x).unwrap_or(0.0);
                let g = gamma.carrier_density(id, n.x).unwrap_or(zero);
                if m <= 0.0 && !g.is_zero() {
                    return Err(Error::IllPosedDecomposition { carrier: id.0 });
                }
            }
        }
        let (g, m) = (gamma.clone(), mu.clone());
        let ratio: MatFn = Arc::new(move |x: Point| {
            let md = m.carrier_density(id, x).unwrap_or(0.0);
            match g.carrier_density(id, x) {
                Some(v) if md > 0.0 => v * (1.0 / md),
                _ => zero,
            }
        });
        let m2 = mu.clone();
        let md: ScalarFn = Arc::new(move |x: Point| m2.carrier_density(id, x).unwrap_or(0.0));
        carriers.push((*c, ratio, md));
    }

    let mut remainder = MatrixMeasure::zero(gamma.domain, shape.0);
    for p in &gamma.singular {
        if !mu_carriers.iter().any(|c| c.id() == p.carrier.id()) {
            remainder.push_part(p.clone());
        }
    }
    Ok(Decomposition {
        density: RelativeDensity { shape, cells, carriers },
        remainder,
        mu: mu.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::unit_interval(16)
    }

    #[test]
    fn total_variation_sums_density_and_atoms() {
        let g = MatrixMeasure::zero(unit(), 1)
            .with_density_fn(|_| Mat::scalar(1.0))
            .with_atom(0.5, Mat::scalar(2.0))
            .unwrap();
        assert!((g.total_variation(None) - 3.0).abs() < 1e-14);
        assert_eq!(MatrixMeasure::zero(unit(), 1).total_variation(None), 0.0);
        let half = g.total_variation(Some(Rect::interval(0.0, 0.25)));
        assert!((half - 0.25).abs() < 1e-14);
    }

    #[test]
    fn area_functional_examples() {
        let z = MatrixMeasure::zero(unit(), 1);
        assert!((z.area_functional(None) - 1.0).abs() < 1e-14);
        let g = z.clone().with_density_fn(|_| Mat::scalar(1.0));
        assert!((g.area_functional(None) - 2f64.sqrt()).abs() < 1e-14);
        let sq = Domain::unit_square(8);
        let s = Carrier::segment([0.5, 0.0], [0.5, 1.0]).unwrap();
        let j = MatrixMeasure::zero(sq, 1)
            .with_carrier(s, |_| Mat::from_rows(1, 2, &[2.0, 0.0]))
            .unwrap();
        assert!((j.area_functional(None) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn decomposition_of_proportional_and_mixed_measures() {
        let mu = ScalarMeasure::lebesgue(unit(), 2.0).unwrap().with_atom([0.5, 0.0], 1.0).unwrap();
        let g = MatrixMeasure::zero(unit(), 1)
            .with_density_fn(|_| Mat::scalar(1.0))
            .with_atom(0.5, Mat::scalar(1.0))
            .unwrap();
        let d = rn_decompose(&g, &mu).unwrap();
        assert!((d.density.on_cells([0.3, 0.0]).get(0, 0) - 0.5).abs() < 1e-15);
        let atom = Carrier::point_1d(0.5).unwrap();
        assert_eq!(d.density.on_carrier(atom.id(), [0.5, 0.0]).unwrap().get(0, 0), 1.0);
        assert!(d.remainder_is_zero());
        assert!(d.reconstruct().max_node_difference(&g) < 1e-15);
    }

    #[test]
    fn jump_is_singular_to_lebesgue() {
        let sq = Domain::unit_square(8);
        let s = Carrier::segment([0.5, 0.0], [0.5, 1.0]).unwrap();
        let g = MatrixMeasure::zero(sq, 1).with_carrier(s, |_| Mat::from_rows(1, 2, &[1.0, 0.0])).unwrap();
        let mu = ScalarMeasure::lebesgue(sq, 1.0).unwrap();
        let d = rn_decompose(&g, &mu).unwrap();
        assert!(d.density.on_cells([0.5, 0.5]).is_zero());
        assert!((d.remainder.total_variation(None) - 1.0).abs() < 1e-14);
        assert!(mutually_singular(&d.remainder, &mu));
    }

    #[test]
    fn decomposition_rejects_degenerate_reference() {
        let g = MatrixMeasure::zero(unit(), 1);
        let mu = ScalarMeasure::zero(unit()).with_density_fn(|x| if x[0] < 0.5 { 0.0 } else { 1.0 }).unwrap();
        assert!(matches!(rn_decompose(&g, &mu), Err(Error::NotDominating { .. })));
        let sq = Domain::unit_square(8);
        let s = Carrier::segment([0.5, 0.0], [0.5, 1.0]).unwrap();
        let mu = ScalarMeasure::lebesgue(sq, 1.0)
            .unwrap()
            .with_carrier(s, |x| if x[1] < 0.5 { 1.0 } else { 0.0 })
            .unwrap();
        let g = MatrixMeasure::zero(sq, 1).with_carrier(s, |_| Mat::from_rows(1, 2, &[1.0, 0.0])).unwrap();
        assert!(matches!(rn_decompose(&g, &mu), Err(Error::IllPosedDecomposition { .. })));
        let t = Carrier::segment([0.5, 0.25], [0.5, 0.75]).unwrap();
        let g = MatrixMeasure::zero(sq, 1).with_carrier(t, |_| Mat::from_rows(1, 2, &[1.0, 0.0])).unwrap();
        assert!(matches!(rn_decompose(&g, &mu), Err(Error::CarrierConflict(_))));
    }

    #[test]
    fn mutual_singularity_examples() {
        let leb = ScalarMeasure::lebesgue(unit(), 1.0).unwrap();
        let atom = ScalarMeasure::zero(unit()).with_atom([0.5, 0.0], 1.0).unwrap();
        let leb2 = ScalarMeasure::lebesgue(unit(), 2.0).unwrap();
        assert!(mutually_singular(&leb, &atom));
        assert!(!mutually_singular(&leb, &leb2));
        let sq = Domain::unit_square(8);
        let s1 = Carrier::segment([0.25, 0.0], [0.25, 1.0]).unwrap();
        let s2 = Carrier::segment([0.75, 0.0], [0.75, 1.0]).unwrap();
        let a = MatrixMeasure::zero(sq, 1).with_carrier(s1, |_| Mat::from_rows(1, 2, &[1.0, 0.0])).unwrap();
        let b = MatrixMeasure::zero(sq, 1).with_carrier(s2, |_| Mat::from_rows(1, 2, &[1.0, 0.0])).unwrap();
        assert!(mutually_singular(&a, &b));
    }

    #[test]
    fn boundary_carriers_are_rejected() {
        assert!(ScalarMeasure::zero(unit()).with_atom([0.0, 0.0], 1.0).is_err());
        let sq = Domain::unit_square(8);
        let s = Carrier::segment([0.0, 0.0], [0.0, 1.0]).unwrap();
        assert!(ScalarMeasure::zero(sq).with_carrier(s, |_| 1.0).is_err());
        assert!(MatrixMeasure::zero(sq, 1).with_carrier(Carrier::point([0.5, 0.5]).unwrap(), |_| Mat::zeros(1, 2)).is_err());
    }

    #[test]
    fn pairing_with_atom_reads_point_value() {
        let g = MatrixMeasure::zero(unit(), 1).with_atom(0.3, Mat::scalar(2.0)).unwrap();
        let v = g.pair_with_test_function(|x| Mat::scalar(x[0] * (1.0 - x[0])));
        assert!((v - 2.0 * 0.3 * 0.7).abs() < 1e-15);
    }
}
