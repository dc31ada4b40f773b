//! Generalized Young measures `(ν_x, λ_ν, ν_x^∞)` relative to a reference
//! measure `μ`, with finitely many atoms at every quadrature node.

mod json;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bv::convergence::test_dictionary;
use crate::bv::{BvFunction, Sequence};
use crate::error::{Error, Result};
use crate::functional::recession_value;
use crate::integrands::{generalized_recession, Integrand, IntegrandRef, DEFAULT_SCHEDULE};
use crate::linalg::{Mat, Point};
use crate::measures::{rn_decompose, CarrierId, MatrixMeasure, PiecewiseField, RadonMeasure, ScalarMeasure};
use crate::quadrature::Grid;

/// Tolerance on probability normalization and sphere support.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Where a node sits: in a cell (`carrier = None`) or on a carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: Point,
    pub carrier: Option<CarrierId>,
}

pub type Atoms = Vec<(Mat, f64)>;
pub type AtomFn = Arc<dyn Fn(Site) -> Atoms + Send + Sync>;

/// `Σ p_k A_k`.
pub fn mean(atoms: &[(Mat, f64)], shape: (usize, usize)) -> Mat {
    atoms.iter().fold(Mat::zeros(shape.0, shape.1), |acc, (a, p)| acc + *a * *p)
}

/// Weighted quadrature sites `(site, w·density)` of a positive measure,
/// cells first, then carriers in registration order.
fn sites(m: &ScalarMeasure, xs: &[f64], ys: &[f64]) -> Vec<(Site, f64)> {
    let domain = m.domain();
    let mut out = Vec::new();
    Grid::new(domain, xs, ys).for_each_node(|n| {
        let a = m.density(n.x);
        if a > 0.0 {
            out.push((Site { x: n.x, carrier: None }, n.w * a));
        }
    });
    let r = domain.rect();
    for c in m.carriers() {
        if out.iter().any(|(s, _)| s.carrier == Some(c.id())) {
            continue;
        }
        for n in c.nodes_in(r.lo, r.hi, domain.dim(), domain.resolution(), xs, ys) {
            let d = m.carrier_density(c.id(), n.x).unwrap_or(0.0);
            if d > 0.0 {
                out.push((
                    Site {
                        x: n.x,
                        carrier: Some(c.id()),
                    },
                    n.w * d,
                ));
            }
        }
    }
    out
}

#[derive(Clone)]
pub struct GeneralizedYoungMeasure {
    shape: (usize, usize),
    mu: ScalarMeasure,
    nu: AtomFn,
    lambda: ScalarMeasure,
    nu_inf: AtomFn,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GeneralizedYoungMeasure {
    /// Validates normalization of `ν_x` at the `μ` nodes and the sphere
    /// support of `ν_x^∞` at the `λ` nodes. `xs`, `ys` are extra quadrature
    /// breaks where `ν` changes.
    pub fn new(
        mu: ScalarMeasure,
        shape: (usize, usize),
        nu: AtomFn,
        lambda: ScalarMeasure,
        nu_inf: AtomFn,
        xs: &[f64],
        ys: &[f64],
    ) -> Result<Self> {
        if mu.domain().rect() != lambda.domain().rect() {
            return Err(Error::InvalidYoungMeasure("λ and μ live on different domains".into()));
        }
        if shape.1 != mu.domain().dim() {
            return Err(Error::DimensionMismatch(format!("matrix shape {shape:?} on a {}D domain", mu.domain().dim())));
        }
        let mut bx = xs.to_vec();
        bx.extend(mu.breaks(0));
        bx.extend(lambda.breaks(0));
        let mut by = ys.to_vec();
        by.extend(mu.breaks(1));
        by.extend(lambda.breaks(1));
        let y = Self {
            shape,
            mu,
            nu,
            lambda,
            nu_inf,
            xs: bx,
            ys: by,
        };
        y.validate()?;
        Ok(y)
    }

    fn validate(&self) -> Result<()> {
        let check = |atoms: &Atoms, site: Site, sphere: bool| -> Result<()> {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL || atoms.iter().any(|a| !(a.1 >= 0.0)) {
                return Err(Error::InvalidYoungMeasure(format!("weights at {:?} sum to {total}", site.x)));
            }
            for (a, _) in atoms {
                if a.shape() != self.shape {
                    return Err(Error::InvalidYoungMeasure(format!("atom of shape {:?}", a.shape())));
                }
                if sphere && (a.norm() - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidYoungMeasure(format!("ν^∞ atom of norm {} at {:?}", a.norm(), site.x)));
                }
            }
            Ok(())
        };
        for (s, _) in sites(&self.mu, &self.xs, &self.ys) {
            check(&(self.nu)(s), s, false)?;
        }
        for (s, _) in sites(&self.lambda, &self.xs, &self.ys) {
            check(&(self.nu_inf)(s), s, true)?;
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn mu(&self) -> &ScalarMeasure {
        &self.mu
    }

    pub fn lambda(&self) -> &ScalarMeasure {
        &self.lambda
    }

    pub fn nu(&self, site: Site) -> Atoms {
        (self.nu)(site)
    }

    pub fn nu_inf(&self, site: Site) -> Atoms {
        (self.nu_inf)(site)
    }

    fn mu_sites(&self) -> Vec<(Site, f64)> {
        sites(&self.mu, &self.xs, &self.ys)
    }

    fn lambda_sites(&self) -> Vec<(Site, f64)> {
        sites(&self.lambda, &self.xs, &self.ys)
    }

    /// `∫⟨g, ν_x⟩ dμ + ∫⟨g^∞, ν_x^∞⟩ dλ` for arbitrary node functions.
    fn pair_with(
        &self,
        g: impl Fn(Point, &Mat) -> f64,
        g_inf: impl Fn(Point, &Mat) -> Result<f64>,
    ) -> Result<f64> {
        let mut s = 0.0;
        for (site, dm) in self.mu_sites() {
            s += dm * self.nu(site).iter().map(|(a, p)| p * g(site.x, a)).sum::<f64>();
        }
        for (site, dl) in self.lambda_sites() {
            let mut v = 0.0;
            for (a, p) in self.nu_inf(site) {
                v += p * g_inf(site.x, &a)?;
            }
            s += dl * v;
        }
        Ok(s)
    }
}

/// `(ε_γ)_x = δ_{dγ/dμ(x)}`, `λ = |γ^{s,μ}|`, `(ε_γ)^∞_x = δ_{p(x)}` with `p`
/// the polar of `γ^{s,μ}`.
pub fn elementary(gamma: &MatrixMeasure, mu: &ScalarMeasure) -> Result<GeneralizedYoungMeasure> {
    let dec = rn_decompose(gamma, mu)?;
    let shape = gamma.shape();
    let density = dec.density.clone();
    let mu_ids: Vec<CarrierId> = mu.carriers().iter().map(|c| c.id()).collect();
    let nu: AtomFn = Arc::new(move |s: Site| {
        let v = match s.carrier {
            Some(id) if mu_ids.contains(&id) => density.on_carrier(id, s.x).unwrap_or_else(|| density.on_cells(s.x)),
            _ => density.on_cells(s.x),
        };
        vec![(v, 1.0)]
    });
    let rem = dec.remainder.clone();
    let fallback = Mat::unit(shape.0, shape.1, 0, 0);
    let nu_inf: AtomFn = Arc::new(move |s: Site| {
        let m = match s.carrier {
            Some(id) => rem.carrier_density(id, s.x),
            None => Some(rem.density(s.x)),
        };
        vec![(m.and_then(|m| m.polar()).unwrap_or(fallback), 1.0)]
    });
    let lambda = dec.remainder.variation_measure();
    GeneralizedYoungMeasure::new(mu.clone(), shape, nu, lambda, nu_inf, &gamma.breaks(0), &gamma.breaks(1))
}

/// `⟨⟨f, ν⟩⟩ = ∫⟨f(x, ·), ν_x⟩ dμ + ∫⟨f^∞(x, ·), ν_x^∞⟩ dλ_ν`.
pub fn pairing(f: &dyn Integrand, nu: &GeneralizedYoungMeasure) -> Result<f64> {
    nu.pair_with(|x, a| f.eval(x, a), |x, a| recession_value(f, x, a))
}

/// `⟨id, ν_x⟩μ + ⟨id, ν_x^∞⟩λ_ν`.
pub fn barycenter(nu: &GeneralizedYoungMeasure) -> Result<MatrixMeasure> {
    let domain = *nu.mu.domain();
    let shape = nu.shape;
    let (n1, mu1, l1) = (nu.clone(), nu.mu.clone(), nu.lambda.clone());
    let density = PiecewiseField::single(domain.dim(), domain.rect(), move |x| {
        let site = Site { x, carrier: None };
        mean(&n1.nu(site), shape) * mu1.density(x) + mean(&n1.nu_inf(site), shape) * l1.density(x)
    })
    .with_breaks(&nu.xs, &nu.ys);
    let mut out = MatrixMeasure::zero(domain, shape.0).with_density(density);
    for c in nu.mu.carriers() {
        let (n2, m2) = (nu.clone(), nu.mu.clone());
        let id = c.id();
        out = out.with_carrier(c, move |x| {
            mean(&n2.nu(Site { x, carrier: Some(id) }), shape) * m2.carrier_density(id, x).unwrap_or(0.0)
        })?;
    }
    for c in nu.lambda.carriers() {
        let (n2, l2) = (nu.clone(), nu.lambda.clone());
        let id = c.id();
        out = out.with_carrier(c, move |x| {
            mean(&n2.nu_inf(Site { x, carrier: Some(id) }), shape) * l2.carrier_density(id, x).unwrap_or(0.0)
        })?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GenerationRow {
    pub j: usize,
    /// Largest relative gap over every integrand and localization.
    pub max_gap: f64,
    pub worst: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GenerationReport {
    pub sequence: String,
    pub rows: Vec<GenerationRow>,
    pub final_gap: f64,
    /// Least-squares slope of `−log gap` against `log j`; infinite when the
    /// gaps vanish.
    pub order: f64,
}

/// `|⟨⟨fφ, ε_{Du_j}⟩⟩ − ⟨⟨fφ, ν⟩⟩|` relative to `⟨⟨|f|φ, ν⟩⟩`, over the
/// integrands `fs` and the localizations `φ ≡ 1` plus the bump dictionary
/// (`per_axis` bumps per axis).
pub fn empirical_generation_check(
    seq: &Sequence,
    js: &[usize],
    candidate: &GeneralizedYoungMeasure,
    fs: &[IntegrandRef],
    per_axis: usize,
) -> Result<GenerationReport> {
    let mu = candidate.mu().clone();
    let mut dict: Vec<Box<dyn Fn(Point) -> f64 + Send + Sync>> = vec![Box::new(|_| 1.0)];
    dict.extend(test_dictionary(mu.domain(), per_axis));
    let mut targets = Vec::new();
    for f in fs {
        for phi in &dict {
            let t = candidate.pair_with(|x, a| phi(x) * f.eval(x, a), |x, a| Ok(phi(x) * recession_value(f.as_ref(), x, a)?))?;
            let s = candidate.pair_with(
                |x, a| phi(x) * f.eval(x, a).abs(),
                |x, a| Ok(phi(x) * recession_value(f.as_ref(), x, a)?.abs()),
            )?;
            targets.push((t, if s > 0.0 { s } else { 1.0 }));
        }
    }
    let rows: Vec<GenerationRow> = js
        .par_iter()
        .map(|&j| {
            let e = elementary(&seq.term(j)?.derivative(), &mu)?;
            let mut best = (0.0f64, String::new());
            let mut k = 0;
            for f in fs {
                for (d, phi) in dict.iter().enumerate() {
                    let v = e.pair_with(|x, a| phi(x) * f.eval(x, a), |x, a| Ok(phi(x) * recession_value(f.as_ref(), x, a)?))?;
                    let (t, s) = targets[k];
                    k += 1;
                    let gap = (v - t).abs() / s;
                    if gap > best.0 || best.1.is_empty() {
                        best = (gap, format!("{} φ#{d}", f.name()));
                    }
                }
            }
            Ok(GenerationRow {
                j,
                max_gap: best.0,
                worst: best.1,
            })
        })
        .collect::<Result<_>>()?;
    let final_gap = rows.last().map_or(f64::NAN, |r| r.max_gap);
    Ok(GenerationReport {
        sequence: seq.name().to_string(),
        order: empirical_order(&rows.iter().map(|r| (r.j, r.max_gap)).collect::<Vec<_>>()),
        rows,
        final_gap,
    })
}

/// Slope of `−log gap` against `log j` over the positive gaps.
pub fn empirical_order(points: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|p| ((p.0 as f64).ln(), -p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConcentrationEstimate {
    /// `∫φ d|Du_j|` restricted to jumps and to `|∇u_j| > threshold`.
    pub lambda_mass: f64,
    /// Distribution of the polar over that concentrating mass.
    pub sphere: Vec<(Mat, f64)>,
}

/// Concentration of `Du_j` near `x0` with the cut-off
/// `φ = cos²(π|x − x0|/(2r))`: mass of the jumps and of the gradient above
/// `threshold`, and where on the sphere that mass points.
pub fn concentration_estimate(u: &BvFunction, x0: Point, radius: f64, threshold: f64) -> ConcentrationEstimate {
    let phi = |x: Point| {
        let d = ((x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2)).sqrt();
        if d < radius {
            (std::f64::consts::FRAC_PI_2 * d / radius).cos().powi(2)
        } else {
            0.0
        }
    };
    let mut mass = 0.0;
    let mut sphere: Vec<(Mat, f64)> = Vec::new();
    let mut add = |m: Mat, w: f64| {
        if let Some(p) = m.polar() {
            let dm = w * m.norm();
            mass += dm;
            match sphere.iter_mut().find(|(q, _)| q.max_abs_diff(&p) < 1e-6) {
                Some(e) => e.1 += dm,
                None => sphere.push((p, dm)),
            }
        }
    };
    let du = u.derivative();
    let (xs, ys) = (du.breaks(0), du.breaks(1));
    Grid::new(u.domain(), &xs, &ys).for_each_node(|n| {
        let g = du.density(n.x);
        if g.norm() > threshold {
            add(g, n.w * phi(n.x));
        }
    });
    let r = u.domain().rect();
    for c in du.distinct_carriers() {
        for n in c.nodes_in(r.lo, r.hi, u.domain().dim(), u.domain().resolution(), &xs, &ys) {
            if let Some(m) = du.carrier_density(c.id(), n.x) {
                add(m, n.w * phi(n.x));
            }
        }
    }
    for e in &mut sphere {
        e.1 /= mass;
    }
    ConcentrationEstimate { lambda_mass: mass, sphere }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct JensenViolation {
    pub x: Point,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct JensenReport {
    pub nodes_checked: usize,
    pub ac_violations: Vec<JensenViolation>,
    pub singular_violations: Vec<JensenViolation>,
}

impl JensenReport {
    pub fn is_clean(&self) -> bool {
        self.ac_violations.is_empty() && self.singular_violations.is_empty()
    }
}

/// Shared node loop for the two Jensen checks; `rec` is the recession
/// function used on the sphere parts.
fn jensen_nodes(
    f: &dyn Integrand,
    rec: &dyn Fn(Point, &Mat) -> Result<f64>,
    u: &BvFunction,
    nu: &GeneralizedYoungMeasure,
    tol: f64,
) -> Result<JensenReport> {
    let du = u.derivative();
    let bary = barycenter(nu)?;
    let mismatch = bary.max_node_difference(&du);
    if !(mismatch <= 1e-8) {
        return Err(Error::BarycenterMismatch(mismatch));
    }
    let mu = nu.mu();
    let dec = rn_decompose(&du, mu)?;
    let lambda = nu.lambda();
    let shape = nu.shape;
    let mut xs = nu.xs.clone();
    xs.extend(du.breaks(0));
    let mut ys = nu.ys.clone();
    ys.extend(du.breaks(1));
    let mut report = JensenReport {
        nodes_checked: 0,
        ac_violations: Vec::new(),
        singular_violations: Vec::new(),
    };
    let sphere_mean = |site: Site| -> Result<f64> {
        let mut v = 0.0;
        for (a, p) in nu.nu_inf(site) {
            v += p * rec(site.x, &a)?;
        }
        Ok(v)
    };
    // absolutely continuous part, at every μ node
    for (site, _) in sites(mu, &xs, &ys) {
        let (ratio, dl) = match site.carrier {
            None => (dec.density.on_cells(site.x), lambda.density(site.x) / mu.density(site.x)),
            Some(id) => (
                dec.density.on_carrier(id, site.x).unwrap_or_else(|| Mat::zeros(shape.0, shape.1)),
                lambda.carrier_density(id, site.x).unwrap_or(0.0) / mu.carrier_density(id, site.x).unwrap_or(1.0),
            ),
        };
        let lhs = f.eval(site.x, &ratio);
        let mut rhs: f64 = nu.nu(site).iter().map(|(a, p)| p * f.eval(site.x, a)).sum();
        if dl > 0.0 {
            rhs += sphere_mean(site)? * dl;
        }
        report.nodes_checked += 1;
        if lhs > rhs + tol * (1.0 + lhs.abs()) {
            report.ac_violations.push(JensenViolation { x: site.x, lhs, rhs });
        }
    }
    // singular part, on the carriers of D^{s,μ}u
    let r = mu.domain().rect();
    let dim = mu.domain().dim();
    for c in dec.remainder.distinct_carriers() {
        for n in c.nodes_in(r.lo, r.hi, dim, mu.domain().resolution(), &xs, &ys) {
            let m = dec.remainder.carrier_density(c.id(), n.x).unwrap_or_else(|| Mat::zeros(shape.0, shape.1));
            let lhs = match m.polar() {
                Some(p) => rec(n.x, &p)? * m.norm(),
                None => 0.0,
            };
            let site = Site {
                x: n.x,
                carrier: Some(c.id()),
            };
            let l = lambda.carrier_density(c.id(), n.x).unwrap_or(0.0);
            let rhs = if l > 0.0 { sphere_mean(site)? * l } else { 0.0 };
            report.nodes_checked += 1;
            if lhs > rhs + tol * (1.0 + lhs.abs()) {
                report.singular_violations.push(JensenViolation { x: n.x, lhs, rhs });
            }
        }
    }
    Ok(report)
}

/// `F(dDu/dμ) ≤ ⟨F, ν_x⟩ + ⟨F^∞, ν_x^∞⟩ dλ/dμ` at every `μ` node and
/// `F^∞(polar)·|D^{s,μ}u| ≤ ⟨F^∞, ν_x^∞⟩ λ^{s,μ}` on the singular carriers.
/// `ν` must have barycenter `Du` (node-wise within `1e-8`).
pub fn jensen_check_mu(f: &dyn Integrand, u: &BvFunction, nu: &GeneralizedYoungMeasure, tol: f64) -> Result<JensenReport> {
    jensen_nodes(f, &|x, a| recession_value(f, x, a), u, nu, tol)
}

/// The Lebesgue version: `ν` must be relative to `L^n` and `f^#` replaces
/// `f^∞`.
pub fn jensen_check_lebesgue(f: &dyn Integrand, u: &BvFunction, nu: &GeneralizedYoungMeasure, tol: f64) -> Result<JensenReport> {
    let mu = nu.mu();
    let is_lebesgue = mu.singular_parts().is_empty() && {
        let mut ok = true;
        Grid::new(mu.domain(), &[], &[]).for_each_node(|n| ok &= mu.density(n.x) == 1.0);
        ok
    };
    if !is_lebesgue {
        return Err(Error::InvalidYoungMeasure("reference measure is not Lebesgue".into()));
    }
    jensen_nodes(f, &|x, a| Ok(generalized_recession(f, x, a, &DEFAULT_SCHEDULE).value), u, nu, tol)
}

/// `ν_x = ½δ_{−1} + ½δ_{+1}`, `λ = 0` against `μ`.
pub fn sawtooth_candidate(mu: &ScalarMeasure) -> Result<GeneralizedYoungMeasure> {
    let nu: AtomFn = Arc::new(|_| vec![(Mat::scalar(-1.0), 0.5), (Mat::scalar(1.0), 0.5)]);
    let nu_inf: AtomFn = Arc::new(|_| vec![(Mat::scalar(1.0), 1.0)]);
    GeneralizedYoungMeasure::new(mu.clone(), (1, 1), nu, ScalarMeasure::zero(*mu.domain()), nu_inf, &[], &[])
}

/// `ν_x = δ_0`, `λ = δ_{x0}`, `ν^∞_{x0} = δ_{+1}` against `μ`.
pub fn concentration_candidate(mu: &ScalarMeasure, x0: f64) -> Result<GeneralizedYoungMeasure> {
    let nu: AtomFn = Arc::new(|_| vec![(Mat::scalar(0.0), 1.0)]);
    let nu_inf: AtomFn = Arc::new(|_| vec![(Mat::scalar(1.0), 1.0)]);
    let lambda = ScalarMeasure::zero(*mu.domain()).with_atom([x0, 0.0], 1.0)?;
    GeneralizedYoungMeasure::new(mu.clone(), (1, 1), nu, lambda, nu_inf, &[], &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::catalog;
    use crate::functional::{evaluate, FunctionalSpec};
    use crate::integrands::{Catalog, ClosureIntegrand};
    use crate::measures::Domain;

    fn lebesgue(d: Domain) -> ScalarMeasure {
        ScalarMeasure::lebesgue(d, 1.0).unwrap().dominating(1e-12).unwrap()
    }

    #[test]
    fn elementary_of_heaviside() {
        let d = Domain::unit_interval(16);
        let u = catalog::heaviside(d, 0.5).unwrap();
        let e = elementary(&u.derivative(), &lebesgue(d)).unwrap();
        assert!((e.lambda().mass() - 1.0).abs() < 1e-15);
        let site = Site {
            x: [0.5, 0.0],
            carrier: Some(u.jumps()[0].carrier.id()),
        };
        assert_eq!(e.nu_inf(site), vec![(Mat::scalar(1.0), 1.0)]);
        assert_eq!(e.nu(Site { x: [0.2, 0.0], carrier: None }), vec![(Mat::scalar(0.0), 1.0)]);
    }

    #[test]
    fn barycenter_reconstructs_and_pairing_matches_evaluate() {
        let d = Domain::unit_interval(16);
        let mu = ScalarMeasure::lebesgue(d, 2.0).unwrap().with_atom([0.3, 0.0], 0.5).unwrap().dominating(1e-12).unwrap();
        let u = catalog::piecewise_affine_1d(d, &[0.3, 0.7], &[(0.0, 1.0), (1.0, -2.0), (0.0, 0.5)]).unwrap();
        let du = u.derivative();
        let e = elementary(&du, &mu).unwrap();
        assert!(barycenter(&e).unwrap().max_node_difference(&du) <= 1e-10);
        for f in [Catalog::area(), Catalog::norm().x_modulated(), Catalog::shifted_norm(Mat::scalar(0.5), 0.25)] {
            let p = pairing(&f, &e).unwrap();
            let v = evaluate(&u, &FunctionalSpec::new(f.clone().into_ref(), mu.clone(), false).unwrap()).unwrap();
            assert!((p - v.value).abs() <= 1e-10 * (1.0 + v.value.abs()), "{} {p} {}", f.name(), v.value);
        }
        let one = ClosureIntegrand::new("one", |_, _| 1.0).with_recession(|_, _| 0.0);
        assert!((pairing(&one, &e).unwrap() - mu.mass()).abs() < 1e-12);
    }

    #[test]
    fn bad_weights_are_rejected() {
        let d = Domain::unit_interval(8);
        let nu: AtomFn = Arc::new(|_| vec![(Mat::scalar(0.0), 0.9)]);
        let inf: AtomFn = Arc::new(|_| vec![(Mat::scalar(1.0), 1.0)]);
        assert!(GeneralizedYoungMeasure::new(lebesgue(d), (1, 1), nu, ScalarMeasure::zero(d), inf, &[], &[]).is_err());
        let nu: AtomFn = Arc::new(|_| vec![(Mat::scalar(0.0), 1.0)]);
        let inf: AtomFn = Arc::new(|_| vec![(Mat::scalar(2.0), 1.0)]);
        let lam = ScalarMeasure::zero(d).with_atom([0.5, 0.0], 1.0).unwrap();
        assert!(GeneralizedYoungMeasure::new(lebesgue(d), (1, 1), nu, lam, inf, &[], &[]).is_err());
    }

    #[test]
    fn sawtooth_generation_and_jensen() {
        let seq = catalog::sawtooth(16).unwrap();
        let d = *seq.limit().domain();
        let cand = sawtooth_candidate(&lebesgue(d)).unwrap();
        let fs = vec![Catalog::area().into_ref(), Catalog::shifted_norm(Mat::scalar(0.5), 0.25).x_modulated().into_ref()];
        let r = empirical_generation_check(&seq, &[16, 32, 64, 128], &cand, &fs, 12).unwrap();
        assert!(r.final_gap < 0.02 && r.order >= 0.8, "{r:?}");
        let clean = jensen_check_mu(&Catalog::norm(), seq.limit(), &cand, 1e-9).unwrap();
        assert!(clean.is_clean() && clean.nodes_checked > 0);
        let bad = jensen_check_mu(&Catalog::w_shape(), seq.limit(), &cand, 1e-9).unwrap();
        assert!(!bad.ac_violations.is_empty());
    }

    #[test]
    fn ramp_concentration() {
        let seq = catalog::ramps(16).unwrap();
        let c = concentration_estimate(&seq.term(256).unwrap(), [0.0, 0.0], 0.25, 16.0);
        assert!((c.lambda_mass - 1.0).abs() < 1e-2);
        assert_eq!(c.sphere.len(), 1);
        assert!((c.sphere[0].1 - 1.0).abs() < 1e-12 && c.sphere[0].0.get(0, 0) == 1.0);
        let d = *seq.limit().domain();
        let cand = concentration_candidate(&lebesgue(d), 0.0).unwrap();
        let r = jensen_check_lebesgue(&Catalog::area(), seq.limit(), &cand, 1e-9).unwrap();
        assert!(r.is_clean(), "{r:?}");
    }
}
