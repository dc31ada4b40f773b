//! Catalog of BV functions and sequences used by the scenarios, and the
//! smooth approximation with prescribed boundary values.

use std::sync::Arc;

use crate::bv::BvFunction;
use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};
use crate::measures::{Carrier, CarrierGeometry, Domain, MatFn, Rect};

/// A named sequence `(u_j)` together with its intended `L¹` limit.
#[derive(Clone)]
pub struct Sequence {
    name: String,
    limit: BvFunction,
    term: Arc<dyn Fn(usize) -> Result<BvFunction> + Send + Sync>,
}

impl Sequence {
    pub fn new(
        name: impl Into<String>,
        limit: BvFunction,
        term: impl Fn(usize) -> Result<BvFunction> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            limit,
            term: Arc::new(term),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn limit(&self) -> &BvFunction {
        &self.limit
    }

    pub fn term(&self, j: usize) -> Result<BvFunction> {
        (self.term)(j.max(1))
    }

    /// `u_j = u` for every `j`.
    pub fn constant(name: impl Into<String>, u: BvFunction) -> Self {
        let v = u.clone();
        Self::new(name, u, move |_| Ok(v.clone()))
    }
}

fn const_mat(v: f64) -> MatFn {
    Arc::new(move |_| Mat::scalar(v))
}

/// Scalar affine function `c + g·x`.
pub fn affine(domain: Domain, c: f64, g: [f64; 2]) -> Result<BvFunction> {
    BvFunction::builder(domain, 1).affine_piece(domain.rect(), c, g).build()
}

/// Scalar 1D function, affine `c_k + g_k x` between consecutive interior
/// `breaks`; jumps are registered wherever the one-sided values differ.
pub fn piecewise_affine_1d(domain: Domain, breaks: &[f64], coeffs: &[(f64, f64)]) -> Result<BvFunction> {
    if domain.dim() != 1 || coeffs.len() != breaks.len() + 1 {
        return Err(Error::InvalidFunction("piecewise affine needs a 1D domain and one more piece than breaks".into()));
    }
    let r = domain.rect();
    let mut edges = vec![r.lo[0]];
    edges.extend_from_slice(breaks);
    edges.push(r.hi[0]);
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidFunction("breaks must be increasing and interior".into()));
    }
    let mut b = BvFunction::builder(domain, 1);
    for (k, &(c, g)) in coeffs.iter().enumerate() {
        b = b.affine_piece(Rect::interval(edges[k], edges[k + 1]), c, [g, 0.0]);
    }
    for (k, &p) in breaks.iter().enumerate() {
        let (cl, gl) = coeffs[k];
        let (cr, gr) = coeffs[k + 1];
        let (left, right) = (cl + gl * p, cr + gr * p);
        if (right - left).abs() > 1e-14 * (1.0 + left.abs().max(right.abs())) {
            b = b.jump(Carrier::point_1d(p)?, const_mat(right), const_mat(left));
        }
    }
    b.build()
}

/// `1_{x > x0}` on a 1D domain.
pub fn heaviside(domain: Domain, x0: f64) -> Result<BvFunction> {
    piecewise_affine_1d(domain, &[x0], &[(0.0, 0.0), (1.0, 0.0)])
}

/// `1_{x₁ > x0}` on a 2D box; the jump normal is `e₁`.
pub fn step_2d(domain: Domain, x0: f64) -> Result<BvFunction> {
    let r = domain.rect();
    let c = Carrier::segment([x0, r.lo[1]], [x0, r.hi[1]])?;
    BvFunction::builder(domain, 1)
        .affine_piece(Rect::new(r.lo, [x0, r.hi[1]]), 0.0, [0.0, 0.0])
        .affine_piece(Rect::new([x0, r.lo[1]], r.hi), 1.0, [0.0, 0.0])
        .jump_with_normal(c, const_mat(1.0), const_mat(0.0), [1.0, 0.0])
        .build()
}

/// `u_j(x) = dist(x, Z/j)` on `(0, 1)`: slopes `±1`, `u_j → 0` uniformly
/// while `|Du_j|(Ω) = 1`.
pub fn sawtooth(resolution: usize) -> Result<Sequence> {
    let domain = Domain::unit_interval(resolution);
    let limit = affine(domain, 0.0, [0.0, 0.0])?;
    Ok(Sequence::new("sawtooth", limit, move |j| sawtooth_term(domain, j)))
}

pub fn sawtooth_term(domain: Domain, j: usize) -> Result<BvFunction> {
    let h = 1.0 / (2 * j) as f64;
    let breaks: Vec<f64> = (1..2 * j).map(|k| k as f64 * h).collect();
    let coeffs: Vec<(f64, f64)> = (0..2 * j)
        .map(|k| {
            let m = (k / 2) as f64;
            if k % 2 == 0 {
                (-m / j as f64, 1.0)
            } else {
                ((m + 1.0) / j as f64, -1.0)
            }
        })
        .collect();
    piecewise_affine_1d(domain, &breaks, &coeffs)
}

/// `u_j = clamp(j x, 0, 1)` on `(−1, 1)`, converging to `1_{x > 0}` with
/// all of `Du_j` concentrating at the origin.
pub fn ramps(resolution: usize) -> Result<Sequence> {
    let domain = Domain::interval(-1.0, 1.0, resolution)?;
    let limit = heaviside(domain, 0.0)?;
    Ok(Sequence::new("ramps", limit, move |j| {
        let jf = j as f64;
        piecewise_affine_1d(domain, &[0.0, 1.0 / jf], &[(0.0, 0.0), (0.0, jf), (1.0, 0.0)])
    }))
}

/// `u_j = ⌊j x⌋ / j` on `(0, 1)`: converges strictly to `u(x) = x` but not
/// area-strictly (`⟨Du_j⟩(Ω) → 2`, `⟨Du⟩(Ω) = √2`).
pub fn staircase(resolution: usize) -> Result<Sequence> {
    let domain = Domain::unit_interval(resolution);
    let limit = affine(domain, 0.0, [1.0, 0.0])?;
    Ok(Sequence::new("staircase", limit, move |j| {
        let breaks: Vec<f64> = (1..j).map(|k| k as f64 / j as f64).collect();
        let coeffs: Vec<(f64, f64)> = (0..j).map(|k| (k as f64 / j as f64, 0.0)).collect();
        piecewise_affine_1d(domain, &breaks, &coeffs)
    }))
}

/// `u_j = clamp(j (x − 1 + 1/j), 0, 1)` on `(0, 1)`: the mass of `Du_j`
/// escapes to the boundary point `1` while `u_j → 0`.
pub fn boundary_ramp(resolution: usize) -> Result<Sequence> {
    let domain = Domain::unit_interval(resolution);
    let limit = affine(domain, 0.0, [0.0, 0.0])?;
    Ok(Sequence::new("boundary-ramp", limit, move |j| {
        let jf = j as f64;
        let p = 1.0 - 1.0 / jf;
        if j == 1 {
            return affine(domain, 0.0, [1.0, 0.0]);
        }
        piecewise_affine_1d(domain, &[p], &[(0.0, 0.0), (-jf * p, jf)])
    }))
}

/// `u_j = clamp(j (x − 1/2), 0, 1)` on `(0, 1)`, converging to
/// `1_{x > 1/2}` from the right of the jump.
pub fn interior_ramp(resolution: usize) -> Result<Sequence> {
    let domain = Domain::unit_interval(resolution);
    let limit = heaviside(domain, 0.5)?;
    Ok(Sequence::new("interior-ramp", limit, move |j| {
        let jf = j.max(3) as f64;
        let (a, b) = (0.5, 0.5 + 1.0 / jf);
        piecewise_affine_1d(domain, &[a, b], &[(0.0, 0.0), (-jf * a, jf), (1.0, 0.0)])
    }))
}

/// The smooth monotone transition `S: [0, 1] → [0, 1]`, `S(t) = e(t) / (e(t)
/// + e(1 − t))` with `e(t) = exp(−1/t)`; `S` is `C^∞` and flat at both ends.
pub fn transition(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let s = 1.0 - t;
    // S = 1 / (1 + exp(1/t − 1/s)), computed stably on both halves
    let z = 1.0 / t - 1.0 / s;
    let dz = -1.0 / (t * t) - 1.0 / (s * s);
    if z > 0.0 {
        let q = (-z).exp();
        let val = q / (1.0 + q);
        (val, -dz * q / (1.0 + q).powi(2))
    } else {
        let q = z.exp();
        let val = 1.0 / (1.0 + q);
        (val, -dz * q / (1.0 + q).powi(2))
    }
}

/// Subdivisions used on each transition piece so that Gauss–Legendre
/// resolves the steep smooth profile.
const TRANSITION_SUBDIVISIONS: usize = 96;

/// Replaces each interior jump of a 1D function by the smooth transition
/// `(1 − S)·u_left + S·u_right` of width at most `width`, keeping `u`
/// unchanged within `collar` of `∂Ω` and away from the other breakpoints.
pub fn smooth_jumps(u: &BvFunction, width: f64, collar: f64) -> Result<BvFunction> {
    smooth_jumps_in(u, width, collar, None)
}

/// As [`smooth_jumps`], restricted to the jumps inside the open `region`;
/// transitions are kept inside `region` as well.
pub fn smooth_jumps_in(u: &BvFunction, width: f64, collar: f64, region: Option<Rect>) -> Result<BvFunction> {
    let domain = *u.domain();
    if domain.dim() != 1 {
        let inside = |j: &crate::bv::Jump| match (region, j.carrier.geometry()) {
            (None, _) => true,
            (Some(r), CarrierGeometry::Point(p)) => r.contains_open(p, 2),
            (Some(r), CarrierGeometry::Segment { from, to }) => r.contains_open(from, 2) || r.contains_open(to, 2),
        };
        if !u.jumps().iter().any(inside) {
            return Ok(u.clone());
        }
        return Err(Error::NotInCatalog("2D functions with jumps".into()));
    }
    let r = domain.rect();
    let (a, b) = (r.lo[0], r.hi[0]);
    let mut edges: Vec<f64> = u.breaks(0).into_iter().filter(|x| *x > a && *x < b).collect();
    edges.sort_by(|p, q| p.total_cmp(q));
    edges.dedup_by(|p, q| (*p - *q).abs() < 1e-13);

    struct T {
        lo: f64,
        hi: f64,
        left: usize,
        right: usize,
    }
    let mut transitions: Vec<T> = Vec::new();
    let mut kept = Vec::new();
    for jump in u.jumps() {
        let CarrierGeometry::Point(pt) = jump.carrier.geometry() else {
            return Err(Error::NotInCatalog("segment jump in 1D".into()));
        };
        let p = pt[0];
        let room = match region {
            Some(r) if !(p > r.lo[0] && p < r.hi[0]) => {
                kept.push(jump.clone());
                continue;
            }
            Some(r) => 2.0 * (p - r.lo[0]).min(r.hi[0] - p),
            None => f64::INFINITY,
        };
        let d = (p - a).min(b - p);
        let c = collar.min(d / 2.0);
        let neighbour = edges
            .iter()
            .filter(|e| (**e - p).abs() > 1e-13)
            .map(|e| (e - p).abs())
            .fold(f64::INFINITY, f64::min);
        let w = width.min(2.0 * (d - c)).min(neighbour).min(room);
        if !(w > 0.0) {
            return Err(Error::NotInCatalog(format!("no room to smooth the jump at {p}")));
        }
        let probe = 1e-9 * (b - a).max(1.0);
        let left = u.value_field().piece_at([p - probe, 0.0]);
        let right = u.value_field().piece_at([p + probe, 0.0]);
        let (Some(left), Some(right)) = (left, right) else {
            return Err(Error::InvalidFunction(format!("jump at {p} is not between two pieces")));
        };
        transitions.push(T {
            lo: p - w / 2.0,
            hi: p + w / 2.0,
            left,
            right,
        });
    }

    let vals = u.value_field().pieces();
    let grads = u.grad_field().pieces();
    let mut builder = BvFunction::builder(domain, u.n_out());
    for (k, (vp, gp)) in vals.iter().zip(grads).enumerate() {
        let mut lo = vp.region.lo[0];
        let mut hi = vp.region.hi[0];
        for t in &transitions {
            if t.right == k {
                lo = lo.max(t.hi);
            }
            if t.left == k {
                hi = hi.min(t.lo);
            }
        }
        if hi > lo {
            let (f, g) = (Arc::clone(&vp.f), Arc::clone(&gp.f));
            builder = builder.piece_subdivided(Rect::interval(lo, hi), move |x| f(x), move |x| g(x), vp.subdivisions);
        }
    }
    for t in &transitions {
        let (fl, fr) = (Arc::clone(&vals[t.left].f), Arc::clone(&vals[t.right].f));
        let (gl, gr) = (Arc::clone(&grads[t.left].f), Arc::clone(&grads[t.right].f));
        let (fl2, fr2) = (Arc::clone(&fl), Arc::clone(&fr));
        let (lo, w) = (t.lo, t.hi - t.lo);
        builder = builder.piece_subdivided(
            Rect::interval(t.lo, t.hi),
            move |x: Point| {
                let (s, _) = transition((x[0] - lo) / w);
                fl(x) * (1.0 - s) + fr(x) * s
            },
            move |x: Point| {
                let (s, ds) = transition((x[0] - lo) / w);
                gl(x) * (1.0 - s) + gr(x) * s + (fr2(x) - fl2(x)) * (ds / w)
            },
            TRANSITION_SUBDIVISIONS,
        );
    }
    for j in kept {
        let n = j.normal();
        builder = builder.jump_with_normal(j.carrier, j.plus, j.minus, n);
    }
    let me = u.clone();
    builder = builder.trace(Arc::new(move |x| me.boundary_trace(x)));
    builder.build()
}

/// Smooth approximation `v_j ∈ BV_u` of a catalog function: each interior
/// jump is replaced by a `C^∞` transition of width `1/(2j)` and `v_j = u` in
/// a `1/j`-collar of `∂Ω`. Functions without jumps are returned unchanged.
pub fn smooth_dirichlet_approximation(u: &BvFunction, j: usize) -> Result<BvFunction> {
    let jf = j.max(1) as f64;
    smooth_jumps(u, 1.0 / (2.0 * jf), 1.0 / jf)
}

/// `C^∞` transitions of width `1/(scale·j)` applied to `u`.
pub fn smoothed(u: BvFunction, name: &str, scale: f64) -> Sequence {
    let v = u.clone();
    Sequence::new(name, u, move |j| {
        let jf = j as f64;
        smooth_jumps(&v, 1.0 / (scale * jf), 1.0 / jf)
    })
}

/// The catalog used for property checks: `(name, function)`.
pub fn functions(resolution: usize) -> Result<Vec<(String, BvFunction)>> {
    let d1 = Domain::unit_interval(resolution);
    let d2 = Domain::unit_square(resolution);
    let mut out: Vec<(String, BvFunction)> = vec![
        ("affine-1d".into(), affine(d1, 0.25, [1.5, 0.0])?),
        ("heaviside".into(), heaviside(d1, 0.5)?),
        (
            "piecewise-affine".into(),
            piecewise_affine_1d(d1, &[0.2, 0.45, 0.8], &[(1.0, -2.0), (0.0, 3.0), (0.5, 0.0), (-1.0, 1.0)])?,
        ),
        ("sawtooth-8".into(), sawtooth_term(d1, 8)?),
        ("ramp-8".into(), ramps(resolution)?.term(8)?),
        ("staircase-8".into(), staircase(resolution)?.term(8)?),
        ("smoothed-heaviside-4".into(), smooth_dirichlet_approximation(&heaviside(d1, 0.5)?, 4)?),
        ("affine-2d".into(), affine(d2, -0.5, [1.0, 2.0])?),
        ("step-2d".into(), step_2d(d2, 0.5)?),
        ("two-steps-2d".into(), two_steps(d2)?),
    ];
    let smooth = BvFunction::builder(d2, 2)
        .piece(
            d2.rect(),
            |x| Mat::column(&[x[0].sin() * x[1], x[0] * x[0] - x[1]]),
            |x| Mat::from_rows(2, 2, &[x[0].cos() * x[1], x[0].sin(), 2.0 * x[0], -1.0]),
        )
        .build()?;
    out.push(("smooth-vector-2d".into(), smooth));
    Ok(out)
}

/// `1_{x₁ > 1/2} + 2·1_{x₂ > 1/3}` on the unit square: one vertical and one
/// horizontal jump with varying one-sided traces.
fn two_steps(d: Domain) -> Result<BvFunction> {
    let f = |x: Point| {
        let a = if x[0] > 0.5 { 1.0 } else { 0.0 };
        let b = if x[1] > 1.0 / 3.0 { 2.0 } else { 0.0 };
        a + b
    };
    let v = Carrier::segment([0.5, 0.0], [0.5, 1.0])?;
    let h = Carrier::segment([0.0, 1.0 / 3.0], [1.0, 1.0 / 3.0])?;
    let third = 1.0 / 3.0;
    let mut b = BvFunction::builder(d, 1);
    for (lo, hi) in [
        ([0.0, 0.0], [0.5, third]),
        ([0.5, 0.0], [1.0, third]),
        ([0.0, third], [0.5, 1.0]),
        ([0.5, third], [1.0, 1.0]),
    ] {
        let c = f([(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]);
        b = b.affine_piece(Rect::new(lo, hi), c, [0.0, 0.0]);
    }
    let plus_v: MatFn = Arc::new(move |x: Point| Mat::scalar(1.0 + if x[1] > third { 2.0 } else { 0.0 }));
    let minus_v: MatFn = Arc::new(move |x: Point| Mat::scalar(if x[1] > third { 2.0 } else { 0.0 }));
    let plus_h: MatFn = Arc::new(move |x: Point| Mat::scalar(2.0 + if x[0] > 0.5 { 1.0 } else { 0.0 }));
    let minus_h: MatFn = Arc::new(move |x: Point| Mat::scalar(if x[0] > 0.5 { 1.0 } else { 0.0 }));
    b.jump_with_normal(v, plus_v, minus_v, [1.0, 0.0])
        .jump_with_normal(h, plus_h, minus_h, [0.0, 1.0])
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_has_unit_variation_and_vanishing_norm() {
        let s = sawtooth(16).unwrap();
        let u = s.term(32).unwrap();
        assert!((u.total_variation() - 1.0).abs() < 1e-13);
        assert!((u.l1_norm() - 1.0 / (4.0 * 32.0)).abs() < 1e-14);
        assert!(u.jumps().is_empty());
    }

    #[test]
    fn staircase_is_strict_but_not_area_strict() {
        let s = staircase(16).unwrap();
        let u = s.term(64).unwrap();
        assert!((u.total_variation() - 63.0 / 64.0).abs() < 1e-13);
        assert!((u.area() - (1.0 + 63.0 / 64.0)).abs() < 1e-13);
        assert!((s.limit().area() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn transition_is_monotone_and_normalised() {
        let mut prev = 0.0;
        let mut integral = 0.0;
        let n = 20000;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let (s, ds) = transition(t);
            assert!(s >= prev - 1e-15 && ds >= 0.0);
            prev = s;
            if k < n {
                integral += transition((k as f64 + 0.5) / n as f64).1 / n as f64;
            }
        }
        assert!((transition(0.5).0 - 0.5).abs() < 1e-15);
        assert!((integral - 1.0).abs() < 1e-9);
    }

    #[test]
    fn affine_functions_are_fixed_by_smoothing() {
        let u = affine(Domain::unit_interval(8), 1.0, [2.0, 0.0]).unwrap();
        let v = smooth_dirichlet_approximation(&u, 5).unwrap();
        assert_eq!(v.l1_distance(&u), 0.0);
    }

    #[test]
    fn smoothed_heaviside_keeps_boundary_values_and_mass() {
        let d = Domain::unit_interval(16);
        let u = heaviside(d, 0.5).unwrap();
        for j in [4, 16, 64] {
            let v = smooth_dirichlet_approximation(&u, j).unwrap();
            assert!((v.total_variation() - 1.0).abs() < 1e-9, "{}", v.total_variation());
            assert_eq!(v.eval([1.0 / (2.0 * j as f64), 0.0]).get(0, 0), 0.0);
            assert!(v.jumps().is_empty());
            let gap = u.area() - v.area();
            assert!(gap >= 0.0 && gap <= 1.0 / (2.0 * j as f64), "{gap}");
        }
    }

    #[test]
    fn two_dimensional_jumps_are_not_in_catalog() {
        let u = step_2d(Domain::unit_square(8), 0.5).unwrap();
        assert!(matches!(smooth_dirichlet_approximation(&u, 4), Err(Error::NotInCatalog(_))));
    }
}
