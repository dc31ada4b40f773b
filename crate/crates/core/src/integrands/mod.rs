//! Linear-growth integrands `F(x, A)`, their recession functions, the
//! compactifying transforms, convexity probes and the SQ envelope.

mod convexity;
mod recession;
mod sq;
mod transform;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use convexity::{
    quasiconvexity_refuter, rank_one_convexity_check, default_trials, RankOneReport, TrialField, WITNESS_THRESHOLD, Witness,
};
pub use recession::{generalized_recession, recession, RecessionEstimate, DEFAULT_SCHEDULE};
pub use sq::{sq_envelope, SqEnvelope};
pub use transform::{membership_e_check, transform_t, transform_t_inv, BallPoint, MembershipReport};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};

/// Growth constants with `m|A| ≤ F(x, A) ≤ M(1 + |A|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Growth {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

/// What is known about the convexity of `A ↦ F(x, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convexity {
    Convex,
    Quasiconvex,
    NotQuasiconvex,
    Unknown,
}

impl Convexity {
    /// Convex functions are quasiconvex.
    pub fn is_quasiconvex(self) -> bool {
        matches!(self, Convexity::Convex | Convexity::Quasiconvex)
    }
}

pub trait Integrand: Send + Sync {
    fn name(&self) -> String;
    fn eval(&self, x: Point, a: &Mat) -> f64;
    /// Closed-form `F^∞(x, A)` when known.
    fn analytic_recession(&self, _x: Point, _a: &Mat) -> Option<f64> {
        None
    }
    fn growth(&self) -> Option<Growth> {
        None
    }
    fn x_dependent(&self) -> bool {
        false
    }
    fn convexity(&self) -> Convexity {
        Convexity::Unknown
    }
}

pub type IntegrandRef = Arc<dyn Integrand>;

impl fmt::Debug for dyn Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Integrand({})", self.name())
    }
}

/// The shape-independent catalog: each entry is a function of `|A|` or of
/// `|A − A₀|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// `|A|`
    Norm,
    /// `√(1 + |A|²)`
    Area,
    /// `||A| − 1|`, not quasiconvex
    WShape,
    /// `|A − A₀| + c`
    ShiftedNorm { a0: Mat, c: f64 },
}

/// A catalog integrand, optionally multiplied by `(1 + x₁/2)` and by a
/// positive constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    kind: Kind,
    modulated: bool,
    factor: f64,
}

impl Catalog {
    pub fn new(kind: Kind) -> Self {
        Self {
            kind,
            modulated: false,
            factor: 1.0,
        }
    }

    pub fn norm() -> Self {
        Self::new(Kind::Norm)
    }

    pub fn area() -> Self {
        Self::new(Kind::Area)
    }

    pub fn w_shape() -> Self {
        Self::new(Kind::WShape)
    }

    pub fn shifted_norm(a0: Mat, c: f64) -> Self {
        Self::new(Kind::ShiftedNorm { a0, c })
    }

    /// `(1 + x₁/2)·F(A)`.
    pub fn x_modulated(mut self) -> Self {
        self.modulated = true;
        self
    }

    /// `s·F` for `s > 0`.
    pub fn scaled(mut self, s: f64) -> Self {
        self.factor *= s;
        self
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn into_ref(self) -> IntegrandRef {
        Arc::new(self)
    }

    fn weight(&self, x: Point) -> f64 {
        let w = if self.modulated { 1.0 + x[0] / 2.0 } else { 1.0 };
        w * self.factor
    }

    fn base(&self, a: &Mat) -> f64 {
        match self.kind {
            Kind::Norm => a.norm(),
            Kind::Area => (1.0 + a.norm().powi(2)).sqrt(),
            Kind::WShape => (a.norm() - 1.0).abs(),
            Kind::ShiftedNorm { a0, c } => {
                let shifted = if a0.shape() == a.shape() {
                    *a - a0
                } else {
                    // broadcast the (1×1) shift onto the leading entry
                    let mut s = *a;
                    s.set(0, 0, a.get(0, 0) - a0.get(0, 0));
                    s
                };
                shifted.norm() + c
            }
        }
    }
}

impl Integrand for Catalog {
    fn name(&self) -> String {
        let base = match self.kind {
            Kind::Norm => "norm".to_string(),
            Kind::Area => "area".to_string(),
            Kind::WShape => "w-shape".to_string(),
            Kind::ShiftedNorm { .. } => "shifted-norm".to_string(),
        };
        let base = if self.factor != 1.0 { format!("{}*{base}", self.factor) } else { base };
        if self.modulated {
            format!("x-modulated-{base}")
        } else {
            base
        }
    }

    fn eval(&self, x: Point, a: &Mat) -> f64 {
        self.weight(x) * self.base(a)
    }

    fn analytic_recession(&self, x: Point, a: &Mat) -> Option<f64> {
        Some(self.weight(x) * a.norm())
    }

    /// Constants for the modulated variants assume `0 ≤ x₁ ≤ 1`.
    fn growth(&self) -> Option<Growth> {
        let (m, big_m) = match self.kind {
            Kind::Norm | Kind::Area => (1.0, 1.0),
            Kind::WShape => (0.0, 1.0),
            Kind::ShiftedNorm { a0, c } => {
                let n0 = a0.norm();
                (if c >= n0 { 1.0 } else { 0.0 }, 1f64.max(n0 + c))
            }
        };
        let (lo, hi) = if self.modulated { (1.0, 1.5) } else { (1.0, 1.0) };
        Some(Growth {
            m: m * lo * self.factor,
            big_m: big_m * hi * self.factor,
        })
    }

    fn x_dependent(&self) -> bool {
        self.modulated
    }

    fn convexity(&self) -> Convexity {
        match self.kind {
            Kind::WShape => Convexity::NotQuasiconvex,
            _ => Convexity::Convex,
        }
    }
}

/// Resolves a catalog identifier: `norm`, `area`, `w-shape`,
/// `shifted-norm` (with `A₀ = ½ E₁₁`, `c = ¼`), each optionally prefixed by
/// `x-modulated-`.
pub fn from_id(id: &str) -> Result<Catalog> {
    let (modulated, base) = match id.strip_prefix("x-modulated-") {
        Some(rest) => (true, rest),
        None => (false, id),
    };
    let c = match base {
        "norm" => Catalog::norm(),
        "area" => Catalog::area(),
        "w-shape" => Catalog::w_shape(),
        "shifted-norm" => Catalog::shifted_norm(Mat::scalar(0.5), 0.25),
        other => return Err(Error::Integrand(format!("unknown integrand '{other}'"))),
    };
    Ok(if modulated { c.x_modulated() } else { c })
}

/// Identifiers accepted by [`from_id`].
pub const CATALOG_IDS: [&str; 8] = [
    "norm",
    "area",
    "w-shape",
    "shifted-norm",
    "x-modulated-norm",
    "x-modulated-area",
    "x-modulated-w-shape",
    "x-modulated-shifted-norm",
];

type EvalFn = dyn Fn(Point, &Mat) -> f64 + Send + Sync;

/// An integrand given by closures, for experiments outside the catalog.
pub struct ClosureIntegrand {
    name: String,
    f: Box<EvalFn>,
    recession: Option<Box<EvalFn>>,
    growth: Option<Growth>,
    convexity: Convexity,
    x_dependent: bool,
}

impl ClosureIntegrand {
    pub fn new(name: impl Into<String>, f: impl Fn(Point, &Mat) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Box::new(f),
            recession: None,
            growth: None,
            convexity: Convexity::Unknown,
            x_dependent: false,
        }
    }

    pub fn with_recession(mut self, r: impl Fn(Point, &Mat) -> f64 + Send + Sync + 'static) -> Self {
        self.recession = Some(Box::new(r));
        self
    }

    pub fn with_growth(mut self, m: f64, big_m: f64) -> Self {
        self.growth = Some(Growth { m, big_m });
        self
    }

    pub fn with_convexity(mut self, c: Convexity) -> Self {
        self.convexity = c;
        self
    }

    pub fn x_dependent(mut self) -> Self {
        self.x_dependent = true;
        self
    }
}

impl Integrand for ClosureIntegrand {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn eval(&self, x: Point, a: &Mat) -> f64 {
        (self.f)(x, a)
    }
    fn analytic_recession(&self, x: Point, a: &Mat) -> Option<f64> {
        self.recession.as_ref().map(|r| r(x, a))
    }
    fn growth(&self) -> Option<Growth> {
        self.growth
    }
    fn x_dependent(&self) -> bool {
        self.x_dependent
    }
    fn convexity(&self) -> Convexity {
        self.convexity
    }
}

/// Random matrix with log-uniform norm in `[10^{-3}, max_norm]`.
pub fn sample_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, max_norm: f64) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for v in m.as_mut_slice() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let dir = m.polar().unwrap_or_else(|| Mat::unit(rows, cols, 0, 0));
    let (lo, hi) = (1e-3f64.ln(), max_norm.max(1e-3).ln());
    dir * rng.gen_range(lo..=hi).exp()
}

/// Largest relative violation of the growth bounds over random samples
/// (`0` when they hold everywhere sampled).
pub fn check_growth(f: &dyn Integrand, shape: (usize, usize), samples: usize, max_norm: f64, seed: u64) -> Option<f64> {
    use rand::SeedableRng;
    let g = f.growth()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let a = sample_matrix(&mut rng, shape.0, shape.1, max_norm);
        let v = f.eval(x, &a);
        let n = a.norm();
        let lower = g.m * n - v;
        let upper = v - g.big_m * (1.0 + n);
        worst = worst.max(lower.max(upper) / (1.0 + n));
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        let a = Mat::from_rows(1, 2, &[3.0, 4.0]);
        assert_eq!(Catalog::norm().eval([0.0, 0.0], &a), 5.0);
        assert!((Catalog::area().eval([0.0, 0.0], &a) - 26f64.sqrt()).abs() < 1e-15);
        assert_eq!(Catalog::w_shape().eval([0.0, 0.0], &a), 4.0);
        assert_eq!(Catalog::norm().x_modulated().eval([1.0, 0.0], &a), 7.5);
        let s = Catalog::shifted_norm(Mat::scalar(0.5), 0.25);
        assert_eq!(s.eval([0.0, 0.0], &Mat::scalar(0.5)), 0.25);
    }

    #[test]
    fn identifiers_round_trip() {
        for id in CATALOG_IDS {
            assert_eq!(from_id(id).unwrap().name(), id);
        }
        assert!(from_id("nope").is_err());
    }

    #[test]
    fn growth_bounds_hold_on_samples() {
        for id in CATALOG_IDS {
            let f = from_id(id).unwrap();
            for shape in [(1, 1), (1, 2), (2, 2)] {
                let w = check_growth(&f, shape, 1000, 1e3, 7).unwrap();
                assert!(w <= 1e-12, "{id} {shape:?}: {w}");
            }
        }
    }
}
