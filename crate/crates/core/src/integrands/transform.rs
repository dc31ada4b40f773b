//! The compactifying transforms between integrands on `R^{N×n}` and
//! functions on the open unit ball.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::linalg::{Mat, Point};

/// A point `Â` of the open unit ball, stored with its gap `1 − |Â|` so that
/// points close to the sphere keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPoint {
    hat: Mat,
    gap: f64,
}

impl BallPoint {
    pub fn new(hat: Mat) -> Result<Self> {
        let gap = 1.0 - hat.norm();
        if !(gap > 0.0) || !hat.is_finite() {
            return Err(Error::OutsideBall(hat.norm()));
        }
        Ok(Self { hat, gap })
    }

    /// `Â = A/(1 + |A|)`.
    pub fn from_matrix(a: &Mat) -> Self {
        let gap = 1.0 / (1.0 + a.norm());
        Self { hat: *a * gap, gap }
    }

    /// A point on the ray through the unit matrix `dir` with gap `gap`.
    pub fn on_ray(dir: &Mat, gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap <= 1.0) {
            return Err(Error::OutsideBall(1.0 - gap));
        }
        let d = dir.polar().unwrap_or(*dir);
        Ok(Self { hat: d * (1.0 - gap), gap })
    }

    pub fn hat(&self) -> &Mat {
        &self.hat
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `Â/(1 − |Â|)`.
    pub fn unfold(&self) -> Mat {
        self.hat * (1.0 / self.gap)
    }
}

/// `(Tf)(x, Â) = (1 − |Â|) f(x, Â/(1 − |Â|))`.
pub fn transform_t(f: &dyn Integrand, x: Point, p: &BallPoint) -> f64 {
    p.gap * f.eval(x, &p.unfold())
}

/// `(T⁻¹g)(x, A) = (1 + |A|) g(x, A/(1 + |A|))`.
pub fn transform_t_inv(g: impl Fn(Point, &BallPoint) -> f64, x: Point, a: &Mat) -> f64 {
    (1.0 + a.norm()) * g(x, &BallPoint::from_matrix(a))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MembershipReport {
    /// Largest shell-to-shell change of `Tf` over the outermost shells.
    pub oscillation: f64,
    /// `max |Tf|` over every sampled shell point.
    pub bound: f64,
    pub in_e: bool,
    pub samples: usize,
}

/// Shell-to-shell oscillation above which `f` is flagged as outside `E`.
pub const OSCILLATION_FLAG: f64 = 1e-3;

pub(crate) fn directions(rows: usize, cols: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let e = Mat::unit(rows, cols, i, j);
            out.push(e);
            out.push(-e);
        }
    }
    let mut ones = Mat::zeros(rows, cols);
    for (k, v) in ones.as_mut_slice().iter_mut().enumerate() {
        *v = if k % 2 == 0 { 1.0 } else { -0.5 };
    }
    if let Some(p) = ones.polar() {
        out.push(p);
        out.push(-p);
    }
    out
}

/// Samples `Tf` on the shells `|Â| = 1 − 2^{−k}` (`k = 0..=20`, the origin
/// included) along fixed directions and at a few base points; the
/// oscillation is taken over shells `k ≥ 16`. Advisory only: a small
/// oscillation does not prove a continuous extension exists.
pub fn membership_e_check(f: &dyn Integrand, shape: (usize, usize)) -> MembershipReport {
    let xs: [Point; 3] = [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]];
    let dirs = directions(shape.0, shape.1);
    let mut bound = 0.0f64;
    let mut oscillation = 0.0f64;
    let mut samples = 0;
    for x in xs {
        for d in &dirs {
            let mut prev: Option<f64> = None;
            for k in 0..=20 {
                let p = BallPoint {
                    hat: *d * (1.0 - 0.5f64.powi(k)),
                    gap: 0.5f64.powi(k),
                };
                let v = transform_t(f, x, &p);
                samples += 1;
                bound = bound.max(v.abs());
                if let Some(q) = prev {
                    if k >= 16 {
                        oscillation = oscillation.max((v - q).abs());
                    }
                }
                prev = Some(v);
            }
        }
    }
    MembershipReport {
        oscillation,
        bound,
        in_e: oscillation.is_finite() && oscillation <= OSCILLATION_FLAG,
        samples,
    }
}
