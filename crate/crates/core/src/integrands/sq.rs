//! The envelope `G_i = max{F, F^# + |A|/i − i}` and its SQ parameters.

use crate::error::{Error, Result};
use crate::integrands::transform::directions;
use crate::integrands::{generalized_recession, Convexity, Growth, Integrand, IntegrandRef, DEFAULT_SCHEDULE};
use crate::linalg::{Mat, Point};

const BASE_POINTS: [Point; 3] = [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]];

/// `G_i` for a quasiconvex base `F ≥ 0`, with the radius `r_i` beyond which
/// `G_i = G_i^∞ − i` on every sampled matrix.
pub struct SqEnvelope {
    base: IntegrandRef,
    i: f64,
    r_i: f64,
    shape: (usize, usize),
}

impl std::fmt::Debug for SqEnvelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SqEnvelope")
            .field("base", &self.base.name())
            .field("i", &self.i)
            .field("r_i", &self.r_i)
            .finish()
    }
}

/// Closed-form recession when available, otherwise the tail max.
fn sharp(f: &dyn Integrand, x: Point, a: &Mat) -> f64 {
    f.analytic_recession(x, a)
        .unwrap_or_else(|| generalized_recession(f, x, a, &DEFAULT_SCHEDULE).value)
}

/// Sample matrices with `|A| ≥ r`.
fn samples_beyond(r: f64, shape: (usize, usize)) -> Vec<Mat> {
    let dirs = directions(shape.0, shape.1);
    let mut out = Vec::new();
    for m in 0..=10 {
        for s in [1.0, 1.5, 3.0] {
            let rad = r * s * 4f64.powi(m);
            out.extend(dirs.iter().map(|d| *d * rad));
        }
    }
    out
}

impl SqEnvelope {
    pub fn base(&self) -> &IntegrandRef {
        &self.base
    }

    pub fn i(&self) -> f64 {
        self.i
    }

    pub fn r_i(&self) -> f64 {
        self.r_i
    }

    /// `F^#(x, A)` of the base.
    pub fn base_sharp(&self, x: Point, a: &Mat) -> f64 {
        sharp(self.base.as_ref(), x, a)
    }

    /// `max |G_i(A) − (G_i^∞(A) − i)|` over sampled `|A| ≥ r_i`.
    pub fn identity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in BASE_POINTS {
            for a in samples_beyond(self.r_i, self.shape) {
                let r = self.eval(x, &a) - (self.recession_value(x, &a) - self.i);
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    fn recession_value(&self, x: Point, a: &Mat) -> f64 {
        self.base_sharp(x, a) + a.norm() / self.i
    }
}

impl Integrand for SqEnvelope {
    fn name(&self) -> String {
        format!("G_{}[{}]", self.i, self.base.name())
    }

    fn eval(&self, x: Point, a: &Mat) -> f64 {
        let f = self.base.eval(x, a);
        f.max(self.recession_value(x, a) - self.i)
    }

    fn analytic_recession(&self, x: Point, a: &Mat) -> Option<f64> {
        Some(self.recession_value(x, a))
    }

    fn growth(&self) -> Option<Growth> {
        self.base.growth().map(|g| Growth {
            m: g.m,
            big_m: g.big_m + 1.0 / self.i,
        })
    }

    fn x_dependent(&self) -> bool {
        self.base.x_dependent()
    }

    fn convexity(&self) -> Convexity {
        match self.base.convexity() {
            Convexity::Convex => Convexity::Convex,
            _ => Convexity::Unknown,
        }
    }
}

/// Builds `G_i` and searches `r_i` over `2^k`, `k ≤ 20`.
pub fn sq_envelope(f: IntegrandRef, i: f64, shape: (usize, usize)) -> Result<SqEnvelope> {
    if !(i > 0.0) {
        return Err(Error::Integrand(format!("SQ index must be positive, got {i}")));
    }
    if !f.convexity().is_quasiconvex() {
        return Err(Error::Integrand(format!("{} is not flagged quasiconvex", f.name())));
    }
    let mut env = SqEnvelope {
        base: f,
        i,
        r_i: f64::NAN,
        shape,
    };
    for k in 0..=20 {
        let r = 2f64.powi(k);
        let ok = BASE_POINTS.iter().all(|&x| {
            samples_beyond(r, shape)
                .iter()
                .all(|a| env.base.eval(x, a) <= env.recession_value(x, a) - i)
        });
        if ok {
            env.r_i = r;
            break;
        }
    }
    if env.r_i.is_nan() {
        return Err(Error::SqParametersNotFound(i));
    }
    // the recession of G_i must dominate |A|/i
    for x in BASE_POINTS {
        for a in samples_beyond(1e-3, shape) {
            if env.recession_value(x, &a) < a.norm() / i - 1e-12 * (1.0 + a.norm()) {
                return Err(Error::SqParametersNotFound(i));
            }
        }
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::Catalog;

    #[test]
    fn area_envelope_radius() {
        let g = sq_envelope(Catalog::area().into_ref(), 1.0, (1, 1)).unwrap();
        assert_eq!(g.r_i(), 2.0);
        assert!(g.identity_residual() <= 1e-10);
        let a = Mat::scalar(3.0);
        assert!((g.eval([0.0, 0.0], &a) - 5.0).abs() < 1e-14);
        assert_eq!(g.eval([0.0, 0.0], &Mat::scalar(0.0)), 1.0);
    }

    #[test]
    fn envelopes_decrease_in_i() {
        let f = Catalog::area();
        let gs: Vec<_> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&i| sq_envelope(Catalog::area().into_ref(), i, (2, 2)).unwrap())
            .collect();
        for t in [0.0, 0.5, 1.0, 3.0, 20.0, 200.0] {
            let a = Mat::from_rows(2, 2, &[t, 0.0, 0.0, -t]);
            let mut prev = f64::INFINITY;
            for g in &gs {
                let v = g.eval([0.0, 0.0], &a);
                assert!(v <= prev && v >= f.eval([0.0, 0.0], &a));
                prev = v;
            }
        }
    }

    #[test]
    fn non_quasiconvex_base_is_rejected() {
        assert!(sq_envelope(Catalog::w_shape().into_ref(), 1.0, (1, 1)).is_err());
    }
}
