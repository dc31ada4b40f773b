//! Refutation-only quasiconvexity probing with piecewise-affine test fields,
//! and midpoint rank-one convexity residuals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::integrands::Integrand;
use crate::linalg::{Mat, Point};

/// Threshold below which `∫F(A + ∇ψ) − F(A)` counts as a refutation.
pub const WITNESS_THRESHOLD: f64 = -1e-9;

/// A compactly supported test field on the unit box, described by its
/// values at the nodes of a uniform grid and interpolated linearly (on the
/// triangles cut by the `p00–p11` diagonals in 2D).
#[derive(Debug, Clone, PartialEq)]
pub enum TrialField {
    /// `a·(amp/k)·tri(k b·x)` times a pyramid cutoff, `tri` the unit-slope
    /// triangle wave vanishing on the integers.
    Laminate { a: Vec<f64>, b: [f64; 2], amp: f64, k: usize },
    /// Independent uniform values in `[−1, 1]` at interior nodes.
    Random { seed: u64 },
}

fn tri(s: f64) -> f64 {
    let f = s - s.floor();
    f.min(1.0 - f)
}

impl TrialField {
    pub fn name(&self) -> String {
        match self {
            TrialField::Laminate { a, b, amp, k } => format!("laminate a={a:?} b={b:?} amp={amp} k={k}"),
            TrialField::Random { seed } => format!("random seed={seed}"),
        }
    }

    /// Nodal values (`rows × 1` each) on the `(n+1)^dim` grid, x fastest.
    pub fn nodal_values(&self, n: usize, dim: usize, rows: usize) -> Vec<Mat> {
        let ny = if dim == 1 { 0 } else { n };
        let h = 1.0 / n as f64;
        let count = (n + 1) * (ny + 1);
        match self {
            TrialField::Laminate { a, b, amp, k } => {
                let kf = *k as f64;
                let mut out = Vec::with_capacity(count);
                for iy in 0..=ny {
                    for ix in 0..=n {
                        let p = [ix as f64 * h, iy as f64 * h];
                        let s = b[0] * p[0] + if dim == 2 { b[1] * p[1] } else { 0.0 };
                        let dist = if dim == 1 {
                            p[0].min(1.0 - p[0])
                        } else {
                            p[0].min(1.0 - p[0]).min(p[1]).min(1.0 - p[1])
                        };
                        // the 1D laminate along e₁ already vanishes on the boundary
                        let cutoff = if dim == 1 { 1.0 } else { (8.0 * dist).min(1.0) };
                        let v = amp / kf * tri(kf * s) * cutoff;
                        let mut m = Mat::zeros(rows, 1);
                        for (r, ar) in a.iter().take(rows).enumerate() {
                            m.set(r, 0, ar * v);
                        }
                        out.push(m);
                    }
                }
                out
            }
            TrialField::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(count);
                for iy in 0..=ny {
                    for ix in 0..=n {
                        let boundary = ix == 0 || ix == n || (dim == 2 && (iy == 0 || iy == ny));
                        let mut m = Mat::zeros(rows, 1);
                        for r in 0..rows {
                            let v: f64 = rng.gen_range(-1.0..1.0);
                            if !boundary {
                                m.set(r, 0, v);
                            }
                        }
                        out.push(m);
                    }
                }
                out
            }
        }
    }
}

/// Laminates along `e₁`, `e₂` and both diagonals with `a = ±e_r` and
/// amplitudes `{0.5, 1, 2}`, followed by ten seeded random fields.
pub fn default_trials(rows: usize, dim: usize) -> Vec<TrialField> {
    let bs: Vec<[f64; 2]> = if dim == 1 {
        vec![[1.0, 0.0]]
    } else {
        vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]
    };
    let mut out = Vec::new();
    for b in &bs {
        for r in 0..rows {
            for sign in [1.0, -1.0] {
                let mut a = vec![0.0; rows];
                a[r] = sign;
                for amp in [0.5, 1.0, 2.0] {
                    for k in [1, 4] {
                        out.push(TrialField::Laminate { a: a.clone(), b: *b, amp, k });
                    }
                }
            }
        }
    }
    out.extend((0..10).map(|seed| TrialField::Random { seed }));
    out
}

/// Exact `∫_ω F(x, A + ∇ψ) − F(x, A)` for the piecewise-affine `ψ` with the
/// given nodal values on the uniform `n`-grid of the unit box.
fn excess(f: &dyn Integrand, x: Point, a: &Mat, nodal: &[Mat], n: usize, dim: usize) -> f64 {
    let h = 1.0 / n as f64;
    let rows = a.rows();
    let base = f.eval(x, a);
    let mut total = 0.0;
    if dim == 1 {
        for i in 0..n {
            let g = (nodal[i + 1] - nodal[i]) * (1.0 / h);
            total += h * f.eval(x, &(*a + g));
        }
        return total - base;
    }
    let idx = |ix: usize, iy: usize| iy * (n + 1) + ix;
    let grad = |dx: Mat, dy: Mat| {
        let mut g = Mat::zeros(rows, 2);
        for r in 0..rows {
            g.set(r, 0, dx.get(r, 0) / h);
            g.set(r, 1, dy.get(r, 0) / h);
        }
        g
    };
    let half = 0.5 * h * h;
    for iy in 0..n {
        for ix in 0..n {
            let p00 = nodal[idx(ix, iy)];
            let p10 = nodal[idx(ix + 1, iy)];
            let p01 = nodal[idx(ix, iy + 1)];
            let p11 = nodal[idx(ix + 1, iy + 1)];
            let lower = grad(p10 - p00, p11 - p10);
            let upper = grad(p11 - p01, p01 - p00);
            total += half * (f.eval(x, &(*a + lower)) + f.eval(x, &(*a + upper)));
        }
    }
    total - base
}

/// A refuting test field.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub trial: String,
    pub value: f64,
    pub resolution: usize,
    pub dim: usize,
    pub nodal: Vec<Mat>,
}

impl Witness {
    /// The same field on the grid refined twice per axis.
    pub fn refined(&self) -> Witness {
        let n = self.resolution;
        let m = 2 * n;
        let avg = |p: Mat, q: Mat| (p + q) * 0.5;
        let nodal = if self.dim == 1 {
            (0..=m)
                .map(|i| if i % 2 == 0 { self.nodal[i / 2] } else { avg(self.nodal[i / 2], self.nodal[i / 2 + 1]) })
                .collect()
        } else {
            let old = |ix: usize, iy: usize| self.nodal[iy * (n + 1) + ix];
            let mut out = Vec::with_capacity((m + 1) * (m + 1));
            for iy in 0..=m {
                for ix in 0..=m {
                    let (cx, cy) = (ix / 2, iy / 2);
                    out.push(match (ix % 2, iy % 2) {
                        (0, 0) => old(cx, cy),
                        (1, 0) => avg(old(cx, cy), old(cx + 1, cy)),
                        (0, 1) => avg(old(cx, cy), old(cx, cy + 1)),
                        _ => avg(old(cx, cy), old(cx + 1, cy + 1)),
                    });
                }
            }
            out
        };
        Witness {
            trial: self.trial.clone(),
            value: f64::NAN,
            resolution: m,
            dim: self.dim,
            nodal,
        }
    }

    /// Recomputes the excess from the stored nodal values.
    pub fn reevaluate(&self, f: &dyn Integrand, x: Point, a: &Mat) -> f64 {
        excess(f, x, a, &self.nodal, self.resolution, self.dim)
    }
}

/// Searches the trial fields for `∫_ω F(x, A + ∇ψ) dL^n < |ω| F(x, A)` on the
/// unit box `ω` with an `n`-per-axis grid. `None` proves nothing.
pub fn quasiconvexity_refuter(f: &dyn Integrand, x: Point, a: &Mat, trials: &[TrialField], n: usize) -> Option<Witness> {
    let dim = a.cols();
    let n = n.max(2);
    let mut best: Option<Witness> = None;
    for t in trials {
        let nodal = t.nodal_values(n, dim, a.rows());
        let value = excess(f, x, a, &nodal, n, dim);
        if value < WITNESS_THRESHOLD && best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(Witness {
                trial: t.name(),
                value,
                resolution: n,
                dim,
                nodal,
            });
        }
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct RankOneReport {
    pub max_violation: f64,
    pub worst_t: f64,
    pub worst_h: f64,
    pub samples: usize,
}

/// Midpoint residuals `F(A + tD) − ½(F(A + (t−h)D) + F(A + (t+h)D))` along
/// `D = a⊗b` for `t ∈ [−2, 2]` in steps of `1/4` and `h ∈ {¼, ½, 1, 2}`.
pub fn rank_one_convexity_check(f: &dyn Integrand, x: Point, base: &Mat, a: &[f64], b: &[f64]) -> RankOneReport {
    let d = Mat::outer(a, b);
    let at = |t: f64| f.eval(x, &(*base + d * t));
    let mut report = RankOneReport {
        max_violation: f64::MIN,
        worst_t: 0.0,
        worst_h: 0.0,
        samples: 0,
    };
    for ti in -8..=8 {
        let t = ti as f64 * 0.25;
        for h in [0.25, 0.5, 1.0, 2.0] {
            let v = at(t) - 0.5 * (at(t - h) + at(t + h));
            report.samples += 1;
            if v > report.max_violation {
                report.max_violation = v;
                report.worst_t = t;
                report.worst_h = h;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::Catalog;

    #[test]
    fn w_shape_is_refuted_by_the_unit_sawtooth() {
        let f = Catalog::w_shape();
        let a = Mat::scalar(0.0);
        let w = quasiconvexity_refuter(&f, [0.5, 0.0], &a, &default_trials(1, 1), 32).unwrap();
        assert!((w.value + 1.0).abs() < 1e-12, "{}", w.value);
        let r = w.refined();
        assert!((r.reevaluate(&f, [0.5, 0.0], &a) - w.value).abs() < 1e-12);
    }

    #[test]
    fn convex_integrands_are_not_refuted() {
        for f in [Catalog::norm(), Catalog::area()] {
            for (rows, cols) in [(1, 1), (1, 2), (2, 2)] {
                let a = Mat::unit(rows, cols, 0, 0) * 0.3;
                assert!(quasiconvexity_refuter(&f, [0.0, 0.0], &a, &default_trials(rows, cols), 16).is_none());
            }
        }
    }

    #[test]
    fn refinement_preserves_two_dimensional_fields() {
        let f = Catalog::area();
        let a = Mat::from_rows(1, 2, &[0.2, -0.1]);
        let nodal = TrialField::Random { seed: 3 }.nodal_values(8, 2, 1);
        let w = Witness {
            trial: "r".into(),
            value: 0.0,
            resolution: 8,
            dim: 2,
            nodal,
        };
        let v = w.reevaluate(&f, [0.0, 0.0], &a);
        assert!((w.refined().reevaluate(&f, [0.0, 0.0], &a) - v).abs() < 1e-12);
    }

    #[test]
    fn rank_one_residuals() {
        let r = rank_one_convexity_check(&Catalog::w_shape(), [0.0, 0.0], &Mat::scalar(0.0), &[1.0], &[1.0]);
        assert!((r.max_violation - 1.0).abs() < 1e-15);
        let r = rank_one_convexity_check(&Catalog::area(), [0.0, 0.0], &Mat::zeros(2, 2), &[1.0, 2.0], &[0.5, -1.0]);
        assert!(r.max_violation <= 1e-12);
    }
}
