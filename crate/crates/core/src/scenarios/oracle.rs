//! Independent 1D reference computation of the functional: Simpson sums over
//! a fine partition plus an explicit ledger of jumps, atoms and boundary
//! values. Shares nothing with the quadrature or decomposition code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bv::catalog::piecewise_affine_1d;
use crate::bv::BvFunction;
use crate::error::{Error, Result};
use crate::integrands::{from_id, Integrand};
use crate::linalg::Mat;
use crate::measures::{Domain, Piece, PiecewiseField, Rect, ScalarMeasure};

/// Number of partition cells used by [`oracle_1d`].
pub const ORACLE_CELLS: usize = 100_000;

/// A 1D test case: `u = c_k + g_k x` between consecutive `breaks`, `μ` with a
/// piecewise-constant density (values between `density_breaks`) and atoms.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OracleCase {
    pub interval: [f64; 2],
    pub breaks: Vec<f64>,
    pub pieces: Vec<[f64; 2]>,
    pub density_breaks: Vec<f64>,
    pub density: Vec<f64>,
    pub atoms: Vec<[f64; 2]>,
    pub integrand: String,
    pub include_boundary: bool,
}

impl OracleCase {
    fn check(&self) -> Result<()> {
        let ok = self.pieces.len() == self.breaks.len() + 1
            && self.density.len() == self.density_breaks.len() + 1
            && self.interval[0] < self.interval[1]
            && self.density.iter().all(|a| *a > 0.0)
            && self.atoms.iter().all(|a| a[1] >= 0.0 && a[0] > self.interval[0] && a[0] < self.interval[1]);
        if ok {
            Ok(())
        } else {
            Err(Error::Config("malformed oracle case".into()))
        }
    }

    fn piece_index(&self, x: f64) -> usize {
        self.breaks.iter().filter(|b| **b <= x).count()
    }

    fn u(&self, k: usize, x: f64) -> f64 {
        self.pieces[k][0] + self.pieces[k][1] * x
    }

    fn a(&self, x: f64) -> f64 {
        self.density[self.density_breaks.iter().filter(|b| **b <= x).count()]
    }

    /// The same data as library objects, for comparison with the evaluator.
    pub fn build(&self, resolution: usize) -> Result<(BvFunction, ScalarMeasure)> {
        self.check()?;
        let domain = Domain::interval(self.interval[0], self.interval[1], resolution)?;
        let coeffs: Vec<(f64, f64)> = self.pieces.iter().map(|p| (p[0], p[1])).collect();
        let u = piecewise_affine_1d(domain, &self.breaks, &coeffs)?;
        let mut edges = vec![self.interval[0]];
        edges.extend(&self.density_breaks);
        edges.push(self.interval[1]);
        let pieces = edges
            .windows(2)
            .zip(&self.density)
            .map(|(w, &a)| Piece {
                region: Rect::interval(w[0], w[1]),
                f: std::sync::Arc::new(move |_| a),
                subdivisions: 1,
            })
            .collect();
        let mut mu = ScalarMeasure::zero(domain).with_density(PiecewiseField::new(1, pieces))?;
        for a in &self.atoms {
            mu = mu.with_atom([a[0], 0.0], a[1])?;
        }
        Ok((u, mu.dominating(1e-12)?))
    }
}

fn recession_1d(f: &dyn Integrand, x: f64, v: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    let dir = Mat::scalar(v.signum());
    let r = f
        .analytic_recession([x, 0.0], &dir)
        .ok_or_else(|| Error::Integrand(format!("{} has no closed-form recession", f.name())))?;
    Ok(v.abs() * r)
}

/// Direct evaluation of the functional for a 1D case.
pub fn oracle_1d(case: &OracleCase) -> Result<f64> {
    case.check()?;
    let f = from_id(&case.integrand)?;
    let [lo, hi] = case.interval;
    let mut cuts: Vec<f64> = (0..=ORACLE_CELLS).map(|k| lo + (hi - lo) * k as f64 / ORACLE_CELLS as f64).collect();
    cuts.extend(case.breaks.iter().chain(&case.density_breaks).filter(|b| **b > lo && **b < hi));
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let mid = 0.5 * (x0 + x1);
        let k = case.piece_index(mid);
        let a = case.a(mid);
        let g = case.pieces[k][1];
        let h = |x: f64| f.eval([x, 0.0], &Mat::scalar(g / a)) * a;
        total += (x1 - x0) / 6.0 * (h(x0) + 4.0 * h(mid) + h(x1));
    }
    let atom_at = |x: f64| case.atoms.iter().filter(|a| a[0] == x).map(|a| a[1]).sum::<f64>();
    for (k, &b) in case.breaks.iter().enumerate() {
        let jump = case.u(k + 1, b) - case.u(k, b);
        let w = atom_at(b);
        if w > 0.0 {
            total += f.eval([b, 0.0], &Mat::scalar(jump / w)) * w;
        } else {
            total += recession_1d(&f, b, jump)?;
        }
    }
    for a in &case.atoms {
        if !case.breaks.contains(&a[0]) {
            total += f.eval([a[0], 0.0], &Mat::scalar(0.0)) * a[1];
        }
    }
    if case.include_boundary {
        let left = case.u(0, lo);
        let right = case.u(case.pieces.len() - 1, hi);
        // inner normals +1 at the left end, −1 at the right end
        total += recession_1d(&f, lo, left)?;
        total += recession_1d(&f, hi, -right)?;
    }
    Ok(total)
}

/// Seeded random cases on `(0, 1)` with at most five jumps and three atoms,
/// some atoms sitting on jumps.
pub fn random_cases(count: usize, seed: u64) -> Vec<OracleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = crate::integrands::CATALOG_IDS;
    let grid = |rng: &mut ChaCha8Rng| (rng.gen_range(1..64) as f64) / 64.0;
    (0..count)
        .map(|_| {
            let mut breaks: Vec<f64> = (0..rng.gen_range(0..=5)).map(|_| grid(&mut rng)).collect();
            breaks.sort_by(|a, b| a.total_cmp(b));
            breaks.dedup();
            let pieces = (0..=breaks.len())
                .map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
                .collect();
            let mut density_breaks: Vec<f64> = (0..rng.gen_range(0..=3)).map(|_| grid(&mut rng)).collect();
            density_breaks.sort_by(|a, b| a.total_cmp(b));
            density_breaks.dedup();
            let density = (0..=density_breaks.len()).map(|_| rng.gen_range(0.5..2.0)).collect();
            let mut atoms: Vec<[f64; 2]> = Vec::new();
            for _ in 0..rng.gen_range(0..=3) {
                let x = if !breaks.is_empty() && rng.gen_bool(0.5) {
                    breaks[rng.gen_range(0..breaks.len())]
                } else {
                    grid(&mut rng)
                };
                if !atoms.iter().any(|a| a[0] == x) {
                    atoms.push([x, rng.gen_range(0.1..2.0)]);
                }
            }
            OracleCase {
                interval: [0.0, 1.0],
                breaks,
                pieces,
                density_breaks,
                density,
                atoms,
                integrand: ids[rng.gen_range(0..ids.len())].to_string(),
                include_boundary: rng.gen_bool(0.5),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_costs_f_of_zero_times_mass() {
        let case = OracleCase {
            interval: [0.0, 1.0],
            breaks: vec![],
            pieces: vec![[0.0, 0.0]],
            density_breaks: vec![0.5],
            density: vec![1.0, 3.0],
            atoms: vec![[0.25, 0.5]],
            integrand: "area".into(),
            include_boundary: true,
        };
        assert!((oracle_1d(&case).unwrap() - 2.5).abs() < 1e-10);
    }

    #[test]
    fn norm_of_smooth_function() {
        let case = OracleCase {
            interval: [0.0, 1.0],
            breaks: vec![],
            pieces: vec![[0.0, 3.0]],
            density_breaks: vec![],
            density: vec![2.0],
            atoms: vec![],
            integrand: "norm".into(),
            include_boundary: false,
        };
        assert!((oracle_1d(&case).unwrap() - 3.0).abs() < 1e-10);
    }
}
