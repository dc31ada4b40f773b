//! Weak*, strict and area-strict convergence diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use crate::bv::{BvFunction, Sequence};
use crate::error::Result;
use crate::linalg::{Mat, Point};
use crate::measures::{Domain, MatrixMeasure, RadonMeasure};

/// A `C¹` bump `sin²` on `[k/13, (k+2)/13]` of the unit interval.
fn bump(k: usize, t: f64) -> f64 {
    let s = 13.0 * t - k as f64;
    if (0.0..=2.0).contains(&s) {
        (std::f64::consts::FRAC_PI_2 * s).sin().powi(2)
    } else {
        0.0
    }
}

/// Localizations used as the finite weak* test dictionary: tensor-product
/// `sin²` bumps, `per_axis` of them per axis, mapped onto the domain.
pub fn test_dictionary(domain: &Domain, per_axis: usize) -> Vec<Box<dyn Fn(Point) -> f64 + Send + Sync>> {
    let r = domain.rect();
    let per_axis = per_axis.min(12);
    let mut out: Vec<Box<dyn Fn(Point) -> f64 + Send + Sync>> = Vec::new();
    let (lo, hi) = (r.lo, r.hi);
    if domain.dim() == 1 {
        for k in 0..per_axis {
            out.push(Box::new(move |x: Point| bump(k, (x[0] - lo[0]) / (hi[0] - lo[0]))));
        }
    } else {
        for ky in 0..per_axis {
            for kx in 0..per_axis {
                out.push(Box::new(move |x: Point| {
                    bump(kx, (x[0] - lo[0]) / (hi[0] - lo[0])) * bump(ky, (x[1] - lo[1]) / (hi[1] - lo[1]))
                }));
            }
        }
    }
    out
}

/// Pairings `⟨φ E_{ab}, γ⟩` of a measure with every dictionary element
/// and every matrix entry.
pub(crate) fn dictionary_pairings(gamma: &MatrixMeasure, dict: &[Box<dyn Fn(Point) -> f64 + Send + Sync>]) -> Vec<f64> {
    let (rows, cols) = gamma.shape();
    let mut out = Vec::with_capacity(dict.len() * rows * cols);
    for phi in dict {
        for a in 0..rows {
            for b in 0..cols {
                out.push(gamma.pair_with_test_function(|x| Mat::unit(rows, cols, a, b) * phi(x)));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergenceRow {
    pub j: usize,
    pub l1: f64,
    pub weak_star: f64,
    pub strict: f64,
    pub area_strict: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergenceReport {
    pub sequence: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn last(&self) -> Option<&ConvergenceRow> {
        self.rows.last()
    }
}

/// Per-`j` gaps: `‖u_j − u‖_{L¹}`, the largest dictionary pairing gap,
/// `||Du_j|(Ω) − |Du|(Ω)|` and `|⟨Du_j⟩(Ω) − ⟨Du⟩(Ω)|`.
pub fn convergence_report(seq: &Sequence, js: &[usize], per_axis: usize) -> Result<ConvergenceReport> {
    let u = seq.limit();
    let du = u.derivative();
    let dict = test_dictionary(u.domain(), per_axis);
    let base = dictionary_pairings(&du, &dict);
    let (tv, area) = (du.total_variation(None), du.area_functional(None));
    let rows: Result<Vec<ConvergenceRow>> = js
        .par_iter()
        .map(|&j| {
            let uj: BvFunction = seq.term(j)?;
            let duj = uj.derivative();
            let pj = dictionary_pairings(&duj, &dict);
            let weak_star = pj.iter().zip(&base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok(ConvergenceRow {
                j,
                l1: uj.l1_distance(u),
                weak_star,
                strict: (duj.total_variation(None) - tv).abs(),
                area_strict: (duj.area_functional(None) - area).abs(),
            })
        })
        .collect();
    Ok(ConvergenceReport {
        sequence: seq.name().to_string(),
        rows: rows?,
    })
}
