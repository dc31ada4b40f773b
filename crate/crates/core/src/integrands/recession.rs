//! `F^∞` and `F^#` along a geometric schedule of dilations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::linalg::{Mat, Point};

/// `t = 10², 10³, …, 10⁸`.
pub const DEFAULT_SCHEDULE: [f64; 7] = [1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct RecessionEstimate {
    pub value: f64,
    /// Last successive difference for `F^∞`; tail spread for `F^#`.
    pub diagnostic: f64,
}

fn ratios(f: &dyn Integrand, x: Point, a: &Mat, schedule: &[f64]) -> Vec<f64> {
    schedule.iter().map(|&t| f.eval(x, &(*a * t)) / t).collect()
}

/// `F^∞(x, A)` as the last `f(x, tA)/t`. Fails when the last two values
/// differ by more than `tol` (default `1e-6(1 + |A|)`) or, when a closed
/// form is known, when the estimate disagrees with it beyond `1e-6(1 + |A|)`.
pub fn recession(f: &dyn Integrand, x: Point, a: &Mat, schedule: &[f64], tol: Option<f64>) -> Result<RecessionEstimate> {
    let schedule = if schedule.len() < 2 { &DEFAULT_SCHEDULE[..] } else { schedule };
    let v = ratios(f, x, a, schedule);
    let n = v.len();
    let diagnostic = (v[n - 1] - v[n - 2]).abs();
    let scale = 1e-6 * (1.0 + a.norm());
    let tolerance = tol.unwrap_or(scale);
    if !(diagnostic <= tolerance) {
        return Err(Error::RecessionUnstable { diagnostic, tolerance });
    }
    let value = v[n - 1];
    if let Some(exact) = f.analytic_recession(x, a) {
        if (value - exact).abs() > scale {
            return Err(Error::RecessionMismatch((value - exact).abs()));
        }
    }
    Ok(RecessionEstimate { value, diagnostic })
}

/// `F^#(x, A)` as the largest `f(x, tA)/t` over the tail `t ≥ t_max/100` of
/// the schedule (the last three points of the default one).
pub fn generalized_recession(f: &dyn Integrand, x: Point, a: &Mat, schedule: &[f64]) -> RecessionEstimate {
    let schedule = if schedule.is_empty() { &DEFAULT_SCHEDULE[..] } else { schedule };
    let t_max = schedule.iter().cloned().fold(f64::MIN, f64::max);
    let tail: Vec<f64> = schedule.iter().cloned().filter(|&t| t >= t_max * 1e-2).collect();
    let v = ratios(f, x, a, &tail);
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    RecessionEstimate {
        value: hi,
        diagnostic: hi - lo,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{Catalog, ClosureIntegrand};

    #[test]
    fn area_recession_is_norm() {
        let a = Mat::from_rows(2, 2, &[0.1, -2.0, 3.0, 4.0]);
        let r = recession(&Catalog::area(), [0.0, 0.0], &a, &DEFAULT_SCHEDULE, None).unwrap();
        assert!((r.value - a.norm()).abs() < 1e-6 * (1.0 + a.norm()));
        let r = recession(&Catalog::norm(), [0.0, 0.0], &a, &DEFAULT_SCHEDULE, None).unwrap();
        assert!((r.value - a.norm()).abs() <= 1e-15 * a.norm());
    }

    #[test]
    fn unstable_tail_is_rejected() {
        let f = ClosureIntegrand::new("log", |_, a: &Mat| a.norm() * (1.0 + a.norm()).ln());
        assert!(matches!(
            recession(&f, [0.0, 0.0], &Mat::scalar(1.0), &DEFAULT_SCHEDULE, None),
            Err(Error::RecessionUnstable { .. })
        ));
    }

    #[test]
    fn wrong_closed_form_is_reported() {
        let f = ClosureIntegrand::new("lying", |_, a: &Mat| a.norm()).with_recession(|_, a| 2.0 * a.norm());
        assert!(matches!(
            recession(&f, [0.0, 0.0], &Mat::scalar(1.0), &DEFAULT_SCHEDULE, None),
            Err(Error::RecessionMismatch(_))
        ));
    }

    #[test]
    fn limsup_of_oscillating_integrand() {
        let f = ClosureIntegrand::new("sin", |_, a: &Mat| a.norm() + a.norm().sin());
        let a = Mat::scalar(0.7);
        let r = generalized_recession(&f, [0.0, 0.0], &a, &DEFAULT_SCHEDULE);
        assert!((r.value - 0.7).abs() < 1e-6);
        let c = recession(&Catalog::area(), [0.0, 0.0], &a, &DEFAULT_SCHEDULE, None).unwrap();
        let g = generalized_recession(&Catalog::area(), [0.0, 0.0], &a, &DEFAULT_SCHEDULE);
        assert!((c.value - g.value).abs() < 1e-6);
    }
}
