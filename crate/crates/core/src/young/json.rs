//! Candidate Young measures from JSON.
//!
//! ```json
//! {"nu": [{"region": {"interval": [0, 1]}, "atoms": [[-1, 0.5], [1, 0.5]]}],
//!  "lambda": {"atoms": [[0.5, 1.0]]},
//!  "nu_inf": [{"point": 0.5, "atoms": [[1, 1.0]]}]}
//! ```
//!
//! Entries are matched in order; one without `region` or `point` matches
//! every node. Atom matrices are numbers, expressions or nested rows.

use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::linalg::Point;
use crate::measures::{json_point, rect_from_json, Rect, ScalarMeasure};
use crate::young::{AtomFn, Atoms, GeneralizedYoungMeasure, Site};

enum Selector {
    All,
    Region(Rect, usize),
    Point(Point),
}

impl Selector {
    fn matches(&self, x: Point) -> bool {
        match self {
            Selector::All => true,
            Selector::Region(r, dim) => r.contains(x, *dim),
            Selector::Point(p) => (p[0] - x[0]).abs() <= 1e-12 && (p[1] - x[1]).abs() <= 1e-12,
        }
    }
}

fn entries(v: Option<&Value>, shape: (usize, usize), what: &str) -> Result<AtomFn> {
    let list = match v {
        Some(Value::Array(a)) => a.clone(),
        None => Vec::new(),
        Some(other) => return Err(Error::Parse(format!("\"{what}\" must be a list, found {other}"))),
    };
    let mut parsed: Vec<(Selector, Vec<(MatExpr, f64)>)> = Vec::new();
    for e in &list {
        let sel = if let Some(r) = e.get("region") {
            let (dim, r) = rect_from_json(r)?;
            Selector::Region(r, dim)
        } else if let Some(p) = e.get("point").or_else(|| e.get("node")) {
            Selector::Point(json_point(p)?)
        } else {
            Selector::All
        };
        let atoms = e
            .get("atoms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse(format!("{what} entry needs \"atoms\"")))?;
        let mut out = Vec::new();
        for a in atoms {
            let pair = a.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Parse("atom is [A, p]".into()))?;
            let p = pair[1].as_f64().ok_or_else(|| Error::Parse("atom weight must be a number".into()))?;
            out.push((MatExpr::from_json(&pair[0], shape.0, shape.1)?, p));
        }
        parsed.push((sel, out));
    }
    Ok(Arc::new(move |s: Site| -> Atoms {
        parsed
            .iter()
            .find(|(sel, _)| sel.matches(s.x))
            .map(|(_, atoms)| atoms.iter().map(|(e, p)| (e.eval(s.x), *p)).collect())
            .unwrap_or_default()
    }))
}

impl GeneralizedYoungMeasure {
    /// Candidate measure relative to `mu`; `lambda` uses the scalar measure
    /// description and defaults to zero.
    pub fn from_json(mu: &ScalarMeasure, v: &Value, shape: (usize, usize)) -> Result<Self> {
        let nu = entries(v.get("nu"), shape, "nu")?;
        let nu_inf = entries(v.get("nu_inf"), shape, "nu_inf")?;
        let lambda = match v.get("lambda") {
            Some(l) => ScalarMeasure::from_json(*mu.domain(), l)?,
            None => ScalarMeasure::zero(*mu.domain()),
        };
        Self::new(mu.clone(), shape, nu, lambda, nu_inf, &[], &[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Domain;
    use crate::young::barycenter;
    use crate::measures::RadonMeasure;

    #[test]
    fn concentration_candidate_from_json() {
        let d = Domain::unit_interval(8);
        let mu = ScalarMeasure::lebesgue(d, 1.0).unwrap();
        let v: Value = serde_json::from_str(
            r#"{"nu": [{"atoms": [[0, 1.0]]}], "lambda": {"atoms": [[0.5, 1.0]]},
                "nu_inf": [{"point": 0.5, "atoms": [[1, 1.0]]}]}"#,
        )
        .unwrap();
        let y = GeneralizedYoungMeasure::from_json(&mu, &v, (1, 1)).unwrap();
        let b = barycenter(&y).unwrap();
        assert!((b.total_variation(None) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn missing_nu_is_rejected() {
        let d = Domain::unit_interval(8);
        let mu = ScalarMeasure::lebesgue(d, 1.0).unwrap();
        let v: Value = serde_json::from_str(r#"{"nu": []}"#).unwrap();
        assert!(GeneralizedYoungMeasure::from_json(&mu, &v, (1, 1)).is_err());
    }
}
