//! Declarative JSON descriptions of domains and scalar measures.
//!
//! ```json
//! {"domain": {"interval": [0, 1]}, "resolution": 32,
//!  "density": "2 + x", "atoms": [[0.5, 1.0]],
//!  "segments": [{"from": [0.5, 0], "to": [0.5, 1], "density": "1"}],
//!  "dominates_lebesgue": 1e-12}
//! ```
//!
//! `density` may also be a cell array (flat in 1D, rows of `y` in 2D) or be
//! replaced by `pieces: [{"region": ..., "density": expr}]`.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::Point;
use crate::measures::{Carrier, Domain, Piece, PiecewiseField, Rect, ScalarMeasure};

fn num(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Parse(format!("expected a number, found {v}")))
}

pub fn point(v: &Value) -> Result<Point> {
    match v {
        Value::Number(_) => Ok([num(v)?, 0.0]),
        Value::Array(a) if a.len() == 1 => Ok([num(&a[0])?, 0.0]),
        Value::Array(a) if a.len() == 2 => Ok([num(&a[0])?, num(&a[1])?]),
        other => Err(Error::Parse(format!("expected a point, found {other}"))),
    }
}

/// `{"interval": [a, b]}` or `{"rect": [[x0, y0], [x1, y1]]}`.
pub fn rect_from_json(v: &Value) -> Result<(usize, Rect)> {
    if let Some(iv) = v.get("interval") {
        let a = iv.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Parse("interval needs [a, b]".into()))?;
        return Ok((1, Rect::interval(num(&a[0])?, num(&a[1])?)));
    }
    if let Some(r) = v.get("rect") {
        let a = r.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Parse("rect needs [lo, hi]".into()))?;
        return Ok((2, Rect::new(point(&a[0])?, point(&a[1])?)));
    }
    Err(Error::Parse(format!("expected {{\"interval\"}} or {{\"rect\"}}, found {v}")))
}

/// Domain from `{"domain": region, "resolution": n}`; the resolution
/// defaults to `default_resolution`.
pub fn domain_from_json(v: &Value, default_resolution: usize) -> Result<Domain> {
    let d = v.get("domain").ok_or_else(|| Error::Parse("missing \"domain\"".into()))?;
    let res = match v.get("resolution") {
        Some(r) => r.as_u64().ok_or_else(|| Error::Parse("resolution must be a positive integer".into()))? as usize,
        None => default_resolution,
    };
    let (dim, r) = rect_from_json(d)?;
    if dim == 1 {
        Domain::interval(r.lo[0], r.hi[0], res)
    } else {
        Domain::rectangle(r.lo, r.hi, res)
    }
}

fn cell_array(domain: &Domain, v: &[Value]) -> Result<PiecewiseField<f64>> {
    let r = domain.rect();
    let dim = domain.dim();
    let rows: Vec<Vec<f64>> = if dim == 1 {
        vec![v.iter().map(num).collect::<Result<_>>()?]
    } else {
        v.iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("2D cell array must be nested".into()))?
                    .iter()
                    .map(num)
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?
    };
    let nx = rows.first().map_or(0, |r| r.len());
    let ny = rows.len();
    if nx == 0 || rows.iter().any(|row| row.len() != nx) {
        return Err(Error::Parse("cell array must be rectangular and non-empty".into()));
    }
    let (lo, hi) = (r.lo, r.hi);
    let xs: Vec<f64> = (0..=nx).map(|k| lo[0] + (hi[0] - lo[0]) * k as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|k| lo[1] + (hi[1] - lo[1]) * k as f64 / ny as f64).collect();
    let field = PiecewiseField::single(dim, r, move |p: Point| {
        let ix = (((p[0] - lo[0]) / (hi[0] - lo[0]) * nx as f64).floor().max(0.0) as usize).min(nx - 1);
        let iy = if dim == 1 {
            0
        } else {
            (((p[1] - lo[1]) / (hi[1] - lo[1]) * ny as f64).floor().max(0.0) as usize).min(ny - 1)
        };
        rows[iy][ix]
    });
    Ok(if dim == 1 { field.with_breaks(&xs, &[]) } else { field.with_breaks(&xs, &ys) })
}

fn expr_field(dim: usize, region: Rect, v: &Value) -> Result<PiecewiseField<f64>> {
    let e = match v {
        Value::String(s) => Expr::parse(s)?,
        Value::Number(n) => Expr::constant(n.as_f64().unwrap_or(f64::NAN)),
        other => return Err(Error::Parse(format!("expected density expression, found {other}"))),
    };
    Ok(PiecewiseField::single(dim, region, move |p| e.eval(p)))
}

impl ScalarMeasure {
    /// Builds a measure on `domain` from its JSON description (the domain
    /// keys themselves are ignored here).
    pub fn from_json(domain: Domain, v: &Value) -> Result<Self> {
        let dim = domain.dim();
        let density = match (v.get("density"), v.get("pieces")) {
            (Some(Value::Array(cells)), None) => cell_array(&domain, cells)?,
            (Some(d), None) => expr_field(dim, domain.rect(), d)?,
            (None, Some(Value::Array(pieces))) => {
                let mut out = Vec::new();
                for p in pieces {
                    let (pd, region) = rect_from_json(p.get("region").ok_or_else(|| Error::Parse("piece needs a region".into()))?)?;
                    if pd != dim {
                        return Err(Error::DimensionMismatch("piece region dimension".into()));
                    }
                    let f = expr_field(dim, region, p.get("density").ok_or_else(|| Error::Parse("piece needs a density".into()))?)?;
                    out.push(Piece {
                        region,
                        f: f.pieces()[0].f.clone(),
                        subdivisions: 1,
                    });
                }
                PiecewiseField::new(dim, out)
            }
            (None, None) => PiecewiseField::empty(dim),
            _ => return Err(Error::Parse("give either \"density\" or \"pieces\"".into())),
        };
        let mut m = ScalarMeasure::zero(domain).with_density(density)?;
        if let Some(atoms) = v.get("atoms") {
            for a in atoms.as_array().ok_or_else(|| Error::Parse("atoms must be a list".into()))? {
                let pair = a.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Parse("atom is [x, w]".into()))?;
                m = m.with_atom(point(&pair[0])?, num(&pair[1])?)?;
            }
        }
        if let Some(segs) = v.get("segments") {
            for s in segs.as_array().ok_or_else(|| Error::Parse("segments must be a list".into()))? {
                let from = point(s.get("from").ok_or_else(|| Error::Parse("segment needs \"from\"".into()))?)?;
                let to = point(s.get("to").ok_or_else(|| Error::Parse("segment needs \"to\"".into()))?)?;
                let c = Carrier::segment(from, to)?;
                let f = expr_field(dim, domain.rect(), s.get("density").unwrap_or(&Value::from(1.0)))?;
                let g = f.pieces()[0].f.clone();
                m = m.with_carrier(c, move |x| g(x))?;
            }
        }
        match v.get("dominates_lebesgue") {
            None | Some(Value::Bool(false)) | Some(Value::Null) => {}
            Some(Value::Bool(true)) => m = m.dominating(super::DEFAULT_LEBESGUE_FLOOR)?,
            Some(e) => m = m.dominating(num(e)?)?,
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::RadonMeasure;

    #[test]
    fn scalar_measure_from_json() {
        let v: Value = serde_json::from_str(
            r#"{"domain": {"interval": [0, 1]}, "resolution": 8,
                "density": "2", "atoms": [[0.5, 1.0]], "dominates_lebesgue": true}"#,
        )
        .unwrap();
        let d = domain_from_json(&v, 16).unwrap();
        assert_eq!(d.resolution(), 8);
        let m = ScalarMeasure::from_json(d, &v).unwrap();
        assert!((m.total_variation(None) - 3.0).abs() < 1e-14);
        assert_eq!(m.lebesgue_floor(), Some(1e-12));
    }

    #[test]
    fn cell_array_density() {
        let v: Value = serde_json::from_str(r#"{"domain": {"rect": [[0,0],[1,1]]}, "density": [[1, 2], [3, 4]]}"#).unwrap();
        let d = domain_from_json(&v, 4).unwrap();
        let m = ScalarMeasure::from_json(d, &v).unwrap();
        assert!((m.mass() - 2.5).abs() < 1e-14);
        assert_eq!(m.density([0.75, 0.25]), 2.0);
        assert_eq!(m.density([0.25, 0.75]), 3.0);
    }

    #[test]
    fn negative_density_rejected() {
        let v: Value = serde_json::from_str(r#"{"domain": {"interval": [0, 1]}, "density": "x - 0.5"}"#).unwrap();
        let d = domain_from_json(&v, 4).unwrap();
        assert!(ScalarMeasure::from_json(d, &v).is_err());
    }
}
