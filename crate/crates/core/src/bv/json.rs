//! Declarative JSON description of BV functions.
//!
//! ```json
//! {"domain": {"interval": [0, 1]}, "resolution": 32, "components": 1,
//!  "pieces": [{"region": {"interval": [0, 0.5]}, "u": "x", "grad": "1"},
//!             {"region": {"interval": [0.5, 1]}, "u": "x + 1", "grad": "1"}],
//!  "jumps": [{"carrier": {"point": 0.5}, "plus": "x + 1", "minus": "x"}],
//!  "trace": "x + step(x - 0.5)"}
//! ```
//!
//! In 2D a jump carrier is `{"from": [x, y], "to": [x, y]}` and may carry a
//! `"normal"`; `plus` is the trace on the side the normal points to.

use std::sync::Arc;

use serde_json::Value;

use crate::bv::BvFunction;
use crate::error::{Error, Result};
use crate::expr::MatExpr;
use crate::measures::json_point;
use crate::measures::{domain_from_json, rect_from_json, Carrier, MatFn};

fn mat_expr(v: Option<&Value>, rows: usize, cols: usize, what: &str) -> Result<MatFn> {
    let v = v.ok_or_else(|| Error::Parse(format!("missing \"{what}\"")))?;
    let e = MatExpr::from_json(v, rows, cols)?;
    Ok(Arc::new(move |x| e.eval(x)))
}

impl BvFunction {
    pub fn from_json(v: &Value, default_resolution: usize) -> Result<BvFunction> {
        let domain = domain_from_json(v, default_resolution)?;
        let dim = domain.dim();
        let n = v.get("components").and_then(Value::as_u64).unwrap_or(1) as usize;
        let pieces = v
            .get("pieces")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("\"pieces\" must be a list".into()))?;
        let mut b = BvFunction::builder(domain, n);
        for p in pieces {
            let region = match p.get("region") {
                Some(r) => {
                    let (d, r) = rect_from_json(r)?;
                    if d != dim {
                        return Err(Error::DimensionMismatch("piece region dimension".into()));
                    }
                    r
                }
                None => domain.rect(),
            };
            let u = mat_expr(p.get("u"), n, 1, "u")?;
            let g = mat_expr(p.get("grad"), n, dim, "grad")?;
            b = b.piece(region, move |x| u(x), move |x| g(x));
        }
        if let Some(jumps) = v.get("jumps") {
            for j in jumps.as_array().ok_or_else(|| Error::Parse("\"jumps\" must be a list".into()))? {
                let c = j.get("carrier").ok_or_else(|| Error::Parse("jump needs a carrier".into()))?;
                let carrier = if let Some(p) = c.get("point") {
                    Carrier::point(json_point(p)?)?
                } else {
                    let from = json_point(c.get("from").ok_or_else(|| Error::Parse("carrier needs \"from\"".into()))?)?;
                    let to = json_point(c.get("to").ok_or_else(|| Error::Parse("carrier needs \"to\"".into()))?)?;
                    Carrier::segment(from, to)?
                };
                let plus = mat_expr(j.get("plus"), n, 1, "plus")?;
                let minus = mat_expr(j.get("minus"), n, 1, "minus")?;
                b = match j.get("normal") {
                    Some(nv) => b.jump_with_normal(carrier, plus, minus, json_point(nv)?),
                    None => b.jump(carrier, plus, minus),
                };
            }
        }
        if let Some(t) = v.get("trace") {
            b = b.trace(mat_expr(Some(t), n, 1, "trace")?);
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_function_from_json() {
        let v: Value = serde_json::from_str(
            r#"{"domain": {"interval": [0, 1]}, "resolution": 8,
                "pieces": [{"region": {"interval": [0, 0.5]}, "u": "x", "grad": "1"},
                           {"region": {"interval": [0.5, 1]}, "u": "x + 1", "grad": "1"}],
                "jumps": [{"carrier": {"point": 0.5}, "plus": "x + 1", "minus": "x"}],
                "trace": "x + step(x - 0.5)"}"#,
        )
        .unwrap();
        let u = BvFunction::from_json(&v, 16).unwrap();
        assert!((u.total_variation() - 2.0).abs() < 1e-14);
        assert_eq!(u.boundary_trace([1.0, 0.0]).get(0, 0), 2.0);
    }

    #[test]
    fn bad_trace_is_rejected() {
        let v: Value = serde_json::from_str(
            r#"{"domain": {"interval": [0, 1]}, "pieces": [{"u": "x", "grad": "1"}], "trace": "x + 1"}"#,
        )
        .unwrap();
        assert!(BvFunction::from_json(&v, 8).is_err());
    }

    #[test]
    fn two_dimensional_jump_with_flipped_normal() {
        let v: Value = serde_json::from_str(
            r#"{"domain": {"rect": [[0, 0], [1, 1]]},
                "pieces": [{"region": {"rect": [[0, 0], [1, 0.5]]}, "u": "0", "grad": [["0", "0"]]},
                           {"region": {"rect": [[0, 0.5], [1, 1]]}, "u": "1", "grad": [["0", "0"]]}],
                "jumps": [{"carrier": {"from": [0, 0.5], "to": [1, 0.5]}, "plus": "1", "minus": "0", "normal": [0, 1]}]}"#,
        )
        .unwrap();
        let u = BvFunction::from_json(&v, 8).unwrap();
        let r = u.verify_integration_by_parts(|x| x[1] * x[1], |x| [0.0, 2.0 * x[1]], 0, 1);
        assert!(r < 1e-14, "{r}");
    }
}
