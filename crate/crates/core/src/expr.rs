//! Closed-form scalar expressions in `x` (and `y` in 2D), used by the JSON
//! descriptions of measures, BV functions and test cases.
//!
//! Parsing and evaluation are delegated to `evalexpr`; this module only binds
//! the coordinate variables and the usual elementary functions, and promotes
//! integer literals so that `1/2` evaluates to `0.5`.

use std::sync::Arc;

use evalexpr::{
    build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value,
};

type EvalexprResultValue = EvalexprResult<Value<DefaultNumericTypes>, DefaultNumericTypes>;

use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};

#[derive(Clone)]
pub struct Expr {
    source: String,
    tree: Arc<Node<DefaultNumericTypes>>,
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

struct Coordinates {
    x: Value<DefaultNumericTypes>,
    y: Value<DefaultNumericTypes>,
    pi: Value<DefaultNumericTypes>,
    e: Value<DefaultNumericTypes>,
}

fn unary(argument: &Value<DefaultNumericTypes>, f: fn(f64) -> f64) -> EvalexprResultValue {
    Ok(Value::Float(f(argument.as_number()?)))
}

fn binary(argument: &Value<DefaultNumericTypes>, f: fn(f64, f64) -> f64) -> EvalexprResultValue {
    let t = argument.as_fixed_len_tuple(2)?;
    Ok(Value::Float(f(t[0].as_number()?, t[1].as_number()?)))
}

fn heaviside(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else {
        0.0
    }
}

impl Context for Coordinates {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        match identifier {
            "x" | "x1" => Some(&self.x),
            "y" | "x2" => Some(&self.y),
            "pi" => Some(&self.pi),
            "e" => Some(&self.e),
            _ => None,
        }
    }

    fn call_function(&self, identifier: &str, argument: &Value<DefaultNumericTypes>) -> EvalexprResultValue {
        match identifier {
            "sin" => unary(argument, f64::sin),
            "cos" => unary(argument, f64::cos),
            "tan" => unary(argument, f64::tan),
            "exp" => unary(argument, f64::exp),
            "ln" | "log" => unary(argument, f64::ln),
            "sqrt" => unary(argument, f64::sqrt),
            "abs" => unary(argument, f64::abs),
            "sign" => unary(argument, f64::signum),
            "step" => unary(argument, heaviside),
            "pow" => binary(argument, f64::powf),
            "min" => binary(argument, f64::min),
            "max" => binary(argument, f64::max),
            _ => Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string())),
        }
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(&mut self, _disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Err(EvalexprError::CustomMessage("builtin functions cannot be toggled".into()))
    }
}

/// Appends `.0` to integer literals so that evaluation never takes the
/// integer-division path.
fn promote_integer_literals(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let prev_ident = i > 0 && (chars[i - 1].is_alphanumeric() || chars[i - 1] == '_' || chars[i - 1] == '.');
        if c.is_ascii_digit() && !prev_ident {
            let start = i;
            let mut is_float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                is_float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    is_float = true;
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.extend(&chars[start..i]);
            if !is_float {
                out.push_str(".0");
            }
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let promoted = promote_integer_literals(source);
        let tree = build_operator_tree::<DefaultNumericTypes>(&promoted)
            .map_err(|e| Error::Expression(format!("'{source}': {e}")))?;
        let expr = Self {
            source: source.to_string(),
            tree: Arc::new(tree),
        };
        // Surface unknown identifiers at parse time rather than mid-quadrature.
        expr.try_eval([0.25, 0.25])?;
        Ok(expr)
    }

    pub fn constant(v: f64) -> Self {
        Self::parse(&format!("{v:e}")).expect("float literal parses")
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn try_eval(&self, p: Point) -> Result<f64> {
        let ctx = Coordinates {
            x: Value::Float(p[0]),
            y: Value::Float(p[1]),
            pi: Value::Float(std::f64::consts::PI),
            e: Value::Float(std::f64::consts::E),
        };
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Expression(format!("'{}': {e}", self.source)))
    }

    /// Evaluates at `p`; evaluation errors (which parse-time validation rules
    /// out for well-formed input) yield NaN.
    pub fn eval(&self, p: Point) -> f64 {
        self.try_eval(p).unwrap_or(f64::NAN)
    }
}

/// A matrix-valued expression: row-major entries.
#[derive(Clone, Debug)]
pub struct MatExpr {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
}

impl MatExpr {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != rows * cols || rows * cols == 0 || rows * cols > crate::linalg::MAX_ENTRIES {
            return Err(Error::DimensionMismatch(format!(
                "{} expressions for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Parses a JSON value: a string (1×1), a flat array (column vector), or
    /// a nested array of strings/numbers.
    pub fn from_json(v: &serde_json::Value, rows: usize, cols: usize) -> Result<Self> {
        fn leaf(v: &serde_json::Value) -> Result<Expr> {
            match v {
                serde_json::Value::String(s) => Expr::parse(s),
                serde_json::Value::Number(n) => Ok(Expr::constant(n.as_f64().unwrap_or(f64::NAN))),
                other => Err(Error::Parse(format!("expected expression, found {other}"))),
            }
        }
        let entries = match v {
            serde_json::Value::Array(items) => {
                let mut out = Vec::new();
                for item in items {
                    match item {
                        serde_json::Value::Array(row) => {
                            for e in row {
                                out.push(leaf(e)?);
                            }
                        }
                        e => out.push(leaf(e)?),
                    }
                }
                out
            }
            other => vec![leaf(other)?],
        };
        Self::new(rows, cols, entries)
    }

    pub fn eval(&self, p: Point) -> Mat {
        let vals: Vec<f64> = self.entries.iter().map(|e| e.eval(p)).collect();
        Mat::from_rows(self.rows, self.cols, &vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_division_is_real_division() {
        let e = Expr::parse("1/2 + x").unwrap();
        assert_eq!(e.eval([1.0, 0.0]), 1.5);
    }

    #[test]
    fn functions_and_two_variables() {
        let e = Expr::parse("sqrt(1 + x*x) * y + max(x, 2) + abs(-3)").unwrap();
        let v = e.eval([0.0, 2.0]);
        assert!((v - (2.0 + 2.0 + 3.0)).abs() < 1e-15);
        let e = Expr::parse("x1 + 2*x2 + step(x - 0.5)").unwrap();
        assert_eq!(e.eval([1.0, 1.0]), 4.0);
    }

    #[test]
    fn scientific_literals_survive_promotion() {
        assert_eq!(promote_integer_literals("1e3 + 2 + 1.5 + x2"), "1e3 + 2.0 + 1.5 + x2");
        assert_eq!(Expr::parse("2e-1").unwrap().eval([0.0, 0.0]), 0.2);
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        assert!(Expr::parse("z + 1").is_err());
        assert!(Expr::parse("frobnicate(x)").is_err());
    }

    #[test]
    fn matrix_expressions_from_json() {
        let v: serde_json::Value = serde_json::from_str(r#"[["x", "1"], ["0", "y"]]"#).unwrap();
        let m = MatExpr::from_json(&v, 2, 2).unwrap();
        assert_eq!(m.eval([3.0, 4.0]).as_slice(), &[3.0, 1.0, 0.0, 4.0]);
        let v: serde_json::Value = serde_json::from_str(r#""2*x""#).unwrap();
        assert_eq!(MatExpr::from_json(&v, 1, 1).unwrap().eval([1.5, 0.0]).as_slice(), &[3.0]);
    }
}
