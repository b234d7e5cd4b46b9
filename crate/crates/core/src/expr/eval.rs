use super::{Expression, Func, Node, Scalar, Var};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value produced by {0}")]
    NonFinite(String),
    #[error("no value for variable `{0}`")]
    MissingVariable(Var),
}

impl Expression {
    /// Evaluates with plain reals.
    pub fn evaluate(&self, lookup: impl Fn(Var) -> Option<f64>) -> Result<f64, EvalError> {
        self.eval_with(&lookup)
    }

    /// Evaluates over any [`Scalar`]; `lookup` supplies each variable.
    pub fn eval_with<S: Scalar>(
        &self,
        lookup: &dyn Fn(Var) -> Option<S>,
    ) -> Result<S, EvalError> {
        eval_node(self.root(), lookup)
    }
}

fn finite<S: Scalar>(s: S, what: &str) -> Result<S, EvalError> {
    if s.is_finite() {
        Ok(s)
    } else {
        Err(EvalError::NonFinite(what.to_string()))
    }
}

fn eval_node<S: Scalar>(node: &Node, lookup: &dyn Fn(Var) -> Option<S>) -> Result<S, EvalError> {
    match node {
        Node::Num(v) => Ok(S::constant(*v)),
        Node::Var(v) => {
            let s = lookup(*v).ok_or(EvalError::MissingVariable(*v))?;
            finite(s, "variable lookup")
        }
        Node::Neg(a) => Ok(eval_node(a, lookup)?.neg()),
        Node::Add(a, b) => finite(eval_node(a, lookup)?.add(&eval_node(b, lookup)?), "`+`"),
        Node::Sub(a, b) => finite(eval_node(a, lookup)?.sub(&eval_node(b, lookup)?), "`-`"),
        Node::Mul(a, b) => finite(eval_node(a, lookup)?.mul(&eval_node(b, lookup)?), "`*`"),
        Node::Div(a, b) => {
            let (a, b) = (eval_node(a, lookup)?, eval_node(b, lookup)?);
            let (x, y) = (a.value(), b.value());
            if y == 0.0 {
                return Err(EvalError::Domain("division by zero".into()));
            }
            let inv = 1.0 / y;
            let r = S::chain2(&a, &b, x / y, inv, -x * inv * inv, 0.0, -inv * inv, 2.0 * x * inv * inv * inv);
            finite(r, "`/`")
        }
        Node::Powi(a, n) => {
            let a = eval_node(a, lookup)?;
            finite(powi(&a, *n)?, "`^`")
        }
        Node::Pow(a, b) => {
            let (a, b) = (eval_node(a, lookup)?, eval_node(b, lookup)?);
            finite(pow(&a, &b)?, "`^`")
        }
        Node::Call(f, a) => {
            let a = eval_node(a, lookup)?;
            finite(call(*f, &a)?, f.name())
        }
        Node::Atan2(y, x) => {
            let (y, x) = (eval_node(y, lookup)?, eval_node(x, lookup)?);
            let (yv, xv) = (y.value(), x.value());
            let r2 = xv * xv + yv * yv;
            let r4 = r2 * r2;
            let r = S::chain2(
                &y,
                &x,
                yv.atan2(xv),
                xv / r2,
                -yv / r2,
                -2.0 * xv * yv / r4,
                (yv * yv - xv * xv) / r4,
                2.0 * xv * yv / r4,
            );
            finite(r, "atan2")
        }
    }
}

fn powi<S: Scalar>(a: &S, n: i32) -> Result<S, EvalError> {
    let v = a.value();
    if v == 0.0 && n < 0 {
        return Err(EvalError::Domain("zero raised to a negative power".into()));
    }
    let nf = n as f64;
    let d1 = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
    let d2 = if n == 0 || n == 1 { 0.0 } else { nf * (nf - 1.0) * v.powi(n - 2) };
    Ok(a.chain1(v.powi(n), d1, d2))
}

fn pow<S: Scalar>(a: &S, b: &S) -> Result<S, EvalError> {
    let (v, w) = (a.value(), b.value());
    if b.is_constant() {
        if w.fract() == 0.0 && w.abs() <= i32::MAX as f64 {
            return powi(a, w as i32);
        }
        if v < 0.0 {
            return Err(EvalError::Domain(
                "negative base with non-integer exponent".into(),
            ));
        }
        if v == 0.0 && w < 0.0 {
            return Err(EvalError::Domain("zero raised to a negative power".into()));
        }
        let d1 = w * v.powf(w - 1.0);
        let d2 = w * (w - 1.0) * v.powf(w - 2.0);
        return Ok(a.chain1(v.powf(w), d1, d2));
    }
    if v <= 0.0 {
        return Err(EvalError::Domain(
            "non-positive base with a variable exponent".into(),
        ));
    }
    let f = v.powf(w);
    let ln = v.ln();
    let vm1 = v.powf(w - 1.0);
    Ok(S::chain2(
        a,
        b,
        f,
        w * vm1,
        f * ln,
        w * (w - 1.0) * v.powf(w - 2.0),
        vm1 * (1.0 + w * ln),
        f * ln * ln,
    ))
}

fn call<S: Scalar>(f: Func, a: &S) -> Result<S, EvalError> {
    let v = a.value();
    Ok(match f {
        Func::Sin => a.chain1(v.sin(), v.cos(), -v.sin()),
        Func::Cos => a.chain1(v.cos(), -v.sin(), -v.cos()),
        Func::Tan => {
            if v.cos() == 0.0 {
                return Err(EvalError::Domain("tan at a pole".into()));
            }
            let t = v.tan();
            let sec2 = 1.0 + t * t;
            a.chain1(t, sec2, 2.0 * t * sec2)
        }
        Func::Exp => {
            let e = v.exp();
            a.chain1(e, e, e)
        }
        Func::Log => {
            if v <= 0.0 {
                return Err(EvalError::Domain(format!("log of non-positive value {v}")));
            }
            a.chain1(v.ln(), 1.0 / v, -1.0 / (v * v))
        }
        Func::Sqrt => {
            if v < 0.0 {
                return Err(EvalError::Domain(format!("sqrt of negative value {v}")));
            }
            let s = v.sqrt();
            a.chain1(s, 0.5 / s, -0.25 / (s * v))
        }
        Func::Abs => {
            let sign = if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            };
            a.chain1(v.abs(), sign, 0.0)
        }
    })
}
