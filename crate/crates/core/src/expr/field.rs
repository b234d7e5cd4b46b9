use std::sync::Arc;

use nalgebra::DMatrix;

use super::{parse, Dual1, Dual2, EvalError, Expression, ParseError, Scalar, Var};

/// Exact first partials of a field at a point.
///
/// `dq[i]` is the derivative along `q(i+1)` (written ∂ᵢ elsewhere) and
/// `dp[i]` along `p(i+1)` (written ∂ⁱ).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub value: f64,
    pub dt: f64,
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
    /// Zero for points of V*Q.
    pub dp0: f64,
}

/// Slot of `v` in the flat coordinate layout `[t, q1..qm, p1..pm, p0]`.
pub(crate) fn slot(m: usize, v: Var) -> Option<usize> {
    match v {
        Var::Time => Some(0),
        Var::Pos(i) if i < m => Some(1 + i),
        Var::Mom(i) if i < m => Some(1 + m + i),
        Var::TimeMom => Some(2 * m + 1),
        _ => None,
    }
}

/// A named smooth function on V*Q or T*Q backed by an expression.
#[derive(Debug, Clone)]
pub struct ScalarField {
    name: String,
    m: usize,
    expr: Arc<Expression>,
}

impl ScalarField {
    pub fn parse(name: &str, source: &str, m: usize, allow_p0: bool) -> Result<Self, ParseError> {
        Ok(Self::new(name, parse(source, m, allow_p0)?, m))
    }

    pub fn new(name: &str, expr: Expression, m: usize) -> Self {
        ScalarField {
            name: name.to_string(),
            m,
            expr: Arc::new(expr),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.m
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    pub fn uses_p0(&self) -> bool {
        self.expr.depends_on(Var::TimeMom)
    }

    pub fn is_time_dependent(&self) -> bool {
        self.expr.depends_on(Var::Time)
    }

    fn lookup<'a, S: Scalar>(&self, seeds: &'a [S]) -> impl Fn(Var) -> Option<S> + 'a {
        let m = self.m;
        move |v| slot(m, v).and_then(|i| seeds.get(i).cloned())
    }

    /// Value at flat coordinates `[t, q, p]` or `[t, q, p, p0]`.
    pub fn value(&self, coords: &[f64]) -> Result<f64, EvalError> {
        self.expr.eval_with::<f64>(&self.lookup(coords))
    }

    /// Gradient over the flat coordinates.
    pub fn dual1(&self, coords: &[f64]) -> Result<Dual1, EvalError> {
        let n = coords.len();
        let seeds: Vec<Dual1> = coords
            .iter()
            .enumerate()
            .map(|(i, &x)| Dual1::variable(x, i, n))
            .collect();
        let mut d = self.expr.eval_with(&self.lookup(&seeds))?;
        d.grad.resize(n, 0.0);
        Ok(d)
    }

    /// Value, gradient and Hessian over the flat coordinates.
    pub fn dual2(&self, coords: &[f64]) -> Result<Dual2, EvalError> {
        let n = coords.len();
        let seeds: Vec<Dual2> = coords
            .iter()
            .enumerate()
            .map(|(i, &x)| Dual2::variable(x, i, n))
            .collect();
        let d = self.expr.eval_with(&self.lookup(&seeds))?;
        if d.dim() == n {
            return Ok(d);
        }
        // constant expression: no derivative storage
        Ok(Dual2 {
            value: d.value,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        })
    }

    pub fn gradient(&self, coords: &[f64]) -> Result<Gradient, EvalError> {
        let m = self.m;
        let d = self.dual1(coords)?;
        Ok(Gradient {
            value: d.value,
            dt: d.d(0),
            dq: (0..m).map(|i| d.d(1 + i)).collect(),
            dp: (0..m).map(|i| d.d(1 + m + i)).collect(),
            dp0: d.d(2 * m + 1),
        })
    }

    /// Symmetric Hessian, rows and columns in the flat coordinate order.
    pub fn hessian(&self, coords: &[f64]) -> Result<DMatrix<f64>, EvalError> {
        let d = self.dual2(coords)?;
        let n = coords.len();
        Ok(DMatrix::from_row_slice(n, n, &d.hess))
    }
}
