//! Tree-level derivative and substitution, used to build transformed charts.
//! Only zero and unit factors are folded; no other rewriting happens.

use super::{Expression, Func, Node, Var};

fn zero() -> Node {
    Node::Num(0.0)
}

fn is_num(n: &Node, v: f64) -> bool {
    matches!(n, Node::Num(x) if *x == v)
}

fn add(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else {
        Node::Add(Box::new(a), Box::new(b))
    }
}

fn sub(a: Node, b: Node) -> Node {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        neg(b)
    } else {
        Node::Sub(Box::new(a), Box::new(b))
    }
}

fn mul(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        zero()
    } else if is_num(&a, 1.0) {
        b
    } else if is_num(&b, 1.0) {
        a
    } else {
        Node::Mul(Box::new(a), Box::new(b))
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) {
        zero()
    } else {
        Node::Div(Box::new(a), Box::new(b))
    }
}

fn neg(a: Node) -> Node {
    if is_num(&a, 0.0) {
        zero()
    } else {
        Node::Neg(Box::new(a))
    }
}

fn d(node: &Node, v: Var) -> Node {
    match node {
        Node::Num(_) => zero(),
        Node::Var(w) => Node::Num(if *w == v { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(d(a, v)),
        Node::Add(a, b) => add(d(a, v), d(b, v)),
        Node::Sub(a, b) => sub(d(a, v), d(b, v)),
        Node::Mul(a, b) => add(mul(d(a, v), (**b).clone()), mul((**a).clone(), d(b, v))),
        Node::Div(a, b) => {
            let (da, db) = (d(a, v), d(b, v));
            let num = sub(mul(da, (**b).clone()), mul((**a).clone(), db));
            div(num, Node::Powi(b.clone(), 2))
        }
        Node::Powi(a, n) => {
            if *n == 0 {
                return zero();
            }
            let outer = if *n == 1 {
                Node::Num(1.0)
            } else {
                mul(Node::Num(*n as f64), Node::Powi(a.clone(), n - 1))
            };
            mul(outer, d(a, v))
        }
        Node::Pow(a, b) => {
            let (da, db) = (d(a, v), d(b, v));
            // a^b * (b' ln a + b a'/a)
            let log_term = mul(db, Node::Call(Func::Log, a.clone()));
            let base_term = div(mul((**b).clone(), da), (**a).clone());
            mul(node.clone(), add(log_term, base_term))
        }
        Node::Call(f, a) => {
            let da = d(a, v);
            if is_num(&da, 0.0) {
                return zero();
            }
            let outer = match f {
                Func::Sin => Node::Call(Func::Cos, a.clone()),
                Func::Cos => neg(Node::Call(Func::Sin, a.clone())),
                Func::Tan => div(Node::Num(1.0), Node::Powi(Box::new(Node::Call(Func::Cos, a.clone())), 2)),
                Func::Exp => node.clone(),
                Func::Log => div(Node::Num(1.0), (**a).clone()),
                Func::Sqrt => div(Node::Num(0.5), node.clone()),
                Func::Abs => div((**a).clone(), node.clone()),
            };
            mul(outer, da)
        }
        Node::Atan2(y, x) => {
            let (dy, dx) = (d(y, v), d(x, v));
            let num = sub(mul((**x).clone(), dy), mul((**y).clone(), dx));
            let r2 = Node::Add(
                Box::new(Node::Powi(x.clone(), 2)),
                Box::new(Node::Powi(y.clone(), 2)),
            );
            div(num, r2)
        }
    }
}

fn subst(node: &Node, map: &dyn Fn(Var) -> Option<Expression>) -> Node {
    let b = |n: &Node| Box::new(subst(n, map));
    match node {
        Node::Num(_) => node.clone(),
        Node::Var(v) => map(*v).map_or_else(|| node.clone(), |e| e.root().clone()),
        Node::Neg(a) => Node::Neg(b(a)),
        Node::Add(x, y) => Node::Add(b(x), b(y)),
        Node::Sub(x, y) => Node::Sub(b(x), b(y)),
        Node::Mul(x, y) => Node::Mul(b(x), b(y)),
        Node::Div(x, y) => Node::Div(b(x), b(y)),
        Node::Pow(x, y) => Node::Pow(b(x), b(y)),
        Node::Powi(x, n) => Node::Powi(b(x), *n),
        Node::Call(f, x) => Node::Call(*f, b(x)),
        Node::Atan2(x, y) => Node::Atan2(b(x), b(y)),
    }
}

impl Expression {
    /// Partial derivative with respect to `v`, as a new tree.
    pub fn derivative(&self, v: Var) -> Expression {
        Expression::from_node(d(self.root(), v))
    }

    /// Replaces every variable for which `map` returns an expression.
    pub fn substitute(&self, map: &dyn Fn(Var) -> Option<Expression>) -> Expression {
        Expression::from_node(subst(self.root(), map))
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, parse_with, Dual1, ParseContext, Var};

    fn grad_at(src: &str, point: [f64; 3]) -> (Vec<f64>, Vec<f64>) {
        // variables t, q1, p1
        let e = parse(src, 1, false).unwrap();
        let vars = [Var::Time, Var::Pos(0), Var::Mom(0)];
        let lookup = |v: Var| vars.iter().position(|w| *w == v).map(|i| Dual1::variable(point[i], i, 3));
        let dual = e.eval_with::<Dual1>(&lookup).unwrap();
        let tree: Vec<f64> = vars
            .iter()
            .map(|v| {
                e.derivative(*v)
                    .evaluate(|w| vars.iter().position(|x| *x == w).map(|i| point[i]))
                    .unwrap()
            })
            .collect();
        (dual.grad, tree)
    }

    #[test]
    fn tree_derivative_matches_duals() {
        let cases = [
            "q1^3*p1 - t*q1",
            "sin(q1*p1) + cos(t)",
            "exp(q1)/(1 + p1^2)",
            "sqrt(q1^2 + p1^2 + 1)",
            "atan2(q1, p1) - log(p1^2 + 2)",
            "(q1^2 + 1)^(p1/3)",
            "tan(q1/4)*abs(p1)",
            "(q1^2+1)^-1.5",
        ];
        for src in cases {
            let (dual, tree) = grad_at(src, [0.4, 0.7, -1.3]);
            for (a, b) in dual.iter().zip(&tree) {
                assert!((a - b).abs() < 1e-12, "{src}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn substitution_composes() {
        let ctx = ParseContext::actions(1);
        let h = parse_with("I1^2/2", &ctx).unwrap();
        let inner = parse("(p1^2+q1^2)/2", 1, false).unwrap();
        let composed = h.substitute(&|v| (v == Var::Action(0)).then(|| inner.clone()));
        let val = composed
            .evaluate(|v| match v {
                Var::Pos(0) => Some(1.0),
                Var::Mom(0) => Some(1.0),
                _ => None,
            })
            .unwrap();
        assert_eq!(val, 0.5);
    }
}
