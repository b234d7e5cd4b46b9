//! Expression language for phase-space functions.
//!
//! Expressions are parsed once into an immutable tree and evaluated over any
//! [`Scalar`]: plain `f64`, first-order duals ([`Dual1`]) for gradients, or
//! second-order duals ([`Dual2`]) for Hessians. Derivatives are exact up to
//! round-off; nothing here uses finite differences.
//!
//! # Grammar
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Precedence from tightest: `^`, unary `-`, `* /`, `+ -`. Thus `-q1^2` is
//! `-(q1^2)` and `2^3^2` is `2^(3^2)`. Whitespace is ignored.
//!
//! Variables: `t`, `q1..qm`, `p1..pm` and, on the extended phase space only,
//! `p0`. Chart expressions may also use `P1.., Q1..` (conjugate pairs),
//! `I1..` (actions) and `y1..` (angles). Functions: `sin cos tan exp log sqrt
//! abs` (one argument) and `atan2(y, x)`.
//!
//! An exponent that is an integer literal (optionally negated) is stored as
//! an integer power, so `p1^2` is a single power node over `p1`.

mod deriv;
mod eval;
mod field;
mod parse;
mod print;
mod scalar;

pub use eval::EvalError;
pub use field::{Gradient, ScalarField};
pub use parse::{parse, parse_with, ParseContext, ParseError};
pub use scalar::{Dual1, Dual2, Scalar};

use std::collections::BTreeSet;

/// A variable of the expression language. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// `t`
    Time,
    /// `q<i+1>`
    Pos(usize),
    /// `p<i+1>`
    Mom(usize),
    /// `p0`, the momentum conjugate to time on T*Q.
    TimeMom,
    /// `P<A+1>`, momentum of a chart pair.
    PairMom(usize),
    /// `Q<A+1>`, position of a chart pair.
    PairPos(usize),
    /// `I<l+1>`
    Action(usize),
    /// `y<l+1>`
    Angle(usize),
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Var::Time => write!(f, "t"),
            Var::Pos(i) => write!(f, "q{}", i + 1),
            Var::Mom(i) => write!(f, "p{}", i + 1),
            Var::TimeMom => write!(f, "p0"),
            Var::PairMom(i) => write!(f, "P{}", i + 1),
            Var::PairPos(i) => write!(f, "Q{}", i + 1),
            Var::Action(i) => write!(f, "I{}", i + 1),
            Var::Angle(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    /// Real exponent.
    Pow(Box<Node>, Box<Node>),
    /// Integer exponent.
    Powi(Box<Node>, i32),
    Call(Func, Box<Node>),
    Atan2(Box<Node>, Box<Node>),
}

impl Node {
    fn children(&self) -> Vec<&Node> {
        match self {
            Node::Num(_) | Node::Var(_) => vec![],
            Node::Neg(a) | Node::Powi(a, _) | Node::Call(_, a) => vec![a],
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b)
            | Node::Atan2(a, b) => vec![a, b],
        }
    }
}

/// A parsed, immutable expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    pub(crate) fn from_node(root: Node) -> Self {
        Expression { root }
    }

    pub fn constant(v: f64) -> Self {
        Expression { root: Node::Num(v) }
    }

    pub fn var(v: Var) -> Self {
        Expression { root: Node::Var(v) }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Number of tree nodes. Integer powers count as one node.
    pub fn node_count(&self) -> usize {
        fn count(n: &Node) -> usize {
            1 + n.children().into_iter().map(count).sum::<usize>()
        }
        count(&self.root)
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        fn walk(n: &Node, out: &mut BTreeSet<Var>) {
            if let Node::Var(v) = n {
                out.insert(*v);
            }
            for c in n.children() {
                walk(c, out);
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.variables().contains(&v)
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    pub fn add(&self, other: &Expression) -> Expression {
        Expression::from_node(Node::Add(
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        ))
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        Expression::from_node(Node::Sub(
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        ))
    }

    pub fn mul(&self, other: &Expression) -> Expression {
        Expression::from_node(Node::Mul(
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        ))
    }

    pub fn div(&self, other: &Expression) -> Expression {
        Expression::from_node(Node::Div(
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        ))
    }

    pub fn neg(&self) -> Expression {
        Expression::from_node(Node::Neg(Box::new(self.root.clone())))
    }
}
