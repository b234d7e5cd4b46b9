//! Canonical text form. Parentheses are emitted only where the grammar needs
//! them, so printing a parsed tree and parsing it again yields the same tree.

use std::fmt::{self, Display, Formatter, Write};

use super::{Expression, Node};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) | Node::Div(..) => PRODUCT,
        Node::Neg(_) => UNARY,
        Node::Num(v) if v.is_sign_negative() => UNARY,
        Node::Pow(..) | Node::Powi(..) => POWER,
        Node::Num(_) | Node::Var(_) | Node::Call(..) | Node::Atan2(..) => ATOM,
    }
}

fn write_at(out: &mut impl Write, node: &Node, min: u8) -> fmt::Result {
    if level(node) < min {
        out.write_char('(')?;
        write_node(out, node)?;
        out.write_char(')')
    } else {
        write_node(out, node)
    }
}

fn write_node(out: &mut impl Write, node: &Node) -> fmt::Result {
    match node {
        Node::Num(v) => write!(out, "{v}"),
        Node::Var(v) => write!(out, "{v}"),
        Node::Neg(a) => {
            out.write_char('-')?;
            write_at(out, a, UNARY)
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_at(out, a, SUM)?;
            out.write_str(if matches!(node, Node::Add(..)) { " + " } else { " - " })?;
            write_at(out, b, PRODUCT)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_at(out, a, PRODUCT)?;
            out.write_char(if matches!(node, Node::Mul(..)) { '*' } else { '/' })?;
            write_at(out, b, UNARY)
        }
        Node::Pow(a, b) => {
            write_at(out, a, ATOM)?;
            out.write_char('^')?;
            write_at(out, b, UNARY)
        }
        Node::Powi(a, n) => {
            write_at(out, a, ATOM)?;
            write!(out, "^{n}")
        }
        Node::Call(f, a) => {
            write!(out, "{}(", f.name())?;
            write_node(out, a)?;
            out.write_char(')')
        }
        Node::Atan2(a, b) => {
            out.write_str("atan2(")?;
            write_node(out, a)?;
            out.write_str(", ")?;
            write_node(out, b)?;
            out.write_char(')')
        }
    }
}

impl Display for Expression {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_node(f, self.root())
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, parse_with, ParseContext};

    #[test]
    fn corpus_round_trips() {
        let corpus = [
            "(p1^2+q1^2)/2",
            "q1 - t*p1",
            "-q1^2",
            "(-q1)^2",
            "2^3^q1",
            "(2^3)^q1",
            "a",
            "q1^-2",
            "q1*-p1",
            "q1 - (p1 - q1)",
            "q1/(p1*q1)",
            "-(q1 + p1)*3",
            "--q1",
            "atan2(q1, p1) + sin(t)*q2",
            "(p1^2+p2^2)/2 - (q1^2+q2^2)^-0.5",
            "p2*(q1*p2 - q2*p1) - q1/sqrt(q1^2+q2^2)",
            "exp(log(abs(q1) + 1)) - tan(p2)/cos(t)",
            "1e-10*q1 + 0.1",
            "(q1 + 1)^(p1 - 0.5)",
        ];
        for src in corpus {
            let Ok(first) = parse(src, 2, false) else {
                assert_eq!(src, "a");
                continue;
            };
            let printed = first.to_string();
            let second = parse(&printed, 2, false)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(first, second, "{src} -> {printed}");
        }
    }

    #[test]
    fn chart_variables_round_trip() {
        let ctx = ParseContext::chart(1, 1);
        let e = parse_with("sqrt(2*P1)*cos(Q1 + y1) - t*I1", &ctx).unwrap();
        assert_eq!(parse_with(&e.to_string(), &ctx).unwrap(), e);
    }
}
