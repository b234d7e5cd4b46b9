use super::{Expression, Func, Node, Var};

/// Which variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseContext {
    /// Degrees of freedom: `q1..qm`, `p1..pm` are valid.
    pub m: usize,
    pub allow_p0: bool,
    pub allow_time: bool,
    /// Number of chart pairs `P1.., Q1..`.
    pub pairs: usize,
    /// Number of actions `I1..`.
    pub actions: usize,
    /// Number of angles `y1..`.
    pub angles: usize,
}

impl ParseContext {
    /// Functions on V*Q: `t, q, p`.
    pub fn vertical(m: usize) -> Self {
        ParseContext {
            m,
            allow_p0: false,
            allow_time: true,
            pairs: 0,
            actions: 0,
            angles: 0,
        }
    }

    /// Functions on T*Q: `t, q, p, p0`.
    pub fn extended(m: usize) -> Self {
        ParseContext {
            allow_p0: true,
            ..Self::vertical(m)
        }
    }

    /// Functions of chart coordinates `(t, P, Q, I, y)`.
    pub fn chart(pairs: usize, k: usize) -> Self {
        ParseContext {
            m: 0,
            allow_p0: false,
            allow_time: true,
            pairs,
            actions: k,
            angles: k,
        }
    }

    /// Functions of the actions `I1..Ik` only.
    pub fn actions(k: usize) -> Self {
        ParseContext {
            m: 0,
            allow_p0: false,
            allow_time: false,
            pairs: 0,
            actions: k,
            angles: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("`{name}` at offset {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("variable `{name}` at offset {offset} is out of range (at most {limit} allowed)")]
    Index {
        name: String,
        offset: usize,
        limit: usize,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`p0` at offset {offset} is only valid on the extended phase space")]
    P0NotAllowed { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::Arity { offset, .. }
            | ParseError::Index { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::P0NotAllowed { offset } => *offset,
        }
    }
}

/// Parses a function of `t, q1..qm, p1..pm` (plus `p0` when `allow_p0`).
pub fn parse(source: &str, m: usize, allow_p0: bool) -> Result<Expression, ParseError> {
    let ctx = if allow_p0 {
        ParseContext::extended(m)
    } else {
        ParseContext::vertical(m)
    };
    parse_with(source, &ctx)
}

pub fn parse_with(source: &str, ctx: &ParseContext) -> Result<Expression, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        ctx,
    };
    if parser.peek().kind == Tok::End {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let root = parser.expr(0)?;
    let tok = parser.peek();
    if tok.kind != Tok::End {
        return Err(ParseError::Syntax {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(Expression::from_node(root))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("operator `{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: Tok::Num(value),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let kind = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    out.push(Token {
        kind: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
}

const UNARY_BP: u8 = 5;

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != Tok::End {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, kind: Tok) -> Result<Token, ParseError> {
        let tok = self.next();
        if tok.kind == kind {
            Ok(tok)
        } else {
            Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("expected {}, found {}", kind.describe(), tok.kind.describe()),
            })
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Node, ParseError> {
        let mut lhs = self.operand()?;
        loop {
            let (op, l_bp, r_bp) = match self.peek().kind {
                Tok::Op(c @ ('+' | '-')) => (c, 1, 2),
                Tok::Op(c @ ('*' | '/')) => (c, 3, 4),
                Tok::Op('^') => ('^', 8, 7),
                Tok::RParen | Tok::Comma | Tok::End => break,
                ref other => {
                    return Err(ParseError::Syntax {
                        offset: self.peek().offset,
                        message: format!("unexpected {}", other.describe()),
                    })
                }
            };
            if l_bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(r_bp)?;
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            lhs = match op {
                '+' => Node::Add(a, b),
                '-' => Node::Sub(a, b),
                '*' => Node::Mul(a, b),
                '/' => Node::Div(a, b),
                _ => match integer_exponent(&b) {
                    Some(n) => Node::Powi(a, n),
                    None => Node::Pow(a, b),
                },
            };
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<Node, ParseError> {
        let tok = self.next();
        match tok.kind {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('-') => Ok(Node::Neg(Box::new(self.expr(UNARY_BP)?))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, tok.offset),
            other => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("expected operand, found {}", other.describe()),
            }),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        let is_func = name == "atan2" || Func::from_name(&name).is_some();
        if is_func {
            if self.peek().kind != Tok::LParen {
                return Err(ParseError::Syntax {
                    offset: self.peek().offset,
                    message: format!("expected `(` after function `{name}`"),
                });
            }
            self.next();
            let mut args = vec![self.expr(0)?];
            while self.peek().kind == Tok::Comma {
                self.next();
                args.push(self.expr(0)?);
            }
            self.expect(Tok::RParen)?;
            let expected = if name == "atan2" { 2 } else { 1 };
            if args.len() != expected {
                return Err(ParseError::Arity {
                    name,
                    offset,
                    expected,
                    found: args.len(),
                });
            }
            let mut args = args.into_iter().map(Box::new);
            let first = args.next().expect("arity checked");
            return Ok(match Func::from_name(&name) {
                Some(f) => Node::Call(f, first),
                None => Node::Atan2(first, args.next().expect("arity checked")),
            });
        }
        self.resolve_var(&name, offset).map(Node::Var)
    }

    fn resolve_var(&self, name: &str, offset: usize) -> Result<Var, ParseError> {
        let ctx = self.ctx;
        if name == "t" && ctx.allow_time {
            return Ok(Var::Time);
        }
        if name == "p0" {
            return if ctx.allow_p0 {
                Ok(Var::TimeMom)
            } else {
                Err(ParseError::P0NotAllowed { offset })
            };
        }
        let unknown = || ParseError::UnknownIdentifier {
            name: name.to_string(),
            offset,
        };
        let split = name
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(unknown)?;
        let (family, digits) = name.split_at(split);
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let (ctor, limit): (fn(usize) -> Var, usize) = match family {
            "q" => (Var::Pos, ctx.m),
            "p" => (Var::Mom, ctx.m),
            "P" => (Var::PairMom, ctx.pairs),
            "Q" => (Var::PairPos, ctx.pairs),
            "I" => (Var::Action, ctx.actions),
            "y" => (Var::Angle, ctx.angles),
            _ => return Err(unknown()),
        };
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 || index > limit {
            return Err(ParseError::Index {
                name: name.to_string(),
                offset,
                limit,
            });
        }
        Ok(ctor(index - 1))
    }
}

fn integer_exponent(node: &Node) -> Option<i32> {
    let as_int = |v: f64| {
        (v.fract() == 0.0 && v.abs() <= i32::MAX as f64).then_some(v as i32)
    };
    match node {
        Node::Num(v) => as_int(*v),
        Node::Neg(inner) => match **inner {
            Node::Num(v) => as_int(v).map(|n| -n),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_energy_has_seven_nodes() {
        let e = parse("(p1^2+q1^2)/2", 1, false).unwrap();
        assert_eq!(e.node_count(), 7);
    }

    #[test]
    fn incomplete_input_reports_end_offset() {
        let err = parse("q1 +", 1, false).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn free_particle_integral_hand_tokenized() {
        let e = parse("q1 - t*p1", 2, false).unwrap();
        let expected = Node::Sub(
            Box::new(Node::Var(Var::Pos(0))),
            Box::new(Node::Mul(
                Box::new(Node::Var(Var::Time)),
                Box::new(Node::Var(Var::Mom(0))),
            )),
        );
        assert_eq!(e.root(), &expected);
    }

    #[test]
    fn index_out_of_range() {
        let err = parse("q5 + p1", 2, false).unwrap_err();
        assert!(matches!(err, ParseError::Index { offset: 0, limit: 2, .. }));
        assert!(matches!(
            parse("q0", 2, false).unwrap_err(),
            ParseError::Index { .. }
        ));
    }

    #[test]
    fn p0_requires_extended_space() {
        assert!(matches!(
            parse("p0 + p1", 1, false).unwrap_err(),
            ParseError::P0NotAllowed { offset: 0 }
        ));
        assert!(parse("p0 + p1", 1, true).is_ok());
    }

    #[test]
    fn arity_and_unknown_names() {
        assert!(matches!(
            parse("atan2(q1)", 1, false).unwrap_err(),
            ParseError::Arity { expected: 2, found: 1, .. }
        ));
        assert!(matches!(
            parse("sin(q1, p1)", 1, false).unwrap_err(),
            ParseError::Arity { expected: 1, found: 2, .. }
        ));
        assert!(matches!(
            parse("x + 1", 1, false).unwrap_err(),
            ParseError::UnknownIdentifier { .. }
        ));
        assert!(matches!(
            parse("foo(q1)", 1, false).unwrap_err(),
            ParseError::UnknownIdentifier { .. }
        ));
        assert!(matches!(
            parse("", 1, false).unwrap_err(),
            ParseError::Syntax { offset: 0, .. }
        ));
    }

    #[test]
    fn precedence() {
        let neg_pow = parse("-q1^2", 1, false).unwrap();
        assert!(matches!(neg_pow.root(), Node::Neg(inner) if matches!(**inner, Node::Powi(_, 2))));

        let right_assoc = parse("2^3^q1", 1, false).unwrap();
        match right_assoc.root() {
            Node::Pow(base, exp) => {
                assert_eq!(**base, Node::Num(2.0));
                assert!(matches!(**exp, Node::Pow(..)));
            }
            other => panic!("unexpected {other:?}"),
        }

        let mixed = parse("1 + 2*q1 - p1/3", 1, false).unwrap();
        assert!(matches!(mixed.root(), Node::Sub(..)));

        let neg_exp = parse("q1^-2", 1, false).unwrap();
        assert!(matches!(neg_exp.root(), Node::Powi(_, -2)));
    }

    #[test]
    fn chart_and_action_contexts() {
        let ctx = ParseContext::chart(1, 1);
        assert!(parse_with("sqrt(2*(I1-P1))*sin(y1+t) + Q1", &ctx).is_ok());
        assert!(parse_with("q1", &ctx).is_err());
        let actions = ParseContext::actions(2);
        assert!(parse_with("I1^2/2 + I2", &actions).is_ok());
        assert!(parse_with("I1*t", &actions).is_err());
        assert!(parse_with("y1", &actions).is_err());
    }

    #[test]
    fn scientific_literals() {
        let e = parse("1.5e-3*q1 + .25", 1, false).unwrap();
        match e.root() {
            Node::Add(a, b) => {
                assert!(matches!(**a, Node::Mul(ref x, _) if **x == Node::Num(1.5e-3)));
                assert_eq!(**b, Node::Num(0.25));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
