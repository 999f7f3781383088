//! Coefficient expressions in the single variable `y`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'y' | func '(' args ')' | '(' expr ')'
//! func    := exp | log | sqrt | sin | cos | min | max
//! ```
//!
//! `-2^2` parses as `-(2^2)` and `2^3^2` as `2^(3^2)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("non-finite result {value}")]
    NonFinite { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    pub fn eval(&self, y: f64) -> Result<f64, EvalError> {
        match self {
            Node::Num(v) => Ok(*v),
            Node::Var => Ok(y),
            Node::Neg(inner) => Ok(-inner.eval(y)?),
            Node::Bin(op, lhs, rhs) => {
                let l = lhs.eval(y)?;
                let r = rhs.eval(y)?;
                let v = match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        l / r
                    }
                    BinOp::Pow => pow(l, r)?,
                };
                finite(v)
            }
            Node::Call(func, args) => {
                let x = args[0].eval(y)?;
                let v = match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain { func: "log", arg: x });
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain { func: "sqrt", arg: x });
                        }
                        x.sqrt()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Min => x.min(args[1].eval(y)?),
                    Func::Max => x.max(args[1].eval(y)?),
                };
                finite(v)
            }
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain { func: "^", arg: base });
    }
    // Integer powers through powi keep y^2 bit-identical to y*y.
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        Ok(base.powi(exponent as i32))
    } else {
        Ok(base.powf(exponent))
    }
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { value: v })
    }
}

/// Fully parenthesised printing, so that re-parsing reproduces the tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var => f.write_str("y"),
            Node::Neg(inner) => write!(f, "(-{inner})"),
            Node::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                    BinOp::Pow => '^',
                };
                write!(f, "({l} {sym} {r})")
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed coefficient expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffExpr {
    source: String,
    ast: Node,
}

impl CoeffExpr {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Node {
        &self.ast
    }

    pub fn eval(&self, y: f64) -> Result<f64, EvalError> {
        self.ast.eval(y)
    }

    pub fn from_ast(ast: Node) -> CoeffExpr {
        CoeffExpr { source: ast.to_string(), ast }
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

impl std::str::FromStr for CoeffExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

pub fn parse_expr(source: &str) -> Result<CoeffExpr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { src: source.as_bytes(), pos: 0 };
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(CoeffExpr { source: source.to_string(), ast })
}

pub fn eval_expr(expr: &CoeffExpr, y: f64) -> Result<f64, EvalError> {
    expr.eval(y)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Node::Num).map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if name == "y" {
            return Ok(Node::Var);
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ParseError::UnknownIdentifier { name: name.to_string(), offset: start });
        };
        self.expect(b'(')?;
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        if args.len() != func.arity() {
            return Err(ParseError::Syntax {
                offset: start,
                message: format!("{} takes {} argument(s), got {}", name, func.arity(), args.len()),
            });
        }
        Ok(Node::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, y: f64) -> Result<f64, EvalError> {
        parse_expr(src).unwrap().eval(y)
    }

    #[test]
    fn spec_examples() {
        assert_eq!(ev("0", 1.7).unwrap(), 0.0);
        assert_eq!(ev("1/y", 2.0).unwrap(), 0.5);
        assert_eq!(ev("y^2", 3.0).unwrap(), 9.0);
        assert_eq!(ev("exp(y)", 0.0).unwrap(), 1.0);
        assert_eq!(ev("y^2 - 2*y + 1", 3.0).unwrap(), 4.0);
        assert_eq!(ev("1/y", 0.0), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2+3*4", 0.0).unwrap(), 14.0);
        assert_eq!(ev("2^3^2", 0.0).unwrap(), 512.0);
        assert_eq!(ev("-2^2", 0.0).unwrap(), -4.0);
        assert_eq!(ev("2^-1", 0.0).unwrap(), 0.5);
        assert_eq!(ev("8/4/2", 0.0).unwrap(), 1.0);
        assert_eq!(ev("8-4-2", 0.0).unwrap(), 2.0);
        assert_eq!(ev("(2+3)*4", 0.0).unwrap(), 20.0);
        assert_eq!(ev("min(y, 2) + max(1, y)", 3.0).unwrap(), 5.0);
        assert_eq!(ev("1.5e2 + .5", 0.0).unwrap(), 150.5);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(ev("log(y)", 0.0), Err(EvalError::Domain { func: "log", .. })));
        assert!(matches!(ev("sqrt(y)", -1.0), Err(EvalError::Domain { func: "sqrt", .. })));
        assert!(matches!(ev("exp(y)", 1000.0), Err(EvalError::NonFinite { .. })));
        assert!(matches!(ev("y^0.5", -4.0), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert_eq!(parse_expr("  "), Err(ParseError::Empty));
        assert_eq!(
            parse_expr("1 + z"),
            Err(ParseError::UnknownIdentifier { name: "z".into(), offset: 4 })
        );
        match parse_expr("1 + * 2") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse_expr("(1 + 2") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("1 2"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr("min(1)"), Err(ParseError::Syntax { .. })));
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Node::Num),
            Just(Node::Var),
            (0u32..100).prop_map(|k| Node::Num(k as f64)),
        ];
        leaf.prop_recursive(5, 40, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|n| Node::Neg(Box::new(n))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Node::Bin(op, Box::new(l), Box::new(r))),
                (
                    prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Sin), Just(Func::Cos)],
                    inner.clone()
                )
                    .prop_map(|(f, a)| Node::Call(f, vec![a])),
                (prop_oneof![Just(Func::Min), Just(Func::Max)], inner.clone(), inner)
                    .prop_map(|(f, a, b)| Node::Call(f, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(ast in arb_node()) {
            let printed = ast.to_string();
            let reparsed = parse_expr(&printed).unwrap();
            prop_assert_eq!(reparsed.ast(), &ast);
        }

        #[test]
        fn evaluation_is_deterministic(ast in arb_node(), y in -10.0f64..10.0) {
            let a = ast.eval(y).map(f64::to_bits);
            let b = ast.eval(y).map(f64::to_bits);
            prop_assert_eq!(a, b);
        }
    }
}
