//! User-defined quality formulas over `p`, `n`, `P`, `N`.

use std::fmt;

use thiserror::Error;

use super::{totalized_div, ContingencyQuad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    /// covered positives
    P,
    /// covered negatives
    N,
    /// all positives
    TotalP,
    /// all negatives
    TotalN,
}

impl Variable {
    fn symbol(self) -> &'static str {
        match self {
            Variable::P => "p",
            Variable::N => "n",
            Variable::TotalP => "P",
            Variable::TotalN => "N",
        }
    }

    fn value(self, q: &ContingencyQuad) -> f64 {
        match self {
            Variable::P => q.p,
            Variable::N => q.n,
            Variable::TotalP => q.total_p,
            Variable::TotalN => q.total_n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureExpr {
    Literal(f64),
    Var(Variable),
    Neg(Box<MeasureExpr>),
    Binary(BinaryOp, Box<MeasureExpr>, Box<MeasureExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected '{0}'")]
    UnexpectedToken(String),
    #[error("expected an operand")]
    MissingOperand,
    #[error("unbalanced parentheses")]
    UnbalancedParen,
    #[error("invalid number '{0}'")]
    BadNumber(String),
}

/// Parse failure at a character offset into the source.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at offset {offset}: {kind}")]
pub struct ExprError {
    pub offset: usize,
    pub kind: ExprErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(Variable),
    Op(BinaryOp),
    LParen,
    RParen,
}

fn tokenize(source: &str) -> Result<(Vec<(usize, Tok)>, usize), ExprError> {
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Tok::Op(BinaryOp::Add),
            '-' | '\u{2212}' => Tok::Op(BinaryOp::Sub),
            '*' | '\u{00D7}' => Tok::Op(BinaryOp::Mul),
            '/' | '\u{00F7}' => Tok::Op(BinaryOp::Div),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| ExprError {
                    offset: start,
                    kind: ExprErrorKind::BadNumber(text.clone()),
                })?;
                toks.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                let var = match ident.as_str() {
                    "p" => Variable::P,
                    "n" => Variable::N,
                    "P" => Variable::TotalP,
                    "N" => Variable::TotalN,
                    _ => {
                        return Err(ExprError {
                            offset: start,
                            kind: ExprErrorKind::UnknownIdentifier(ident),
                        })
                    }
                };
                toks.push((start, Tok::Var(var)));
                continue;
            }
            other => {
                return Err(ExprError {
                    offset: start,
                    kind: ExprErrorKind::UnexpectedChar(other),
                })
            }
        };
        toks.push((start, tok));
        i += 1;
    }
    Ok((toks, chars.len()))
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn expr(&mut self) -> Result<MeasureExpr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ (BinaryOp::Add | BinaryOp::Sub))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = MeasureExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<MeasureExpr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ (BinaryOp::Mul | BinaryOp::Div))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = MeasureExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<MeasureExpr, ExprError> {
        if let Some(Tok::Op(BinaryOp::Sub)) = self.peek() {
            self.pos += 1;
            return Ok(MeasureExpr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<MeasureExpr, ExprError> {
        let offset = self.offset();
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(MeasureExpr::Literal(v))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(MeasureExpr::Var(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(ExprError {
                        offset: self.offset(),
                        kind: ExprErrorKind::UnbalancedParen,
                    }),
                }
            }
            Some(Tok::RParen) => Err(ExprError {
                offset,
                kind: ExprErrorKind::UnbalancedParen,
            }),
            Some(Tok::Op(op)) => Err(ExprError {
                offset,
                kind: ExprErrorKind::UnexpectedToken(op.symbol().to_string()),
            }),
            None => Err(ExprError {
                offset,
                kind: ExprErrorKind::MissingOperand,
            }),
        }
    }
}

/// Parses a formula with the usual precedence (`*`, `/` over `+`, `-`; left
/// associative). Identifiers are case-sensitive: `p` and `P` differ.
pub fn parse_measure_expression(source: &str) -> Result<MeasureExpr, ExprError> {
    let (toks, end) = tokenize(source)?;
    if toks.is_empty() {
        return Err(ExprError {
            offset: 0,
            kind: ExprErrorKind::Empty,
        });
    }
    let mut parser = Parser { toks, pos: 0, end };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        let kind = match tok {
            Tok::RParen => ExprErrorKind::UnbalancedParen,
            other => ExprErrorKind::UnexpectedToken(format!("{other:?}")),
        };
        return Err(ExprError {
            offset: parser.offset(),
            kind,
        });
    }
    Ok(expr)
}

impl MeasureExpr {
    pub fn evaluate(&self, q: &ContingencyQuad) -> f64 {
        match self {
            MeasureExpr::Literal(v) => *v,
            MeasureExpr::Var(v) => v.value(q),
            MeasureExpr::Neg(e) => -e.evaluate(q),
            MeasureExpr::Binary(op, a, b) => {
                let (a, b) = (a.evaluate(q), b.evaluate(q));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => totalized_div(a, b),
                }
            }
        }
    }
}

/// Fully parenthesized form; parsing it gives back the same tree.
impl fmt::Display for MeasureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureExpr::Literal(v) => write!(f, "{v}"),
            MeasureExpr::Var(v) => f.write_str(v.symbol()),
            MeasureExpr::Neg(e) => write!(f, "-({e})"),
            MeasureExpr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bin(op: BinaryOp, a: MeasureExpr, b: MeasureExpr) -> MeasureExpr {
        MeasureExpr::Binary(op, Box::new(a), Box::new(b))
    }

    #[test]
    fn user_pruning_equation_tree() {
        let e = parse_measure_expression("2 * p / n").unwrap();
        let expected = bin(
            BinaryOp::Div,
            bin(BinaryOp::Mul, MeasureExpr::Literal(2.0), MeasureExpr::Var(Variable::P)),
            MeasureExpr::Var(Variable::N),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse_measure_expression("p").unwrap(), MeasureExpr::Var(Variable::P));
        assert_eq!(parse_measure_expression(" N ").unwrap(), MeasureExpr::Var(Variable::TotalN));
    }

    #[test]
    fn dangling_operator_offset() {
        let err = parse_measure_expression("2 *").unwrap_err();
        assert_eq!(err.offset, 3);
        assert_eq!(err.kind, ExprErrorKind::MissingOperand);
    }

    #[test]
    fn unknown_identifier_and_parens() {
        let err = parse_measure_expression("p + q").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(matches!(err.kind, ExprErrorKind::UnknownIdentifier(_)));
        assert_eq!(parse_measure_expression("(p + n").unwrap_err().kind, ExprErrorKind::UnbalancedParen);
        let err = parse_measure_expression("p + n)").unwrap_err();
        assert_eq!((err.offset, err.kind), (5, ExprErrorKind::UnbalancedParen));
        assert_eq!(parse_measure_expression("  ").unwrap_err().kind, ExprErrorKind::Empty);
    }

    #[test]
    fn precedence_and_unary() {
        let q = ContingencyQuad::new(3.0, 2.0, 10.0, 10.0).unwrap();
        let eval = |s: &str| parse_measure_expression(s).unwrap().evaluate(&q);
        assert_eq!(eval("p + n * 2"), 7.0);
        assert_eq!(eval("(p + n) * 2"), 10.0);
        assert_eq!(eval("p - n - 1"), 0.0);
        assert_eq!(eval("-p + P"), 7.0);
        assert_eq!(eval("--p"), 3.0);
        assert_eq!(eval("1e1 * p"), 30.0);
        assert_eq!(eval("2 \u{00D7} p \u{00F7} n"), 3.0);
    }

    #[test]
    fn division_by_zero_is_totalized() {
        let q = ContingencyQuad::new(3.0, 0.0, 10.0, 10.0).unwrap();
        assert_eq!(parse_measure_expression("p / n").unwrap().evaluate(&q), f64::MAX);
        assert_eq!(parse_measure_expression("n / n").unwrap().evaluate(&q), 0.0);
    }

    fn arb_expr() -> impl Strategy<Value = MeasureExpr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(MeasureExpr::Literal),
            (0u32..1000).prop_map(|v| MeasureExpr::Literal(v as f64)),
            prop_oneof![
                Just(Variable::P),
                Just(Variable::N),
                Just(Variable::TotalP),
                Just(Variable::TotalN)
            ]
            .prop_map(MeasureExpr::Var),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| MeasureExpr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinaryOp::Add),
                        Just(BinaryOp::Sub),
                        Just(BinaryOp::Mul),
                        Just(BinaryOp::Div)
                    ],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| MeasureExpr::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_unparse_fixed_point(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_measure_expression(&text).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
