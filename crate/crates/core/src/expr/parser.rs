use std::f64::consts::{PI, TAU};

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinOp, Expr, ExprError, Func, Var};

/// Maximum nesting depth accepted by the parser.
pub const MAX_DEPTH: usize = 200;

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, depth: 0 };
    let e = p.expr()?;
    let t = p.peek();
    if t.kind != TokenKind::Eof {
        return Err(p.syntax(t.offset, format!("unexpected '{}' after expression", t.text)));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, offset: usize, message: String) -> ExprError {
        ExprError::Syntax { offset, message }
    }

    fn at_op(&self, ops: &[&str]) -> Option<BinOp> {
        let t = self.peek();
        if t.kind != TokenKind::Operator || !ops.contains(&t.text.as_str()) {
            return None;
        }
        Some(match t.text.as_str() {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            _ => BinOp::Pow,
        })
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let offset = self.peek().offset;
            return Err(self.syntax(offset, "expression nested too deeply".into()));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Some(op) = self.at_op(&["+", "-"]) {
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.at_op(&["*", "/"]) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        self.enter()?;
        let e = if self.at_op(&["-"]).is_some() {
            self.bump();
            Expr::Neg(Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.at_op(&["^"]).is_some() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let t = self.peek();
        if t.kind != TokenKind::RParen {
            return Err(self.syntax(t.offset, format!("expected ')', found {}", describe(t))));
        }
        self.bump();
        Ok(())
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.kind {
            TokenKind::Number => {
                let v: f64 = t
                    .text
                    .parse()
                    .map_err(|_| self.syntax(t.offset, format!("malformed number '{}'", t.text)))?;
                if !v.is_finite() {
                    return Err(self.syntax(t.offset, format!("number '{}' is out of range", t.text)));
                }
                Ok(Expr::Const(v))
            }
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            TokenKind::Identifier => self.identifier(t),
            _ => Err(self.syntax(t.offset, format!("expected an operand, found {}", describe(&t)))),
        }
    }

    fn identifier(&mut self, t: Token) -> Result<Expr, ExprError> {
        if let Some(func) = Func::from_name(&t.text) {
            let next = self.peek();
            if next.kind != TokenKind::LParen {
                return Err(self.syntax(next.offset, format!("expected '(' after '{}'", t.text)));
            }
            self.bump();
            let mut args = vec![self.expr()?];
            while self.peek().kind == TokenKind::Comma {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect_rparen()?;
            if args.len() != func.arity() {
                return Err(self.syntax(
                    t.offset,
                    format!("'{}' takes {} argument, got {}", func.name(), func.arity(), args.len()),
                ));
            }
            return Ok(Expr::Call(func, args));
        }
        let e = match t.text.as_str() {
            "x" => Expr::Var(Var::X),
            "y" => Expr::Var(Var::Y),
            "s" => Expr::Var(Var::S),
            "pi" => Expr::Const(PI),
            "tau" => Expr::Const(TAU),
            _ => return Err(ExprError::UnknownIdentifier { name: t.text, offset: t.offset }),
        };
        Ok(e)
    }
}

fn describe(t: &Token) -> String {
    match t.kind {
        TokenKind::Eof => "end of input".to_string(),
        _ => format!("'{}'", t.text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_sits_at_root_left() {
        let e = parse("0.1*cos(x)*cos(y)").unwrap();
        let Expr::Binary(BinOp::Mul, lhs, rhs) = e else { panic!("root is not a product") };
        assert_eq!(*rhs, Expr::Call(Func::Cos, vec![Expr::Var(Var::Y)]));
        let Expr::Binary(BinOp::Mul, c, _) = *lhs else { panic!() };
        assert_eq!(*c, Expr::Const(0.1));
    }

    #[test]
    fn function_without_parens() {
        let err = parse("sin x").unwrap_err();
        assert_eq!(err.offset(), Some(4));
        assert!(err.to_string().contains("expected '('"));
    }

    #[test]
    fn unknown_identifiers() {
        assert_eq!(parse("2*z").unwrap_err(), ExprError::UnknownIdentifier { name: "z".into(), offset: 2 });
        assert!(matches!(parse("tan(x)").unwrap_err(), ExprError::UnknownIdentifier { offset: 0, .. }));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse("").unwrap_err().offset(), Some(0));
        assert_eq!(parse("(x + 1").unwrap_err().offset(), Some(6));
        assert_eq!(parse("x + * y").unwrap_err().offset(), Some(4));
        assert_eq!(parse("x y").unwrap_err().offset(), Some(2));
        assert_eq!(parse("sin(x, y)").unwrap_err().offset(), Some(0));
        assert!(parse("1e999").is_err());
    }

    #[test]
    fn depth_is_bounded() {
        let deep = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(parse(&deep).is_err());
        let negs = "-".repeat(10_000) + "x";
        assert!(parse(&negs).is_err());
        let ok = "(".repeat(50) + "x" + &")".repeat(50);
        assert!(parse(&ok).is_ok());
    }
}
