//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' integer)?
//! atom   := variable | 'i' | decimal | 'exp(' expr ')' | 'sin(' expr ')' | 'cos(' expr ')' | '(' expr ')'
//! ```
//!
//! Whitespace is ignored. Implicit multiplication is rejected.

use num_complex::Complex64;

use super::expr::Node;
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
    allow_imaginary: bool,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        offset,
        message: message.into(),
    })
}

pub(crate) fn parse_node(text: &str, vars: &[&str], allow_imaginary: bool) -> Result<Node> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        vars,
        allow_imaginary,
    };
    p.skip_ws();
    if p.pos == p.bytes.len() {
        return err(0, "empty expression");
    }
    let node = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return err(p.pos, format!("unexpected '{}'", p.peek_char()));
    }
    Ok(node)
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or(' ')
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if op == b'*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.exponent()?;
            return Ok(Node::Pow(Box::new(base), k));
        }
        if let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'(' || b == b'.' {
                return err(self.pos, "implicit multiplication is not allowed");
            }
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            return err(start, "negative exponent");
        }
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return err(start, "expected a non-negative integer exponent");
        }
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'.' | b'e' | b'E') {
            return err(self.pos, "exponent must be an integer");
        }
        self.src[start..self.pos]
            .parse::<u32>()
            .or_else(|_| err(start, "exponent too large"))
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(b) = self.peek() else {
            return err(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        if b == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect_close()?;
            return Ok(inner);
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number();
        }
        if b.is_ascii_alphabetic() {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let ident = &self.src[start..self.pos];
            if let Some(k) = self.vars.iter().position(|v| *v == ident) {
                return Ok(Node::Var(k));
            }
            return match ident {
                "i" if self.allow_imaginary => Ok(Node::Const(Complex64::i())),
                "exp" | "sin" | "cos" => {
                    if self.peek() != Some(b'(') {
                        return err(self.pos, format!("expected '(' after {ident}"));
                    }
                    self.pos += 1;
                    let arg = Box::new(self.expr()?);
                    self.expect_close()?;
                    Ok(match ident {
                        "exp" => Node::Exp(arg),
                        "sin" => Node::Sin(arg),
                        _ => Node::Cos(arg),
                    })
                }
                _ => err(start, format!("unknown identifier '{ident}'")),
            };
        }
        err(start, format!("unexpected '{}'", self.peek_char()))
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(b')') => {
                self.pos += 1;
                Ok(())
            }
            _ => err(self.pos, "expected ')'"),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return err(start, "malformed number");
        }
        // Scientific notation only when an exponent actually follows.
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text
            .parse()
            .or_else(|_| err(start, format!("malformed number '{text}'")))?;
        Ok(Node::Const(Complex64::new(v, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_z(s: &str) -> Result<Node> {
        parse_node(s, &["z"], true)
    }

    fn offset_of(r: Result<Node>) -> usize {
        match r {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_operator_reports_end_offset() {
        assert_eq!(offset_of(parse_z("z+")), 2);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(parse_z("z^-1").is_err());
        assert!(parse_z("z^2.5").is_err());
        assert!(parse_z("z^z").is_err());
        assert!(parse_z("(z+1)^3").is_ok());
    }

    #[test]
    fn rejects_implicit_multiplication() {
        assert!(parse_z("2z").is_err());
        assert!(parse_z("2(z)").is_err());
        assert!(parse_z("z exp(z)").is_err());
    }

    #[test]
    fn misc_errors() {
        assert_eq!(offset_of(parse_z("")), 0);
        assert_eq!(offset_of(parse_z("w+1")), 0);
        assert_eq!(offset_of(parse_z("(z+1")), 4);
        assert_eq!(offset_of(parse_z("exp z")), 4);
        assert!(parse_z("z)").is_err());
    }

    #[test]
    fn literals() {
        assert_eq!(
            parse_z("1.5e-3").unwrap(),
            Node::Const(Complex64::new(1.5e-3, 0.0))
        );
        assert_eq!(parse_z(".25").unwrap(), Node::Const(Complex64::new(0.25, 0.0)));
        assert!(parse_z("1e").is_err());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let n = parse_z("-z^2").unwrap();
        assert_eq!(
            n,
            Node::Neg(Box::new(Node::Pow(Box::new(Node::Var(0)), 2)))
        );
        assert!(parse_z("2*-z").is_ok());
    }
}
