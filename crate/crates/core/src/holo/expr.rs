//! Expression trees over complex constants and a small set of named variables.
//!
//! [`HoloExpr`] is the single-variable (`z`) holomorphic form used for the chain data.
//! [`RealExpr`] shares the same tree and parser but binds the two real coordinates
//! `x` and `y`; it is used for user supplied smooth functions on the domain.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::parse::parse_node;
use super::poly::Polynomial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(usize),
    Const(Complex64),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Exp(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Node {
    pub fn constant(c: Complex64) -> Node {
        Node::Const(c)
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(ZERO)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(ONE)
    }

    /// True when no division or transcendental node appears.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Node::Var(_) | Node::Const(_) => true,
            Node::Neg(a) | Node::Pow(a, _) => a.is_polynomial(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Node::Div(..) | Node::Exp(_) | Node::Sin(_) | Node::Cos(_) => false,
        }
    }

    pub fn uses_imaginary_literal(&self) -> bool {
        match self {
            Node::Var(_) => false,
            Node::Const(c) => c.im != 0.0,
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) => {
                a.uses_imaginary_literal()
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.uses_imaginary_literal() || b.uses_imaginary_literal()
            }
        }
    }

    /// Evaluates the tree. `at` is reported in errors (the evaluation point).
    pub fn eval(&self, vars: &[Complex64], at: Complex64) -> Result<Complex64> {
        Ok(match self {
            Node::Var(k) => vars[*k],
            Node::Const(c) => *c,
            Node::Neg(a) => -a.eval(vars, at)?,
            Node::Add(a, b) => a.eval(vars, at)? + b.eval(vars, at)?,
            Node::Sub(a, b) => a.eval(vars, at)? - b.eval(vars, at)?,
            Node::Mul(a, b) => a.eval(vars, at)? * b.eval(vars, at)?,
            Node::Div(a, b) => {
                let num = a.eval(vars, at)?;
                let den = b.eval(vars, at)?;
                if den == ZERO {
                    return Err(Error::DivisionByZero { z: at });
                }
                num / den
            }
            Node::Pow(a, k) => powu(a.eval(vars, at)?, *k),
            Node::Exp(a) => a.eval(vars, at)?.exp(),
            Node::Sin(a) => a.eval(vars, at)?.sin(),
            Node::Cos(a) => a.eval(vars, at)?.cos(),
        })
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Node {
        match self {
            Node::Var(k) => Node::Const(if *k == var { ONE } else { ZERO }),
            Node::Const(_) => Node::Const(ZERO),
            Node::Neg(a) => neg(a.derivative(var)),
            Node::Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Node::Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Node::Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Node::Div(a, b) => div(
                sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                ),
                pow((**b).clone(), 2),
            ),
            Node::Pow(a, k) => mul(
                mul(
                    Node::Const(Complex64::new(f64::from(*k), 0.0)),
                    pow((**a).clone(), k - 1),
                ),
                a.derivative(var),
            ),
            Node::Exp(a) => mul(Node::Exp(a.clone()), a.derivative(var)),
            Node::Sin(a) => mul(Node::Cos(a.clone()), a.derivative(var)),
            Node::Cos(a) => mul(neg(Node::Sin(a.clone())), a.derivative(var)),
        }
    }

    /// Expands a polynomial tree in variable 0. `None` if the tree is not polynomial.
    pub fn to_polynomial(&self) -> Option<Polynomial> {
        Some(match self {
            Node::Var(0) => Polynomial::monomial(ONE, 1),
            Node::Var(_) => return None,
            Node::Const(c) => Polynomial::constant(*c),
            Node::Neg(a) => a.to_polynomial()?.scale(-ONE),
            Node::Add(a, b) => &a.to_polynomial()? + &b.to_polynomial()?,
            Node::Sub(a, b) => &a.to_polynomial()? - &b.to_polynomial()?,
            Node::Mul(a, b) => &a.to_polynomial()? * &b.to_polynomial()?,
            Node::Pow(a, k) => a.to_polynomial()?.powu(*k),
            Node::Div(..) | Node::Exp(_) | Node::Sin(_) | Node::Cos(_) => return None,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if !(c.im == 0.0 && c.re >= 0.0) && *c != Complex64::i() => 0,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[&str]) -> fmt::Result {
        match self {
            Node::Var(k) => f.write_str(names[*k]),
            Node::Const(c) => write_const(f, *c),
            Node::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3, names)
            }
            Node::Add(a, b) => write_binary(f, a, "+", b, 1, names),
            Node::Sub(a, b) => write_binary(f, a, "-", b, 1, names),
            Node::Mul(a, b) => write_binary(f, a, "*", b, 2, names),
            Node::Div(a, b) => write_binary(f, a, "/", b, 2, names),
            Node::Pow(a, k) => {
                write_child(f, a, 5, names)?;
                write!(f, "^{k}")
            }
            Node::Exp(a) => write_call(f, "exp", a, names),
            Node::Sin(a) => write_call(f, "sin", a, names),
            Node::Cos(a) => write_call(f, "cos", a, names),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c == Complex64::i() {
        f.write_str("i")
    } else if c.im == 0.0 {
        if c.re >= 0.0 {
            write!(f, "{}", c.re)
        } else {
            write!(f, "(-{})", -c.re)
        }
    } else if c.re == 0.0 {
        if c.im >= 0.0 {
            write!(f, "({}*i)", c.im)
        } else {
            write!(f, "(-{}*i)", -c.im)
        }
    } else if c.im >= 0.0 {
        write!(f, "({}+{}*i)", c.re, c.im)
    } else {
        write!(f, "({}-{}*i)", c.re, -c.im)
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, n: &Node, min_prec: u8, names: &[&str]) -> fmt::Result {
    // Composite constants print with their own parentheses.
    if n.precedence() == 0 || n.precedence() >= min_prec {
        n.write(f, names)
    } else {
        f.write_str("(")?;
        n.write(f, names)?;
        f.write_str(")")
    }
}

fn write_binary(
    f: &mut fmt::Formatter<'_>,
    a: &Node,
    op: &str,
    b: &Node,
    prec: u8,
    names: &[&str],
) -> fmt::Result {
    write_child(f, a, prec, names)?;
    f.write_str(op)?;
    write_child(f, b, prec + 1, names)
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, a: &Node, names: &[&str]) -> fmt::Result {
    write!(f, "{name}(")?;
    a.write(f, names)?;
    f.write_str(")")
}

pub(crate) fn powu(base: Complex64, k: u32) -> Complex64 {
    let mut acc = ONE;
    let mut b = base;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

// Simplifying constructors used by differentiation. They fold constants and
// prune literal zeros and ones.

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn add(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x + y),
        (Some(x), _) if x == ZERO => b,
        (_, Some(y)) if y == ZERO => a,
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x - y),
        (Some(x), _) if x == ZERO => neg(b),
        (_, Some(y)) if y == ZERO => a,
        _ => Node::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    if a.is_zero() || b.is_zero() {
        return Node::Const(ZERO);
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x * y),
        _ if a.is_one() => b,
        _ if b.is_one() => a,
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    if a.is_zero() {
        return Node::Const(ZERO);
    }
    if b.is_one() {
        return a;
    }
    Node::Div(Box::new(a), Box::new(b))
}

fn pow(a: Node, k: u32) -> Node {
    match k {
        0 => Node::Const(ONE),
        1 => a,
        _ => match a {
            Node::Const(c) => Node::Const(powu(c, k)),
            other => Node::Pow(Box::new(other), k),
        },
    }
}

/// A holomorphic function of one complex variable `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloExpr {
    root: Node,
    is_polynomial: bool,
}

const Z_NAMES: [&str; 1] = ["z"];

impl HoloExpr {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_node(parse_node(text, &Z_NAMES, true)?))
    }

    pub fn from_node(root: Node) -> Self {
        let is_polynomial = root.is_polynomial();
        Self {
            root,
            is_polynomial,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_node(Node::Const(c))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn is_polynomial(&self) -> bool {
        self.is_polynomial
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.root.eval(&[z], z)
    }

    pub fn differentiate(&self) -> HoloExpr {
        Self::from_node(self.root.derivative(0))
    }

    pub fn to_polynomial(&self) -> Option<Polynomial> {
        if self.is_polynomial {
            self.root.to_polynomial()
        } else {
            None
        }
    }
}

impl FromStr for HoloExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for HoloExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &Z_NAMES)
    }
}

/// A real-valued function of the planar coordinates `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealExpr {
    root: Node,
}

const XY_NAMES: [&str; 2] = ["x", "y"];

impl RealExpr {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self {
            root: parse_node(text, &XY_NAMES, false)?,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            root: Node::Const(Complex64::new(c, 0.0)),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let at = Complex64::new(x, y);
        let v = self
            .root
            .eval(&[Complex64::new(x, 0.0), Complex64::new(y, 0.0)], at)?;
        if !v.re.is_finite() {
            return Err(Error::NonFinite { z: at });
        }
        Ok(v.re)
    }

    pub fn partial_x(&self) -> RealExpr {
        RealExpr {
            root: self.root.derivative(0),
        }
    }

    pub fn partial_y(&self) -> RealExpr {
        RealExpr {
            root: self.root.derivative(1),
        }
    }
}

impl FromStr for RealExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &XY_NAMES)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn var() -> Box<Node> {
        Box::new(Node::Var(0))
    }

    fn lit(v: f64) -> Box<Node> {
        Box::new(Node::Const(c(v, 0.0)))
    }

    #[test]
    fn parses_sum_of_power_and_literal() {
        let e = HoloExpr::parse("z^2+1").unwrap();
        assert_eq!(*e.root(), Node::Add(Box::new(Node::Pow(var(), 2)), lit(1.0)));
        assert!(e.is_polynomial());
    }

    #[test]
    fn multiplication_is_left_associative() {
        let e = HoloExpr::parse("2*i*z").unwrap();
        let expected = Node::Mul(
            Box::new(Node::Mul(lit(2.0), Box::new(Node::Const(Complex64::i())))),
            var(),
        );
        assert_eq!(*e.root(), expected);
    }

    #[test]
    fn eval_examples() {
        let e = HoloExpr::parse("z^2+1").unwrap();
        assert_eq!(e.eval(Complex64::i()).unwrap(), c(0.0, 0.0));
        let e = HoloExpr::parse("exp(z)").unwrap();
        assert_eq!(e.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let e = HoloExpr::parse("1/z").unwrap();
        assert_eq!(
            e.eval(c(0.0, 0.0)),
            Err(Error::DivisionByZero { z: c(0.0, 0.0) })
        );
    }

    #[test]
    fn derivative_examples() {
        let d = HoloExpr::parse("z^2").unwrap().differentiate();
        assert_eq!(d.to_string(), "2*z");
        let d = HoloExpr::parse("3").unwrap().differentiate();
        assert_eq!(d.to_string(), "0");
        let d = HoloExpr::parse("exp(z)").unwrap().differentiate();
        assert_eq!(d.to_string(), "exp(z)");
    }

    #[test]
    fn derivative_of_polynomial_stays_polynomial() {
        let d = HoloExpr::parse("(z-1)^3*z+2*i").unwrap().differentiate();
        assert!(d.is_polynomial());
        let z0 = c(0.3, -0.7);
        // d/dz [(z-1)^3 z] = 3(z-1)^2 z + (z-1)^3
        let expected = 3.0 * (z0 - 1.0).powi(2) * z0 + (z0 - 1.0).powi(3);
        assert!((d.eval(z0).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn quotient_and_trig_rules() {
        let e = HoloExpr::parse("sin(z)/(1+z^2)+cos(2*z)").unwrap();
        assert!(!e.is_polynomial());
        let d = e.differentiate();
        let z0 = c(0.4, 0.2);
        let expected = (z0.cos() * (1.0 + z0 * z0) - z0.sin() * 2.0 * z0) / (1.0 + z0 * z0).powi(2)
            - 2.0 * (2.0 * z0).sin();
        assert!((d.eval(z0).unwrap() - expected).norm() < 1e-13);
    }

    #[test]
    fn real_expression_partials() {
        let g = RealExpr::parse("1+x^2+y^2").unwrap();
        assert_eq!(g.eval(0.5, -1.0).unwrap(), 2.25);
        assert_eq!(g.partial_x().eval(0.5, -1.0).unwrap(), 1.0);
        assert_eq!(g.partial_y().eval(0.5, -1.0).unwrap(), -2.0);
        assert!(RealExpr::parse("x+i").is_err());
        assert!(RealExpr::parse("z").is_err());
    }

    #[test]
    fn prints_composite_constants_with_parentheses() {
        let e = HoloExpr::parse("(1+i)*z").unwrap().differentiate();
        let z0 = c(0.1, 0.1);
        let reparsed = HoloExpr::parse(&e.to_string()).unwrap();
        assert_eq!(reparsed.eval(z0).unwrap(), e.eval(z0).unwrap());
    }
}
