//! Holomorphic functions of one complex variable on a convex planar domain.

mod antiderivative;
mod domain;
mod expr;
mod parse;
mod poly;
pub mod quadrature;

pub use antiderivative::{antiderivative, Antiderivative, AntiderivativeMode};
pub use domain::{Domain, GridSpec, Shape};
pub use expr::{HoloExpr, Node, RealExpr};
pub use poly::Polynomial;

/// Parses an expression in `z`.
pub fn parse_expr(text: &str) -> crate::Result<HoloExpr> {
    HoloExpr::parse(text)
}
