use num_complex::Complex64;

use super::domain::Domain;
use super::expr::HoloExpr;
use super::poly::Polynomial;
use super::quadrature::{integrate_segment_scalar, QuadratureOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntiderivativeMode {
    /// Termwise integration of a polynomial.
    Symbolic,
    /// Path integral along the segment from the domain base point.
    Quadrature,
}

#[derive(Debug, Clone)]
enum Repr {
    Symbolic { poly: Polynomial, expr: HoloExpr },
    Quadrature,
}

/// `z -> c + integral of e from the base point to z`.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    integrand: HoloExpr,
    constant: Complex64,
    domain: Domain,
    repr: Repr,
}

impl Antiderivative {
    pub fn new(integrand: &HoloExpr, constant: Complex64, domain: &Domain) -> Self {
        let repr = match integrand.to_polynomial() {
            Some(p) => {
                let prim = p.antiderivative();
                let shift = constant - prim.eval(domain.base_point());
                let poly = &prim + &Polynomial::constant(shift);
                let expr = poly.to_expr();
                Repr::Symbolic { poly, expr }
            }
            None => Repr::Quadrature,
        };
        Self {
            integrand: integrand.clone(),
            constant,
            domain: *domain,
            repr,
        }
    }

    pub fn mode(&self) -> AntiderivativeMode {
        match self.repr {
            Repr::Symbolic { .. } => AntiderivativeMode::Symbolic,
            Repr::Quadrature => AntiderivativeMode::Quadrature,
        }
    }

    pub fn integrand(&self) -> &HoloExpr {
        &self.integrand
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The antiderivative as an expression (symbolic mode only).
    pub fn expression(&self) -> Option<&HoloExpr> {
        match &self.repr {
            Repr::Symbolic { expr, .. } => Some(expr),
            Repr::Quadrature => None,
        }
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        match &self.repr {
            Repr::Symbolic { poly, .. } => Some(poly),
            Repr::Quadrature => None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !self.domain.contains(z) {
            return Err(Error::OutsideDomain { z });
        }
        match &self.repr {
            Repr::Symbolic { poly, .. } => Ok(poly.eval(z)),
            Repr::Quadrature => {
                let base = self.domain.base_point();
                if z == base {
                    return Ok(self.constant);
                }
                let integral = integrate_segment_scalar(
                    |t| self.integrand.eval(t),
                    base,
                    z,
                    QuadratureOptions::default(),
                )
                .map_err(|e| match e {
                    Error::QuadratureFailed { .. } => Error::QuadratureFailed { z },
                    other => other,
                })?;
                Ok(self.constant + integral)
            }
        }
    }
}

/// Antiderivative of `e` anchored so that its value at the base point of `d` is `c`.
pub fn antiderivative(e: &HoloExpr, c: Complex64, d: &Domain) -> Antiderivative {
    Antiderivative::new(e, c, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Domain {
        Domain::centered_square(3.0).unwrap()
    }

    #[test]
    fn integral_of_one_is_z() {
        let a = antiderivative(&HoloExpr::parse("1").unwrap(), c(0.0, 0.0), &square());
        assert_eq!(a.mode(), AntiderivativeMode::Symbolic);
        assert_eq!(a.eval(c(2.0, 1.0)).unwrap(), c(2.0, 1.0));
    }

    #[test]
    fn integral_of_z_is_half_square() {
        let a = antiderivative(&HoloExpr::parse("z").unwrap(), c(0.0, 0.0), &square());
        assert_eq!(a.eval(c(2.0, 0.0)).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn exponential_by_quadrature() {
        let a = antiderivative(&HoloExpr::parse("exp(z)").unwrap(), c(0.0, 0.0), &square());
        assert_eq!(a.mode(), AntiderivativeMode::Quadrature);
        // closed form exp(z) - 1, computed independently
        let expected = c(1.0, 0.0).exp() - 1.0;
        assert!((a.eval(c(1.0, 0.0)).unwrap() - expected).norm() <= 1e-10);
        assert!((expected.re - 1.718_281_828).abs() < 1e-9);
    }

    #[test]
    fn constant_is_anchored_at_the_base_point() {
        let d = Domain::rectangle(c(-1.0, -1.0), c(2.0, 1.0), c(0.5, 0.25)).unwrap();
        let k = c(-0.3, 0.7);
        let sym = antiderivative(&HoloExpr::parse("3*z^2+i").unwrap(), k, &d);
        assert!((sym.eval(d.base_point()).unwrap() - k).norm() < 1e-15);
        let quad = antiderivative(&HoloExpr::parse("cos(z)").unwrap(), k, &d);
        assert_eq!(quad.eval(d.base_point()).unwrap(), k);
    }

    #[test]
    fn symbolic_expression_differentiates_back() {
        let e = HoloExpr::parse("(z+2*i)^3-z").unwrap();
        let a = antiderivative(&e, c(1.0, -1.0), &square());
        let back = a.expression().unwrap().differentiate().to_polynomial().unwrap();
        let orig = e.to_polynomial().unwrap();
        assert_eq!(back.coeffs().len(), orig.coeffs().len());
        for (x, y) in back.coeffs().iter().zip(orig.coeffs()) {
            assert!((x - y).norm() <= 4.0 * f64::EPSILON * y.norm().max(1.0));
        }
    }

    #[test]
    fn outside_points_are_rejected() {
        let a = antiderivative(&HoloExpr::parse("z").unwrap(), c(0.0, 0.0), &square());
        assert_eq!(a.eval(c(5.0, 0.0)), Err(Error::OutsideDomain { z: c(5.0, 0.0) }));
    }
}
