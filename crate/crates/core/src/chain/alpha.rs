use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::quadrature::{integrate_segment, QuadratureOptions};
use crate::holo::{Domain, HoloExpr, Polynomial};
use crate::products::ComplexVector;

/// One integration-constant vector per `phi_r`, of length `2r + 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntegrationConstants(pub Vec<Vec<Complex64>>);

impl IntegrationConstants {
    pub fn zeros(n: usize) -> Self {
        Self(
            (0..n)
                .map(|r| vec![Complex64::new(0.0, 0.0); 2 * r + 1])
                .collect(),
        )
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }

    pub fn level(&self, r: usize) -> &[Complex64] {
        &self.0[r]
    }
}

/// Fault injected into the frame after construction, used to exercise the
/// diagnostics. `F_index += magnitude * |F_index| * e_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub index: usize,
    pub magnitude: f64,
}

/// The isotropic chain `alpha_0, ..., alpha_n` built from `beta_0, ..., beta_(n-1)`:
///
/// `alpha_0 = beta_0`, `phi_r = integral of alpha_r`, and
/// `alpha_(r+1) = beta_(r+1) (1 - <phi_r, phi_r>, i (1 + <phi_r, phi_r>), 2 phi_r)`
/// with `beta_n = 1`.
///
/// Levels whose data is polynomial are kept as exact coefficient lists; from the
/// first non-polynomial `beta` upward, values come from Taylor jets of the
/// `beta` derivatives combined with quadrature values of `phi`.
#[derive(Debug, Clone)]
pub struct AlphaChain {
    n: usize,
    betas: Vec<HoloExpr>,
    // beta_derivs[r][k] = k-th derivative of beta_r, k = 0..=n
    beta_derivs: Vec<Vec<HoloExpr>>,
    constants: IntegrationConstants,
    domain: Domain,
    // alpha_polys[r] for r = 0..=n
    alpha_polys: Vec<Option<Vec<Polynomial>>>,
    // phi_polys[r] for r = 0..=n; phi_n has zero constants
    phi_polys: Vec<Option<Vec<Polynomial>>>,
    // f1_derivs[k][c] = k-th derivative of component c of alpha_n (polynomial case)
    f1_derivs: Option<Vec<Vec<Polynomial>>>,
    perturbation: Option<Perturbation>,
}

type Jet = Vec<Complex64>;

fn cauchy(a: &[Complex64], b: &[Complex64]) -> Jet {
    let m = a.len().min(b.len());
    (0..m)
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

/// `(1 - s, i (1 + s), 2 phi)` for `s = <phi, phi>`, generic over the arithmetic.
fn isotropic_lift<T, FMul, FAdd>(
    phi: &[T],
    one: T,
    i: T,
    two: T,
    mul: FMul,
    add: FAdd,
    neg: impl Fn(&T) -> T,
) -> Vec<T>
where
    T: Clone,
    FMul: Fn(&T, &T) -> T,
    FAdd: Fn(&T, &T) -> T,
{
    let mut s = mul(&phi[0], &phi[0]);
    for p in &phi[1..] {
        s = add(&s, &mul(p, p));
    }
    let mut out = Vec::with_capacity(phi.len() + 2);
    out.push(add(&one, &neg(&s)));
    out.push(mul(&i, &add(&one, &s)));
    out.extend(phi.iter().map(|p| mul(&two, p)));
    out
}

impl AlphaChain {
    pub fn build(
        betas: Vec<HoloExpr>,
        constants: IntegrationConstants,
        domain: Domain,
    ) -> Result<Self> {
        let n = betas.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("need at least one beta (n >= 1)".into()));
        }
        if constants.levels() != n {
            return Err(Error::ShapeMismatch(format!(
                "expected {n} integration-constant vectors, found {}",
                constants.levels()
            )));
        }
        for (r, c) in constants.0.iter().enumerate() {
            if c.len() != 2 * r + 1 {
                return Err(Error::ShapeMismatch(format!(
                    "constants for phi_{r} must have length {}, found {}",
                    2 * r + 1,
                    c.len()
                )));
            }
        }

        let beta_derivs: Vec<Vec<HoloExpr>> = betas
            .iter()
            .map(|b| {
                let mut ds = vec![b.clone()];
                for _ in 0..n {
                    let next = ds.last().unwrap().differentiate();
                    ds.push(next);
                }
                ds
            })
            .collect();

        let one = Polynomial::constant(Complex64::new(1.0, 0.0));
        let mut alpha_polys: Vec<Option<Vec<Polynomial>>> = Vec::with_capacity(n + 1);
        let mut phi_polys: Vec<Option<Vec<Polynomial>>> = Vec::with_capacity(n);
        alpha_polys.push(betas[0].to_polynomial().map(|p| vec![p]));
        for r in 0..n {
            let phi = alpha_polys[r].as_ref().map(|comps| {
                comps
                    .iter()
                    .zip(constants.level(r))
                    .map(|(a, c)| {
                        let prim = a.antiderivative();
                        let shift = c - prim.eval(domain.base_point());
                        &prim + &Polynomial::constant(shift)
                    })
                    .collect::<Vec<_>>()
            });
            let beta_next = if r + 1 < n {
                betas[r + 1].to_polynomial()
            } else {
                Some(one.clone())
            };
            let alpha_next = match (&phi, beta_next) {
                (Some(phi), Some(beta)) => {
                    let lifted = isotropic_lift(
                        phi,
                        one.clone(),
                        Polynomial::constant(Complex64::i()),
                        Polynomial::constant(Complex64::new(2.0, 0.0)),
                        |a, b| a * b,
                        |a, b| a + b,
                        |a| a.scale(Complex64::new(-1.0, 0.0)),
                    );
                    Some(lifted.iter().map(|p| &beta * p).collect())
                }
                _ => None,
            };
            phi_polys.push(phi);
            alpha_polys.push(alpha_next);
        }

        // phi_n = integral of F_1, anchored to vanish at the base point
        let phi_top = alpha_polys[n].as_ref().map(|comps| {
            comps
                .iter()
                .map(|a| {
                    let prim = a.antiderivative();
                    let shift = -prim.eval(domain.base_point());
                    &prim + &Polynomial::constant(shift)
                })
                .collect::<Vec<_>>()
        });
        phi_polys.push(phi_top);

        let f1_derivs = alpha_polys[n].as_ref().map(|comps| {
            let mut ds = vec![comps.clone()];
            for _ in 0..n {
                let next = ds.last().unwrap().iter().map(Polynomial::derivative).collect();
                ds.push(next);
            }
            ds
        });

        Ok(Self {
            n,
            betas,
            beta_derivs,
            constants,
            domain,
            alpha_polys,
            phi_polys,
            f1_derivs,
            perturbation: None,
        })
    }

    /// Parses the `beta` expressions and builds the chain.
    pub fn from_strs(betas: &[&str], constants: IntegrationConstants, domain: Domain) -> Result<Self> {
        let betas = betas
            .iter()
            .map(|s| HoloExpr::parse(s))
            .collect::<Result<Vec<_>>>()?;
        Self::build(betas, constants, domain)
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Result<Self> {
        if p.index == 0 || p.index > self.n + 1 {
            return Err(Error::OutOfRange {
                what: "perturbation index",
                detail: format!("{} not in 1..={}", p.index, self.n + 1),
            });
        }
        self.perturbation = Some(p);
        Ok(self)
    }

    pub fn perturbation(&self) -> Option<Perturbation> {
        self.perturbation
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient complex dimension `2n + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn betas(&self) -> &[HoloExpr] {
        &self.betas
    }

    pub fn constants(&self) -> &IntegrationConstants {
        &self.constants
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_polynomial(&self) -> bool {
        self.f1_derivs.is_some()
    }

    /// Component polynomials of `alpha_r` when that level is polynomial.
    pub fn alpha_polynomials(&self, r: usize) -> Option<&[Polynomial]> {
        self.alpha_polys.get(r)?.as_deref()
    }

    /// Component expression trees of `alpha_r` when that level is polynomial.
    pub fn alpha_exprs(&self, r: usize) -> Option<Vec<HoloExpr>> {
        self.alpha_polynomials(r)
            .map(|ps| ps.iter().map(Polynomial::to_expr).collect())
    }

    /// `alpha_r(z)`.
    pub fn alpha(&self, r: usize, z: Complex64) -> Result<ComplexVector> {
        if r > self.n {
            return Err(Error::OutOfRange {
                what: "alpha level",
                detail: format!("{r} > n = {}", self.n),
            });
        }
        let jet = self.alpha_jet(r, z, 0)?;
        Ok(ComplexVector::new(jet.into_iter().map(|j| j[0]).collect()))
    }

    /// `phi_r(z)`, the anchored antiderivative of `alpha_r`. Level `n` is the
    /// antiderivative of `F_1` vanishing at the base point.
    pub fn phi(&self, r: usize, z: Complex64) -> Result<ComplexVector> {
        if r > self.n {
            return Err(Error::OutOfRange {
                what: "phi level",
                detail: format!("{r} > n = {}", self.n),
            });
        }
        self.phi_value(r, z).map(ComplexVector::new)
    }

    /// Derivatives `d^k F_1 (z)` for `k = 0..=n`, where `F_1 = alpha_n`.
    pub fn f1_jets(&self, z: Complex64) -> Result<Vec<ComplexVector>> {
        if !self.domain.contains(z) {
            return Err(Error::OutsideDomain { z });
        }
        let jets: Vec<ComplexVector> = match &self.f1_derivs {
            Some(ds) => ds
                .iter()
                .map(|comps| ComplexVector::new(comps.iter().map(|p| p.eval(z)).collect()))
                .collect(),
            None => {
                let taylor = self.alpha_jet(self.n, z, self.n)?;
                let mut fact = 1.0;
                (0..=self.n)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        ComplexVector::new(taylor.iter().map(|t| t[k] * fact).collect())
                    })
                    .collect()
            }
        };
        if jets.iter().any(|j| !j.is_finite()) {
            return Err(Error::NonFinite { z });
        }
        Ok(jets)
    }

    /// Taylor coefficients (up to `order`) of each component of `alpha_r` at `z`.
    fn alpha_jet(&self, r: usize, z: Complex64, order: usize) -> Result<Vec<Jet>> {
        if let Some(polys) = &self.alpha_polys[r] {
            return Ok(polys.iter().map(|p| poly_taylor(p, z, order)).collect());
        }
        let beta = self.beta_jet(r, z, order)?;
        if r == 0 {
            return Ok(vec![beta]);
        }
        let phi = self.phi_jet(r - 1, z, order)?;
        let c = |v: f64| {
            let mut j = vec![Complex64::new(0.0, 0.0); order + 1];
            j[0] = Complex64::new(v, 0.0);
            j
        };
        let mut i_jet = c(0.0);
        i_jet[0] = Complex64::i();
        let lifted = isotropic_lift(
            &phi,
            c(1.0),
            i_jet,
            c(2.0),
            |a, b| cauchy(a, b),
            |a, b| a.iter().zip(b).map(|(x, y)| x + y).collect(),
            |a| a.iter().map(|x| -x).collect(),
        );
        Ok(lifted.iter().map(|comp| cauchy(&beta, comp)).collect())
    }

    fn beta_jet(&self, r: usize, z: Complex64, order: usize) -> Result<Jet> {
        if r == self.n {
            let mut j = vec![Complex64::new(0.0, 0.0); order + 1];
            j[0] = Complex64::new(1.0, 0.0);
            return Ok(j);
        }
        let mut fact = 1.0;
        (0..=order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                Ok(self.beta_derivs[r][k].eval(z)? / fact)
            })
            .collect()
    }

    fn phi_jet(&self, r: usize, z: Complex64, order: usize) -> Result<Vec<Jet>> {
        if let Some(polys) = &self.phi_polys[r] {
            return Ok(polys.iter().map(|p| poly_taylor(p, z, order)).collect());
        }
        let value = self.phi_value(r, z)?;
        let below = if order > 0 {
            Some(self.alpha_jet(r, z, order - 1)?)
        } else {
            None
        };
        Ok(value
            .iter()
            .enumerate()
            .map(|(c, v)| {
                let mut j = Vec::with_capacity(order + 1);
                j.push(*v);
                if let Some(b) = &below {
                    j.extend((1..=order).map(|k| b[c][k - 1] / k as f64));
                }
                j
            })
            .collect())
    }

    fn phi_value(&self, r: usize, z: Complex64) -> Result<Vec<Complex64>> {
        if let Some(polys) = &self.phi_polys[r] {
            return Ok(polys.iter().map(|p| p.eval(z)).collect());
        }
        if !self.domain.contains(z) {
            return Err(Error::OutsideDomain { z });
        }
        let base = self.domain.base_point();
        let consts = if r < self.n {
            self.constants.level(r).to_vec()
        } else {
            vec![Complex64::new(0.0, 0.0); 2 * r + 1]
        };
        if z == base {
            return Ok(consts);
        }
        let integral = integrate_segment(
            |t| Ok(self.alpha_jet(r, t, 0)?.into_iter().map(|j| j[0]).collect()),
            base,
            z,
            QuadratureOptions::default(),
        )
        .map_err(|e| match e {
            Error::QuadratureFailed { .. } => Error::QuadratureFailed { z },
            other => other,
        })?;
        Ok(integral.iter().zip(&consts).map(|(v, c)| v + c).collect())
    }
}

fn poly_taylor(p: &Polynomial, z: Complex64, order: usize) -> Jet {
    let mut out = Vec::with_capacity(order + 1);
    let mut d = p.clone();
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            d = d.derivative();
            fact *= k as f64;
        }
        out.push(d.eval(z) / fact);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::products::sym;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Domain {
        Domain::centered_square(1.0).unwrap()
    }

    #[test]
    fn n1_unit_beta_gives_the_stereographic_lift() {
        let chain = AlphaChain::from_strs(&["1"], IntegrationConstants::zeros(1), square()).unwrap();
        let z = c(0.3, -0.4);
        let a1 = chain.alpha(1, z).unwrap();
        let expected = [1.0 - z * z, Complex64::i() * (1.0 + z * z), 2.0 * z];
        for (got, want) in a1.entries().iter().zip(expected) {
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_shifts_the_antiderivative() {
        let k = c(0.2, 0.1);
        let chain =
            AlphaChain::from_strs(&["1"], IntegrationConstants(vec![vec![k]]), square()).unwrap();
        let z = c(-0.5, 0.25);
        let w = z + k;
        let a1 = chain.alpha(1, z).unwrap();
        let expected = [1.0 - w * w, Complex64::i() * (1.0 + w * w), 2.0 * w];
        for (got, want) in a1.entries().iter().zip(expected) {
            assert!((got - want).norm() < 1e-15);
        }
        assert!((chain.phi(0, c(0.0, 0.0)).unwrap()[0] - k).norm() < 1e-16);
    }

    #[test]
    fn every_level_is_isotropic() {
        let consts = IntegrationConstants(vec![
            vec![c(0.1, 0.0)],
            vec![c(0.0, 0.2), c(-0.1, 0.0), c(0.3, 0.3)],
            vec![c(0.0, 0.0); 5],
        ]);
        let chain = AlphaChain::from_strs(&["1+z", "2", "z-i"], consts, square()).unwrap();
        let z = c(0.35, 0.6);
        for r in 1..=3 {
            let a = chain.alpha(r, z).unwrap();
            assert_eq!(a.dim(), 2 * r + 1);
            assert!(sym(&a, &a).norm() <= 1e-10 * a.norm_sq());
        }
    }

    #[test]
    fn shape_errors() {
        let d = square();
        assert!(AlphaChain::from_strs(&[], IntegrationConstants::zeros(0), d).is_err());
        assert!(matches!(
            AlphaChain::from_strs(&["1", "1"], IntegrationConstants::zeros(1), d),
            Err(Error::ShapeMismatch(_))
        ));
        let bad = IntegrationConstants(vec![vec![c(0.0, 0.0)], vec![c(0.0, 0.0)]]);
        assert!(matches!(
            AlphaChain::from_strs(&["1", "1"], bad, d),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn jet_path_matches_polynomial_path() {
        // "z/1" is polynomial in value but not in form, so it takes the jet path.
        let d = square();
        let consts = IntegrationConstants(vec![vec![c(0.1, -0.2)], vec![c(0.05, 0.0); 3]]);
        let poly = AlphaChain::from_strs(&["1+z", "z^2"], consts.clone(), d).unwrap();
        let general = AlphaChain::from_strs(&["(1+z)/1", "z^2"], consts, d).unwrap();
        assert!(poly.is_polynomial());
        assert!(!general.is_polynomial());
        let z = c(0.4, -0.3);
        let a = poly.f1_jets(z).unwrap();
        let b = general.f1_jets(z).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-11 * x.norm().max(1.0), "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn quadrature_level_with_exponential() {
        let chain = AlphaChain::from_strs(&["exp(z)"], IntegrationConstants::zeros(1), square())
            .unwrap();
        let z = c(0.5, 0.5);
        let phi = chain.phi(0, z).unwrap()[0];
        assert!((phi - (z.exp() - 1.0)).norm() < 1e-12);
        let jets = chain.f1_jets(z).unwrap();
        // d alpha_1 = phi' (-2 phi, 2 i phi, 2)
        let dphi = z.exp();
        let expected = [-2.0 * phi * dphi, 2.0 * Complex64::i() * phi * dphi, 2.0 * dphi];
        for (got, want) in jets[1].entries().iter().zip(expected) {
            assert!((got - want).norm() < 1e-12);
        }
    }
}
