//! Complex vectors with the symmetric (bilinear) and Hermitian products.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self(v.iter().map(|x| Complex64::new(*x, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|c| c.conj()).collect())
    }

    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.im).collect()
    }

    /// Hermitian squared norm `sum |u_k|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, k: usize) -> &mut Complex64 {
        &mut self.0[k]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;

    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;

    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<Complex64> for &ComplexVector {
    type Output = ComplexVector;

    fn mul(self, rhs: Complex64) -> ComplexVector {
        self.scale(rhs)
    }
}

fn check_dims(u: &ComplexVector, v: &ComplexVector) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    Ok(())
}

/// `<u, v> = sum u_k v_k`, no conjugation.
pub fn symmetric_product(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    check_dims(u, v)?;
    Ok(sym(u, v))
}

/// `<u, conj(v)> = sum u_k conj(v_k)`.
pub fn hermitian_product(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    check_dims(u, v)?;
    Ok(herm(u, v))
}

// Unchecked forms for internal use where dimensions are fixed by construction.

pub(crate) fn sym(u: &ComplexVector, v: &ComplexVector) -> Complex64 {
    u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum()
}

pub(crate) fn herm(u: &ComplexVector, v: &ComplexVector) -> Complex64 {
    u.0.iter().zip(&v.0).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn dot_real(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cv(v: &[(f64, f64)]) -> ComplexVector {
        ComplexVector::new(v.iter().map(|(a, b)| c(*a, *b)).collect())
    }

    #[test]
    fn symmetric_product_examples() {
        let u = cv(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]);
        assert_eq!(symmetric_product(&u, &u).unwrap(), c(0.0, 0.0));
        let a = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        let b = cv(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(symmetric_product(&a, &b).unwrap(), c(0.0, 0.0));
        let i = cv(&[(0.0, 1.0)]);
        assert_eq!(symmetric_product(&i, &i).unwrap(), c(-1.0, 0.0));
    }

    #[test]
    fn hermitian_product_examples() {
        let u = cv(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]);
        assert_eq!(hermitian_product(&u, &u).unwrap(), c(2.0, 0.0));
        let v = cv(&[(1.0, 0.0), (0.0, -1.0), (0.0, 0.0)]);
        assert_eq!(hermitian_product(&u, &v).unwrap(), c(0.0, 0.0));
        assert_eq!(
            hermitian_product(&cv(&[(0.0, 0.0)]), &cv(&[(0.0, 5.0)])).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = ComplexVector::zeros(2);
        let b = ComplexVector::zeros(3);
        assert_eq!(
            symmetric_product(&a, &b),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        );
        assert!(hermitian_product(&a, &b).is_err());
    }

    fn small_int_vec(n: usize) -> impl Strategy<Value = ComplexVector> {
        proptest::collection::vec((-20i32..=20, -20i32..=20), n).prop_map(|v| {
            ComplexVector::new(v.into_iter().map(|(a, b)| c(a as f64, b as f64)).collect())
        })
    }

    proptest! {
        // Small integer entries keep every product exact in f64.
        #[test]
        fn symmetric_product_is_bilinear(
            u in small_int_vec(5), w in small_int_vec(5), v in small_int_vec(5),
            a in (-5i32..=5, -5i32..=5), b in (-5i32..=5, -5i32..=5),
        ) {
            let a = c(a.0 as f64, a.1 as f64);
            let b = c(b.0 as f64, b.1 as f64);
            let mut lhs_vec = u.scale(a);
            lhs_vec.axpy(b, &w);
            let lhs = symmetric_product(&lhs_vec, &v).unwrap();
            let rhs = a * symmetric_product(&u, &v).unwrap() + b * symmetric_product(&w, &v).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(symmetric_product(&u, &v).unwrap(), symmetric_product(&v, &u).unwrap());
        }

        #[test]
        fn hermitian_product_is_positive_definite(u in small_int_vec(4), v in small_int_vec(4)) {
            let uu = hermitian_product(&u, &u).unwrap();
            prop_assert_eq!(uu.im, 0.0);
            prop_assert!(uu.re >= 0.0);
            prop_assert_eq!(uu.re == 0.0, u.entries().iter().all(|x| x.norm_sqr() == 0.0));
            prop_assert_eq!(hermitian_product(&u, &v).unwrap(), hermitian_product(&v, &u).unwrap().conj());
        }
    }
}
