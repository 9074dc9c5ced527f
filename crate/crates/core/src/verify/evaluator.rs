use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::chain::{surface_point, AlphaChain};
use crate::error::{Error, Result};
use crate::fd::{self, Partials};
use crate::holo::Domain;
use crate::products::{dot_real, ComplexVector};

type SurfaceFn = dyn Fn(Complex64) -> Result<Vec<f64>> + Send + Sync;

/// A black-box map from a planar domain into the unit sphere of `R^dim`,
/// with finite-difference derivatives.
#[derive(Clone)]
pub struct SurfaceEvaluator {
    dim: usize,
    domain: Domain,
    fd_step: f64,
    map: Arc<SurfaceFn>,
}

impl fmt::Debug for SurfaceEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceEvaluator")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("fd_step", &self.fd_step)
            .finish_non_exhaustive()
    }
}

impl SurfaceEvaluator {
    pub fn new<F>(dim: usize, domain: Domain, fd_step: f64, map: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidParameters("surface dimension must be positive".into()));
        }
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "finite-difference step {fd_step} must be positive"
            )));
        }
        Ok(Self {
            dim,
            domain,
            fd_step,
            map: Arc::new(map),
        })
    }

    /// The surface `g` of a chain, with the domain's default step.
    pub fn from_chain(chain: &AlphaChain, eps_singular: f64) -> Self {
        let chain = Arc::new(chain.clone());
        let domain = *chain.domain();
        Self {
            dim: chain.dim(),
            domain,
            fd_step: domain.default_fd_step(),
            map: Arc::new(move |z| surface_point(&chain, z, eps_singular)),
        }
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Result<Self> {
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "finite-difference step {fd_step} must be positive"
            )));
        }
        self.fd_step = fd_step;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n` for a target sphere `S^(2n)`; `None` when the ambient dimension is even.
    pub fn n(&self) -> Option<usize> {
        (self.dim % 2 == 1 && self.dim > 1).then(|| (self.dim - 1) / 2)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn eval(&self, z: Complex64) -> Result<Vec<f64>> {
        if !self.domain.contains(z) {
            return Err(Error::OutsideDomain { z });
        }
        let v = (self.map)(z)?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { z });
        }
        Ok(v)
    }

    pub fn check_stencil(&self, z: Complex64, max_order: usize) -> Result<()> {
        fd::check_stencil(&self.domain, z, self.fd_step, max_order)
    }

    /// Mixed partials up to `max_order` at `z`.
    ///
    /// The normalization that defines a spherical surface fixes it only up to
    /// sign, so every stencil value is flipped onto the hemisphere of `g(z)`.
    pub fn partials(&self, z: Complex64, max_order: usize) -> Result<Partials> {
        self.check_stencil(z, max_order)?;
        let centre = self.eval(z)?;
        fd::partials(
            |w| {
                let mut v = self.eval(w)?;
                if dot_real(&v, &centre) < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                Ok(ComplexVector::from_real(&v))
            },
            z,
            max_order,
            self.fd_step,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_flips_inside_the_stencil_are_undone() {
        let d = Domain::centered_square(1.0).unwrap();
        // flips sign across x = 0.3, a line the stencil at 0.3 straddles
        let g = SurfaceEvaluator::new(3, d, 1e-4, |z: Complex64| {
            let (s, c) = z.re.sin_cos();
            let v = vec![c, s, 0.0];
            Ok(if z.re > 0.3 { v.iter().map(|x| -x).collect() } else { v })
        })
        .unwrap();
        let p = g.partials(Complex64::new(0.3, 0.0), 1).unwrap();
        let gx = p.get(1, 0);
        assert!((gx[0].re + 0.3f64.sin()).abs() < 1e-7);
        assert!((gx[1].re - 0.3f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn rejects_wrong_dimension_and_bad_step() {
        let d = Domain::centered_square(1.0).unwrap();
        let g = SurfaceEvaluator::new(3, d, 1e-4, |_| Ok(vec![1.0, 0.0])).unwrap();
        assert!(matches!(
            g.eval(Complex64::new(0.0, 0.0)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SurfaceEvaluator::new(3, d, 0.0, |_| Ok(vec![1.0, 0.0, 0.0])).is_err());
        assert!(matches!(
            g.eval(Complex64::new(2.0, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }
}
