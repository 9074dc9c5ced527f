use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holo::quadrature::{integrate_segment, QuadratureOptions};
use crate::holo::{Domain, GridSpec, HoloExpr};
use crate::products::ComplexVector;

pub const CUBIC: usize = 3;

/// Weights of the `k`-th derivative (in `t`) of the Lagrange basis on the nodes
/// `0, 1, ..., order`, evaluated at `t`.
fn lagrange_weights(t: f64, order: usize, k: usize) -> Vec<f64> {
    (0..=order)
        .map(|m| {
            // coefficients of prod_(l != m) (t - l) / (m - l), ascending
            let mut coef = vec![1.0];
            for l in (0..=order).filter(|&l| l != m) {
                let denom = m as f64 - l as f64;
                let mut next = vec![0.0; coef.len() + 1];
                for (p, c) in coef.iter().enumerate() {
                    next[p + 1] += c / denom;
                    next[p] -= c * l as f64 / denom;
                }
                coef = next;
            }
            for _ in 0..k {
                coef = coef.iter().enumerate().skip(1).map(|(p, c)| c * p as f64).collect();
            }
            coef.iter().rev().fold(0.0, |acc, c| acc * t + c)
        })
        .collect()
}

/// Samples of a vector field on a rectangular grid with local tensor-product
/// Lagrange interpolation of the given order (cubic by default).
#[derive(Debug, Clone, PartialEq)]
pub struct XiField {
    lo: Complex64,
    hi: Complex64,
    grid: GridSpec,
    order: usize,
    dim: usize,
    values: Vec<ComplexVector>,
}

impl XiField {
    /// `values` are row-major over `grid.points(lo, hi)`.
    pub fn from_samples(
        lo: Complex64,
        hi: Complex64,
        grid: GridSpec,
        values: Vec<ComplexVector>,
        order: usize,
    ) -> Result<Self> {
        if order == 0 || order > 7 {
            return Err(Error::Interpolation(format!("interpolation order {order} not in 1..=7")));
        }
        if grid.rows <= order || grid.cols <= order {
            return Err(Error::Interpolation(format!(
                "order {order} interpolation needs at least {} samples per axis, grid is {}x{}",
                order + 1,
                grid.rows,
                grid.cols
            )));
        }
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for a {}x{} grid",
                values.len(),
                grid.rows,
                grid.cols
            )));
        }
        let dim = values[0].dim();
        if values.iter().any(|v| v.dim() != dim) {
            return Err(Error::ShapeMismatch("samples differ in dimension".into()));
        }
        if !(hi.re > lo.re && hi.im > lo.im) {
            return Err(Error::InvalidDomain("sample box has empty interior".into()));
        }
        Ok(Self {
            lo,
            hi,
            grid,
            order,
            dim,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn bounds(&self) -> (Complex64, Complex64) {
        (self.lo, self.hi)
    }

    pub fn samples(&self) -> &[ComplexVector] {
        &self.values
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        self.grid.points(self.lo, self.hi)
    }

    fn spacing(&self) -> (f64, f64) {
        (
            (self.hi.re - self.lo.re) / (self.grid.cols - 1) as f64,
            (self.hi.im - self.lo.im) / (self.grid.rows - 1) as f64,
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let slack = 1e-12 * (self.hi - self.lo).norm();
        z.re >= self.lo.re - slack
            && z.re <= self.hi.re + slack
            && z.im >= self.lo.im - slack
            && z.im <= self.hi.im + slack
    }

    /// Multiplies every sample by `psi(z)` at its node.
    pub fn gauge(&self, psi: &HoloExpr) -> Result<Self> {
        let values = self
            .nodes()
            .into_iter()
            .zip(&self.values)
            .map(|(z, v)| Ok(v.scale(psi.eval(z)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    fn stencil(&self, u: f64, count: usize) -> (usize, f64) {
        let cell = (u.floor().max(0.0) as usize).min(count - 2);
        let start = cell
            .saturating_sub((self.order - 1) / 2)
            .min(count - 1 - self.order);
        (start, u - start as f64)
    }

    /// `d_x^kx d_y^ky` of the interpolant at `z`.
    pub fn partial(&self, z: Complex64, kx: usize, ky: usize) -> Result<ComplexVector> {
        if !self.contains(z) {
            return Err(Error::OutsideDomain { z });
        }
        let (dx, dy) = self.spacing();
        let (sx, tx) = self.stencil((z.re - self.lo.re) / dx, self.grid.cols);
        let (sy, ty) = self.stencil((z.im - self.lo.im) / dy, self.grid.rows);
        let wx = lagrange_weights(tx, self.order, kx);
        let wy = lagrange_weights(ty, self.order, ky);
        let scale = dx.powi(-(kx as i32)) * dy.powi(-(ky as i32));
        let mut out = ComplexVector::zeros(self.dim);
        for (b, wb) in wy.iter().enumerate() {
            for (a, wa) in wx.iter().enumerate() {
                let v = &self.values[(sy + b) * self.grid.cols + sx + a];
                out.axpy(Complex64::new(wa * wb * scale, 0.0), v);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, z: Complex64) -> Result<ComplexVector> {
        self.partial(z, 0, 0)
    }

    /// `d^k xi` for `k = 0..=max_k`, using `d = d_x` on holomorphic fields.
    pub fn jets(&self, z: Complex64, max_k: usize) -> Result<Vec<ComplexVector>> {
        (0..=max_k).map(|k| self.partial(z, k, 0)).collect()
    }

    /// `|dbar xi| / |xi|` of the interpolant at `z`.
    pub fn dbar_residual(&self, z: Complex64) -> Result<f64> {
        let x = self.partial(z, 1, 0)?;
        let y = self.partial(z, 0, 1)?;
        let dbar = (&x + &y.scale(Complex64::i())).scale(Complex64::new(0.5, 0.0));
        Ok(dbar.norm() / self.eval(z)?.norm())
    }

    /// Parameters along `[a, b]` where the segment crosses grid lines, so each
    /// piece sees a single polynomial patch.
    fn breakpoints(&self, a: Complex64, b: Complex64) -> Vec<f64> {
        let (dx, dy) = self.spacing();
        let mut ts = vec![0.0, 1.0];
        for (from, to, origin, step, count) in [
            (a.re, b.re, self.lo.re, dx, self.grid.cols),
            (a.im, b.im, self.lo.im, dy, self.grid.rows),
        ] {
            if from == to {
                continue;
            }
            for line in 1..count - 1 {
                let t = (origin + line as f64 * step - from) / (to - from);
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

/// `f = Re(integral of xi)` along straight segments from a base point.
#[derive(Debug, Clone)]
pub struct IntegratedMap {
    xi: XiField,
    base: Complex64,
}

impl IntegratedMap {
    pub fn base_point(&self) -> Complex64 {
        self.base
    }

    /// The complex integral `integral_base^z xi dz`.
    pub fn integral(&self, z: Complex64) -> Result<ComplexVector> {
        if !self.xi.contains(z) {
            return Err(Error::OutsideDomain { z });
        }
        let ts = self.xi.breakpoints(self.base, z);
        let mut total = vec![Complex64::new(0.0, 0.0); self.xi.dim];
        for w in ts.windows(2) {
            let a = self.base + (z - self.base) * w[0];
            let b = self.base + (z - self.base) * w[1];
            let piece = integrate_segment(
                |t| Ok(self.xi.eval(t)?.into_entries()),
                a,
                b,
                QuadratureOptions::default(),
            )?;
            total.iter_mut().zip(piece).for_each(|(s, p)| *s += p);
        }
        Ok(ComplexVector::new(total))
    }

    pub fn eval(&self, z: Complex64) -> Result<Vec<f64>> {
        Ok(self.integral(z)?.re())
    }
}

/// Integrates the interpolated field from the domain's base point.
pub fn integrate_to_f(xi: &XiField, d: &Domain) -> Result<IntegratedMap> {
    let base = d.base_point();
    if !xi.contains(base) {
        return Err(Error::OutsideDomain { z: base });
    }
    Ok(IntegratedMap {
        xi: xi.clone(),
        base,
    })
}
