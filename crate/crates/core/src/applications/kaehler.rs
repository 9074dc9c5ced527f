use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{f_chain_at, surface_at, AlphaChain, FChainSample, DEFAULT_EPS_SINGULAR};
use crate::error::{Error, Result};
use crate::holo::RealExpr;
use crate::linalg::{numerical_rank, singular_values};
use crate::products::{dot_real, herm, sym, ComplexVector};
use crate::verify::SurfaceEvaluator;

/// Relative singular-value cut used for the Jacobian rank.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// `gamma(x, y)` and the normal-bundle coordinates `w_j = u_j + i v_j`, `j = 1..n-1`.
#[derive(Debug, Clone)]
pub struct KaehlerParams {
    gamma: RealExpr,
    gamma_x: RealExpr,
    gamma_y: RealExpr,
    pub w: Vec<Complex64>,
}

impl KaehlerParams {
    pub fn new(gamma: RealExpr, w: Vec<Complex64>) -> Self {
        let gamma_x = gamma.partial_x();
        let gamma_y = gamma.partial_y();
        Self {
            gamma,
            gamma_x,
            gamma_y,
            w,
        }
    }

    pub fn gamma(&self) -> &RealExpr {
        &self.gamma
    }

    pub fn with_w(&self, w: Vec<Complex64>) -> Self {
        Self { w, ..self.clone() }
    }

    /// `(gamma, gamma_x, gamma_y)` at `z`.
    fn gamma_jet(&self, z: Complex64) -> Result<(f64, f64, f64)> {
        let v = self.gamma.eval(z.re, z.im)?;
        let gx = self.gamma_x.eval(z.re, z.im)?;
        let gy = self.gamma_y.eval(z.re, z.im)?;
        if !(v.is_finite() && gx.is_finite() && gy.is_finite()) {
            return Err(Error::NonFinite { z });
        }
        Ok((v, gx, gy))
    }
}

fn check_shape(chain: &AlphaChain, p: &KaehlerParams) -> Result<()> {
    let n = chain.n();
    if n < 2 {
        return Err(Error::InvalidParameters("Kaehler parametrization requires n >= 2".into()));
    }
    if p.w.len() != n - 1 {
        return Err(Error::ShapeMismatch(format!(
            "expected {} normal coordinates w_j, found {}",
            n - 1,
            p.w.len()
        )));
    }
    Ok(())
}

/// `sum_j Re(w_j F_j) = sum_j (u_j Re F_j - v_j Im F_j)`.
pub(crate) fn normal_combination(sample: &FChainSample, w: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0; sample.frame(1).dim()];
    for (j, wj) in w.iter().enumerate() {
        let f = sample.frame(j + 1);
        for (o, c) in out.iter_mut().zip(f.entries()) {
            *o += (wj * c).re;
        }
    }
    out
}

/// Coefficient of the induced metric, `<d g, dbar g> = |<g, F_(n+1)>|^2 / |F_n|^2`.
pub fn metric_factor(sample: &FChainSample, g: &[f64]) -> f64 {
    let n = sample.n();
    let top = sym(&ComplexVector::from_real(g), sample.frame(n + 1));
    top.norm_sqr() / sample.norm_sq(n)
}

fn psi_from_sample(sample: &FChainSample, g: &[f64], p: &KaehlerParams) -> Result<Vec<f64>> {
    let n = sample.n();
    let (gamma, gx, gy) = p.gamma_jet(sample.z)?;
    let gamma_z = Complex64::new(0.5 * gx, -0.5 * gy);
    let metric = metric_factor(sample, g);
    // <g, conj F_(n+1)>
    let coupling = herm(&ComplexVector::from_real(g), sample.frame(n + 1));
    let scale = -2.0 / (metric * sample.norm_sq(n));
    let grad = sample.frame(n).scale(gamma_z * coupling * scale).re();
    let w = normal_combination(sample, &p.w);
    Ok((0..g.len()).map(|k| gamma * g[k] + grad[k] + w[k]).collect())
}

/// `Psi(z, w) = gamma g + g_* grad(gamma) + sum_j Re(w_j F_j)` from the closed
/// frame formula.
pub fn kaehler_point(chain: &AlphaChain, p: &KaehlerParams, z: Complex64) -> Result<Vec<f64>> {
    check_shape(chain, p)?;
    let sample = f_chain_at(chain, z, DEFAULT_EPS_SINGULAR)?;
    let g = surface_at(&sample)?;
    psi_from_sample(&sample, &g, p)
}

/// The same map built from finite-difference tangent vectors `g_x, g_y` and the
/// inverse of their Gram matrix. Returns the relative deviation from the closed formula.
pub fn kaehler_formula_crosscheck(chain: &AlphaChain, p: &KaehlerParams, z: Complex64, fd_step: f64) -> Result<f64> {
    check_shape(chain, p)?;
    let closed = kaehler_point(chain, p, z)?;
    let surface = SurfaceEvaluator::from_chain(chain, DEFAULT_EPS_SINGULAR).with_fd_step(fd_step)?;
    let partials = surface.partials(z, 1)?;
    let g = partials.value().re();
    let tx = partials.get(1, 0).re();
    let ty = partials.get(0, 1).re();
    let (e, f, gg) = (dot_real(&tx, &tx), dot_real(&tx, &ty), dot_real(&ty, &ty));
    let det = e * gg - f * f;
    if !(det > 0.0) {
        return Err(Error::DegenerateDifferential { z });
    }
    let (gamma, gx, gy) = p.gamma_jet(z)?;
    let a = (gg * gx - f * gy) / det;
    let b = (e * gy - f * gx) / det;
    let sample = f_chain_at(chain, z, DEFAULT_EPS_SINGULAR)?;
    let w = normal_combination(&sample, &p.w);
    let built: Vec<f64> = (0..g.len())
        .map(|k| gamma * g[k] + a * tx[k] + b * ty[k] + w[k])
        .collect();
    let diff: f64 = closed.iter().zip(&built).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(diff.sqrt() / dot_real(&built, &built).sqrt().max(f64::MIN_POSITIVE))
}

/// Largest mixed second difference of `Psi` in the real coordinates `(u_j, v_j)`,
/// relative to the size of `Psi`. Zero up to rounding since `Psi` is affine in `w`.
pub fn kaehler_affine_defect(chain: &AlphaChain, p: &KaehlerParams, z: Complex64, step: f64) -> Result<f64> {
    check_shape(chain, p)?;
    let sample = f_chain_at(chain, z, DEFAULT_EPS_SINGULAR)?;
    let g = surface_at(&sample)?;
    let m = 2 * p.w.len();
    let shifted = |moves: &[(usize, f64)]| {
        let mut w = p.w.clone();
        for &(i, d) in moves {
            if i % 2 == 0 {
                w[i / 2].re += d;
            } else {
                w[i / 2].im += d;
            }
        }
        psi_from_sample(&sample, &g, &p.with_w(w))
    };
    let base = shifted(&[])?;
    let mut size = dot_real(&base, &base).sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            let pp = shifted(&[(i, step), (j, step)])?;
            let pi = shifted(&[(i, step)])?;
            let pj = shifted(&[(j, step)])?;
            size = size.max(dot_real(&pp, &pp).sqrt());
            for k in 0..base.len() {
                worst = worst.max((pp[k] - pi[k] - pj[k] + base[k]).abs());
            }
        }
    }
    Ok(worst / size.max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionCell {
    pub z: [f64; 2],
    pub w: Vec<[f64; 2]>,
    /// `None` when the chain is singular at `z`.
    pub rank: Option<usize>,
    pub singular_values: Vec<f64>,
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionReport {
    /// Number of real parameters, `2n`.
    pub parameters: usize,
    pub cells: Vec<ImmersionCell>,
    pub regular_count: usize,
    pub regular_fraction: f64,
}

/// Finite-difference Jacobian of `Psi` in `(x, y, u_1, v_1, ...)`.
pub fn kaehler_jacobian(chain: &AlphaChain, p: &KaehlerParams, z: Complex64, fd_step: f64) -> Result<Vec<Vec<f64>>> {
    check_shape(chain, p)?;
    let at = |z: Complex64, w: Vec<Complex64>| kaehler_point(chain, &p.with_w(w), z);
    let central = |plus: Vec<f64>, minus: Vec<f64>| -> Vec<f64> {
        plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * fd_step)).collect()
    };
    let mut columns = Vec::with_capacity(2 * chain.n());
    for dz in [Complex64::new(fd_step, 0.0), Complex64::new(0.0, fd_step)] {
        columns.push(central(at(z + dz, p.w.clone())?, at(z - dz, p.w.clone())?));
    }
    for j in 0..p.w.len() {
        for dw in [Complex64::new(fd_step, 0.0), Complex64::new(0.0, fd_step)] {
            let mut plus = p.w.clone();
            let mut minus = p.w.clone();
            plus[j] += dw;
            minus[j] -= dw;
            columns.push(central(at(z, plus)?, at(z, minus)?));
        }
    }
    Ok(columns)
}

/// Rank of the Jacobian at every `(z, w)` combination; a cell is regular when
/// the rank is the full `2n`.
pub fn kaehler_immersion_check(
    chain: &AlphaChain,
    gamma: &RealExpr,
    z_points: &[Complex64],
    w_points: &[Vec<Complex64>],
    fd_step: f64,
) -> Result<ImmersionReport> {
    let params = KaehlerParams::new(gamma.clone(), vec![Complex64::new(0.0, 0.0); chain.n().saturating_sub(1)]);
    check_shape(chain, &params)?;
    for w in w_points {
        check_shape(chain, &params.with_w(w.clone()))?;
    }
    let full = 2 * chain.n();
    let jobs: Vec<(Complex64, &Vec<Complex64>)> =
        z_points.iter().flat_map(|z| w_points.iter().map(move |w| (*z, w))).collect();
    let cells: Vec<ImmersionCell> = jobs
        .into_par_iter()
        .map(|(z, w)| {
            let cols = kaehler_jacobian(chain, &params.with_w(w.clone()), z, fd_step);
            let (rank, sv) = match cols {
                Ok(cols) => (Some(numerical_rank(&cols, RANK_TOLERANCE)), singular_values(&cols)),
                Err(_) => (None, Vec::new()),
            };
            ImmersionCell {
                z: [z.re, z.im],
                w: w.iter().map(|c| [c.re, c.im]).collect(),
                rank,
                regular: rank == Some(full),
                singular_values: sv,
            }
        })
        .collect();
    let regular_count = cells.iter().filter(|c| c.regular).count();
    let regular_fraction = if cells.is_empty() {
        0.0
    } else {
        regular_count as f64 / cells.len() as f64
    };
    Ok(ImmersionReport {
        parameters: full,
        cells,
        regular_count,
        regular_fraction,
    })
}
