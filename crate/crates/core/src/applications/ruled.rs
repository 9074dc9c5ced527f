use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kaehler::normal_combination;
use crate::chain::{f_chain_at, surface_at, AlphaChain, DEFAULT_EPS_SINGULAR};
use crate::error::{Error, Result};
use crate::fd::step_for_order;
use crate::linalg::project_out_real;
use crate::products::{dot_real, ComplexVector};

/// Gram determinants below this fraction of `(trace / m)^m` count as degenerate.
const GRAM_TOLERANCE: f64 = 1e-10;

/// Ruling coordinates `w_j = u_j + i v_j`, `j = 1..n-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuledParams {
    pub w: Vec<Complex64>,
}

/// `sin(x) / x`, continuous at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn check_shape(chain: &AlphaChain, p: &RuledParams) -> Result<()> {
    let n = chain.n();
    if n < 3 {
        return Err(Error::InvalidParameters(format!(
            "ruled submanifold requires n >= 3, got n = {n}"
        )));
    }
    if p.w.len() != n - 2 {
        return Err(Error::ShapeMismatch(format!(
            "expected {} ruling coordinates w_j, found {}",
            n - 2,
            p.w.len()
        )));
    }
    Ok(())
}

/// `exp_g(w) = cos|w| g + sin|w| / |w| w` with `w = sum_j Re(w_j F_j)`.
pub fn ruled_point(chain: &AlphaChain, p: &RuledParams, z: Complex64) -> Result<Vec<f64>> {
    check_shape(chain, p)?;
    let sample = f_chain_at(chain, z, DEFAULT_EPS_SINGULAR)?;
    let g = surface_at(&sample)?;
    let w = normal_combination(&sample, &p.w);
    let len = dot_real(&w, &w).sqrt();
    let (c, h) = (len.cos(), sinc(len));
    Ok(g.iter().zip(&w).map(|(a, b)| c * a + h * b).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuledProbe {
    /// `|H|` with `H = (1/m) trace_G (d_i d_j F)^normal`, `m = 2n - 2`.
    pub mean_curvature: f64,
    /// Largest `|(d_i d_j F)^normal| / sqrt(G_ii G_jj)` over ruling directions.
    pub ruling_second_form: f64,
    /// `det G / (trace G / m)^m`.
    pub gram_ratio: f64,
}

/// Finite-difference mean curvature of the ruled submanifold in the sphere at
/// parameters `(z, w)`, over all `2n - 2` real coordinates `(x, y, u_1, v_1, ...)`.
pub fn ruled_minimality_probe(chain: &AlphaChain, p: &RuledParams, z: Complex64, fd_step: f64) -> Result<RuledProbe> {
    check_shape(chain, p)?;
    let m = 2 * chain.n() - 2;
    let at = |t: &[f64]| -> Result<Vec<f64>> {
        let w: Vec<Complex64> = (0..p.w.len())
            .map(|j| p.w[j] + Complex64::new(t[2 + 2 * j], t[3 + 2 * j]))
            .collect();
        ruled_point(chain, &RuledParams { w }, z + Complex64::new(t[0], t[1]))
    };
    let h = step_for_order(fd_step, 2);
    let e = |i: usize, s: f64| {
        let mut t = vec![0.0; m];
        t[i] += s;
        t
    };
    let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<f64>>();
    let centre = at(&vec![0.0; m])?;
    let dim = centre.len();

    // first and second derivatives with one Richardson step
    let derivs = |h: f64| -> Result<(Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>)> {
        let mut first = Vec::with_capacity(m);
        let mut second = vec![vec![Vec::new(); m]; m];
        for i in 0..m {
            let plus = at(&e(i, h))?;
            let minus = at(&e(i, -h))?;
            first.push((0..dim).map(|k| (plus[k] - minus[k]) / (2.0 * h)).collect());
            second[i][i] = (0..dim)
                .map(|k| (plus[k] - 2.0 * centre[k] + minus[k]) / (h * h))
                .collect();
            for j in 0..i {
                let pp = at(&add(&e(i, h), &e(j, h)))?;
                let pm = at(&add(&e(i, h), &e(j, -h)))?;
                let mp = at(&add(&e(i, -h), &e(j, h)))?;
                let mm = at(&add(&e(i, -h), &e(j, -h)))?;
                let v: Vec<f64> = (0..dim)
                    .map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h))
                    .collect();
                second[i][j] = v.clone();
                second[j][i] = v;
            }
        }
        Ok((first, second))
    };
    let (f1, s1) = derivs(h)?;
    let (f2, s2) = derivs(0.5 * h)?;
    let extrapolate = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    };
    let tangents: Vec<Vec<f64>> = (0..m).map(|i| extrapolate(&f1[i], &f2[i])).collect();

    let gram = DMatrix::from_fn(m, m, |i, j| dot_real(&tangents[i], &tangents[j]));
    let trace = gram.trace();
    let gram_ratio = gram.determinant() / (trace / m as f64).powi(m as i32);
    if !(gram_ratio > GRAM_TOLERANCE) {
        return Err(Error::SingularPoint {
            z,
            reason: format!("degenerate metric, Gram ratio {gram_ratio:.3e}"),
        });
    }
    let inverse = gram.clone().try_inverse().ok_or(Error::DegenerateDifferential { z })?;

    let mut span = vec![centre.clone()];
    span.extend(tangents.iter().cloned());
    let normal = |i: usize, j: usize| -> Vec<f64> {
        let v = extrapolate(&s1[i][j], &s2[i][j]);
        project_out_real(&ComplexVector::from_real(&v), &span).re()
    };
    let mut mean = vec![0.0; dim];
    let mut ruling: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let b = normal(i, j);
            for k in 0..dim {
                mean[k] += inverse[(i, j)] * b[k];
            }
            if i >= 2 && j >= 2 {
                let size = dot_real(&b, &b).sqrt() / (gram[(i, i)] * gram[(j, j)]).sqrt();
                ruling = ruling.max(size);
            }
        }
    }
    let mean_curvature = dot_real(&mean, &mean).sqrt() / m as f64;
    Ok(RuledProbe {
        mean_curvature,
        ruling_second_form: ruling,
        gram_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::IntegrationConstants;
    use crate::holo::Domain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_chain(n: usize) -> AlphaChain {
        AlphaChain::from_strs(&vec!["1"; n], IntegrationConstants::zeros(n), Domain::centered_square(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_ruling_is_the_surface() {
        let chain = unit_chain(3);
        let z = c(0.2, 0.1);
        let g = crate::chain::surface_point(&chain, z, DEFAULT_EPS_SINGULAR).unwrap();
        assert_eq!(ruled_point(&chain, &RuledParams { w: vec![c(0.0, 0.0)] }, z).unwrap(), g);
    }

    #[test]
    fn unit_norm_and_great_circles() {
        let chain = unit_chain(3);
        let z = c(-0.4, 0.3);
        let g = crate::chain::surface_point(&chain, z, DEFAULT_EPS_SINGULAR).unwrap();
        let dir = c(0.3, -0.7);
        let unit = ruled_point(&chain, &RuledParams { w: vec![dir] }, z).unwrap();
        for t in [0.0, 0.2, 1.0, 3.0] {
            let p = ruled_point(&chain, &RuledParams { w: vec![dir * t] }, z).unwrap();
            assert!((dot_real(&p, &p).sqrt() - 1.0).abs() < 1e-12);
            // p stays in the plane of g and the ruling direction
            let ortho: Vec<f64> = {
                let gu = dot_real(&unit, &g);
                unit.iter().zip(&g).map(|(a, b)| a - gu * b).collect()
            };
            let residual: Vec<f64> = {
                let a = dot_real(&p, &g);
                let b = dot_real(&p, &ortho) / dot_real(&ortho, &ortho);
                p.iter().zip(&g).zip(&ortho).map(|((x, y), o)| x - a * y - b * o).collect()
            };
            assert!(dot_real(&residual, &residual).sqrt() < 1e-12);
        }
    }

    #[test]
    fn needs_three_levels() {
        let r = ruled_point(&unit_chain(2), &RuledParams { w: vec![] }, c(0.0, 0.0));
        match r {
            Err(Error::InvalidParameters(m)) => assert!(m.contains("requires n >= 3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn probe_is_minimal_with_geodesic_rulings() {
        let chain = unit_chain(3);
        let probe = ruled_minimality_probe(&chain, &RuledParams { w: vec![c(0.0, 0.0)] }, c(0.25, -0.1), 1e-4).unwrap();
        assert!(probe.ruling_second_form <= 1e-6, "{probe:?}");
        assert!(probe.mean_curvature <= 1e-3, "{probe:?}");
        let probe = ruled_minimality_probe(&chain, &RuledParams { w: vec![c(0.02, 0.03)] }, c(0.25, -0.1), 1e-4).unwrap();
        assert!(probe.mean_curvature <= 1e-3, "{probe:?}");
    }
}
