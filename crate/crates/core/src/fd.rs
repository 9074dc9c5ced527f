//! Central finite differences on the plane and Wirtinger combinations.
//!
//! Mixed partials `d_x^a d_y^b` use the tensor product of centred differences
//! with step `h_k` for total order `k = a + b`. First-order partials use plain
//! central differences at the base step; higher orders add one level of
//! Richardson extrapolation. The step grows with the order,
//! `h_k = base * 10^((k - 1) / 2)`, to stay above the rounding floor.

use std::cell::RefCell;
use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holo::Domain;
use crate::products::ComplexVector;

pub fn step_for_order(base: f64, order: usize) -> f64 {
    if order <= 1 {
        base
    } else {
        base * 10f64.powf((order as f64 - 1.0) / 2.0)
    }
}

/// Largest distance from the centre touched when computing partials up to `max_order`.
pub fn stencil_radius(base: f64, max_order: usize) -> f64 {
    (1..=max_order.max(1))
        .map(|k| 0.5 * k as f64 * step_for_order(base, k))
        .fold(0.0, f64::max)
}

pub fn check_stencil(domain: &Domain, z: Complex64, base: f64, max_order: usize) -> Result<()> {
    if domain.margin(z) < stencil_radius(base, max_order) {
        return Err(Error::StencilOutOfDomain { z });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// All mixed partials `d_x^a d_y^b f (z)` with `a + b <= max_order`.
#[derive(Debug, Clone)]
pub struct Partials {
    max_order: usize,
    values: HashMap<(usize, usize), ComplexVector>,
}

impl Partials {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, a: usize, b: usize) -> &ComplexVector {
        &self.values[&(a, b)]
    }

    pub fn value(&self) -> &ComplexVector {
        self.get(0, 0)
    }

    /// `d^p dbar^q f` with `d = (d_x - i d_y)/2` and `dbar = (d_x + i d_y)/2`.
    pub fn wirtinger(&self, p: usize, q: usize) -> ComplexVector {
        assert!(p + q <= self.max_order, "order {} exceeds {}", p + q, self.max_order);
        // coefficients of d_y^b in (1 - i t)^p (1 + i t)^q
        let mut coef = vec![Complex64::new(1.0, 0.0)];
        for (count, sign) in [(p, -1.0), (q, 1.0)] {
            for _ in 0..count {
                let mut next = vec![Complex64::new(0.0, 0.0); coef.len() + 1];
                for (b, c) in coef.iter().enumerate() {
                    next[b] += c;
                    next[b + 1] += c * Complex64::new(0.0, sign);
                }
                coef = next;
            }
        }
        let k = p + q;
        let scale = 0.5f64.powi(k as i32);
        let mut out = ComplexVector::zeros(self.value().dim());
        for (b, c) in coef.iter().enumerate() {
            out.axpy(c * scale, self.get(k - b, b));
        }
        out
    }

    /// `d^k f` for `k = 0..=max_order`.
    pub fn holomorphic_jets(&self) -> Vec<ComplexVector> {
        (0..=self.max_order).map(|k| self.wirtinger(k, 0)).collect()
    }
}

fn tensor_difference<F>(f: &F, z: Complex64, a: usize, b: usize, h: f64) -> Result<ComplexVector>
where
    F: Fn(Complex64) -> Result<ComplexVector>,
{
    let mut acc: Option<ComplexVector> = None;
    for j in 0..=a {
        let x = (a as f64 / 2.0 - j as f64) * h;
        let wx = binomial(a, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        for l in 0..=b {
            let y = (b as f64 / 2.0 - l as f64) * h;
            let wy = binomial(b, l) * if l % 2 == 0 { 1.0 } else { -1.0 };
            let v = f(z + Complex64::new(x, y))?;
            match &mut acc {
                Some(s) => s.axpy(Complex64::new(wx * wy, 0.0), &v),
                None => acc = Some(v.scale(Complex64::new(wx * wy, 0.0))),
            }
        }
    }
    let denom = h.powi((a + b) as i32);
    Ok(acc
        .expect("stencil has at least one point")
        .scale(Complex64::new(1.0 / denom, 0.0)))
}

/// Mixed partials of `f` at `z` up to `max_order`. Evaluations are cached per call.
pub fn partials<F>(f: F, z: Complex64, max_order: usize, base_step: f64) -> Result<Partials>
where
    F: Fn(Complex64) -> Result<ComplexVector>,
{
    let cache: RefCell<HashMap<(u64, u64), ComplexVector>> = RefCell::new(HashMap::new());
    let cached = |w: Complex64| -> Result<ComplexVector> {
        let key = (w.re.to_bits(), w.im.to_bits());
        if let Some(v) = cache.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = f(w)?;
        cache.borrow_mut().insert(key, v.clone());
        Ok(v)
    };
    let mut values = HashMap::new();
    values.insert((0, 0), cached(z)?);
    for k in 1..=max_order {
        let h = step_for_order(base_step, k);
        for b in 0..=k {
            let a = k - b;
            let d = if k == 1 {
                tensor_difference(&cached, z, a, b, h)?
            } else {
                let coarse = tensor_difference(&cached, z, a, b, h)?;
                let fine = tensor_difference(&cached, z, a, b, 0.5 * h)?;
                (&fine.scale(Complex64::new(4.0 / 3.0, 0.0))) - &coarse.scale(Complex64::new(1.0 / 3.0, 0.0))
            };
            values.insert((a, b), d);
        }
    }
    Ok(Partials { max_order, values })
}

/// First-order Wirtinger pair `(d f, dbar f)` by central differences.
pub fn wirtinger_pair<F>(f: F, z: Complex64, h: f64) -> Result<(ComplexVector, ComplexVector)>
where
    F: Fn(Complex64) -> Result<ComplexVector>,
{
    let p = partials(f, z, 1, h)?;
    Ok((p.wirtinger(1, 0), p.wirtinger(0, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn holomorphic_map_has_vanishing_dbar() {
        let f = |w: Complex64| Ok(ComplexVector::new(vec![w.exp() * w, w.sin()]));
        let z = c(0.3, -0.2);
        let p = partials(f, z, 4, 1e-4).unwrap();
        let dbar = p.wirtinger(0, 1);
        assert!(dbar.norm() < 1e-8, "{}", dbar.norm());
        // d^k sin = sin(z + k pi/2)
        for k in 1..=4 {
            let d = p.wirtinger(k, 0);
            let want = (z + k as f64 * std::f64::consts::FRAC_PI_2).sin();
            let tol = [0.0, 1e-8, 1e-7, 1e-6, 1e-5][k];
            assert!((d[1] - want).norm() < tol, "k = {k}: {} vs {want}", d[1]);
        }
    }

    #[test]
    fn mixed_wirtinger_of_modulus_squared() {
        // d dbar |w|^2 = 1, d |w|^2 = conj(w)
        let f = |w: Complex64| Ok(ComplexVector::new(vec![Complex64::new(w.norm_sqr(), 0.0)]));
        let z = c(0.7, 0.4);
        let p = partials(f, z, 2, 1e-4).unwrap();
        assert!((p.wirtinger(1, 1)[0] - 1.0).norm() < 1e-8);
        assert!((p.wirtinger(1, 0)[0] - z.conj()).norm() < 1e-8);
    }

    #[test]
    fn stencil_check() {
        let d = Domain::centered_square(1.0).unwrap();
        assert!(check_stencil(&d, c(0.0, 0.0), 1e-3, 4).is_ok());
        assert!(matches!(
            check_stencil(&d, c(0.9999, 0.0), 1e-3, 2),
            Err(Error::StencilOutOfDomain { .. })
        ));
    }
}
