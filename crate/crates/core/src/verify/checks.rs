//! Pointwise residuals. Every function returns a dimensionless number that
//! vanishes for exact data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evaluator::SurfaceEvaluator;
use crate::chain::{f_chain_at, AlphaChain, FChainSample};
use crate::error::{Error, Result};
use crate::fd::{self, wirtinger_pair};
use crate::linalg::{project_out_real, subspace_distance};
use crate::products::{herm, sym, ComplexVector};

/// Largest order for which finite-difference Calabi checks are meaningful.
pub const MAX_CALABI_ORDER: usize = 4;

fn real_parts(v: &ComplexVector) -> Vec<f64> {
    v.re()
}

/// Residual of the harmonic-map equation into the sphere: the part of
/// `d dbar g` outside `span{g, g_x, g_y}`, over `|g_x|^2 + |g_y|^2`.
pub fn minimality_residual(g: &SurfaceEvaluator, z: Complex64) -> Result<f64> {
    let p = g.partials(z, 2)?;
    let gx = real_parts(p.get(1, 0));
    let gy = real_parts(p.get(0, 1));
    let energy: f64 = gx.iter().chain(&gy).map(|x| x * x).sum();
    if energy <= 1e-24 {
        return Err(Error::DegenerateDifferential { z });
    }
    let lap = p.wirtinger(1, 1);
    let normal = project_out_real(&lap, &[real_parts(p.value()), gx, gy]);
    Ok(normal.norm() / energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalabiEntry {
    pub j: usize,
    pub k: usize,
    /// `|<d^j g, d^k g>|`
    pub value: f64,
    /// `value / (|d^j g| |d^k g|)`, zero when either factor vanishes.
    pub relative: f64,
}

/// `|<d^j g, d^k g>|` for `k <= j` and `0 < j + k <= max_order`.
pub fn calabi_check(g: &SurfaceEvaluator, max_order: usize, z: Complex64) -> Result<Vec<CalabiEntry>> {
    if max_order == 0 || max_order > MAX_CALABI_ORDER {
        return Err(Error::OutOfRange {
            what: "Calabi order",
            detail: format!("{max_order} not in 1..={MAX_CALABI_ORDER}"),
        });
    }
    let p = g.partials(z, max_order)?;
    let jets = p.holomorphic_jets();
    let mut out = Vec::new();
    for total in 1..=max_order {
        for k in 0..=total / 2 {
            let j = total - k;
            let value = sym(&jets[j], &jets[k]).norm();
            let scale = jets[j].norm() * jets[k].norm();
            out.push(CalabiEntry {
                j,
                k,
                value,
                relative: if scale > 0.0 { value / scale } else { 0.0 },
            });
        }
    }
    Ok(out)
}

/// `<g, F_(n+1)>` with `g` real.
fn g_dot_top(sample: &FChainSample, g: &[f64]) -> Complex64 {
    sym(&ComplexVector::from_real(g), sample.frame(sample.n() + 1))
}

/// The `(s+1)`-th fundamental form on `(d, ..., d)` from the frame:
/// `(-1)^(s+1) <g, F_(n+1)> / |F_(n-s)|^2 conj(F_(n-s))`, for `0 <= s <= n-1`.
/// At `s = 0` this is `d g` itself.
pub fn chain_fundamental_form(sample: &FChainSample, g: &[f64], s: usize) -> Result<ComplexVector> {
    let n = sample.n();
    if s >= n {
        return Err(Error::OutOfRange {
            what: "fundamental form order",
            detail: format!("s = {s} not in 0..={}", n - 1),
        });
    }
    if sample.singular {
        return Err(Error::SingularPoint {
            z: sample.z,
            reason: "degenerate frame".into(),
        });
    }
    let sign = if (s + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let coef = g_dot_top(sample, g) * sign / sample.norm_sq(n - s);
    Ok(sample.frame(n - s).conj().scale(coef))
}

/// `|<a, a>| / |a|^2` for every order `s = 0..n-1`: circular curvature ellipses.
pub fn ellipse_circularity(sample: &FChainSample, g: &[f64]) -> Result<Vec<f64>> {
    (0..sample.n())
        .map(|s| {
            let a = chain_fundamental_form(sample, g, s)?;
            Ok(sym(&a, &a).norm() / a.norm_sq())
        })
        .collect()
}

/// Relative deviation of the finite-difference `d g` from the frame formula.
pub fn tangent_formula_residual(g: &SurfaceEvaluator, sample: &FChainSample) -> Result<f64> {
    let centre = g.eval(sample.z)?;
    let formula = chain_fundamental_form(sample, &centre, 0)?;
    let p = g.partials(sample.z, 1)?;
    let fd = p.wirtinger(1, 0);
    Ok((&fd - &formula).norm() / formula.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalSpaceCheck {
    /// Relative deviation of the normal part of `d^2 g` from the frame formula.
    pub value: f64,
    /// Largest principal angle between `span{a, conj a}` and `span{F_(n-1), conj F_(n-1)}`.
    pub angle: f64,
}

/// Second fundamental form on `(d, d)`: the part of `d^2 g` normal to the
/// surface in the sphere, compared with the frame formula and its span.
pub fn normal_space_check(g: &SurfaceEvaluator, sample: &FChainSample) -> Result<NormalSpaceCheck> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "normal space order",
            detail: "the first normal space needs n >= 2".into(),
        });
    }
    let p = g.partials(sample.z, 2)?;
    let centre = real_parts(p.value());
    let a_fd = project_out_real(
        &p.wirtinger(2, 0),
        &[centre.clone(), real_parts(p.get(1, 0)), real_parts(p.get(0, 1))],
    );
    let a = chain_fundamental_form(sample, &centre, 1)?;
    let value = (&a_fd - &a).norm() / a.norm();
    let f = sample.frame(n - 1);
    let angle = subspace_distance(&[a_fd.clone(), a_fd.conj()], &[f.clone(), f.conj()], 1e-8);
    Ok(NormalSpaceCheck { value, angle })
}

/// Frame identities that hold exactly up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameResiduals {
    /// `max |<F_j, F_k>| / (|F_j| |F_k|)`, `1 <= j, k <= n`.
    pub isotropy: f64,
    /// `max |<F_j, conj F_k>| / (|F_j| |F_k|)`, `j != k`.
    pub hermitian_orthogonality: f64,
    /// Largest 2x2 minor of `(F_(n+1), conj F_(n+1))` over `|F_(n+1)|^2`.
    pub collinearity: f64,
}

pub fn frame_residuals(sample: &FChainSample) -> FrameResiduals {
    let n = sample.n();
    let mut iso: f64 = 0.0;
    let mut orth: f64 = 0.0;
    for j in 1..=n + 1 {
        for k in j..=n + 1 {
            let scale = (sample.norm_sq(j) * sample.norm_sq(k)).sqrt();
            if k <= n {
                iso = iso.max(sym(sample.frame(j), sample.frame(k)).norm() / scale);
            }
            if j != k {
                orth = orth.max(herm(sample.frame(j), sample.frame(k)).norm() / scale);
            }
        }
    }
    let top = sample.frame(n + 1);
    let mut minor: f64 = 0.0;
    for a in 0..top.dim() {
        for b in a + 1..top.dim() {
            // a_a conj(a_b) - a_b conj(a_a) = 2i Im(a_a conj(a_b))
            minor = minor.max(2.0 * (top[a] * top[b].conj()).im.abs());
        }
    }
    FrameResiduals {
        isotropy: iso,
        hermitian_orthogonality: orth,
        collinearity: minor / sample.norm_sq(n + 1),
    }
}

/// `d conj(F_s) + |F_s|^2 / |F_(s-1)|^2 conj(F_(s-1))` for `2 <= s <= n`, by
/// central differences, relative to `|F_s|^2 / |F_(s-1)|`. `None` for `n = 1`.
pub fn fbar_residual(chain: &AlphaChain, z: Complex64, h: f64, eps_singular: f64) -> Result<Option<f64>> {
    let n = chain.n();
    if n < 2 {
        return Ok(None);
    }
    fd::check_stencil(chain.domain(), z, h, 1)?;
    let centre = f_chain_at(chain, z, eps_singular)?;
    if centre.singular {
        return Err(Error::SingularPoint {
            z,
            reason: "degenerate frame".into(),
        });
    }
    let mut worst: f64 = 0.0;
    for s in 2..=n {
        let (d, _) = wirtinger_pair(|w| Ok(f_chain_at(chain, w, eps_singular)?.frame(s).conj()), z, h)?;
        let ratio = centre.norm_sq(s) / centre.norm_sq(s - 1);
        let mut r = d;
        r.axpy(Complex64::new(ratio, 0.0), &centre.frame(s - 1).conj());
        worst = worst.max(r.norm() / (ratio * centre.norm_sq(s - 1).sqrt()));
    }
    Ok(Some(worst))
}

/// Second fundamental form of the isotropic surface `f = Re(phi_n)` in
/// `R^(2n+1)`: `2 a_f(d, d)` should equal `F_2`. Returns the relative deviation.
pub fn isotropic_lift_residual(chain: &AlphaChain, z: Complex64, h: f64, eps_singular: f64) -> Result<f64> {
    let n = chain.n();
    fd::check_stencil(chain.domain(), z, h, 2)?;
    let sample = f_chain_at(chain, z, eps_singular)?;
    if sample.singular {
        return Err(Error::SingularPoint {
            z,
            reason: "degenerate frame".into(),
        });
    }
    let p = fd::partials(
        |w| Ok(ComplexVector::from_real(&chain.phi(n, w)?.re())),
        z,
        2,
        h,
    )?;
    let a = project_out_real(&p.wirtinger(2, 0), &[real_parts(p.get(1, 0)), real_parts(p.get(0, 1))]);
    let f2 = sample.frame(2);
    Ok((&a.scale(Complex64::new(2.0, 0.0)) - f2).norm() / f2.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{surface_at, IntegrationConstants, Perturbation, DEFAULT_EPS_SINGULAR};
    use crate::holo::Domain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_chain(n: usize) -> AlphaChain {
        AlphaChain::from_strs(&vec!["1"; n], IntegrationConstants::zeros(n), Domain::centered_square(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn minimality_of_chain_surface_and_a_counterexample() {
        let g = SurfaceEvaluator::from_chain(&unit_chain(1), DEFAULT_EPS_SINGULAR);
        let r = minimality_residual(&g, c(0.4, 0.1)).unwrap();
        assert!(r <= 1e-5, "{r}");

        let d = Domain::centered_square(1.0).unwrap();
        let bumpy = SurfaceEvaluator::new(5, d, d.default_fd_step(), |z: Complex64| {
            let v = [1.0, z.re, z.im, z.re * z.re, z.im * z.im];
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ok(v.iter().map(|x| x / norm).collect())
        })
        .unwrap();
        let r = minimality_residual(&bumpy, c(0.3, -0.2)).unwrap();
        assert!(r > 1e-2, "{r}");

        let flat = SurfaceEvaluator::new(3, d, d.default_fd_step(), |_| Ok(vec![0.0, 0.0, 1.0])).unwrap();
        assert!(matches!(
            minimality_residual(&flat, c(0.0, 0.0)),
            Err(Error::DegenerateDifferential { .. })
        ));
    }

    #[test]
    fn calabi_table_shape_and_unit_norm_entry() {
        let g = SurfaceEvaluator::from_chain(&unit_chain(2), DEFAULT_EPS_SINGULAR);
        let table = calabi_check(&g, 4, c(0.2, 0.3)).unwrap();
        let pairs: Vec<(usize, usize)> = table.iter().map(|e| (e.j, e.k)).collect();
        assert_eq!(pairs, vec![(1, 0), (2, 0), (1, 1), (3, 0), (2, 1), (4, 0), (3, 1), (2, 2)]);
        assert!(table[0].value < 1e-8);
        for e in &table {
            assert!(e.value <= 1e-4, "({}, {}) {}", e.j, e.k, e.value);
        }
        assert!(calabi_check(&g, 5, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn fundamental_form_orders() {
        let chain = unit_chain(2);
        let s = f_chain_at(&chain, c(0.1, 0.2), DEFAULT_EPS_SINGULAR).unwrap();
        let g = surface_at(&s).unwrap();
        for order in 0..2 {
            let a = chain_fundamental_form(&s, &g, order).unwrap();
            assert!(sym(&a, &a).norm() <= 1e-9 * a.norm_sq());
        }
        assert!(matches!(
            chain_fundamental_form(&s, &g, 2),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn tangent_formula_matches_finite_differences() {
        let chain = unit_chain(2);
        let g = SurfaceEvaluator::from_chain(&chain, DEFAULT_EPS_SINGULAR);
        let s = f_chain_at(&chain, c(0.35, -0.15), DEFAULT_EPS_SINGULAR).unwrap();
        let r = tangent_formula_residual(&g, &s).unwrap();
        assert!(r <= 1e-5, "{r}");
        let ns = normal_space_check(&g, &s).unwrap();
        assert!(ns.value <= 1e-4 && ns.angle <= 1e-4, "{ns:?}");
    }

    #[test]
    fn frame_identities_and_fault_injection() {
        let chain = unit_chain(3);
        let s = f_chain_at(&chain, c(-0.3, 0.6), DEFAULT_EPS_SINGULAR).unwrap();
        let r = frame_residuals(&s);
        assert!(r.isotropy <= 1e-9 && r.hermitian_orthogonality <= 1e-9 && r.collinearity <= 1e-9, "{r:?}");

        let bad = unit_chain(3)
            .with_perturbation(Perturbation { index: 2, magnitude: 1e-3 })
            .unwrap();
        let s = f_chain_at(&bad, c(-0.3, 0.6), DEFAULT_EPS_SINGULAR).unwrap();
        assert!(frame_residuals(&s).hermitian_orthogonality > 1e-6);
    }

    #[test]
    fn fbar_and_isotropic_lift() {
        let h = 1e-4;
        assert_eq!(fbar_residual(&unit_chain(1), c(0.0, 0.0), h, DEFAULT_EPS_SINGULAR).unwrap(), None);
        for n in 2..=3 {
            let r = fbar_residual(&unit_chain(n), c(0.2, -0.4), h, DEFAULT_EPS_SINGULAR)
                .unwrap()
                .unwrap();
            assert!(r <= 1e-5, "n = {n}: {r}");
        }
        for n in 1..=3 {
            let r = isotropic_lift_residual(&unit_chain(n), c(0.25, 0.5), h, DEFAULT_EPS_SINGULAR).unwrap();
            assert!(r <= 1e-4, "n = {n}: {r}");
        }
    }
}
