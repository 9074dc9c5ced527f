use num_complex::Complex64;

use super::alpha::AlphaChain;
use crate::error::{Error, Result};
use crate::fd::{check_stencil, wirtinger_pair};
use crate::products::{herm, ComplexVector};

pub const DEFAULT_EPS_SINGULAR: f64 = 1e-12;

/// The frame `F_1, ..., F_(n+1)` at one point, with the holomorphic jets it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FChainSample {
    pub z: Complex64,
    /// `d^k F_1 (z)` for `k = 0..=n`.
    pub jets: Vec<ComplexVector>,
    /// `F_1 ... F_(n+1)`, stored zero-based.
    pub f: Vec<ComplexVector>,
    /// `|F_s|^2`, zero-based like `f`.
    pub norms_sq: Vec<f64>,
    pub singular: bool,
    pub eps_singular: f64,
}

impl FChainSample {
    pub fn n(&self) -> usize {
        self.f.len() - 1
    }

    /// `F_s`, one-based as in the construction.
    pub fn frame(&self, s: usize) -> &ComplexVector {
        &self.f[s - 1]
    }

    pub fn norm_sq(&self, s: usize) -> f64 {
        self.norms_sq[s - 1]
    }

    /// Largest jet norm; the scale for the relative singularity test.
    pub fn scale(&self) -> f64 {
        self.jets.iter().map(ComplexVector::norm).fold(0.0, f64::max)
    }
}

/// Hermitian modified Gram–Schmidt with one reorthogonalization pass:
/// `F_(s+1) = d^s F_1 - sum_(j <= s) <d^s F_1, conj F_j> / |F_j|^2 F_j`.
pub fn hermitian_gram_schmidt(jets: &[ComplexVector]) -> Vec<ComplexVector> {
    let mut frame: Vec<ComplexVector> = Vec::with_capacity(jets.len());
    for jet in jets {
        let mut v = jet.clone();
        for _pass in 0..2 {
            for f in &frame {
                let nsq = f.norm_sq();
                if nsq > 0.0 {
                    let coef = herm(&v, f) / nsq;
                    v.axpy(-coef, f);
                }
            }
        }
        frame.push(v);
    }
    frame
}

/// Builds the frame at `z` from the jets of `F_1 = alpha_n`.
pub fn f_chain_at(chain: &AlphaChain, z: Complex64, eps_singular: f64) -> Result<FChainSample> {
    let jets = chain.f1_jets(z)?;
    let mut f = hermitian_gram_schmidt(&jets);
    if let Some(p) = chain.perturbation() {
        let target = &mut f[p.index - 1];
        let bump = p.magnitude * target.norm();
        target[0] += Complex64::new(bump, 0.0);
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { z });
    }
    let norms_sq: Vec<f64> = f.iter().map(ComplexVector::norm_sq).collect();
    let scale = jets.iter().map(ComplexVector::norm).fold(0.0, f64::max);
    let singular = scale == 0.0 || norms_sq.iter().any(|&m| m < eps_singular * scale * scale);
    Ok(FChainSample {
        z,
        jets,
        f,
        norms_sq,
        singular,
        eps_singular,
    })
}

/// `g = Re(F_(n+1)) / |Re(F_(n+1))|`, a unit vector in `R^(2n+1)`.
pub fn surface_at(sample: &FChainSample) -> Result<Vec<f64>> {
    if sample.singular {
        return Err(Error::SingularPoint {
            z: sample.z,
            reason: "degenerate frame".into(),
        });
    }
    let top = sample.f.last().expect("frame is never empty");
    let re = top.re();
    let re_sq: f64 = re.iter().map(|x| x * x).sum();
    if re_sq <= sample.eps_singular * top.norm_sq() || re_sq == 0.0 {
        return Err(Error::SingularPoint {
            z: sample.z,
            reason: "Re(F_(n+1)) vanishes".into(),
        });
    }
    let norm = re_sq.sqrt();
    Ok(re.into_iter().map(|x| x / norm).collect())
}

/// Evaluates the surface directly from the chain.
pub fn surface_point(chain: &AlphaChain, z: Complex64, eps_singular: f64) -> Result<Vec<f64>> {
    surface_at(&f_chain_at(chain, z, eps_singular)?)
}

/// Rebuilds `F_2 ... F_(n+1)` with the literal recursion
/// `F_(s+1) = d F_s - <d F_s, conj F_s> / |F_s|^2 F_s`, differentiating the
/// non-holomorphic `F_s` by central differences (the `s = 1` step uses the exact
/// jet), and returns the largest relative deviation from the Gram–Schmidt frame.
pub fn recursion_crosscheck(chain: &AlphaChain, z: Complex64, h: f64) -> Result<f64> {
    check_stencil(chain.domain(), z, h, 1)?;
    let eps = DEFAULT_EPS_SINGULAR;
    let centre = f_chain_at(chain, z, eps)?;
    if centre.singular {
        return Err(Error::SingularPoint {
            z,
            reason: "degenerate frame".into(),
        });
    }
    let n = chain.n();
    let mut worst: f64 = 0.0;
    for s in 1..=n {
        let fs = centre.frame(s);
        let dfs = if s == 1 {
            centre.jets[1].clone()
        } else {
            wirtinger_pair(|w| Ok(f_chain_at(chain, w, eps)?.frame(s).clone()), z, h)?.0
        };
        let coef = herm(&dfs, fs) / centre.norm_sq(s);
        let mut literal = dfs;
        literal.axpy(-coef, fs);
        let reference = centre.frame(s + 1);
        let dev = (&literal - reference).norm() / reference.norm();
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::IntegrationConstants;
    use crate::holo::Domain;
    use crate::products::sym;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_chain(n: usize) -> AlphaChain {
        let betas = vec!["1"; n];
        AlphaChain::from_strs(&betas, IntegrationConstants::zeros(n), Domain::centered_square(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn n1_frame_at_origin() {
        let s = f_chain_at(&unit_chain(1), c(0.0, 0.0), DEFAULT_EPS_SINGULAR).unwrap();
        let f1 = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)];
        let f2 = [c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)];
        assert_eq!(s.frame(1).entries(), &f1);
        assert_eq!(s.jets[1].entries(), &f2);
        assert_eq!(s.frame(2).entries(), &f2);
        assert!(!s.singular);
    }

    #[test]
    fn n1_norm_at_one() {
        // |1 - z^2|^2 + |1 + z^2|^2 + 4|z|^2 = 2 (1 + |z|^2)^2
        let s = f_chain_at(&unit_chain(1), c(1.0, 0.0), DEFAULT_EPS_SINGULAR).unwrap();
        assert!((s.norm_sq(1) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn n1_surface_values() {
        let chain = unit_chain(1);
        let g0 = surface_point(&chain, c(0.0, 0.0), DEFAULT_EPS_SINGULAR).unwrap();
        assert_eq!(g0, vec![0.0, 0.0, 1.0]);
        let g1 = surface_point(&chain, c(1.0, 0.0), DEFAULT_EPS_SINGULAR).unwrap();
        assert!((g1[0] + 1.0).abs() < 1e-15 && g1[1].abs() < 1e-15 && g1[2].abs() < 1e-15);
    }

    #[test]
    fn frame_orthogonality_for_several_n() {
        for n in 1..=3 {
            let chain = unit_chain(n);
            let s = f_chain_at(&chain, c(0.37, -0.21), DEFAULT_EPS_SINGULAR).unwrap();
            for j in 1..=n + 1 {
                for k in 1..=n + 1 {
                    let scale = s.frame(j).norm() * s.frame(k).norm();
                    if j != k {
                        assert!(herm(s.frame(j), s.frame(k)).norm() <= 1e-10 * scale);
                    }
                    if j <= n && k <= n {
                        assert!(sym(s.frame(j), s.frame(k)).norm() <= 1e-10 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn surface_is_unit() {
        let chain = unit_chain(2);
        let g = surface_point(&chain, c(-0.6, 0.45), DEFAULT_EPS_SINGULAR).unwrap();
        let norm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_of_beta_marks_the_frame_singular() {
        let chain = AlphaChain::from_strs(
            &["z"],
            IntegrationConstants::zeros(1),
            Domain::centered_square(1.0).unwrap(),
        )
        .unwrap();
        let s = f_chain_at(&chain, c(0.0, 0.0), DEFAULT_EPS_SINGULAR).unwrap();
        assert!(s.singular);
        assert!(matches!(surface_at(&s), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn recursion_agrees_with_gram_schmidt() {
        let chain = unit_chain(1);
        let h = chain.domain().default_fd_step();
        let r = recursion_crosscheck(&chain, c(0.3, 0.2), h).unwrap();
        assert!(r <= 1e-12, "s = 1 uses exact jets on both paths, got {r}");
        let r = recursion_crosscheck(&unit_chain(2), c(0.5, 0.0), h).unwrap();
        assert!(r <= 1e-5, "{r}");
        assert!(matches!(
            recursion_crosscheck(&chain, c(1.0, 0.0), h),
            Err(Error::StencilOutOfDomain { .. })
        ));
    }
}
