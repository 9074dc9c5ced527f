use num_complex::Complex64;

use crate::chain::hermitian_gram_schmidt;
use crate::error::{Error, Result};
use crate::products::{sym, ComplexVector};
use crate::verify::SurfaceEvaluator;

/// Reconstruction differentiates `g` up to order `n + 1` by finite differences;
/// beyond `n = 3` that order is lost in rounding noise.
pub const MAX_RECONSTRUCTION_N: usize = 3;

/// Below this fraction of the largest jet norm a `G_s` counts as collapsed.
const COLLAPSE_RATIO: f64 = 1e-6;

/// The harmonic sequence `G_0 = g, G_1, ..., G_(n+1)` of a surface at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GChainSample {
    pub z: Complex64,
    pub g: Vec<f64>,
    /// `G_0 ... G_(n+1)`, indexed from zero.
    pub frames: Vec<ComplexVector>,
    pub norms_sq: Vec<f64>,
    /// `|G_(n+1)| / |G_n|`; infinite when the sequence collapses earlier.
    pub residual: f64,
    /// First `s` in `1..=n` where `G_s` collapsed, if any.
    pub degenerate_at: Option<usize>,
}

impl GChainSample {
    pub fn n(&self) -> usize {
        self.frames.len() - 2
    }

    pub fn frame(&self, s: usize) -> &ComplexVector {
        &self.frames[s]
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_at.is_some()
    }

    /// `max |<G_j, G_k>| / (|G_j| |G_k|)` over `1 <= j, k <= n`.
    pub fn isotropy(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for j in 1..=n {
            for k in j..=n {
                let scale = (self.norms_sq[j] * self.norms_sq[k]).sqrt();
                worst = worst.max(sym(&self.frames[j], &self.frames[k]).norm() / scale);
            }
        }
        worst
    }
}

pub(crate) fn check_supported(n: usize) -> Result<()> {
    if n > MAX_RECONSTRUCTION_N {
        return Err(Error::Unsupported(format!(
            "unsupported n for reconstruction: n = {n} exceeds {MAX_RECONSTRUCTION_N}"
        )));
    }
    Ok(())
}

pub(crate) fn surface_n(g: &SurfaceEvaluator) -> Result<usize> {
    g.n().ok_or_else(|| {
        Error::Unsupported(format!(
            "surface lives in R^{}; reconstruction needs an odd dimension 2n+1 >= 3",
            g.dim()
        ))
    })
}

/// Builds `G_s` by Hermitian Gram–Schmidt on the jets `d^k g`, `k = 0..=n+1`.
///
/// For a pseudoholomorphic surface this coincides with the recursion
/// `G_(s+1) = d G_s - <d G_s, conj G_s> / |G_s|^2 G_s`, since every `d G_s` lies
/// in `d^(s+1) g + span{G_0, ..., G_s}`; differentiating `g` directly avoids
/// nesting finite differences.
pub fn g_chain_at(g: &SurfaceEvaluator, z: Complex64) -> Result<GChainSample> {
    let n = surface_n(g)?;
    check_supported(n)?;
    let p = g.partials(z, n + 1)?;
    let jets = p.holomorphic_jets();
    let frames = hermitian_gram_schmidt(&jets);
    let norms_sq: Vec<f64> = frames.iter().map(ComplexVector::norm_sq).collect();
    let mut scale: f64 = 0.0;
    let mut degenerate_at = None;
    for s in 1..=n {
        scale = scale.max(jets[s].norm()).max(1.0);
        if norms_sq[s].sqrt() <= COLLAPSE_RATIO * scale {
            degenerate_at = Some(s);
            break;
        }
    }
    let residual = if degenerate_at.is_some() {
        f64::INFINITY
    } else {
        (norms_sq[n + 1] / norms_sq[n]).sqrt()
    };
    Ok(GChainSample {
        z,
        g: p.value().re(),
        frames,
        norms_sq,
        residual,
        degenerate_at,
    })
}

/// `xi = conj(G_n) / |G_n|^2`, holomorphic for a pseudoholomorphic surface.
pub fn extract_xi(sample: &GChainSample) -> Result<ComplexVector> {
    if sample.is_degenerate() {
        return Err(Error::DegenerateDifferential { z: sample.z });
    }
    let n = sample.n();
    Ok(sample.frames[n]
        .conj()
        .scale(Complex64::new(1.0 / sample.norms_sq[n], 0.0)))
}
