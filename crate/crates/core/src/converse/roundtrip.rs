use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gchain::{check_supported, extract_xi, g_chain_at, surface_n, GChainSample};
use super::xi::{XiField, CUBIC};
use crate::chain::hermitian_gram_schmidt;
use crate::error::{Error, Result};
use crate::fd::stencil_radius;
use crate::holo::{Domain, GridSpec, HoloExpr, Shape};
use crate::linalg::subspace_distance;
use crate::products::{dot_real, ComplexVector};
use crate::verify::SurfaceEvaluator;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripOptions {
    /// Grid on which `xi` is sampled and interpolated.
    pub sample_grid: GridSpec,
    pub order: usize,
    /// Largest admissible `|G_(n+1)| / |G_n|` and relative `|<G_j, G_k>|`.
    pub residual_tolerance: f64,
    /// Optional factor `psi(z)` applied to `xi` before the forward pass.
    pub gauge: Option<HoloExpr>,
}

impl Default for RoundtripOptions {
    fn default() -> Self {
        Self {
            sample_grid: GridSpec { rows: 61, cols: 61 },
            order: CUBIC,
            residual_tolerance: 1e-3,
            gauge: None,
        }
    }
}

/// The rectangle on which reconstruction is possible: the domain minus a
/// margin wide enough for every finite-difference stencil.
pub fn reconstruction_region(g: &SurfaceEvaluator) -> Result<Domain> {
    let n = surface_n(g)?;
    let d = g.domain();
    let margin = stencil_radius(g.fd_step(), n + 1) + 1e-3 * d.diameter();
    let (lo, hi) = match d.shape() {
        Shape::Rectangle { min, max } => (
            Complex64::new(min[0] + margin, min[1] + margin),
            Complex64::new(max[0] - margin, max[1] - margin),
        ),
        Shape::Disk { center, radius } => {
            let half = (radius - margin) / std::f64::consts::SQRT_2;
            let c = Complex64::new(center[0], center[1]);
            (c - Complex64::new(half, half), c + Complex64::new(half, half))
        }
    };
    if !(hi.re > lo.re && hi.im > lo.im) {
        return Err(Error::InvalidDomain(
            "domain too small for the reconstruction stencil".into(),
        ));
    }
    let base = d.base_point();
    let inside = base.re > lo.re && base.re < hi.re && base.im > lo.im && base.im < hi.im;
    Domain::rectangle(lo, hi, if inside { base } else { (lo + hi) * 0.5 })
}

/// Largest pseudoholomorphicity defect seen while sampling, and where. The
/// defect at a point is the larger of `|G_(n+1)| / |G_n|` (the sequence must
/// terminate) and the relative isotropy of `G_1 ... G_n` (Calabi's condition).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub worst_point: [f64; 2],
}

/// Samples `xi` on the grid over `region` and refuses surfaces that are not
/// pseudoholomorphic to within `residual_tolerance`.
pub fn sample_xi(
    g: &SurfaceEvaluator,
    region: &Domain,
    grid: GridSpec,
    order: usize,
    residual_tolerance: f64,
) -> Result<(XiField, ResidualStats)> {
    let (lo, hi) = region.bounding_box();
    let samples: Vec<GChainSample> = grid
        .points(lo, hi)
        .into_par_iter()
        .map(|z| g_chain_at(g, z))
        .collect::<Result<_>>()?;
    let mut stats = ResidualStats {
        max: 0.0,
        worst_point: [lo.re, lo.im],
    };
    if let Some(s) = samples.iter().find(|s| s.is_degenerate()) {
        return Err(Error::DegenerateDifferential { z: s.z });
    }
    for s in &samples {
        let defect = s.residual.max(s.isotropy());
        if !(defect <= stats.max) {
            stats = ResidualStats {
                max: defect,
                worst_point: [s.z.re, s.z.im],
            };
        }
    }
    if !(stats.max <= residual_tolerance) {
        let [re, im] = stats.worst_point;
        return Err(Error::NotPseudoholomorphic {
            z: Complex64::new(re, im),
            residual: stats.max,
            tolerance: residual_tolerance,
        });
    }
    let values = samples.iter().map(extract_xi).collect::<Result<Vec<_>>>()?;
    Ok((XiField::from_samples(lo, hi, grid, values, order)?, stats))
}

/// The forward construction with `F_1 = xi`: Gram–Schmidt on the jets of the
/// interpolant, then the normalized real part of `F_(n+1)`.
pub fn forward_frame(xi: &XiField, z: Complex64, n: usize) -> Result<Vec<ComplexVector>> {
    let jets = xi.jets(z, n)?;
    Ok(hermitian_gram_schmidt(&jets))
}

pub fn forward_surface(xi: &XiField, z: Complex64, n: usize) -> Result<Vec<f64>> {
    let frame = forward_frame(xi, z, n)?;
    let re = frame[n].re();
    let norm = dot_real(&re, &re).sqrt();
    if !(norm > 0.0) {
        return Err(Error::SingularPoint {
            z,
            reason: "Re(F_(n+1)) vanishes".into(),
        });
    }
    Ok(re.iter().map(|x| x / norm).collect())
}

fn sign_blind_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        minus += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    f64::min(minus, plus).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundtripPoint {
    pub z: [f64; 2],
    /// `min(|g_hat - g|, |g_hat + g|)`
    pub distance: f64,
    /// Largest principal angle between the reconstructed and observed spans.
    pub span_angle: f64,
    /// `|dbar xi| / |xi|` of the interpolated field.
    pub holomorphy: f64,
    /// `max |<G_j, G_k>|` relative, `1 <= j, k <= n`.
    pub g_isotropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub n: usize,
    pub region: Shape,
    pub sample_grid: GridSpec,
    pub residual: ResidualStats,
    pub sup_distance: f64,
    pub worst_point: [f64; 2],
    pub max_span_angle: f64,
    pub max_holomorphy: f64,
    pub max_g_isotropy: f64,
    pub points: Vec<RoundtripPoint>,
}

/// Recovers `xi` from `g`, runs the forward construction and measures the
/// distance to `g` on `eval_grid` over the reconstruction region.
pub fn roundtrip(g: &SurfaceEvaluator, eval_grid: GridSpec, options: &RoundtripOptions) -> Result<RoundtripReport> {
    let n = surface_n(g)?;
    check_supported(n)?;
    let region = reconstruction_region(g)?;
    let (mut xi, residual) = sample_xi(
        g,
        &region,
        options.sample_grid,
        options.order,
        options.residual_tolerance,
    )?;
    if let Some(psi) = &options.gauge {
        xi = xi.gauge(psi)?;
    }
    let (lo, hi) = region.bounding_box();
    let points: Vec<RoundtripPoint> = eval_grid
        .points(lo, hi)
        .into_par_iter()
        .map(|z| {
            let truth = g.eval(z)?;
            let frame = forward_frame(&xi, z, n)?;
            let g_hat = forward_surface(&xi, z, n)?;
            let observed = g_chain_at(g, z)?;
            let mut rebuilt: Vec<ComplexVector> = frame[..n].to_vec();
            rebuilt.extend(frame[..n].iter().map(ComplexVector::conj));
            let mut seen: Vec<ComplexVector> = observed.frames[1..=n].to_vec();
            seen.extend(observed.frames[1..=n].iter().map(ComplexVector::conj));
            Ok(RoundtripPoint {
                z: [z.re, z.im],
                distance: sign_blind_distance(&g_hat, &truth),
                span_angle: subspace_distance(&rebuilt, &seen, 1e-8),
                holomorphy: xi.dbar_residual(z)?,
                g_isotropy: observed.isotropy(),
            })
        })
        .collect::<Result<_>>()?;
    let worst = *points
        .iter()
        .max_by(|a, b| a.distance.total_cmp(&b.distance))
        .expect("grid has at least four points");
    let fold = |f: fn(&RoundtripPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    Ok(RoundtripReport {
        n,
        region: region.shape(),
        sample_grid: options.sample_grid,
        residual,
        sup_distance: worst.distance,
        worst_point: worst.z,
        max_span_angle: fold(|p| p.span_angle),
        max_holomorphy: fold(|p| p.holomorphy),
        max_g_isotropy: fold(|p| p.g_isotropy),
        points,
    })
}
