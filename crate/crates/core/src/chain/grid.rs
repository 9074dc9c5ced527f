use num_complex::Complex64;
use rayon::prelude::*;

use super::alpha::AlphaChain;
use super::fchain::{f_chain_at, surface_at, FChainSample};
use crate::holo::GridSpec;

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub z: Complex64,
    pub inside: bool,
    /// `None` when the point is outside the domain or evaluation failed.
    pub sample: Option<FChainSample>,
    pub surface: Option<Vec<f64>>,
    /// Masked: outside, failed, degenerate frame, or vanishing `Re(F_(n+1))`.
    pub singular: bool,
}

#[derive(Debug, Clone)]
pub struct GridScan {
    pub grid: GridSpec,
    pub points: Vec<GridPoint>,
}

impl GridScan {
    pub fn mask(&self) -> Vec<bool> {
        self.points.iter().map(|p| p.singular).collect()
    }

    pub fn singular_count(&self) -> usize {
        self.points.iter().filter(|p| p.singular && p.inside).count()
    }
}

/// Evaluates the frame and the surface on a row-major grid over the domain's
/// bounding box. Points are computed in parallel; the output order is fixed.
pub fn scan_grid(chain: &AlphaChain, grid: GridSpec, eps_singular: f64) -> GridScan {
    let (lo, hi) = chain.domain().bounding_box();
    let points = grid
        .points(lo, hi)
        .into_par_iter()
        .map(|z| {
            let inside = chain.domain().contains(z);
            let sample = if inside {
                f_chain_at(chain, z, eps_singular).ok()
            } else {
                None
            };
            let surface = sample.as_ref().and_then(|s| surface_at(s).ok());
            GridPoint {
                z,
                inside,
                singular: surface.is_none(),
                sample,
                surface,
            }
        })
        .collect();
    GridScan { grid, points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{IntegrationConstants, DEFAULT_EPS_SINGULAR};
    use crate::holo::Domain;

    #[test]
    fn unit_data_has_no_singular_cells() {
        let chain = AlphaChain::from_strs(
            &["1"],
            IntegrationConstants::zeros(1),
            Domain::centered_square(1.0).unwrap(),
        )
        .unwrap();
        let scan = scan_grid(&chain, GridSpec::new(10, 10).unwrap(), DEFAULT_EPS_SINGULAR);
        assert_eq!(scan.points.len(), 100);
        assert_eq!(scan.singular_count(), 0);
    }

    #[test]
    fn zero_of_beta_is_masked() {
        // odd grid so that the origin is a node
        let chain = AlphaChain::from_strs(
            &["z"],
            IntegrationConstants::zeros(1),
            Domain::centered_square(1.0).unwrap(),
        )
        .unwrap();
        let scan = scan_grid(&chain, GridSpec::new(11, 11).unwrap(), DEFAULT_EPS_SINGULAR);
        let centre = &scan.points[5 * 11 + 5];
        assert_eq!(centre.z, Complex64::new(0.0, 0.0));
        assert!(centre.singular);
        assert!(scan.singular_count() < scan.points.len() / 4);
    }

    #[test]
    fn scan_is_reproducible() {
        let chain = AlphaChain::from_strs(
            &["1", "1+z"],
            IntegrationConstants::zeros(2),
            Domain::centered_square(1.0).unwrap(),
        )
        .unwrap();
        let g = GridSpec::new(6, 7).unwrap();
        let a = scan_grid(&chain, g, DEFAULT_EPS_SINGULAR);
        let b = scan_grid(&chain, g, DEFAULT_EPS_SINGULAR);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.surface, q.surface);
        }
    }
}
