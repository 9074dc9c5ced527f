//! The alpha chain, the frame `F_1 ... F_(n+1)` and the spherical surface `g`.

mod alpha;
mod fchain;
mod grid;

pub use alpha::{AlphaChain, IntegrationConstants, Perturbation};
pub use fchain::{
    f_chain_at, hermitian_gram_schmidt, recursion_crosscheck, surface_at, surface_point,
    FChainSample, DEFAULT_EPS_SINGULAR,
};
pub use grid::{scan_grid, GridPoint, GridScan};
