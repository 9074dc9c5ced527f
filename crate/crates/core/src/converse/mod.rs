//! The converse direction: from a pseudoholomorphic surface back to
//! holomorphic data, and forward again.

mod gchain;
mod roundtrip;
mod xi;

pub use gchain::{extract_xi, g_chain_at, GChainSample, MAX_RECONSTRUCTION_N};
pub use roundtrip::{
    forward_frame, forward_surface, reconstruction_region, roundtrip, sample_xi, ResidualStats,
    RoundtripOptions, RoundtripPoint, RoundtripReport,
};
pub use xi::{integrate_to_f, IntegratedMap, XiField, CUBIC};
