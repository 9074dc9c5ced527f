//! Two constructions carried by a pseudoholomorphic surface: real Kaehler
//! hypersurfaces of `R^(2n+1)` parametrized over its normal bundle, and ruled
//! minimal submanifolds of `S^(2n)` swept by great spheres.

mod kaehler;
mod ruled;

pub use kaehler::{
    kaehler_affine_defect, kaehler_formula_crosscheck, kaehler_immersion_check, kaehler_jacobian,
    kaehler_point, metric_factor, ImmersionCell, ImmersionReport, KaehlerParams, RANK_TOLERANCE,
};
pub use ruled::{ruled_minimality_probe, ruled_point, sinc, RuledParams, RuledProbe};
