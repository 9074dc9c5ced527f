//! Numerical residuals for every invariant of the construction, on a chain or
//! on a black-box spherical surface.

mod checks;
mod evaluator;
mod report;

pub use checks::{
    calabi_check, chain_fundamental_form, ellipse_circularity, fbar_residual, frame_residuals,
    isotropic_lift_residual, minimality_residual, normal_space_check, tangent_formula_residual,
    CalabiEntry, FrameResiduals, NormalSpaceCheck, MAX_CALABI_ORDER,
};
pub use evaluator::SurfaceEvaluator;
pub use report::{
    verify_all, verify_surface, DiagnosticsReport, Family, FamilySummary, PointRecord, Status, Tolerances,
    VerifyOptions,
};
