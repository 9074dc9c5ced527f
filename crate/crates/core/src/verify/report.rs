use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    calabi_check, ellipse_circularity, fbar_residual, frame_residuals, isotropic_lift_residual,
    minimality_residual, normal_space_check, tangent_formula_residual, CalabiEntry, MAX_CALABI_ORDER,
};
use super::evaluator::SurfaceEvaluator;
use crate::chain::{recursion_crosscheck, scan_grid, AlphaChain, DEFAULT_EPS_SINGULAR};
use crate::fd;
use crate::holo::GridSpec;

/// The invariant families a report is classified by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Isotropy,
    HermitianOrthogonality,
    Collinearity,
    FbarIdentity,
    Recursion,
    Minimality,
    Calabi,
    TangentFormula,
    NormalSpace,
    EllipseCircularity,
    IsotropicLift,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Isotropy,
        Family::HermitianOrthogonality,
        Family::Collinearity,
        Family::FbarIdentity,
        Family::Recursion,
        Family::Minimality,
        Family::Calabi,
        Family::TangentFormula,
        Family::NormalSpace,
        Family::EllipseCircularity,
        Family::IsotropicLift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Isotropy => "isotropy",
            Family::HermitianOrthogonality => "hermitian_orthogonality",
            Family::Collinearity => "collinearity",
            Family::FbarIdentity => "fbar_identity",
            Family::Recursion => "recursion",
            Family::Minimality => "minimality",
            Family::Calabi => "calabi",
            Family::TangentFormula => "tangent_formula",
            Family::NormalSpace => "normal_space",
            Family::EllipseCircularity => "ellipse_circularity",
            Family::IsotropicLift => "isotropic_lift",
        }
    }
}

/// Per-family pass thresholds. Identities that only involve exact jets are held
/// to `1e-9`; first-order finite differences to `1e-5`; higher orders to `1e-4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub isotropy: f64,
    pub hermitian_orthogonality: f64,
    pub collinearity: f64,
    pub fbar_identity: f64,
    pub recursion: f64,
    pub minimality: f64,
    pub calabi: f64,
    pub tangent_formula: f64,
    pub normal_space: f64,
    pub ellipse_circularity: f64,
    pub isotropic_lift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            isotropy: 1e-9,
            hermitian_orthogonality: 1e-9,
            collinearity: 1e-9,
            fbar_identity: 1e-5,
            recursion: 1e-5,
            minimality: 1e-5,
            calabi: 1e-4,
            tangent_formula: 1e-5,
            normal_space: 1e-4,
            ellipse_circularity: 1e-9,
            isotropic_lift: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn get(&self, family: Family) -> f64 {
        match family {
            Family::Isotropy => self.isotropy,
            Family::HermitianOrthogonality => self.hermitian_orthogonality,
            Family::Collinearity => self.collinearity,
            Family::FbarIdentity => self.fbar_identity,
            Family::Recursion => self.recursion,
            Family::Minimality => self.minimality,
            Family::Calabi => self.calabi,
            Family::TangentFormula => self.tangent_formula,
            Family::NormalSpace => self.normal_space,
            Family::EllipseCircularity => self.ellipse_circularity,
            Family::IsotropicLift => self.isotropic_lift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    pub eps_singular: f64,
    /// Base finite-difference step; `None` uses the domain default.
    pub fd_step: Option<f64>,
    pub calabi_max_order: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            eps_singular: DEFAULT_EPS_SINGULAR,
            fd_step: None,
            calabi_max_order: MAX_CALABI_ORDER,
        }
    }
}

/// Residuals at one grid point. `None` means the check did not apply: the
/// point is singular, the stencil leaves the domain, or `n` is too small.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointRecord {
    pub z: [f64; 2],
    pub singular: bool,
    pub isotropy: Option<f64>,
    pub hermitian_orthogonality: Option<f64>,
    pub collinearity: Option<f64>,
    pub fbar_identity: Option<f64>,
    pub recursion: Option<f64>,
    pub minimality: Option<f64>,
    pub calabi: Vec<CalabiEntry>,
    pub tangent_formula: Option<f64>,
    pub normal_space: Option<f64>,
    /// One value per order `s = 0..n-1`.
    pub ellipse_circularity: Vec<f64>,
    pub isotropic_lift: Option<f64>,
    /// Checks that could not be evaluated at this point, with the reason.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

/// `NaN` wins, so a broken residual can never hide behind a good one.
fn exceeds(v: f64, current: Option<f64>) -> bool {
    match current {
        None => true,
        Some(m) => !m.is_nan() && (v.is_nan() || v > m),
    }
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |acc, v| if exceeds(v, acc) { Some(v) } else { acc })
}

impl PointRecord {
    pub fn value(&self, family: Family) -> Option<f64> {
        match family {
            Family::Isotropy => self.isotropy,
            Family::HermitianOrthogonality => self.hermitian_orthogonality,
            Family::Collinearity => self.collinearity,
            Family::FbarIdentity => self.fbar_identity,
            Family::Recursion => self.recursion,
            Family::Minimality => self.minimality,
            Family::Calabi => max_of(self.calabi.iter().map(|e| e.value)),
            Family::TangentFormula => self.tangent_formula,
            Family::NormalSpace => self.normal_space,
            Family::EllipseCircularity => max_of(self.ellipse_circularity.iter().copied()),
            Family::IsotropicLift => self.isotropic_lift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// No point could be evaluated for this family.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: Family,
    pub tolerance: f64,
    pub max: Option<f64>,
    pub worst_point: Option<[f64; 2]>,
    pub evaluated: usize,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub grid: GridSpec,
    pub fd_step: f64,
    pub eps_singular: f64,
    pub singular_count: usize,
    pub records: Vec<PointRecord>,
    pub summary: Vec<FamilySummary>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        self.summary.iter().all(|s| s.status != Status::Fail)
    }

    pub fn family(&self, family: Family) -> &FamilySummary {
        self.summary
            .iter()
            .find(|s| s.family == family)
            .expect("every family is summarized")
    }

    pub fn failures(&self) -> Vec<&FamilySummary> {
        self.summary.iter().filter(|s| s.status == Status::Fail).collect()
    }
}

fn summarize(records: &[PointRecord], tolerances: &Tolerances) -> Vec<FamilySummary> {
    Family::ALL
        .iter()
        .map(|&family| {
            let mut max: Option<f64> = None;
            let mut worst = None;
            let mut evaluated = 0;
            for r in records {
                if let Some(v) = r.value(family) {
                    evaluated += 1;
                    if exceeds(v, max) {
                        max = Some(v);
                        worst = Some(r.z);
                    }
                }
            }
            let tolerance = tolerances.get(family);
            let status = match max {
                None => Status::Skipped,
                Some(m) if m <= tolerance => Status::Pass,
                // NaN lands here
                Some(_) => Status::Fail,
            };
            FamilySummary {
                family,
                tolerance,
                max,
                worst_point: worst,
                evaluated,
                status,
            }
        })
        .collect()
}

fn record<T>(failures: &mut Vec<String>, name: &str, r: crate::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            failures.push(format!("{name}: {e}"));
            None
        }
    }
}

/// Evaluates every invariant family on a grid over the chain's domain.
///
/// Checks that need finite differences run only where the full stencil fits
/// in the domain. Points are processed in parallel and reported in row-major order.
pub fn verify_all(chain: &AlphaChain, grid: GridSpec, options: &VerifyOptions) -> DiagnosticsReport {
    let n = chain.n();
    let h = options.fd_step.unwrap_or_else(|| chain.domain().default_fd_step());
    let eps = options.eps_singular;
    let calabi_order = options.calabi_max_order.clamp(1, MAX_CALABI_ORDER);
    let g = SurfaceEvaluator::from_chain(chain, eps)
        .with_fd_step(h)
        .expect("step validated by caller");
    let scan = scan_grid(chain, grid, eps);
    let singular_count = scan.singular_count();

    let records: Vec<PointRecord> = scan
        .points
        .into_par_iter()
        .filter(|p| p.inside)
        .map(|p| {
            let mut rec = PointRecord {
                z: [p.z.re, p.z.im],
                singular: p.singular,
                ..PointRecord::default()
            };
            let (Some(sample), Some(surface)) = (p.sample, p.surface) else {
                return rec;
            };
            let fr = frame_residuals(&sample);
            rec.isotropy = Some(fr.isotropy);
            rec.hermitian_orthogonality = Some(fr.hermitian_orthogonality);
            rec.collinearity = Some(fr.collinearity);
            rec.ellipse_circularity = ellipse_circularity(&sample, &surface).unwrap_or_default();

            let z: Complex64 = p.z;
            let reach = calabi_order.max(2);
            if fd::check_stencil(chain.domain(), z, h, reach).is_err() {
                return rec;
            }
            let f = &mut rec.failures;
            rec.recursion = record(f, "recursion", recursion_crosscheck(chain, z, h));
            rec.fbar_identity = record(f, "fbar_identity", fbar_residual(chain, z, h, eps)).flatten();
            rec.minimality = record(f, "minimality", minimality_residual(&g, z));
            rec.calabi = record(f, "calabi", calabi_check(&g, calabi_order, z)).unwrap_or_default();
            rec.tangent_formula = record(f, "tangent_formula", tangent_formula_residual(&g, &sample));
            if n >= 2 {
                rec.normal_space = record(f, "normal_space", normal_space_check(&g, &sample))
                    .map(|c| c.value.max(c.angle));
            }
            rec.isotropic_lift = record(f, "isotropic_lift", isotropic_lift_residual(chain, z, h, eps));
            rec
        })
        .collect();

    let summary = summarize(&records, &options.tolerances);
    DiagnosticsReport {
        n,
        grid,
        fd_step: h,
        eps_singular: eps,
        singular_count,
        records,
        summary,
    }
}

/// The surface-only families (minimality and Calabi) for a black-box surface.
/// Frame-based families are reported as skipped.
pub fn verify_surface(g: &SurfaceEvaluator, grid: GridSpec, options: &VerifyOptions) -> crate::Result<DiagnosticsReport> {
    let g = match options.fd_step {
        Some(h) => g.clone().with_fd_step(h)?,
        None => g.clone(),
    };
    let calabi_order = options.calabi_max_order.clamp(1, MAX_CALABI_ORDER);
    let (lo, hi) = g.domain().bounding_box();
    let records: Vec<PointRecord> = grid
        .points(lo, hi)
        .into_par_iter()
        .filter(|z| g.domain().contains(*z))
        .map(|z| {
            let mut rec = PointRecord {
                z: [z.re, z.im],
                ..PointRecord::default()
            };
            if let Err(e) = g.eval(z) {
                rec.singular = true;
                rec.failures.push(format!("eval: {e}"));
                return rec;
            }
            if g.check_stencil(z, calabi_order.max(2)).is_err() {
                return rec;
            }
            let f = &mut rec.failures;
            rec.minimality = record(f, "minimality", minimality_residual(&g, z));
            rec.calabi = record(f, "calabi", calabi_check(&g, calabi_order, z)).unwrap_or_default();
            rec
        })
        .collect();
    let summary = summarize(&records, &options.tolerances);
    Ok(DiagnosticsReport {
        n: g.n().unwrap_or(0),
        grid,
        fd_step: g.fd_step(),
        eps_singular: options.eps_singular,
        singular_count: records.iter().filter(|r| r.singular).count(),
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{IntegrationConstants, Perturbation};
    use crate::holo::Domain;

    fn unit_chain(n: usize) -> AlphaChain {
        AlphaChain::from_strs(&vec!["1"; n], IntegrationConstants::zeros(n), Domain::centered_square(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn unit_chains_pass_everything() {
        for (n, size) in [(1, 10), (2, 8)] {
            let report = verify_all(&unit_chain(n), GridSpec::new(size, size).unwrap(), &VerifyOptions::default());
            for s in &report.summary {
                assert_ne!(s.status, Status::Fail, "n = {n}: {s:?}");
            }
            assert_eq!(report.records.len(), size * size);
            assert_eq!(report.singular_count, 0);
        }
    }

    #[test]
    fn summary_is_the_max_over_records() {
        let report = verify_all(&unit_chain(2), GridSpec::new(5, 5).unwrap(), &VerifyOptions::default());
        for fam in Family::ALL {
            let direct = report
                .records
                .iter()
                .filter_map(|r| r.value(fam))
                .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))));
            assert_eq!(report.family(fam).max, direct, "{}", fam.name());
        }
    }

    #[test]
    fn black_box_surfaces() {
        let chain = unit_chain(2);
        let g = SurfaceEvaluator::from_chain(&chain, DEFAULT_EPS_SINGULAR);
        let report = verify_surface(&g, GridSpec::new(6, 6).unwrap(), &VerifyOptions::default()).unwrap();
        assert!(report.passed());
        assert_eq!(report.family(Family::Minimality).status, Status::Pass);
        assert_eq!(report.family(Family::Isotropy).status, Status::Skipped);

        let d = Domain::centered_square(1.0).unwrap();
        let bumpy = SurfaceEvaluator::new(5, d, d.default_fd_step(), |z: Complex64| {
            let v = [1.0, z.re, z.im, z.re * z.re, z.im * z.im];
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ok(v.iter().map(|x| x / norm).collect())
        })
        .unwrap();
        let report = verify_surface(&bumpy, GridSpec::new(6, 6).unwrap(), &VerifyOptions::default()).unwrap();
        assert_eq!(report.family(Family::Minimality).status, Status::Fail);
        assert_eq!(report.family(Family::Calabi).status, Status::Fail);
    }

    #[test]
    fn injected_fault_fails_hermitian_orthogonality() {
        let chain = unit_chain(2)
            .with_perturbation(Perturbation { index: 2, magnitude: 1e-3 })
            .unwrap();
        let report = verify_all(&chain, GridSpec::new(4, 4).unwrap(), &VerifyOptions::default());
        assert_eq!(report.family(Family::HermitianOrthogonality).status, Status::Fail);
        assert!(!report.passed());
    }
}
