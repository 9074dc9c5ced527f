use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use wsphere_core::applications::{
    kaehler_affine_defect, kaehler_formula_crosscheck, kaehler_immersion_check, kaehler_point,
    ruled_minimality_probe, ruled_point, ImmersionCell, ImmersionReport, KaehlerParams, RuledParams, RuledProbe,
};
use wsphere_core::chain::scan_grid;
use wsphere_core::converse::{roundtrip, RoundtripOptions, RoundtripReport};
use wsphere_core::holo::{GridSpec, HoloExpr, RealExpr};
use wsphere_core::verify::{
    verify_all, verify_surface, DiagnosticsReport, Family, PointRecord, Status, SurfaceEvaluator, VerifyOptions,
};
use wsphere_core::Error;

use crate::config::{complex, Job, Pair, SourceConfig};
use crate::output::{write_json, write_mesh, write_text, MeshOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Refused,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Refused => "REFUSED",
        }
    }
}

/// Where results go and whether to narrate.
pub struct Sink<'a> {
    pub dir: &'a Path,
    pub quiet: bool,
}

impl Sink<'_> {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn verify_options(job: &Job) -> VerifyOptions {
    VerifyOptions {
        tolerances: job.config.tolerances,
        eps_singular: job.config.eps_singular,
        fd_step: Some(job.fd_step),
        calabi_max_order: job.config.verify.calabi_max_order,
    }
}

fn fmt_point(p: Option<[f64; 2]>) -> String {
    p.map(|[x, y]| format!("({x}, {y})")).unwrap_or_else(|| "-".into())
}

fn summarize(report: &DiagnosticsReport, sink: &Sink) {
    for s in &report.summary {
        let max = s.max.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
        let status = match s.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        };
        sink.say(format!(
            "{:<24} {:<8} max {:<10} tol {:.0e} worst {}",
            s.family.name(),
            status,
            max,
            s.tolerance,
            fmt_point(s.worst_point),
        ));
    }
    for f in report.failures() {
        eprintln!(
            "FAIL {}: max {:e} > {:e} at z = {}",
            f.family.name(),
            f.max.unwrap_or(f64::NAN),
            f.tolerance,
            fmt_point(f.worst_point)
        );
    }
}

pub fn generate(job: &Job, sink: &Sink) -> Result<Outcome> {
    let chain = job.chain()?;
    let report = verify_all(&chain, job.grid, &verify_options(job));
    let scan = scan_grid(&chain, job.grid, job.config.eps_singular);

    // records cover the points inside the domain, in grid order
    let mut records = report.records.iter();
    let per_point: Vec<Option<&PointRecord>> = scan
        .points
        .iter()
        .map(|p| if p.inside { records.next() } else { None })
        .collect();
    let mut mesh = MeshOutput::new(
        job.grid,
        scan.points.iter().map(|p| [p.z.re, p.z.im]).collect(),
        scan.points.iter().map(|p| p.surface.clone()).collect(),
    );
    for family in Family::ALL {
        let values = per_point.iter().map(|r| r.and_then(|r| r.value(family))).collect();
        mesh = mesh.with_scalar(family.name(), values);
    }
    let out = &job.config.output;
    write_mesh(sink.dir, "surface", "g", &mesh, out.coordinates, out.ply)?;
    write_json(sink.dir, "diagnostics.json", &report)?;
    sink.say(format!(
        "n = {}, {} grid points, {} singular",
        report.n,
        job.grid.len(),
        report.singular_count
    ));
    summarize(&report, sink);
    Ok(Outcome::from_pass(report.passed()))
}

pub fn verify(job: &Job, sink: &Sink) -> Result<Outcome> {
    let Some(source) = job.config.source.as_ref() else {
        bail!("verify needs a `source` block, e.g. {{\"kind\": \"chain\"}}");
    };
    let report = match source {
        SourceConfig::Chain => verify_all(&job.chain()?, job.grid, &verify_options(job)),
        SourceConfig::Expressions { .. } => {
            let g = job.source_surface()?.expect("source is set");
            verify_surface(&g, job.grid, &verify_options(job))?
        }
    };
    write_json(sink.dir, "diagnostics.json", &report)?;
    summarize(&report, sink);
    Ok(Outcome::from_pass(report.passed()))
}

#[derive(Serialize)]
struct ReconstructOutput<'a> {
    status: Outcome,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a RoundtripReport>,
}

pub fn reconstruct(job: &Job, sink: &Sink) -> Result<Outcome> {
    let block = &job.config.reconstruct;
    let g: SurfaceEvaluator = match job.source_surface()? {
        Some(g) => g,
        None => SurfaceEvaluator::from_chain(&job.chain()?, job.config.eps_singular).with_fd_step(job.fd_step)?,
    };
    let grid = |path: &str, g: GridSpec| {
        GridSpec::new(g.rows, g.cols).map_err(|e| anyhow!("invalid config at `{path}`: {e}"))
    };
    let gauge = block
        .gauge
        .as_deref()
        .map(|s| HoloExpr::parse(s).map_err(|e| anyhow!("invalid config at `reconstruct.gauge`: {e}")))
        .transpose()?;
    let options = RoundtripOptions {
        sample_grid: grid("reconstruct.sample_grid", block.sample_grid)?,
        order: block.order,
        residual_tolerance: block.residual_tolerance,
        gauge,
    };
    let eval_grid = grid("reconstruct.eval_grid", block.eval_grid)?;
    let n = g.n().unwrap_or(job.n());
    let tolerance = block.tolerance_for(n);
    match roundtrip(&g, eval_grid, &options) {
        Ok(report) => {
            let status = Outcome::from_pass(report.sup_distance <= tolerance);
            write_json(
                sink.dir,
                "reconstruct.json",
                &ReconstructOutput {
                    status,
                    tolerance,
                    reason: None,
                    report: Some(&report),
                },
            )?;
            sink.say(format!(
                "n = {n}: sup distance {:.3e} (tol {tolerance:.0e}) worst {}, defect {:.3e}, span angle {:.3e}",
                report.sup_distance,
                fmt_point(Some(report.worst_point)),
                report.residual.max,
                report.max_span_angle
            ));
            if status == Outcome::Fail {
                eprintln!("FAIL reconstruct: sup distance {:e} > {tolerance:e}", report.sup_distance);
            }
            Ok(status)
        }
        Err(e @ (Error::NotPseudoholomorphic { .. } | Error::DegenerateDifferential { .. })) => {
            let reason = e.to_string();
            write_json(
                sink.dir,
                "reconstruct.json",
                &ReconstructOutput {
                    status: Outcome::Refused,
                    tolerance,
                    reason: Some(reason.clone()),
                    report: None,
                },
            )?;
            eprintln!("REFUSED reconstruct: {reason}");
            Ok(Outcome::Refused)
        }
        Err(e) => Err(e.into()),
    }
}

/// Every combination of `samples` evenly spaced values in `[-half, half]` for
/// the real and imaginary parts of `count` complex coordinates.
fn box_samples(count: usize, half: f64, samples: usize) -> Vec<Vec<Complex64>> {
    let axis: Vec<f64> = if samples <= 1 {
        vec![0.0]
    } else {
        (0..samples)
            .map(|k| -half + 2.0 * half * k as f64 / (samples - 1) as f64)
            .collect()
    };
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..2 * count {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|v| v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
        .collect()
}

fn check_box(path: &str, half: f64, samples: usize) -> Result<()> {
    if !(half >= 0.0 && half.is_finite()) {
        bail!("invalid config at `{path}.w_box`: must be non-negative, got {half}");
    }
    if samples == 0 {
        bail!("invalid config at `{path}.w_samples`: must be at least 1");
    }
    Ok(())
}

fn pairs(w: &[Complex64]) -> Vec<Pair> {
    w.iter().map(|c| [c.re, c.im]).collect()
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| if v.is_nan() || v > m { v } else { m })))
}

#[derive(Serialize)]
struct KaehlerOutput {
    status: Outcome,
    gamma: String,
    w: Vec<Pair>,
    max_affine_defect: Option<f64>,
    max_crosscheck: Option<f64>,
    crosscheck_evaluated: usize,
    immersion: ImmersionSummary,
}

/// The immersion report without the regular cells, which would dominate the file.
#[derive(Serialize)]
struct ImmersionSummary {
    parameters: usize,
    cells: usize,
    regular_count: usize,
    regular_fraction: f64,
    irregular_cells: Vec<ImmersionCell>,
}

impl From<ImmersionReport> for ImmersionSummary {
    fn from(r: ImmersionReport) -> Self {
        Self {
            parameters: r.parameters,
            cells: r.cells.len(),
            regular_count: r.regular_count,
            regular_fraction: r.regular_fraction,
            irregular_cells: r.cells.into_iter().filter(|c| !c.regular).collect(),
        }
    }
}

pub fn kaehler(job: &Job, sink: &Sink) -> Result<Outcome> {
    let n = job.n();
    if n < 2 {
        bail!("kaehler requires n ≥ 2, got n = {n}");
    }
    let block = &job.config.kaehler;
    check_box("kaehler", block.w_box, block.w_samples)?;
    let gamma = RealExpr::parse(&block.gamma).map_err(|e| anyhow!("invalid config at `kaehler.gamma`: {e}"))?;
    let w = Job::params("kaehler.w", &block.w, n - 1)?;
    let chain = job.chain()?;
    let params = KaehlerParams::new(gamma.clone(), w.clone());
    let (lo, hi) = job.domain.bounding_box();
    let z = job.grid.points(lo, hi);
    let h = job.fd_step;

    struct Sample {
        psi: Option<Vec<f64>>,
        affine: Option<f64>,
        crosscheck: Option<f64>,
    }
    let samples: Vec<Sample> = z
        .par_iter()
        .map(|&z| {
            let psi = job.domain.contains(z).then(|| kaehler_point(&chain, &params, z).ok()).flatten();
            let ok = psi.is_some();
            Sample {
                affine: ok.then(|| kaehler_affine_defect(&chain, &params, z, 1.0).ok()).flatten(),
                crosscheck: ok.then(|| kaehler_formula_crosscheck(&chain, &params, z, h).ok()).flatten(),
                psi,
            }
        })
        .collect();
    let interior: Vec<Complex64> = z
        .iter()
        .zip(&samples)
        .filter(|(z, s)| s.psi.is_some() && job.domain.margin(**z) > 2.0 * h)
        .map(|(z, _)| *z)
        .collect();
    let w_points = box_samples(n - 1, block.w_box, block.w_samples);
    let immersion = kaehler_immersion_check(&chain, &gamma, &interior, &w_points, h)?;

    let mesh = MeshOutput::new(
        job.grid,
        z.iter().map(|z| [z.re, z.im]).collect(),
        samples.iter().map(|s| s.psi.clone()).collect(),
    )
    .with_scalar("affine_defect", samples.iter().map(|s| s.affine).collect())
    .with_scalar("crosscheck", samples.iter().map(|s| s.crosscheck).collect());
    let out = &job.config.output;
    write_mesh(sink.dir, "kaehler", "psi", &mesh, out.coordinates, out.ply)?;

    let max_affine = max_of(samples.iter().filter_map(|s| s.affine));
    let max_crosscheck = max_of(samples.iter().filter_map(|s| s.crosscheck));
    let crosscheck_evaluated = samples.iter().filter(|s| s.crosscheck.is_some()).count();
    let within = |v: Option<f64>, tol: f64| v.is_some_and(|m| m <= tol);
    let checks = [
        ("regular_fraction", immersion.regular_fraction >= block.min_regular_fraction),
        ("affine_defect", within(max_affine, block.affine_tolerance)),
        ("crosscheck", within(max_crosscheck, block.crosscheck_tolerance)),
    ];
    let status = Outcome::from_pass(checks.iter().all(|c| c.1));
    sink.say(format!(
        "rank 2n = {} on {}/{} cells ({:.4}); affine defect {}; formula cross-check {} over {} points",
        immersion.parameters,
        immersion.regular_count,
        immersion.cells.len(),
        immersion.regular_fraction,
        max_affine.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into()),
        max_crosscheck.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into()),
        crosscheck_evaluated,
    ));
    for (name, ok) in checks {
        if !ok {
            eprintln!("FAIL kaehler {name}");
        }
    }
    write_json(
        sink.dir,
        "kaehler.json",
        &KaehlerOutput {
            status,
            gamma: block.gamma.clone(),
            w: pairs(&w),
            max_affine_defect: max_affine,
            max_crosscheck,
            crosscheck_evaluated,
            immersion: immersion.into(),
        },
    )?;
    Ok(status)
}

#[derive(Serialize)]
struct ProbeRecord {
    z: Pair,
    w: Vec<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<RuledProbe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct RuledOutput {
    status: Outcome,
    w: Vec<Pair>,
    max_norm_defect: Option<f64>,
    norm_samples: usize,
    max_mean_curvature: Option<f64>,
    max_ruling_second_form: Option<f64>,
    probes: Vec<ProbeRecord>,
}

fn norm_defect(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs()
}

pub fn ruled(job: &Job, sink: &Sink) -> Result<Outcome> {
    let n = job.n();
    if n < 3 {
        bail!("ruled submanifold requires n ≥ 3, got n = {n}");
    }
    let block = &job.config.ruled;
    check_box("ruled", block.w_box, block.w_samples)?;
    let w = Job::params("ruled.w", &block.w, n - 2)?;
    let probe_points: Vec<Complex64> = match &block.probe_points {
        Some(points) => points.iter().copied().map(complex).collect(),
        None => {
            // spread around the base point, well inside the domain
            let (lo, hi) = job.domain.bounding_box();
            let radius = 0.15 * (hi - lo).norm().min(job.domain.diameter());
            let base = job.domain.base_point();
            (0..5)
                .map(|k| base + Complex64::from_polar(radius, 0.7 + 2.0 * std::f64::consts::PI * k as f64 / 5.0))
                .collect()
        }
    };
    for (i, p) in probe_points.iter().enumerate() {
        if !job.domain.is_interior(*p) {
            bail!("invalid config at `ruled.probe_points[{i}]`: {p} is not inside the domain");
        }
    }
    let chain = job.chain()?;
    let (lo, hi) = job.domain.bounding_box();
    let z = job.grid.points(lo, hi);
    let at = |z: Complex64, w: &[Complex64]| -> Option<Vec<f64>> {
        if !job.domain.contains(z) {
            return None;
        }
        ruled_point(&chain, &RuledParams { w: w.to_vec() }, z).ok()
    };

    let surface: Vec<Option<Vec<f64>>> = z.par_iter().map(|&z| at(z, &w)).collect();
    let defects: Vec<Option<f64>> = surface.iter().map(|v| v.as_deref().map(norm_defect)).collect();
    let mesh = MeshOutput::new(job.grid, z.iter().map(|z| [z.re, z.im]).collect(), surface)
        .with_scalar("norm_defect", defects);
    let out = &job.config.output;
    write_mesh(sink.dir, "ruled", "f", &mesh, out.coordinates, out.ply)?;

    // the full w-box sweep, one row per (z, w)
    let w_points = box_samples(n - 2, block.w_box, block.w_samples);
    let jobs: Vec<(Complex64, &Vec<Complex64>)> = z.iter().flat_map(|z| w_points.iter().map(move |w| (*z, w))).collect();
    let sweep: Vec<Option<Vec<f64>>> = jobs.par_iter().map(|(z, w)| at(*z, w)).collect();
    let dim = 2 * n + 1;
    let mut csv = String::from("z_re,z_im");
    for j in 1..=n - 2 {
        write!(csv, ",w_{j}_re,w_{j}_im").unwrap();
    }
    csv.push_str(",valid");
    for k in 1..=dim {
        write!(csv, ",f_{k}").unwrap();
    }
    csv.push_str(",norm_defect\n");
    for ((z, w), v) in jobs.iter().zip(&sweep) {
        write!(csv, "{:?},{:?}", z.re, z.im).unwrap();
        for c in w.iter() {
            write!(csv, ",{:?},{:?}", c.re, c.im).unwrap();
        }
        match v {
            Some(v) => {
                csv.push_str(",1");
                v.iter().for_each(|x| write!(csv, ",{x:?}").unwrap());
                writeln!(csv, ",{:?}", norm_defect(v)).unwrap();
            }
            None => {
                csv.push_str(",0");
                (0..=dim).for_each(|_| csv.push(','));
                csv.push('\n');
            }
        }
    }
    write_text(sink.dir, "ruled_samples.csv", &csv)?;

    let probes: Vec<ProbeRecord> = probe_points
        .par_iter()
        .map(|&p| {
            let r = ruled_minimality_probe(&chain, &RuledParams { w: w.clone() }, p, job.fd_step);
            ProbeRecord {
                z: [p.re, p.im],
                w: pairs(&w),
                error: r.as_ref().err().map(|e| e.to_string()),
                probe: r.ok(),
            }
        })
        .collect();

    let norm_values: Vec<f64> = mesh.scalars[0].1.iter().flatten().copied().chain(sweep.iter().flatten().map(|v| norm_defect(v))).collect();
    let max_norm = max_of(norm_values.iter().copied());
    let max_mean = max_of(probes.iter().filter_map(|p| p.probe.as_ref()).map(|p| p.mean_curvature));
    let max_ruling = max_of(probes.iter().filter_map(|p| p.probe.as_ref()).map(|p| p.ruling_second_form));
    let within = |v: Option<f64>, tol: f64| v.is_some_and(|m| m <= tol);
    let checks = [
        ("norm_defect", within(max_norm, block.norm_tolerance)),
        ("ruling_second_form", within(max_ruling, block.ruling_tolerance)),
        ("mean_curvature", within(max_mean, block.mean_curvature_tolerance)),
        ("probe_errors", probes.iter().all(|p| p.error.is_none())),
    ];
    let status = Outcome::from_pass(checks.iter().all(|c| c.1));
    let show = |v: Option<f64>| v.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
    sink.say(format!(
        "norm defect {} over {} samples; ruling second form {}; mean curvature {} at {} points",
        show(max_norm),
        norm_values.len(),
        show(max_ruling),
        show(max_mean),
        probes.len()
    ));
    for (name, ok) in checks {
        if !ok {
            eprintln!("FAIL ruled {name}");
        }
    }
    write_json(
        sink.dir,
        "ruled.json",
        &RuledOutput {
            status,
            w: pairs(&w),
            max_norm_defect: max_norm,
            norm_samples: norm_values.len(),
            max_mean_curvature: max_mean,
            max_ruling_second_form: max_ruling,
            probes,
        },
    )?;
    Ok(status)
}
