use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wsphere_core::chain::{AlphaChain, IntegrationConstants, Perturbation, DEFAULT_EPS_SINGULAR};
use wsphere_core::holo::{Domain, GridSpec, HoloExpr, RealExpr, Shape};
use wsphere_core::verify::{SurfaceEvaluator, Tolerances, MAX_CALABI_ORDER};

/// Complex numbers travel as `[re, im]`.
pub type Pair = [f64; 2];

pub fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub n: usize,
    #[serde(default)]
    pub betas: Vec<String>,
    /// One list per `phi_r`, of length `2r + 1`; zeros when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration_constants: Option<Vec<Vec<Pair>>>,
    pub domain: DomainConfig,
    pub grid: GridSpec,
    #[serde(default = "default_eps")]
    pub eps_singular: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default)]
    pub reconstruct: ReconstructBlock,
    #[serde(default)]
    pub kaehler: KaehlerBlock,
    #[serde(default)]
    pub ruled: RuledBlock,
}

fn default_eps() -> f64 {
    DEFAULT_EPS_SINGULAR
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainConfig {
    #[serde(flatten)]
    pub shape: Shape,
    /// Centre of the shape when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Pair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceConfig {
    /// The surface of the configured chain.
    Chain,
    /// Components as expressions in `x` and `y`, normalized to unit length.
    Expressions { components: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// 1-based coordinates projected into the OBJ.
    pub coordinates: [usize; 3],
    pub ply: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            coordinates: [1, 2, 3],
            ply: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyBlock {
    pub calabi_max_order: usize,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self {
            calabi_max_order: MAX_CALABI_ORDER,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructBlock {
    pub sample_grid: GridSpec,
    pub eval_grid: GridSpec,
    pub order: usize,
    pub residual_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<String>,
    /// Sup-distance threshold; by default `1e-3`, `1e-2`, `1e-1` for `n = 1, 2, 3`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Default for ReconstructBlock {
    fn default() -> Self {
        let d = wsphere_core::converse::RoundtripOptions::default();
        Self {
            sample_grid: d.sample_grid,
            eval_grid: GridSpec { rows: 21, cols: 21 },
            order: d.order,
            residual_tolerance: d.residual_tolerance,
            gauge: None,
            tolerance: None,
        }
    }
}

impl ReconstructBlock {
    pub fn tolerance_for(&self, n: usize) -> f64 {
        self.tolerance.unwrap_or(match n {
            1 => 1e-3,
            2 => 1e-2,
            _ => 1e-1,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KaehlerBlock {
    /// `gamma(x, y)`.
    pub gamma: String,
    /// Normal coordinates for the mesh, `n - 1` pairs; zeros when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Pair>>,
    /// Half-width of the box sampled in every real `w` coordinate.
    pub w_box: f64,
    pub w_samples: usize,
    pub min_regular_fraction: f64,
    pub affine_tolerance: f64,
    pub crosscheck_tolerance: f64,
}

impl Default for KaehlerBlock {
    fn default() -> Self {
        Self {
            gamma: "1 + x^2 + y^2".into(),
            w: None,
            w_box: 0.5,
            w_samples: 3,
            min_regular_fraction: 0.95,
            affine_tolerance: 1e-10,
            crosscheck_tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuledBlock {
    /// Ruling coordinates for the mesh, `n - 2` pairs; zeros when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Pair>>,
    pub w_box: f64,
    pub w_samples: usize,
    /// Points for the minimality probe; five spread points when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_points: Option<Vec<Pair>>,
    pub norm_tolerance: f64,
    pub ruling_tolerance: f64,
    pub mean_curvature_tolerance: f64,
}

impl Default for RuledBlock {
    fn default() -> Self {
        Self {
            w: None,
            w_box: 1.0,
            w_samples: 3,
            probe_points: None,
            norm_tolerance: 1e-12,
            ruling_tolerance: 1e-6,
            mean_curvature_tolerance: 1e-3,
        }
    }
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("invalid config at `{path}`: {msg}")
}

/// Parses a config, reporting the JSON path of the first offending value.
pub fn parse(text: &str) -> Result<JobConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        invalid(if path.is_empty() { "." } else { &path }, e.into_inner())
    })
}

pub fn load(path: &Path) -> Result<JobConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text)
}

/// A config whose shared fields have been checked.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub domain: Domain,
    pub grid: GridSpec,
    pub fd_step: f64,
}

fn positive(path: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(path, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

impl Job {
    pub fn new(config: JobConfig) -> Result<Self> {
        let n = config.n;
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let base = config.domain.base_point.map(complex).unwrap_or(match config.domain.shape {
            Shape::Rectangle { min, max } => Complex64::new(0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1])),
            Shape::Disk { center, .. } => complex(center),
        });
        let domain = Domain::new(config.domain.shape, base).map_err(|e| invalid("domain", e))?;
        let grid = GridSpec::new(config.grid.rows, config.grid.cols).map_err(|e| invalid("grid", e))?;
        positive("eps_singular", config.eps_singular)?;
        let fd_step = config.fd_step.unwrap_or_else(|| domain.default_fd_step());
        positive("fd_step", fd_step)?;
        let dim = 2 * n + 1;
        let coords = config.output.coordinates;
        if coords.iter().any(|&c| c == 0 || c > dim) {
            return Err(invalid(
                "output.coordinates",
                format!("entries must lie in 1..={dim}, got {coords:?}"),
            ));
        }
        if coords[0] == coords[1] || coords[1] == coords[2] || coords[0] == coords[2] {
            return Err(invalid("output.coordinates", format!("entries must be distinct, got {coords:?}")));
        }
        if config.verify.calabi_max_order == 0 || config.verify.calabi_max_order > MAX_CALABI_ORDER {
            return Err(invalid(
                "verify.calabi_max_order",
                format!("must lie in 1..={MAX_CALABI_ORDER}"),
            ));
        }
        Ok(Self {
            config,
            domain,
            grid,
            fd_step,
        })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn dim(&self) -> usize {
        2 * self.config.n + 1
    }

    pub fn chain(&self) -> Result<AlphaChain> {
        let c = &self.config;
        if c.betas.len() != c.n {
            return Err(invalid(
                "betas",
                format!("expected n = {} expressions, found {}", c.n, c.betas.len()),
            ));
        }
        let betas = c
            .betas
            .iter()
            .enumerate()
            .map(|(i, s)| HoloExpr::parse(s).map_err(|e| invalid(&format!("betas[{i}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        let constants = match &c.integration_constants {
            None => IntegrationConstants::zeros(c.n),
            Some(levels) => {
                if levels.len() != c.n {
                    return Err(invalid(
                        "integration_constants",
                        format!("expected {} lists, found {}", c.n, levels.len()),
                    ));
                }
                for (r, level) in levels.iter().enumerate() {
                    if level.len() != 2 * r + 1 {
                        return Err(invalid(
                            &format!("integration_constants[{r}]"),
                            format!("expected {} pairs, found {}", 2 * r + 1, level.len()),
                        ));
                    }
                }
                IntegrationConstants(levels.iter().map(|l| l.iter().copied().map(complex).collect()).collect())
            }
        };
        let mut chain = AlphaChain::build(betas, constants, self.domain)?;
        if let Some(p) = c.perturbation {
            chain = chain.with_perturbation(p).map_err(|e| invalid("perturbation", e))?;
        }
        Ok(chain)
    }

    /// The surface named by `source`, or `None` when no source is configured.
    pub fn source_surface(&self) -> Result<Option<SurfaceEvaluator>> {
        let Some(source) = &self.config.source else {
            return Ok(None);
        };
        let eval = match source {
            SourceConfig::Chain => SurfaceEvaluator::from_chain(&self.chain()?, self.config.eps_singular),
            SourceConfig::Expressions { components } => {
                if components.len() != self.dim() {
                    return Err(invalid(
                        "source.components",
                        format!("expected 2n + 1 = {} expressions, found {}", self.dim(), components.len()),
                    ));
                }
                let exprs = components
                    .iter()
                    .enumerate()
                    .map(|(i, s)| RealExpr::parse(s).map_err(|e| invalid(&format!("source.components[{i}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                SurfaceEvaluator::new(self.dim(), self.domain, self.fd_step, move |z| {
                    let v = exprs.iter().map(|e| e.eval(z.re, z.im)).collect::<wsphere_core::Result<Vec<_>>>()?;
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !(norm > 0.0) {
                        return Err(wsphere_core::Error::SingularPoint {
                            z,
                            reason: "all components vanish".into(),
                        });
                    }
                    Ok(v.iter().map(|x| x / norm).collect())
                })?
            }
        };
        Ok(Some(eval.with_fd_step(self.fd_step)?))
    }

    /// `count` complex parameters from `values`, zeros when absent.
    pub fn params(path: &str, values: &Option<Vec<Pair>>, count: usize) -> Result<Vec<Complex64>> {
        match values {
            None => Ok(vec![Complex64::new(0.0, 0.0); count]),
            Some(v) if v.len() == count => Ok(v.iter().copied().map(complex).collect()),
            Some(v) => bail!(invalid(path, format!("expected {count} pairs, found {}", v.len()))),
        }
    }
}

/// Built-in sample config for `n = 1, 2, 3`.
pub fn demo(n: usize) -> Result<JobConfig> {
    if !(1..=3).contains(&n) {
        bail!("--seed-demo takes n = 1, 2 or 3, got {n}");
    }
    let betas = match n {
        1 => vec!["1"],
        2 => vec!["1", "1 + z/2"],
        _ => vec!["1", "1", "1"],
    };
    Ok(JobConfig {
        n,
        betas: betas.into_iter().map(String::from).collect(),
        integration_constants: None,
        domain: DomainConfig {
            shape: Shape::Rectangle {
                min: [-1.0, -1.0],
                max: [1.0, 1.0],
            },
            base_point: Some([0.0, 0.0]),
        },
        grid: GridSpec { rows: 16, cols: 16 },
        eps_singular: DEFAULT_EPS_SINGULAR,
        fd_step: None,
        tolerances: Tolerances::default(),
        perturbation: None,
        source: Some(SourceConfig::Chain),
        output: OutputConfig::default(),
        verify: VerifyBlock::default(),
        reconstruct: ReconstructBlock::default(),
        kaehler: KaehlerBlock::default(),
        ruled: RuledBlock::default(),
    })
}
