//! Globally adaptive Gauss–Kronrod (7, 15) quadrature along straight segments in the
//! complex plane, for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_DEPTH: u32 = 30;
const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

struct Piece {
    lo: f64,
    hi: f64,
    depth: u32,
    value: Vec<Complex64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// One G7/K15 panel on `t in [lo, hi]` of the parametrized integrand `h(t)`.
fn panel<F>(h: &F, lo: f64, hi: f64, depth: u32) -> Result<Piece>
where
    F: Fn(f64) -> Result<Vec<Complex64>>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mid = h(centre)?;
    let dim = mid.len();
    let mut kron: Vec<Complex64> = mid.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<Complex64> = mid.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = half * XGK[j];
        let a = h(centre - dx)?;
        let b = h(centre + dx)?;
        if a.len() != dim || b.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: a.len().max(b.len()),
            });
        }
        for k in 0..dim {
            let s = a[k] + b[k];
            kron[k] += s * WGK[j];
            if j % 2 == 1 {
                gauss[k] += s * WG[j / 2];
            }
        }
    }
    let value: Vec<Complex64> = kron.iter().map(|v| v * half).collect();
    let error = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * half).norm())
        .fold(0.0, f64::max);
    Ok(Piece {
        lo,
        hi,
        depth,
        value,
        error,
    })
}

/// Integrates `f` along the straight segment from `a` to `b`.
///
/// The error target is `max(abs_tol, 50 eps |I|)`, so the absolute tolerance is
/// honoured whenever it is above the rounding floor of the result.
pub fn integrate_segment<F>(
    f: F,
    a: Complex64,
    b: Complex64,
    opts: QuadratureOptions,
) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    let delta = b - a;
    let h = |t: f64| -> Result<Vec<Complex64>> {
        let mut v = f(a + delta * t)?;
        for c in v.iter_mut() {
            *c *= delta;
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite { z: a + delta * t });
            }
        }
        Ok(v)
    };
    if delta == Complex64::new(0.0, 0.0) {
        let probe = f(a)?;
        return Ok(vec![Complex64::new(0.0, 0.0); probe.len()]);
    }
    let first = panel(&h, 0.0, 1.0, 0)?;
    let mut total: Vec<Complex64> = first.value.clone();
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let target = opts.abs_tol.max(50.0 * f64::EPSILON * max_abs(&total));
        if total_err <= target {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap holds every panel");
        if worst.depth >= opts.max_depth || heap.len() + 2 > MAX_INTERVALS {
            return Err(Error::QuadratureFailed { z: b });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = panel(&h, worst.lo, mid, worst.depth + 1)?;
        let right = panel(&h, mid, worst.hi, worst.depth + 1)?;
        for k in 0..total.len() {
            total[k] += left.value[k] + right.value[k] - worst.value[k];
        }
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally drifting error bookkeeping.
        if total_err < 0.0 {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// Scalar convenience wrapper around [`integrate_segment`].
pub fn integrate_segment_scalar<F>(
    f: F,
    a: Complex64,
    b: Complex64,
    opts: QuadratureOptions,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    Ok(integrate_segment(|z| Ok(vec![f(z)?]), a, b, opts)?[0])
}
