use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
}

/// A convex planar domain with a base point for path integrals.
///
/// Convexity means straight segments from the base point stay inside, which is
/// all the simple-connectedness the local construction needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    shape: Shape,
    base_point: Complex64,
}

impl Domain {
    pub fn new(shape: Shape, base_point: Complex64) -> Result<Self> {
        let shape = match shape {
            Shape::Rectangle { min, max } => {
                let lo = [min[0].min(max[0]), min[1].min(max[1])];
                let hi = [min[0].max(max[0]), min[1].max(max[1])];
                if !(hi[0] > lo[0] && hi[1] > lo[1]) {
                    return Err(Error::InvalidDomain("rectangle has empty interior".into()));
                }
                Shape::Rectangle { min: lo, max: hi }
            }
            Shape::Disk { radius, .. } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidDomain(format!("disk radius {radius} must be positive")));
                }
                shape
            }
        };
        let d = Self { shape, base_point };
        if !d.is_interior(base_point) {
            return Err(Error::InvalidDomain(format!(
                "base point {base_point} is not interior"
            )));
        }
        Ok(d)
    }

    pub fn rectangle(a: Complex64, b: Complex64, base_point: Complex64) -> Result<Self> {
        Self::new(
            Shape::Rectangle {
                min: [a.re, a.im],
                max: [b.re, b.im],
            },
            base_point,
        )
    }

    pub fn disk(center: Complex64, radius: f64, base_point: Complex64) -> Result<Self> {
        Self::new(
            Shape::Disk {
                center: [center.re, center.im],
                radius,
            },
            base_point,
        )
    }

    /// The square `[-h, h]^2` with base point at the origin.
    pub fn centered_square(h: f64) -> Result<Self> {
        Self::rectangle(Complex64::new(-h, -h), Complex64::new(h, h), Complex64::new(0.0, 0.0))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    /// Closed membership, with a tiny slack for points computed on the boundary.
    pub fn contains(&self, z: Complex64) -> bool {
        self.margin(z) >= -1e-12 * self.diameter()
    }

    pub fn is_interior(&self, z: Complex64) -> bool {
        self.margin(z) > 0.0
    }

    /// Signed distance-like margin: positive inside, the distance to the boundary
    /// for interior points.
    pub fn margin(&self, z: Complex64) -> f64 {
        match self.shape {
            Shape::Rectangle { min, max } => (z.re - min[0])
                .min(max[0] - z.re)
                .min(z.im - min[1])
                .min(max[1] - z.im),
            Shape::Disk { center, radius } => {
                radius - (z - Complex64::new(center[0], center[1])).norm()
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.shape {
            Shape::Rectangle { min, max } => (max[0] - min[0]).hypot(max[1] - min[1]),
            Shape::Disk { radius, .. } => 2.0 * radius,
        }
    }

    /// Axis-aligned bounding box as (lower-left, upper-right).
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        match self.shape {
            Shape::Rectangle { min, max } => {
                (Complex64::new(min[0], min[1]), Complex64::new(max[0], max[1]))
            }
            Shape::Disk { center, radius } => (
                Complex64::new(center[0] - radius, center[1] - radius),
                Complex64::new(center[0] + radius, center[1] + radius),
            ),
        }
    }

    /// Default finite-difference step: `1e-4` times the diameter.
    pub fn default_fd_step(&self) -> f64 {
        1e-4 * self.diameter()
    }

    /// The same shape shrunk by `margin` on every side (base point kept if still interior,
    /// otherwise moved to the centre).
    pub fn shrunk(&self, margin: f64) -> Result<Self> {
        let shape = match self.shape {
            Shape::Rectangle { min, max } => Shape::Rectangle {
                min: [min[0] + margin, min[1] + margin],
                max: [max[0] - margin, max[1] - margin],
            },
            Shape::Disk { center, radius } => Shape::Disk {
                center,
                radius: radius - margin,
            },
        };
        let (lo, hi) = self.bounding_box();
        let centre = (lo + hi) * 0.5;
        match Self::new(shape, self.base_point) {
            Ok(d) => Ok(d),
            Err(_) => Self::new(shape, centre),
        }
    }
}

/// Rectangular sampling grid over the bounding box of a domain, row-major,
/// rows along the imaginary axis and columns along the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::GridTooSmall { rows, cols });
        }
        Ok(Self { rows, cols })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid nodes including the box corners, row-major.
    pub fn points(&self, lo: Complex64, hi: Complex64) -> Vec<Complex64> {
        let step = |a: f64, b: f64, k: usize, m: usize| a + (b - a) * k as f64 / (m - 1) as f64;
        (0..self.rows)
            .flat_map(|r| {
                (0..self.cols).map(move |c| {
                    Complex64::new(step(lo.re, hi.re, c, self.cols), step(lo.im, hi.im, r, self.rows))
                })
            })
            .collect()
    }
}
