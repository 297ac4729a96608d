//! Star configurations of rays through the origin and the wedges they cut
//! out of the plane.
//!
//! A full line is two opposite rays, so both the broken line (two rays) and
//! a pair of crossing lines (four rays) are instances of [`RayConfig`].

use std::f64::consts::{PI, TAU};

use thiserror::Error;

/// Two normalized angles closer than this are considered the same ray.
pub const ANGLE_DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("a star configuration needs at least 2 rays, got {0}")]
    TooFewRays(usize),
    #[error("ray {index} has non-positive or non-finite coupling {coupling}")]
    BadCoupling { index: usize, coupling: f64 },
    #[error("ray {index} has non-finite angle {angle}")]
    BadAngle { index: usize, angle: f64 },
    #[error("rays at {first} and {second} rad coincide")]
    DuplicateRay { first: f64, second: f64 },
    #[error("opening angle {phi} rad outside {range}")]
    AngleOutOfRange { phi: f64, range: &'static str },
}

/// A half-line from the origin with a δ-coupling strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// Direction in radians, normalized into `[0, 2π)`.
    pub angle: f64,
    /// Interaction strength per unit length, strictly positive.
    pub coupling: f64,
}

impl Ray {
    pub fn new(angle: f64, coupling: f64) -> Self {
        Self { angle, coupling }
    }

    pub fn direction(&self) -> (f64, f64) {
        (self.angle.cos(), self.angle.sin())
    }
}

/// Rays sorted by angle in `[0, 2π)`, pairwise distinct, at least two.
#[derive(Debug, Clone, PartialEq)]
pub struct RayConfig {
    rays: Vec<Ray>,
}

pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

impl RayConfig {
    pub fn new(rays: impl IntoIterator<Item = Ray>) -> Result<Self, GeometryError> {
        let mut rays: Vec<Ray> = rays.into_iter().collect();
        if rays.len() < 2 {
            return Err(GeometryError::TooFewRays(rays.len()));
        }
        for (index, ray) in rays.iter_mut().enumerate() {
            if !ray.angle.is_finite() {
                return Err(GeometryError::BadAngle {
                    index,
                    angle: ray.angle,
                });
            }
            if !(ray.coupling.is_finite() && ray.coupling > 0.0) {
                return Err(GeometryError::BadCoupling {
                    index,
                    coupling: ray.coupling,
                });
            }
            ray.angle = normalize_angle(ray.angle);
        }
        rays.sort_by(|a, b| a.angle.total_cmp(&b.angle));

        let n = rays.len();
        for k in 0..n {
            let a = rays[k].angle;
            let b = rays[(k + 1) % n].angle;
            let gap = if k + 1 == n { b + TAU - a } else { b - a };
            if gap <= ANGLE_DEDUP_TOL {
                return Err(GeometryError::DuplicateRay {
                    first: a,
                    second: b,
                });
            }
        }
        Ok(Self { rays })
    }

    /// Rays from `(angle, coupling)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Self::new(pairs.iter().map(|&(a, c)| Ray::new(a, c)))
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn couplings(&self) -> Vec<f64> {
        self.rays.iter().map(|r| r.coupling).collect()
    }

    pub fn max_coupling(&self) -> f64 {
        self.rays.iter().map(|r| r.coupling).fold(0.0, f64::max)
    }

    /// The same star turned by `delta` radians.
    pub fn rotated(&self, delta: f64) -> Result<Self, GeometryError> {
        Self::new(
            self.rays
                .iter()
                .map(|r| Ray::new(r.angle + delta, r.coupling)),
        )
    }

    /// Every coupling multiplied by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Result<Self, GeometryError> {
        Self::new(
            self.rays
                .iter()
                .map(|r| Ray::new(r.angle, r.coupling * factor)),
        )
    }

    /// Same rays, every coupling replaced by `coupling`.
    pub fn with_uniform_coupling(&self, coupling: f64) -> Result<Self, GeometryError> {
        Self::new(self.rays.iter().map(|r| Ray::new(r.angle, coupling)))
    }
}

/// Broken line: two rays at `±phi/2` around the positive x-axis.
pub fn angle_config(phi: f64, alpha: f64) -> Result<RayConfig, GeometryError> {
    if !(phi > 0.0 && phi <= PI) {
        return Err(GeometryError::AngleOutOfRange {
            phi,
            range: "(0, π]",
        });
    }
    RayConfig::new([Ray::new(-phi / 2.0, alpha), Ray::new(phi / 2.0, alpha)])
}

/// Two full lines crossing at the origin at angle `phi`.
pub fn lines_config(phi: f64, alpha: f64) -> Result<RayConfig, GeometryError> {
    if !(phi > 0.0 && phi < PI) {
        return Err(GeometryError::AngleOutOfRange {
            phi,
            range: "(0, π)",
        });
    }
    RayConfig::new([
        Ray::new(0.0, alpha),
        Ray::new(phi, alpha),
        Ray::new(PI, alpha),
        Ray::new(PI + phi, alpha),
    ])
}

/// Sector swept counterclockwise from `right_ray` to `left_ray`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub opening: f64,
    pub left_ray: usize,
    pub right_ray: usize,
}

/// Wedge `k` lies between ray `k` and ray `k + 1 (mod N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeDecomposition {
    wedges: Vec<Wedge>,
}

impl WedgeDecomposition {
    pub fn wedges(&self) -> &[Wedge] {
        &self.wedges
    }

    pub fn openings(&self) -> Vec<f64> {
        self.wedges.iter().map(|w| w.opening).collect()
    }

    pub fn len(&self) -> usize {
        self.wedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wedges.is_empty()
    }
}

pub fn wedges_of(config: &RayConfig) -> WedgeDecomposition {
    let rays = config.rays();
    let n = rays.len();
    let wedges = (0..n)
        .map(|k| {
            let next = (k + 1) % n;
            let opening = if next == 0 {
                rays[0].angle + TAU - rays[k].angle
            } else {
                rays[next].angle - rays[k].angle
            };
            Wedge {
                opening,
                left_ray: next,
                right_ray: k,
            }
        })
        .collect();
    WedgeDecomposition { wedges }
}
