//! Points of the flat torus R^2/Z^2, its cosphere bundle, and the geodesic flow.
//!
//! Covectors on the cosphere bundle have length 1/2, so the Hamiltonian flow of
//! |xi|^2 moves base points with unit speed: x' = 2 xi.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Reduce a coordinate to `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x.floor() can round so that r == 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Nearest-image representative of a coordinate difference, in `[-1/2, 1/2)`.
#[inline]
pub fn nearest_image(d: f64) -> f64 {
    let r = wrap_unit(d + 0.5) - 0.5;
    if r < -0.5 {
        r + 1.0
    } else {
        r
    }
}

/// Reduce an angle to `[0, 2pi)`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point of the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x1: f64,
    pub x2: f64,
}

impl TorusPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1: wrap_unit(x1), x2: wrap_unit(x2) }
    }

    pub fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x1
        } else {
            self.x2
        }
    }

    /// Geodesic distance on the torus.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        let d1 = nearest_image(self.x1 - other.x1);
        let d2 = nearest_image(self.x2 - other.x2);
        d1.hypot(d2)
    }

    /// Nearest-image displacement `self - origin` in `[-1/2, 1/2)^2`.
    pub fn displacement_from(&self, origin: &TorusPoint) -> [f64; 2] {
        [nearest_image(self.x1 - origin.x1), nearest_image(self.x2 - origin.x2)]
    }
}

/// A point of the cosphere bundle: base point plus direction angle.
///
/// The covector is `(cos theta, sin theta) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CospherePoint {
    pub base: TorusPoint,
    pub theta: f64,
}

impl CospherePoint {
    pub fn new(base: TorusPoint, theta: f64) -> Self {
        Self { base, theta: wrap_angle(theta) }
    }

    pub fn from_coords(x1: f64, x2: f64, theta: f64) -> Self {
        Self::new(TorusPoint::new(x1, x2), theta)
    }

    /// Unit direction of motion.
    pub fn direction(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [c, s]
    }

    /// Covector with |xi| = 1/2.
    pub fn covector(&self) -> [f64; 2] {
        let [c, s] = self.direction();
        [0.5 * c, 0.5 * s]
    }
}

/// Geodesic flow for time `s`: `(x + 2 s xi mod Z^2, theta)`.
pub fn geodesic_flow(p: &CospherePoint, s: f64) -> CospherePoint {
    let [c, sn] = p.direction();
    CospherePoint {
        base: TorusPoint::new(p.base.x1 + s * c, p.base.x2 + s * sn),
        theta: p.theta,
    }
}
