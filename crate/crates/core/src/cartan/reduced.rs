//! Closed-form reductions of the coordinate map on special chamber subsets.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::CartanPoint;
use crate::error::{Error, Result};

/// `x = 1/tan 2c1`, `y = 1/tan² 2c2`, `z = 1/tan² 2c3` and `Ω = (1+y)/(1+z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoordinates {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub omega: f64,
}

impl ReducedCoordinates {
    pub fn from_point(c: CartanPoint) -> Self {
        let t2 = |a: f64| (2.0 * a).tan().powi(2);
        let y = 1.0 / t2(c.c2);
        let z = 1.0 / t2(c.c3);
        Self { x: 1.0 / (2.0 * c.c1).tan(), y, z, omega: face_invariant(c.c2, c.c3) }
    }
}

/// `x' = 2x / (1 + √(4x² + 1))` on the edge `c1 = c2 = c3`.
pub fn xxx_step(x: f64) -> f64 {
    2.0 * x / (1.0 + (4.0 * x * x + 1.0).sqrt())
}

/// `(y, z) → (y/(1+z), z/(1+y))` on the face `c1 = π/4`.
pub fn face_step(y: f64, z: f64) -> (f64, f64) {
    (y / (1.0 + z), z / (1.0 + y))
}

/// `Ω = sin² 2c3 / sin² 2c2`, conserved by [`face_step`].
pub fn face_invariant(c2: f64, c3: f64) -> f64 {
    ((2.0 * c3).sin() / (2.0 * c2).sin()).powi(2)
}

fn geometric_sum(omega: f64, n: u32) -> f64 {
    if (1.0 - omega).abs() < 1e-9 {
        // (1 − Ωⁿ)/(1 − Ω) → n, expanded to first order in (Ω − 1).
        let e = omega - 1.0;
        let n = n as f64;
        n + e * n * (n - 1.0) / 2.0
    } else {
        (1.0 - omega.powi(n as i32)) / (1.0 - omega)
    }
}

fn require_face(omega: f64) -> Result<()> {
    if (1.0 - omega).abs() < 1e-12 {
        return Err(Error::InvalidArgument("Ω = 1 is the marginal edge c2 = c3; use edge_step".into()));
    }
    Ok(())
}

/// `y_n = Ωⁿ y0 / (1 + ((1 − Ωⁿ)/(1 − Ω)) y0)`.
pub fn face_solution(n: u32, y0: f64, omega: f64) -> Result<f64> {
    require_face(omega)?;
    Ok(omega.powi(n as i32) * y0 / (1.0 + geometric_sum(omega, n) * y0))
}

/// `z_n = z0 / (Ωⁿ + ((1 − Ωⁿ)/(1 − Ω)) Ω z0)`.
pub fn face_z_solution(n: u32, z0: f64, omega: f64) -> Result<f64> {
    require_face(omega)?;
    Ok(z0 / (omega.powi(n as i32) + geometric_sum(omega, n) * omega * z0))
}

/// Limiting `c3` for a seed `(π/4, c2, c3)` on the face.
pub fn c3_limit(c2: f64, c3: f64) -> f64 {
    let (s2, s3) = ((2.0 * c2).sin(), (2.0 * c3).sin());
    0.5 * s3.atan2((s2 * s2 - s3 * s3).max(0.0).sqrt())
}

/// `y' = y / (1 + y)` on the edge `c1 = π/4, c2 = c3`.
pub fn edge_step(y: f64) -> f64 {
    y / (1.0 + y)
}

/// `y0 / √(n y0² + 1)`.
///
/// This is the closed form of the amplitude `1/tan 2c2 = √y`, not of `y`
/// itself: `edge_solution(n, √y0)² = edge_stepⁿ(y0)`.
pub fn edge_solution(n: u32, y0: f64) -> f64 {
    y0 / (n as f64 * y0 * y0 + 1.0).sqrt()
}

/// Exact solution of [`edge_step`]: `y0 / (1 + n y0)`.
pub fn edge_solution_direct(n: u32, y0: f64) -> f64 {
    y0 / (1.0 + n as f64 * y0)
}

/// The two-dimensional map on the face `c1 = c2 = c`.
pub fn xxz_step(c: f64, c3: f64) -> (f64, f64) {
    let t2 = c.tan().powi(2);
    let c_next = FRAC_PI_4 - 0.25 * (0.5 * (2.0 * c3).sin() * (1.0 / t2 - t2)).atan();
    let c3_next = 0.5 * c3 + 0.25 * (0.5 * (2.0 * c3).tan() * (1.0 / t2 + t2)).atan();
    (c_next, c3_next)
}
