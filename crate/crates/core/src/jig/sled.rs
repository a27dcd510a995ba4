//! Integration of the sled position under a force-dependent feed law.
//!
//! The commanded velocity depends on the measured force, which depends on
//! the sled position. Once the lumped spring engages the loop gain per step
//! (stiffness · K_p · dt) exceeds 2 at a 1 ms step, so forward Euler rings
//! and diverges. The default integrator solves the backward-Euler step
//! instead, which is unconditionally stable for a monotone plant.

use crate::registry::Registry;

pub const DEFAULT_INTEGRATOR: &str = "implicit";

pub trait SledIntegrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Position after one step of length `dt`. `velocity(s)` returns the
    /// commanded feed (m/s) at position `s` and must lie within `bounds`.
    fn advance(&self, s: f64, dt: f64, velocity: &dyn Fn(f64) -> f64, bounds: (f64, f64)) -> f64;
}

/// Forward Euler: `s' = s + dt · v(s)`.
#[derive(Debug, Default)]
pub struct Explicit;

impl SledIntegrator for Explicit {
    fn name(&self) -> &'static str {
        "explicit"
    }

    fn advance(&self, s: f64, dt: f64, velocity: &dyn Fn(f64) -> f64, _bounds: (f64, f64)) -> f64 {
        s + dt * velocity(s)
    }
}

/// Backward Euler: solves `s' = s + dt · v(s')` by bisection.
///
/// `v` is non-increasing in position whenever the force is non-decreasing
/// in intrusion, so the residual is strictly increasing and the root is
/// unique inside the velocity bounds.
#[derive(Debug, Default)]
pub struct Implicit;

impl Implicit {
    const MAX_ITER: usize = 200;
}

impl SledIntegrator for Implicit {
    fn name(&self) -> &'static str {
        "implicit"
    }

    fn advance(&self, s: f64, dt: f64, velocity: &dyn Fn(f64) -> f64, bounds: (f64, f64)) -> f64 {
        let residual = |p: f64| p - s - dt * velocity(p);
        let (mut lo, mut hi) = (s + dt * bounds.0, s + dt * bounds.1);
        if residual(lo) >= 0.0 {
            return lo;
        }
        if residual(hi) <= 0.0 {
            return hi;
        }
        for _ in 0..Self::MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn registry() -> Registry<dyn SledIntegrator> {
    Registry::new("sled integrator")
        .with("implicit", |_| -> Box<dyn SledIntegrator> { Box::new(Implicit) })
        .with("explicit", |_| -> Box<dyn SledIntegrator> { Box::new(Explicit) })
}
