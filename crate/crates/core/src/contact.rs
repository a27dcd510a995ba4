//! Quasi-static contact-force model of the membrane.
//!
//! Two compression-only power-law springs act in parallel on a disk that
//! rides a prismatic joint of travel `[0, x_l]`:
//!
//! - the air spring of the inflated membrane, `a1 · D · x^a2`, which scales
//!   linearly with the payload diameter `D`;
//! - the lumped spring of the jammed filler and structure, `a3 · x^a4`,
//!   which only engages once the intrusion exceeds the free length `x_a`.
//!
//! The free length shrinks linearly with the free-volume ratio β. There is no
//! damping term.
//!
//! Units: intrusion in metres, peg diameter in millimetres, forces in newtons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted constants and geometry of the contact model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    /// Air-spring coefficient, N per mm of diameter per m^a2.
    pub a1: f64,
    /// Air-spring exponent.
    pub a2: f64,
    /// Lumped-spring coefficient, N per m^a4.
    pub a3: f64,
    /// Lumped-spring exponent.
    pub a4: f64,
    /// Free length of the fully inflated membrane, m.
    pub x_a_max: f64,
    /// Membrane height, which is also the joint travel limit, m.
    pub x_l: f64,
    pub disk_diameter: f64,
    pub disk_mass: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            a1: 102.87,
            a2: 1.88,
            a3: 25119.75,
            a4: 1.29,
            x_a_max: 0.0408,
            x_l: 0.060,
            disk_diameter: 0.080,
            disk_mass: 0.020,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.a1,
            self.a2,
            self.a3,
            self.a4,
            self.x_a_max,
            self.x_l,
            self.disk_diameter,
            self.disk_mass,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("contact parameters", "all values must be finite"));
        }
        if self.a1 <= 0.0 || self.a3 <= 0.0 {
            return Err(Error::invalid("contact parameters", "a1 and a3 must be positive"));
        }
        if self.a2 <= 1.0 || self.a4 <= 1.0 {
            return Err(Error::invalid("contact parameters", "a2 and a4 must exceed 1"));
        }
        if !(0.0 < self.x_a_max && self.x_a_max < self.x_l) {
            return Err(Error::invalid("contact parameters", "need 0 < x_a_max < x_l"));
        }
        if self.disk_diameter <= 0.0 || self.disk_mass <= 0.0 {
            return Err(Error::invalid("contact parameters", "disk geometry must be positive"));
        }
        Ok(())
    }
}

/// Cylindrical test peg. The diameter is restricted to the range over which
/// the air-spring constants were identified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peg {
    diameter_mm: f64,
}

impl Peg {
    pub const MAX_DIAMETER_MM: f64 = 60.0;

    pub fn new(diameter_mm: f64) -> Result<Self> {
        if diameter_mm.is_finite() && diameter_mm > 0.0 && diameter_mm <= Self::MAX_DIAMETER_MM {
            Ok(Self { diameter_mm })
        } else {
            Err(Error::Domain(format!(
                "peg diameter {diameter_mm} mm outside (0, {}]",
                Self::MAX_DIAMETER_MM
            )))
        }
    }

    pub fn diameter_mm(&self) -> f64 {
        self.diameter_mm
    }
}

/// Compression-only clamp: negative deflections produce no spring force.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Elastic force of the inflated membrane pressed by a peg, N.
pub fn f_air(x: f64, peg: &Peg, params: &ContactParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    params.a1 * peg.diameter_mm() * x.powf(params.a2)
}

/// Lumped elastic force of the jammed gripper assembly, N.
pub fn f_lmp(x: f64, params: &ContactParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    params.a3 * x.powf(params.a4)
}

/// Free length of the membrane for a given free-volume ratio, m.
pub fn shrink(beta: f64, params: &ContactParams) -> f64 {
    params.x_a_max * beta
}

/// Clamps β into `[0, 1]`, logging when integration drift pushed it out.
pub fn clamp_beta(beta: f64) -> f64 {
    if (0.0..=1.0).contains(&beta) {
        beta
    } else {
        let clamped = if beta.is_nan() { 0.0 } else { beta.clamp(0.0, 1.0) };
        log::warn!("free-volume ratio {beta} clamped to {clamped}");
        clamped
    }
}

/// Combined joint force at joint position `x`, N.
///
/// Errors when `x` leaves the joint travel `[0, x_l]`.
pub fn f_ug(x: f64, beta: f64, peg: &Peg, params: &ContactParams) -> Result<f64> {
    if !(0.0..=params.x_l).contains(&x) {
        return Err(Error::Domain(format!(
            "joint position {x} m outside [0, {}]",
            params.x_l
        )));
    }
    let x_a = shrink(clamp_beta(beta), params);
    Ok(f_air(ramp(x), peg, params) + f_lmp(ramp(x - x_a), params))
}
