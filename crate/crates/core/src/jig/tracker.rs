//! Proportional force tracking on the linear rail.

use serde::Serialize;

/// Rail speed limit, mm/s.
pub const V_MAX_MMS: f64 = 100.0;
pub const DEFAULT_K_P: f64 = 6.0;

/// Proportional law `u_feed = K_p · (F_d − F_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceTracker {
    /// Desired force, gf.
    pub f_d: f64,
    /// Gain, mm/s per gf.
    pub k_p: f64,
    /// Velocity saturation, mm/s.
    pub v_max_mms: f64,
}

impl ForceTracker {
    pub fn new(f_d: f64) -> Self {
        Self {
            f_d,
            k_p: DEFAULT_K_P,
            v_max_mms: V_MAX_MMS,
        }
    }

    pub fn error(&self, f_m: f64) -> f64 {
        self.f_d - f_m
    }

    /// Unsaturated feed velocity, mm/s.
    pub fn raw_command_mms(&self, f_m: f64) -> f64 {
        self.k_p * self.error(f_m)
    }

    /// Feed velocity in m/s, saturated to `[lo_mms, v_max]`.
    pub fn command_with_floor(&self, f_m: f64, lo_mms: f64) -> f64 {
        self.raw_command_mms(f_m).clamp(lo_mms, self.v_max_mms) * 1e-3
    }
}

/// Feed velocity in m/s for the measured force `f_m` (gf), saturated at
/// ±v_max. Positive values drive the sled toward the peg.
pub fn force_control_step(tracker: &ForceTracker, f_m: f64, dt: f64) -> f64 {
    debug_assert!(dt > 0.0, "dt = {dt}");
    tracker.command_with_floor(f_m, -tracker.v_max_mms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_zero_feed() {
        assert_eq!(force_control_step(&ForceTracker::new(350.0), 350.0, 1e-3), 0.0);
    }

    #[test]
    fn large_error_saturates() {
        let t = ForceTracker::new(350.0);
        assert_eq!(t.raw_command_mms(250.0), 600.0);
        assert_eq!(force_control_step(&t, 250.0, 1e-3), 0.1);
    }

    #[test]
    fn excess_force_retracts() {
        let t = ForceTracker::new(150.0);
        let u = force_control_step(&t, 350.0, 1e-3);
        assert!(u < 0.0);
        assert_eq!(u, -0.1);
        assert!((force_control_step(&t, 155.0, 1e-3) + 0.03).abs() < 1e-15);
    }
}
