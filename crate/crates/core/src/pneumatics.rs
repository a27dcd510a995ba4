//! Free-volume ratio and internal-pressure dynamics of the membrane.
//!
//! β follows a first-order lag toward a unit-step target (0 = evacuated,
//! 1 = inflated) and is advanced with the exact exponential solution, so the
//! result does not depend on the step size. The pressure relaxes toward the
//! stall pressure of whichever pump runs; a sealed membrane holds its
//! pressure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest step accepted by the fixed-timestep integrators, s.
pub const MAX_DT: f64 = 0.01;

/// Measured vacuum differential of the pump pair, kPa.
pub const VACUUM_FLOOR_KPA: f64 = -28.0;
/// Inflation asymptote, slightly above the upper threshold, kPa.
pub const INFLATION_CEIL_KPA: f64 = 2.0;

/// Typical evacuation period between start and end of closing, s.
pub const EVACUATION_PERIOD_S: f64 = 4.3;
/// Opening duration implied by an ~11 s grasp/release cycle, s.
pub const INFLATION_PERIOD_S: f64 = 6.7;

/// Pump and valve drive flags. Pump "in" inflates through valve 1, pump
/// "out" evacuates through valve 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Actuation {
    pub pump_in_on: bool,
    pub pump_out_on: bool,
    pub valve1_open: bool,
    pub valve2_open: bool,
}

impl Actuation {
    pub const SEALED: Actuation = Actuation {
        pump_in_on: false,
        pump_out_on: false,
        valve1_open: false,
        valve2_open: false,
    };
    pub const EVACUATE: Actuation = Actuation {
        pump_in_on: false,
        pump_out_on: true,
        valve1_open: false,
        valve2_open: true,
    };
    pub const INFLATE: Actuation = Actuation {
        pump_in_on: true,
        pump_out_on: false,
        valve1_open: true,
        valve2_open: false,
    };

    pub fn is_sealed(&self) -> bool {
        !self.pump_in_on && !self.pump_out_on && !self.valve1_open && !self.valve2_open
    }

    pub fn pumps_conflict(&self) -> bool {
        self.pump_in_on && self.pump_out_on
    }
}

/// Discrete gripper state derived from β alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MembraneState {
    Closed,
    Opened,
    InTransition,
}

pub const CLOSED_BETA: f64 = 0.01;
pub const OPENED_BETA: f64 = 0.99;

pub fn classify(beta: f64) -> MembraneState {
    if beta <= CLOSED_BETA {
        MembraneState::Closed
    } else if beta >= OPENED_BETA {
        MembraneState::Opened
    } else {
        MembraneState::InTransition
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PneumaticParams {
    /// Time constant of β, s.
    pub time_constant_s: f64,
    /// Pressure time constant while evacuating, s.
    pub tau_evac_s: f64,
    /// Pressure time constant while inflating, s.
    pub tau_infl_s: f64,
    pub p_floor_kpa: f64,
    pub p_ceil_kpa: f64,
}

impl Default for PneumaticParams {
    fn default() -> Self {
        Self {
            time_constant_s: 2.8,
            tau_evac_s: calibrate_tau_evac(-21.0),
            tau_infl_s: calibrate_tau_infl(-21.0, 0.5),
            p_floor_kpa: VACUUM_FLOOR_KPA,
            p_ceil_kpa: INFLATION_CEIL_KPA,
        }
    }
}

/// Evacuation time constant such that pumping down from ambient crosses
/// `p_min_kpa` after [`EVACUATION_PERIOD_S`].
pub fn calibrate_tau_evac(p_min_kpa: f64) -> f64 {
    let remaining = (p_min_kpa - VACUUM_FLOOR_KPA) / (0.0 - VACUUM_FLOOR_KPA);
    EVACUATION_PERIOD_S / (1.0 / remaining).ln()
}

/// Inflation time constant such that pumping up from `p_min_kpa` crosses
/// `p_max_kpa` after [`INFLATION_PERIOD_S`].
pub fn calibrate_tau_infl(p_min_kpa: f64, p_max_kpa: f64) -> f64 {
    let ratio = (INFLATION_CEIL_KPA - p_min_kpa) / (INFLATION_CEIL_KPA - p_max_kpa);
    INFLATION_PERIOD_S / ratio.ln()
}

impl PneumaticParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("time_constant_s", self.time_constant_s),
            ("tau_evac_s", self.tau_evac_s),
            ("tau_infl_s", self.tau_infl_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("pneumatic time constant", format!("{name} = {v}")));
            }
        }
        if !(self.p_floor_kpa < 0.0 && self.p_ceil_kpa > 0.0) {
            return Err(Error::invalid(
                "pneumatic pressure bounds",
                "need p_floor_kpa < 0 < p_ceil_kpa",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PneumaticState {
    pub beta: f64,
    /// Step input the first-order lag is tracking: 0 or 1.
    pub beta_target: f64,
    pub pressure_kpa: f64,
    pub pump_in_on: bool,
    pub pump_out_on: bool,
    pub valve1_open: bool,
    pub valve2_open: bool,
}

impl PneumaticState {
    /// Inflated membrane at ambient pressure, sealed.
    pub fn opened() -> Self {
        Self {
            beta: 1.0,
            beta_target: 1.0,
            pressure_kpa: 0.0,
            pump_in_on: false,
            pump_out_on: false,
            valve1_open: false,
            valve2_open: false,
        }
    }

    pub fn actuation(&self) -> Actuation {
        Actuation {
            pump_in_on: self.pump_in_on,
            pump_out_on: self.pump_out_on,
            valve1_open: self.valve1_open,
            valve2_open: self.valve2_open,
        }
    }

    /// Drives the pumps and valves. The β target follows the running pump;
    /// with both pumps off the previous target is kept.
    pub fn apply(&mut self, act: Actuation) -> Result<()> {
        if act.pumps_conflict() {
            return Err(Error::Simulation("both pumps commanded on".into()));
        }
        self.pump_in_on = act.pump_in_on;
        self.pump_out_on = act.pump_out_on;
        self.valve1_open = act.valve1_open;
        self.valve2_open = act.valve2_open;
        if act.pump_out_on {
            self.beta_target = 0.0;
        } else if act.pump_in_on {
            self.beta_target = 1.0;
        }
        Ok(())
    }

    pub fn is_sealed(&self) -> bool {
        self.actuation().is_sealed()
    }
}

/// Advances β toward `target` by the exact first-order step response.
pub fn step_beta(state: PneumaticState, target: f64, dt: f64, params: &PneumaticParams) -> PneumaticState {
    debug_assert!(dt > 0.0 && dt <= MAX_DT, "dt = {dt}");
    let decay = (-dt / params.time_constant_s).exp();
    let beta = target + (state.beta - target) * decay;
    PneumaticState {
        beta: beta.clamp(0.0, 1.0),
        beta_target: target,
        ..state
    }
}

/// Advances the internal pressure by one step.
pub fn step_pressure(state: PneumaticState, dt: f64, params: &PneumaticParams) -> PneumaticState {
    debug_assert!(dt > 0.0);
    let (goal, tau) = if state.pump_out_on {
        (params.p_floor_kpa, params.tau_evac_s)
    } else if state.pump_in_on {
        (params.p_ceil_kpa, params.tau_infl_s)
    } else {
        return state;
    };
    let p = goal + (state.pressure_kpa - goal) * (-dt / tau).exp();
    PneumaticState {
        pressure_kpa: p.clamp(params.p_floor_kpa, params.p_ceil_kpa),
        ..state
    }
}

/// One combined step of β and pressure.
pub fn step(state: PneumaticState, dt: f64, params: &PneumaticParams) -> PneumaticState {
    let s = step_beta(state, state.beta_target, dt, params);
    step_pressure(s, dt, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn run_beta(beta0: f64, target: f64, steps: usize, dt: f64) -> f64 {
        let p = PneumaticParams::default();
        let mut s = PneumaticState {
            beta: beta0,
            ..PneumaticState::opened()
        };
        for _ in 0..steps {
            s = step_beta(s, target, dt, &p);
        }
        s.beta
    }

    #[test]
    fn beta_step_response_at_one_time_constant() {
        let b = run_beta(0.0, 1.0, 2800, 1e-3);
        assert!((b - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((b - 0.6321).abs() < 5e-5);
    }

    #[test]
    fn beta_fixed_point() {
        assert_eq!(run_beta(1.0, 1.0, 100, 1e-3), 1.0);
        assert_eq!(run_beta(0.0, 0.0, 100, 1e-3), 0.0);
    }

    #[test]
    fn beta_decay_over_two_time_constants() {
        let b = run_beta(1.0, 0.0, 5600, 1e-3);
        assert_relative_eq!(b, 0.1353352832366127, max_relative = 1e-10);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(0.005), MembraneState::Closed);
        assert_eq!(classify(0.01), MembraneState::Closed);
        assert_eq!(classify(0.995), MembraneState::Opened);
        assert_eq!(classify(0.99), MembraneState::Opened);
        assert_eq!(classify(0.5), MembraneState::InTransition);
    }

    #[test]
    fn calibrated_time_constants() {
        let p = PneumaticParams::default();
        assert_relative_eq!(p.tau_evac_s, 3.101794337911271, max_relative = 1e-12);
        assert_relative_eq!(p.tau_infl_s, 2.454186287173952, max_relative = 1e-12);
    }

    fn pumped(pressure: f64, act: Actuation) -> PneumaticState {
        let mut s = PneumaticState {
            pressure_kpa: pressure,
            ..PneumaticState::opened()
        };
        s.apply(act).unwrap();
        s
    }

    #[test]
    fn evacuation_reaches_lower_threshold_after_calibrated_period() {
        let p = PneumaticParams::default();
        let dt = 1e-3;
        let mut s = pumped(0.0, Actuation::EVACUATE);
        let mut crossed_at = None;
        for n in 1..=6000 {
            s = step_pressure(s, dt, &p);
            if s.pressure_kpa < -21.0 && crossed_at.is_none() {
                crossed_at = Some(n as f64 * dt);
            }
        }
        let t = crossed_at.expect("never crossed");
        assert!((t - 4.3).abs() <= dt + 1e-12, "crossed at {t}");
    }

    #[test]
    fn closed_form_evacuation_value() {
        let p = PneumaticParams::default();
        let mut s = pumped(0.0, Actuation::EVACUATE);
        for _ in 0..4300 {
            s = step_pressure(s, 1e-3, &p);
        }
        assert_relative_eq!(s.pressure_kpa, -21.0, max_relative = 1e-9);
    }

    #[test]
    fn sealed_membrane_holds_pressure() {
        let p = PneumaticParams::default();
        let mut s = pumped(-21.0, Actuation::SEALED);
        for _ in 0..10_000 {
            s = step_pressure(s, 1e-3, &p);
        }
        assert_eq!(s.pressure_kpa, -21.0);
    }

    #[test]
    fn inflation_approaches_ceiling() {
        let p = PneumaticParams::default();
        let mut s = pumped(-21.0, Actuation::INFLATE);
        for _ in 0..60_000 {
            s = step_pressure(s, 1e-2, &p);
        }
        assert!((s.pressure_kpa - 2.0).abs() < 1e-9);
    }

    #[test]
    fn inflation_crosses_upper_threshold_after_calibrated_period() {
        let p = PneumaticParams::default();
        let mut s = pumped(-21.0, Actuation::INFLATE);
        for _ in 0..6700 {
            s = step_pressure(s, 1e-3, &p);
        }
        assert_relative_eq!(s.pressure_kpa, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn conflicting_pumps_are_rejected() {
        let mut s = PneumaticState::opened();
        let both = Actuation {
            pump_in_on: true,
            pump_out_on: true,
            ..Actuation::SEALED
        };
        assert!(s.apply(both).is_err());
    }

    #[test]
    fn beta_target_follows_pumps_and_holds_when_sealed() {
        let mut s = PneumaticState::opened();
        s.apply(Actuation::EVACUATE).unwrap();
        assert_eq!(s.beta_target, 0.0);
        s.apply(Actuation::SEALED).unwrap();
        assert_eq!(s.beta_target, 0.0);
        s.apply(Actuation::INFLATE).unwrap();
        assert_eq!(s.beta_target, 1.0);
    }

    proptest! {
        #[test]
        fn step_size_invariance(beta0 in 0.0..=1.0f64, target in prop::bool::ANY, steps in 1usize..200) {
            let target = if target { 1.0 } else { 0.0 };
            let coarse = run_beta(beta0, target, steps, 1e-2);
            let fine = run_beta(beta0, target, steps * 10, 1e-3);
            prop_assert!((coarse - fine).abs() < 1e-12);
        }

        #[test]
        fn state_stays_in_bounds(p0 in -28.0..=2.0f64, beta0 in 0.0..=1.0f64, mode in 0u8..3, n in 1usize..3000) {
            let p = PneumaticParams::default();
            let act = [Actuation::SEALED, Actuation::EVACUATE, Actuation::INFLATE][mode as usize];
            let mut s = PneumaticState { beta: beta0, pressure_kpa: p0, ..PneumaticState::opened() };
            s.apply(act).unwrap();
            for _ in 0..n {
                s = step(s, 1e-2, &p);
                prop_assert!((0.0..=1.0).contains(&s.beta));
                prop_assert!((-28.0..=2.0).contains(&s.pressure_kpa));
            }
        }
    }
}
