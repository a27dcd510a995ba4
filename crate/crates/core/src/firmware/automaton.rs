//! Gripper state machine.
//!
//! ```text
//!  undefined --1--> startup --2--> opened --4--> closing
//!                                    ^              |
//!                                    6              3
//!                                    |              v
//!                                 opening <--5-- closed
//! ```
//!
//! Startup runs an evacuate sub-phase followed by an inflate sub-phase, with
//! the same guards as closing and opening respectively.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pneumatics::Actuation;

pub type ActuatorOutputs = Actuation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GripperStateKind {
    Undefined,
    Startup,
    Opened,
    Closing,
    Closed,
    Opening,
}

impl GripperStateKind {
    pub const ALL: [GripperStateKind; 6] = [
        GripperStateKind::Undefined,
        GripperStateKind::Startup,
        GripperStateKind::Opened,
        GripperStateKind::Closing,
        GripperStateKind::Closed,
        GripperStateKind::Opening,
    ];

    /// Token used on the serial line and in CSV logs.
    pub fn code(&self) -> &'static str {
        match self {
            GripperStateKind::Undefined => "UNDEF",
            GripperStateKind::Startup => "STARTUP",
            GripperStateKind::Opened => "OPENED",
            GripperStateKind::Closing => "CLOSING",
            GripperStateKind::Closed => "CLOSED",
            GripperStateKind::Opening => "OPENING",
        }
    }
}

impl fmt::Display for GripperStateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StartupPhase {
    Evacuate,
    Inflate,
}

/// Full automaton state, including the startup sub-phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Undefined,
    Startup(StartupPhase),
    Opened,
    Closing,
    Closed,
    Opening,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Undefined,
        Mode::Startup(StartupPhase::Evacuate),
        Mode::Startup(StartupPhase::Inflate),
        Mode::Opened,
        Mode::Closing,
        Mode::Closed,
        Mode::Opening,
    ];

    pub fn kind(&self) -> GripperStateKind {
        match self {
            Mode::Undefined => GripperStateKind::Undefined,
            Mode::Startup(_) => GripperStateKind::Startup,
            Mode::Opened => GripperStateKind::Opened,
            Mode::Closing => GripperStateKind::Closing,
            Mode::Closed => GripperStateKind::Closed,
            Mode::Opening => GripperStateKind::Opening,
        }
    }
}

/// The six labelled transitions between main states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    /// undefined → startup
    PowerUp,
    /// startup → opened
    Ready,
    /// closing → closed
    Jammed,
    /// opened → closing
    Grasp,
    /// closed → opening
    Release,
    /// opening → opened
    Fluidized,
}

impl Edge {
    pub const ALL: [Edge; 6] = [
        Edge::PowerUp,
        Edge::Ready,
        Edge::Jammed,
        Edge::Grasp,
        Edge::Release,
        Edge::Fluidized,
    ];

    pub fn label(&self) -> u8 {
        match self {
            Edge::PowerUp => 1,
            Edge::Ready => 2,
            Edge::Jammed => 3,
            Edge::Grasp => 4,
            Edge::Release => 5,
            Edge::Fluidized => 6,
        }
    }

    pub fn endpoints(&self) -> (GripperStateKind, GripperStateKind) {
        use GripperStateKind::*;
        match self {
            Edge::PowerUp => (Undefined, Startup),
            Edge::Ready => (Startup, Opened),
            Edge::Jammed => (Closing, Closed),
            Edge::Grasp => (Opened, Closing),
            Edge::Release => (Closed, Opening),
            Edge::Fluidized => (Opening, Opened),
        }
    }

    /// Looks up the labelled edge between two distinct main states.
    pub fn between(from: GripperStateKind, to: GripperStateKind) -> Option<Edge> {
        Edge::ALL.into_iter().find(|e| e.endpoints() == (from, to))
    }
}

/// Filtered firmware state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub k_gr: GripperStateKind,
    pub pressure_kpa: f64,
    pub force_gf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserCommand {
    Open,
    Close,
    SetForceThreshold(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Buttons {
    pub open: bool,
    pub close: bool,
}

impl Buttons {
    pub fn any(&self) -> bool {
        self.open || self.close
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CommandVector {
    pub user: Option<UserCommand>,
    pub buttons: Buttons,
}

impl CommandVector {
    pub fn user(cmd: UserCommand) -> Self {
        Self {
            user: Some(cmd),
            buttons: Buttons::default(),
        }
    }

    pub fn buttons(buttons: Buttons) -> Self {
        Self { user: None, buttons }
    }

    fn wants_open(&self) -> bool {
        self.buttons.open || matches!(self.user, Some(UserCommand::Open))
    }

    fn wants_close(&self) -> bool {
        self.buttons.close || matches!(self.user, Some(UserCommand::Close))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Lower pressure threshold, kPa.
    pub p_min_kpa: f64,
    /// Upper pressure threshold, kPa.
    pub p_max_kpa: f64,
    /// Automatic close threshold on the filtered force, gf.
    pub f_thr_gf: f64,
    /// Closing timeout, s.
    pub t_vacc_s: f64,
    /// Opening timeout, s.
    pub t_infl_s: f64,
    pub sample_rate_hz: f64,
    pub filter_taps: usize,
    /// Registered sensor filter name.
    pub filter: String,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            p_min_kpa: -21.0,
            p_max_kpa: 0.5,
            f_thr_gf: 250.0,
            t_vacc_s: 8.0,
            t_infl_s: 10.0,
            sample_rate_hz: 100.0,
            filter_taps: 5,
            filter: super::filter::DEFAULT_FILTER.to_string(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_min_kpa.is_finite() && self.p_max_kpa.is_finite() && self.p_min_kpa < self.p_max_kpa) {
            return Err(Error::invalid("pressure thresholds", "need p_min_kpa < p_max_kpa"));
        }
        if !(self.t_vacc_s > 0.0 && self.t_infl_s > 0.0) {
            return Err(Error::invalid("timeouts", "t_vacc_s and t_infl_s must be positive"));
        }
        if !(self.f_thr_gf.is_finite() && self.f_thr_gf > 0.0) {
            return Err(Error::invalid("f_thr_gf", "must be positive"));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample_rate_hz", "must be positive"));
        }
        if self.filter_taps == 0 {
            return Err(Error::invalid("filter_taps", "must be at least 1"));
        }
        if !super::filter::registry().contains(&self.filter) {
            return Err(Error::invalid("filter", format!("unknown filter `{}`", self.filter)));
        }
        Ok(())
    }

    pub fn tick_period_s(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }
}

/// Result of one automaton step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub mode: Mode,
    pub outputs: ActuatorOutputs,
    /// Labelled edge taken, if the main state changed.
    pub edge: Option<Edge>,
}

/// Actuator drive for a mode. Opened and closed are sealed.
pub fn outputs_for(mode: Mode) -> ActuatorOutputs {
    match mode {
        Mode::Startup(StartupPhase::Evacuate) | Mode::Closing => Actuation::EVACUATE,
        Mode::Startup(StartupPhase::Inflate) | Mode::Opening => Actuation::INFLATE,
        Mode::Undefined | Mode::Opened | Mode::Closed => Actuation::SEALED,
    }
}

/// Evaluates commands and guards for one step.
///
/// Commands that are not legal in the current state are ignored.
pub fn step_automaton(
    mode: Mode,
    q: &StateVector,
    u: &CommandVector,
    time_in_state: f64,
    cfg: &ControllerConfig,
) -> Transition {
    let vacuum = q.pressure_kpa < cfg.p_min_kpa || time_in_state > cfg.t_vacc_s;
    let full = q.pressure_kpa > cfg.p_max_kpa || time_in_state > cfg.t_infl_s;

    let next = match mode {
        Mode::Undefined => Mode::Startup(StartupPhase::Evacuate),
        Mode::Startup(StartupPhase::Evacuate) if vacuum => Mode::Startup(StartupPhase::Inflate),
        Mode::Startup(StartupPhase::Inflate) if full => Mode::Opened,
        Mode::Opened if u.wants_close() || q.force_gf > cfg.f_thr_gf => Mode::Closing,
        Mode::Closing if vacuum => Mode::Closed,
        Mode::Closed if u.wants_open() => Mode::Opening,
        Mode::Opening if full => Mode::Opened,
        m => m,
    };
    let edge = if next.kind() != mode.kind() {
        Edge::between(mode.kind(), next.kind())
    } else {
        None
    };
    Transition {
        mode: next,
        outputs: outputs_for(next),
        edge,
    }
}
