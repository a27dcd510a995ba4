//! Firmware and pneumatics stepped together on a fixed timestep.
//!
//! The pneumatics advance every step; the firmware runs at its own sample
//! rate, which must be an integer multiple of the step. Within a step the
//! firmware (when due) samples the current pressure and force, its outputs
//! are applied, and then the pneumatics advance by `dt`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::firmware::{
    Buttons, ControllerConfig, Firmware, GripperStateKind, Mode, SensorReadings, TickReport,
    UserCommand,
};
use crate::pneumatics::{self, PneumaticParams, PneumaticState};

pub const DEFAULT_DT: f64 = 1e-3;

/// Initial condition of the gripper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Start {
    /// Power-up: automaton undefined, membrane inflated at ambient pressure.
    PowerUp,
    /// Gripper already opened, membrane inflated at ambient pressure.
    #[default]
    Opened,
}

#[derive(Debug)]
pub struct Rig {
    firmware: Firmware,
    pneumatics: PneumaticState,
    params: PneumaticParams,
    inbox: VecDeque<UserCommand>,
    dt: f64,
    steps_per_tick: u64,
    step: u64,
}

/// Number of simulation steps per firmware tick.
pub fn steps_per_tick(dt: f64, sample_rate_hz: f64) -> Result<u64> {
    if !(dt.is_finite() && dt > 0.0 && dt <= pneumatics::MAX_DT) {
        return Err(Error::invalid(
            "dt",
            format!("{dt} s outside (0, {}]", pneumatics::MAX_DT),
        ));
    }
    let period = 1.0 / sample_rate_hz;
    let n = (period / dt).round();
    if n < 1.0 || (n * dt - period).abs() > 1e-9 * period.max(1.0) {
        return Err(Error::invalid(
            "dt",
            format!("{dt} s does not divide the firmware period {period} s"),
        ));
    }
    Ok(n as u64)
}

impl Rig {
    pub fn new(
        controller: ControllerConfig,
        params: PneumaticParams,
        dt: f64,
        start: Start,
    ) -> Result<Self> {
        params.validate()?;
        let steps_per_tick = steps_per_tick(dt, controller.sample_rate_hz)?;
        let mode = match start {
            Start::PowerUp => Mode::Undefined,
            Start::Opened => Mode::Opened,
        };
        let firmware = Firmware::with_mode(controller, mode)?;
        let mut pneumatics = PneumaticState::opened();
        pneumatics.apply(firmware.outputs())?;
        Ok(Self {
            firmware,
            pneumatics,
            params,
            inbox: VecDeque::new(),
            dt,
            steps_per_tick,
            step: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Simulation time at the start of the next step, s.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn pneumatics(&self) -> &PneumaticState {
        &self.pneumatics
    }

    pub fn firmware(&self) -> &Firmware {
        &self.firmware
    }

    pub fn firmware_mut(&mut self) -> &mut Firmware {
        &mut self.firmware
    }

    pub fn state(&self) -> GripperStateKind {
        self.firmware.state()
    }

    /// Queues a command for the next firmware tick.
    pub fn send(&mut self, cmd: UserCommand) {
        self.inbox.push_back(cmd);
    }

    pub fn inbox(&mut self) -> &mut VecDeque<UserCommand> {
        &mut self.inbox
    }

    /// Whether the next call to [`Rig::step`] runs a firmware tick.
    pub fn tick_due(&self) -> bool {
        self.step.is_multiple_of(self.steps_per_tick)
    }

    /// Advances one step. `force_gf` is the raw load-cell reading at the
    /// start of the step.
    pub fn step(&mut self, force_gf: f64, buttons: Buttons) -> Result<Option<TickReport>> {
        let report = if self.tick_due() {
            let sensors = SensorReadings {
                pressure_kpa: self.pneumatics.pressure_kpa,
                force_gf,
                buttons,
            };
            let clock = self.time();
            let report = self.firmware.run_tick(&mut self.inbox, &sensors, clock);
            self.pneumatics.apply(report.outputs)?;
            Some(report)
        } else {
            None
        };
        self.pneumatics = pneumatics::step(self.pneumatics, self.dt, &self.params);
        self.step += 1;
        Ok(report)
    }
}
