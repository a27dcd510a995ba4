//! Gripper controller firmware.
//!
//! Two logical tasks share no mutable state and talk only through bounded
//! FIFO queues:
//!
//! - task 1 ([`Firmware::run_tick`]) reads the buttons and raw sensors,
//!   filters them, steps the automaton and publishes a state vector;
//! - task 2 (see [`crate::io::session`]) moves parsed commands into the
//!   command queue and drains telemetry onto the serial line.
//!
//! The default scheduler interleaves them deterministically: receive, tick,
//! send.

pub mod automaton;
pub mod filter;
pub mod model_check;
pub mod protocol;

use std::collections::VecDeque;

use crate::error::Result;

pub use automaton::{
    outputs_for, step_automaton, ActuatorOutputs, Buttons, CommandVector, ControllerConfig, Edge,
    GripperStateKind, Mode, StartupPhase, StateVector, Transition, UserCommand,
};
use filter::{FilterArgs, SensorFilter};

pub const TELEMETRY_QUEUE_CAPACITY: usize = 64;

/// FIFO that drops its oldest element when full and counts the drops.
#[derive(Debug, Clone)]
pub struct BoundedQueue<T> {
    items: VecDeque<T>,
    capacity: usize,
    dropped: u64,
}

impl<T> BoundedQueue<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        Self {
            items: VecDeque::with_capacity(capacity),
            capacity,
            dropped: 0,
        }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
            self.dropped += 1;
        }
        self.items.push_back(item);
    }

    pub fn pop(&mut self) -> Option<T> {
        self.items.pop_front()
    }

    pub fn drain(&mut self) -> impl Iterator<Item = T> + '_ {
        self.items.drain(..)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Total number of elements discarded on overflow.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}

/// Raw inputs sampled by task 1.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SensorReadings {
    pub pressure_kpa: f64,
    pub force_gf: f64,
    pub buttons: Buttons,
}

/// Outcome of one firmware tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    pub q: StateVector,
    pub outputs: ActuatorOutputs,
    /// Mode changes made this tick, in order, with the labelled edge if the
    /// main state changed.
    pub changes: Vec<(Mode, Mode, Option<Edge>)>,
}

pub struct Firmware {
    cfg: ControllerConfig,
    mode: Mode,
    tick: u64,
    entered_tick: u64,
    pressure_filter: Box<dyn SensorFilter>,
    force_filter: Box<dyn SensorFilter>,
    outputs: ActuatorOutputs,
    telemetry: BoundedQueue<StateVector>,
}

impl std::fmt::Debug for Firmware {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Firmware")
            .field("mode", &self.mode)
            .field("tick", &self.tick)
            .field("outputs", &self.outputs)
            .finish_non_exhaustive()
    }
}

impl Firmware {
    /// Firmware right after power-up: state undefined.
    pub fn new(cfg: ControllerConfig) -> Result<Self> {
        Self::with_mode(cfg, Mode::Undefined)
    }

    /// Firmware resumed in a known mode, e.g. an already opened gripper.
    pub fn with_mode(cfg: ControllerConfig, mode: Mode) -> Result<Self> {
        cfg.validate()?;
        let reg = filter::registry();
        let args = FilterArgs {
            taps: cfg.filter_taps,
        };
        Ok(Self {
            pressure_filter: reg.create(&cfg.filter, &args)?,
            force_filter: reg.create(&cfg.filter, &args)?,
            outputs: outputs_for(mode),
            telemetry: BoundedQueue::new(TELEMETRY_QUEUE_CAPACITY),
            cfg,
            mode,
            tick: 0,
            entered_tick: 0,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn state(&self) -> GripperStateKind {
        self.mode.kind()
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn outputs(&self) -> ActuatorOutputs {
        self.outputs
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    pub fn time_in_state(&self) -> f64 {
        (self.tick - self.entered_tick) as f64 / self.cfg.sample_rate_hz
    }

    pub fn telemetry(&mut self) -> &mut BoundedQueue<StateVector> {
        &mut self.telemetry
    }

    /// Task 1: one pass of sensing, automaton and actuation.
    ///
    /// Commands are drained from `inbox` exactly once, in FIFO order, after
    /// any pressed buttons. At most one mode change happens per tick; later
    /// open/close commands in the same tick are discarded, while threshold
    /// updates always apply.
    pub fn run_tick(
        &mut self,
        inbox: &mut VecDeque<UserCommand>,
        sensors: &SensorReadings,
        clock: f64,
    ) -> TickReport {
        let pressure = self.pressure_filter.push(sensors.pressure_kpa);
        let force = self.force_filter.push(sensors.force_gf);
        let mut q = StateVector {
            t: clock,
            k_gr: self.mode.kind(),
            pressure_kpa: pressure,
            force_gf: force,
        };

        let mut pending: Vec<CommandVector> = Vec::with_capacity(inbox.len() + 2);
        if sensors.buttons.any() {
            pending.push(CommandVector::buttons(sensors.buttons));
        }
        pending.extend(inbox.drain(..).map(CommandVector::user));
        pending.push(CommandVector::default());

        let mut changes = Vec::new();
        for u in &pending {
            if let Some(UserCommand::SetForceThreshold(gf)) = u.user {
                self.cfg.f_thr_gf = gf;
                continue;
            }
            if !changes.is_empty() {
                continue;
            }
            let tr = step_automaton(self.mode, &q, u, self.time_in_state(), &self.cfg);
            if tr.mode != self.mode {
                changes.push((self.mode, tr.mode, tr.edge));
                self.mode = tr.mode;
                self.entered_tick = self.tick;
            }
        }
        self.outputs = outputs_for(self.mode);
        q.k_gr = self.mode.kind();
        self.telemetry.push(q);
        self.tick += 1;

        TickReport {
            q,
            outputs: self.outputs,
            changes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opened() -> Firmware {
        Firmware::with_mode(ControllerConfig::default(), Mode::Opened).unwrap()
    }

    fn steady() -> SensorReadings {
        SensorReadings {
            pressure_kpa: 0.0,
            force_gf: 0.0,
            buttons: Buttons::default(),
        }
    }

    #[test]
    fn idle_tick_keeps_state_and_emits_one_record() {
        let mut fw = opened();
        let mut inbox = VecDeque::new();
        let r = fw.run_tick(&mut inbox, &steady(), 0.0);
        assert_eq!(fw.mode(), Mode::Opened);
        assert!(r.changes.is_empty());
        assert_eq!(fw.telemetry().len(), 1);
        assert!(r.outputs.is_sealed());
    }

    #[test]
    fn close_command_takes_effect_in_the_same_tick() {
        let mut fw = opened();
        let mut inbox = VecDeque::from([UserCommand::Close]);
        let r = fw.run_tick(&mut inbox, &steady(), 0.0);
        assert_eq!(fw.mode(), Mode::Closing);
        assert_eq!(r.changes, vec![(Mode::Opened, Mode::Closing, Some(Edge::Grasp))]);
        assert!(inbox.is_empty());
        assert!(r.outputs.pump_out_on);
        assert_eq!(r.q.k_gr, GripperStateKind::Closing);
    }

    #[test]
    fn later_commands_in_a_tick_are_ignored_after_a_transition() {
        let mut fw = opened();
        let mut inbox = VecDeque::from([UserCommand::Close, UserCommand::Open]);
        fw.run_tick(&mut inbox, &steady(), 0.0);
        assert_eq!(fw.mode(), Mode::Closing);
        assert!(inbox.is_empty());
    }

    #[test]
    fn threshold_update_applies_even_after_transition() {
        let mut fw = opened();
        let mut inbox = VecDeque::from([UserCommand::Close, UserCommand::SetForceThreshold(300.0)]);
        fw.run_tick(&mut inbox, &steady(), 0.0);
        assert_eq!(fw.config().f_thr_gf, 300.0);
    }

    #[test]
    fn raised_threshold_delays_auto_close() {
        let mut fw = opened();
        let mut inbox = VecDeque::from([UserCommand::SetForceThreshold(300.0)]);
        let mut s = steady();
        s.force_gf = 280.0;
        for i in 0..10 {
            fw.run_tick(&mut inbox, &s, i as f64 * 0.01);
        }
        assert_eq!(fw.mode(), Mode::Opened);
        s.force_gf = 320.0;
        for i in 10..20 {
            fw.run_tick(&mut inbox, &s, i as f64 * 0.01);
        }
        assert_eq!(fw.mode(), Mode::Closing);
    }

    #[test]
    fn button_press_releases_a_closed_gripper() {
        let mut fw = Firmware::with_mode(ControllerConfig::default(), Mode::Closed).unwrap();
        let mut s = steady();
        s.pressure_kpa = -21.5;
        s.buttons.open = true;
        let mut inbox = VecDeque::from([UserCommand::Close]);
        let r = fw.run_tick(&mut inbox, &s, 0.0);
        assert_eq!(r.changes, vec![(Mode::Closed, Mode::Opening, Some(Edge::Release))]);
        assert!(inbox.is_empty());
    }

    #[test]
    fn telemetry_overflow_drops_oldest() {
        let mut fw = opened();
        let mut inbox = VecDeque::new();
        for i in 0..(TELEMETRY_QUEUE_CAPACITY + 3) {
            fw.run_tick(&mut inbox, &steady(), i as f64 * 0.01);
        }
        let q = fw.telemetry();
        assert_eq!(q.len(), TELEMETRY_QUEUE_CAPACITY);
        assert_eq!(q.dropped(), 3);
        assert_eq!(q.pop().unwrap().t, 0.03);
    }

    #[test]
    fn time_in_state_counts_ticks() {
        let mut fw = opened();
        let mut inbox = VecDeque::new();
        for i in 0..50 {
            fw.run_tick(&mut inbox, &steady(), i as f64 * 0.01);
        }
        assert!((fw.time_in_state() - 0.5).abs() < 1e-12);
    }
}
