//! Linear test rail and the four-phase grasping procedure.
//!
//! A sled carrying the gripper runs on a rail toward a fixed cylindrical
//! peg. The load cell between them reads the contact force, which the host
//! tracks with a proportional feed law. One grasp goes through:
//!
//! 1. approach: push the fluidized gripper onto the peg until the measured
//!    force reaches the activation force, then command `CLOSE`;
//! 2. evacuation: keep tracking the activation force while the firmware
//!    pumps the membrane down (`T_S` to `T_E`), then keep tracking until the
//!    membrane is fully jammed;
//! 3. retraction: pull away at constant speed and record the peak pull;
//! 4. release: command `OPEN` and wait for the firmware to report opened.
//!
//! The run advances the rig (firmware and pneumatics) and the sled in a
//! fixed order every step and logs one timeline row per step.

pub mod holding;
pub mod sled;
pub mod tracker;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contact::{self, ContactParams, Peg};
use crate::error::{Error, Result};
use crate::firmware::{Buttons, ControllerConfig, GripperStateKind, Mode, UserCommand};
use crate::pneumatics::{classify, MembraneState, PneumaticParams};
use crate::rig::{Rig, Start};
use crate::units::newtons_to_gf;

pub use holding::{attachment_update, predict_holding_force, HoldingForceModel};
pub use sled::SledIntegrator;
pub use tracker::{force_control_step, ForceTracker};

/// Rail travel, m.
pub const RAIL_TRAVEL_M: f64 = 0.300;
/// Slack below the success threshold that absorbs floating-point noise in
/// the tracked force, gf.
pub const SUCCESS_TOLERANCE_GF: f64 = 1e-6;
/// Clearance the sled backs off to when contact is lost, m.
const LOSS_CLEARANCE_M: f64 = 0.005;
const APPROACH_TIMEOUT_S: f64 = 30.0;
const RUN_TIMEOUT_S: f64 = 120.0;

/// One grasp experiment. Forces in gf, lengths in mm, speeds in mm/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspScenario {
    pub peg_diameter_mm: f64,
    /// Nominal activation force, tracked from contact until jammed.
    pub activation_force_gf: f64,
    pub fill_ratio: f64,
    pub deadener_pct: f64,
    /// The grasp fails if the tracked force drops below this during
    /// evacuation.
    pub success_threshold_gf: f64,
    /// Tracking gain, mm/s per gf.
    pub k_p: f64,
    pub v_max_mms: f64,
    /// Distance between the sled home position and the peg contact plane.
    pub approach_gap_mm: f64,
    /// Lowest feed during approach, so the force crosses the activation
    /// force in finite time.
    pub approach_min_speed_mms: f64,
    pub retract_speed_mms: f64,
    pub retract_duration_s: f64,
    /// Half-width of uniform load-cell noise; zero disables it.
    pub sensor_noise_gf: f64,
    /// Forces a contact loss this long after evacuation starts.
    pub contact_loss_after_s: Option<f64>,
    pub integrator: String,
    pub seed: u64,
}

impl Default for GraspScenario {
    fn default() -> Self {
        Self {
            peg_diameter_mm: 40.0,
            activation_force_gf: 350.0,
            fill_ratio: 0.66,
            deadener_pct: 0.0,
            success_threshold_gf: 250.0,
            k_p: tracker::DEFAULT_K_P,
            v_max_mms: tracker::V_MAX_MMS,
            approach_gap_mm: 50.0,
            approach_min_speed_mms: 1.0,
            retract_speed_mms: 20.0,
            retract_duration_s: 2.0,
            sensor_noise_gf: 0.0,
            contact_loss_after_s: None,
            integrator: sled::DEFAULT_INTEGRATOR.to_string(),
            seed: 0,
        }
    }
}

impl GraspScenario {
    pub fn validate(&self) -> Result<()> {
        Peg::new(self.peg_diameter_mm)?;
        let positive = [
            ("activation_force_gf", self.activation_force_gf),
            ("success_threshold_gf", self.success_threshold_gf),
            ("k_p", self.k_p),
            ("v_max_mms", self.v_max_mms),
            ("approach_min_speed_mms", self.approach_min_speed_mms),
            ("retract_speed_mms", self.retract_speed_mms),
            ("retract_duration_s", self.retract_duration_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be positive")));
            }
        }
        let non_negative = [
            ("approach_gap_mm", self.approach_gap_mm),
            ("sensor_noise_gf", self.sensor_noise_gf),
            ("contact_loss_after_s", self.contact_loss_after_s.unwrap_or(0.0)),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("{v} must be non-negative")));
            }
        }
        if self.approach_min_speed_mms > self.v_max_mms {
            return Err(Error::invalid("approach_min_speed_mms", "exceeds v_max_mms"));
        }
        if self.retract_speed_mms > self.v_max_mms {
            return Err(Error::invalid("retract_speed_mms", "exceeds v_max_mms"));
        }
        if self.approach_gap_mm * 1e-3 >= RAIL_TRAVEL_M {
            return Err(Error::invalid("approach_gap_mm", "peg beyond rail travel"));
        }
        sled::registry().create(&self.integrator, &())?;
        HoldingForceModel::calibrated(self.fill_ratio, self.deadener_pct)?;
        Ok(())
    }

    pub fn tracker(&self) -> ForceTracker {
        ForceTracker {
            f_d: self.activation_force_gf,
            k_p: self.k_p,
            v_max_mms: self.v_max_mms,
        }
    }
}

/// Model parameters shared by every run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plant {
    pub contact: ContactParams,
    pub pneumatics: PneumaticParams,
    pub controller: ControllerConfig,
}

/// Sled kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct JigState {
    /// Distance travelled from home toward the peg, m.
    pub sled_position: f64,
    /// Realised velocity over the last step, m/s.
    pub sled_velocity: f64,
    /// Commanded feed, m/s.
    pub u_feed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Approach,
    Evacuation,
    Settle,
    Retraction,
    Release,
}

/// One logged step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineRow {
    pub t_s: f64,
    pub state: GripperStateKind,
    pub phase: Phase,
    pub beta: f64,
    pub pressure_kpa: f64,
    /// Intrusion of the peg into the membrane; negative when clear.
    pub x_m: f64,
    pub u_feed_mms: f64,
    /// Measured force, compression positive.
    pub f_m_gf: f64,
    pub attached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraspOutcome {
    pub success: bool,
    pub activation_force_gf: f64,
    /// Lowest measured force over `[T_S, T_E]`, gf.
    pub min_tracked_force_gf: f64,
    /// Holding force, N; zero for a failed grasp.
    pub f_h_n: f64,
    pub t_s: f64,
    pub t_e: f64,
    /// Largest pull measured while retracting, N.
    pub peak_retract_force_n: f64,
    pub t_peak_s: f64,
    pub t_retract_start_s: f64,
    pub t_retract_end_s: f64,
    pub t_opened_s: f64,
    /// Downward crossings of the lower pressure threshold.
    pub p_min_crossings: usize,
}

impl GraspOutcome {
    pub fn evacuation_duration(&self) -> f64 {
        self.t_e - self.t_s
    }
}

/// Contact force (N) at intrusion `x`. Beyond the membrane height the
/// formula is extended so that trial points of the implicit solve stay
/// well defined; the caller rejects such positions afterwards.
fn plant_force(x: f64, beta: f64, peg: &Peg, attached: bool, p: &ContactParams) -> f64 {
    if x >= 0.0 {
        contact::f_air(x, peg, p) + contact::f_lmp(x - contact::shrink(beta, p), p)
    } else if attached {
        -contact::f_lmp(-x, p)
    } else {
        0.0
    }
}

/// Runs one grasp at step `dt` and returns the outcome and the per-step
/// timeline.
pub fn run_grasp(
    scenario: &GraspScenario,
    plant: &Plant,
    dt: f64,
) -> Result<(GraspOutcome, Vec<TimelineRow>)> {
    scenario.validate()?;
    plant.contact.validate()?;
    let peg = Peg::new(scenario.peg_diameter_mm)?;
    let model = HoldingForceModel::calibrated(scenario.fill_ratio, scenario.deadener_pct)?;
    let integrator = sled::registry().create(&scenario.integrator, &())?;
    let tracker = scenario.tracker();
    let cp = &plant.contact;

    // The host lifts the firmware's auto-close threshold to the activation
    // force so that evacuation never starts before the host commands it.
    let mut controller = plant.controller.clone();
    controller.f_thr_gf = controller.f_thr_gf.max(scenario.activation_force_gf);
    let p_min = controller.p_min_kpa;
    let mut rig = Rig::new(controller, plant.pneumatics, dt, Start::Opened)?;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let noise = scenario.sensor_noise_gf;
    let gap = scenario.approach_gap_mm * 1e-3;
    let v_max = scenario.v_max_mms * 1e-3;

    let mut jig = JigState::default();
    let mut phase = Phase::Approach;
    let mut attached = false;
    let mut f_h = 0.0;
    let mut n = 0.0;
    let mut meas_gf = 0.0;
    let mut t_s = None;
    let mut t_e = None;
    let mut t_retract_start = f64::NAN;
    let mut t_retract_end = f64::NAN;
    let mut t_opened = None;
    let mut peak = (0.0, f64::NAN);
    let mut success = false;

    let row = |rig: &Rig, phase, jig: &JigState, f_m_gf, attached| TimelineRow {
        t_s: rig.time(),
        state: rig.state(),
        phase,
        beta: rig.pneumatics().beta,
        pressure_kpa: rig.pneumatics().pressure_kpa,
        x_m: jig.sled_position - gap,
        u_feed_mms: jig.u_feed * 1e3,
        f_m_gf,
        attached,
    };
    let mut timeline = vec![row(&rig, phase, &jig, meas_gf, attached)];

    while t_opened.is_none() {
        let t = rig.time();
        if t > RUN_TIMEOUT_S {
            return Err(Error::Simulation(format!("grasp did not finish within {RUN_TIMEOUT_S} s")));
        }
        if phase == Phase::Approach && t > APPROACH_TIMEOUT_S {
            return Err(Error::Simulation(format!(
                "activation force {} gf not reached within {APPROACH_TIMEOUT_S} s",
                scenario.activation_force_gf
            )));
        }

        if let Some(report) = rig.step(meas_gf, Buttons::default())? {
            for &(_, to, _) in &report.changes {
                match to {
                    Mode::Closing if t_s.is_none() => {
                        t_s = Some(report.q.t);
                        phase = Phase::Evacuation;
                    }
                    Mode::Closed if t_e.is_none() => {
                        t_e = Some(report.q.t);
                        phase = Phase::Settle;
                    }
                    Mode::Opened if phase == Phase::Release => t_opened = Some(report.q.t),
                    _ => {}
                }
            }
        }
        let beta = rig.pneumatics().beta;
        if noise > 0.0 {
            n = rng.gen_range(-noise..=noise);
        }

        let s = jig.sled_position;
        let lost = match (scenario.contact_loss_after_s, t_s) {
            (Some(after), Some(start)) => {
                matches!(phase, Phase::Evacuation | Phase::Settle) && t >= start + after
            }
            _ => false,
        };
        let measured = |pos: f64| newtons_to_gf(plant_force(pos - gap, beta, &peg, attached, cp)) + n;
        let next = match phase {
            _ if lost => {
                if s - gap > -LOSS_CLEARANCE_M {
                    s - dt * v_max
                } else {
                    s
                }
            }
            Phase::Approach => {
                let floor = scenario.approach_min_speed_mms;
                let law = |pos: f64| tracker.command_with_floor(measured(pos), floor);
                integrator.advance(s, dt, &law, (floor * 1e-3, v_max))
            }
            Phase::Evacuation | Phase::Settle => {
                let law = |pos: f64| force_control_step(&tracker, measured(pos), dt);
                integrator.advance(s, dt, &law, (-v_max, v_max))
            }
            Phase::Retraction => s - dt * scenario.retract_speed_mms * 1e-3,
            Phase::Release => s,
        };
        let next = next.clamp(0.0, RAIL_TRAVEL_M);
        jig.u_feed = (next - s) / dt;
        jig.sled_velocity = jig.u_feed;
        jig.sled_position = next;

        let x = next - gap;
        if x > cp.x_l {
            return Err(Error::Domain(format!(
                "intrusion {x} m exceeds membrane height {} m",
                cp.x_l
            )));
        }
        let mut force = plant_force(x, beta, &peg, attached, cp);
        if attached {
            let pull = (-force).max(0.0);
            attached = attachment_update(attached, pull, f_h, beta);
            if !attached && pull >= f_h {
                force = -f_h;
            }
        }
        meas_gf = newtons_to_gf(force) + n;

        let t_next = rig.time();
        match phase {
            Phase::Approach if meas_gf >= scenario.activation_force_gf => {
                rig.send(UserCommand::Close);
                phase = Phase::Evacuation;
            }
            Phase::Settle if classify(beta) == MembraneState::Closed => {
                success = window_min(&timeline, t_s, t_e)
                    .is_some_and(|m| m >= scenario.success_threshold_gf - SUCCESS_TOLERANCE_GF);
                if success {
                    f_h = predict_holding_force(&model, scenario.activation_force_gf, peg.diameter_mm())?;
                    attached = true;
                }
                phase = Phase::Retraction;
                t_retract_start = t_next;
            }
            Phase::Retraction => {
                if -force > peak.0 {
                    peak = (-force, t_next);
                }
                if t_next - t_retract_start >= scenario.retract_duration_s - 0.5 * dt {
                    rig.send(UserCommand::Open);
                    phase = Phase::Release;
                    t_retract_end = t_next;
                }
            }
            _ => {}
        }
        timeline.push(row(&rig, phase, &jig, meas_gf, attached));
    }

    let min_tracked = window_min(&timeline, t_s, t_e).unwrap_or(f64::NAN);
    let (t_s, t_e) = (t_s.unwrap_or(f64::NAN), t_e.unwrap_or(f64::NAN));
    let outcome = GraspOutcome {
        success,
        activation_force_gf: scenario.activation_force_gf,
        min_tracked_force_gf: min_tracked,
        f_h_n: f_h,
        t_s,
        t_e,
        peak_retract_force_n: peak.0,
        t_peak_s: peak.1,
        t_retract_start_s: t_retract_start,
        t_retract_end_s: t_retract_end,
        t_opened_s: t_opened.unwrap_or(f64::NAN),
        p_min_crossings: downward_crossings(&timeline, p_min),
    };
    Ok((outcome, timeline))
}

/// Lowest logged force over `[t_s, t_e]`.
fn window_min(rows: &[TimelineRow], t_s: Option<f64>, t_e: Option<f64>) -> Option<f64> {
    let (a, b) = (t_s?, t_e?);
    let eps = 1e-9;
    rows.iter()
        .filter(|r| r.t_s >= a - eps && r.t_s <= b + eps)
        .map(|r| r.f_m_gf)
        .reduce(f64::min)
}

/// Number of times the logged pressure falls through `level`.
pub fn downward_crossings(rows: &[TimelineRow], level: f64) -> usize {
    rows.windows(2)
        .filter(|w| w[0].pressure_kpa >= level && w[1].pressure_kpa < level)
        .count()
}
