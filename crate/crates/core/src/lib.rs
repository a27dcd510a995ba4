//! Simulation and parameter-identification toolkit for a lightweight
//! universal jamming gripper.
//!
//! The crate is organised bottom-up:
//!
//! - [`contact`]: the two-spring contact-force model and its constants.
//! - [`pneumatics`]: free-volume ratio and internal-pressure dynamics.
//! - [`firmware`]: the gripper automaton, sensor filters, the two-task
//!   firmware loop and its serial protocol.
//! - [`rig`]: firmware and pneumatics stepped together on a fixed timestep.
//! - [`jig`]: the linear test rail, force tracking and the grasp procedure.
//! - [`fit`]: power-law regression of the contact constants.
//! - [`io`]: configuration files, CSV logs, serial sessions and sweeps.
//!
//! Interchangeable algorithms (sensor filters, sled integrators, power-law
//! fitters) are registered by name in a [`registry::Registry`] and selected
//! at runtime.

pub mod contact;
pub mod error;
pub mod firmware;
pub mod fit;
pub mod io;
pub mod jig;
pub mod pneumatics;
pub mod registry;
pub mod rig;
pub mod units;

pub use error::{Error, Result};
