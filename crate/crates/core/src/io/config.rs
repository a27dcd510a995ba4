//! TOML configuration with sections `[scenario]`, `[controller]`,
//! `[pneumatics]`, `[contact]` and `[sweep]`. Every section and key is
//! optional; unknown keys are rejected. Errors carry the line number.
//!
//! ```toml
//! [scenario]
//! peg_diameter_mm = 40
//! activation_force_gf = 350
//! fill_ratio = 0.66
//!
//! [sweep]
//! axis = "activation_force"
//! values = [150, 250, 350, 450, 550, 650]
//! repetitions = 8
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contact::ContactParams;
use crate::error::{Error, Result};
use crate::firmware::ControllerConfig;
use crate::jig::{GraspScenario, Plant};
use crate::pneumatics::PneumaticParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ActivationForce,
    Deadener,
    FillRatio,
}

impl SweepAxis {
    /// Config key under `[scenario]` that the axis overrides.
    pub fn key(&self) -> &'static str {
        match self {
            SweepAxis::ActivationForce => "activation_force_gf",
            SweepAxis::Deadener => "deadener_pct",
            SweepAxis::FillRatio => "fill_ratio",
        }
    }

    pub fn apply(&self, scenario: &mut GraspScenario, value: f64) {
        match self {
            SweepAxis::ActivationForce => scenario.activation_force_gf = value,
            SweepAxis::Deadener => scenario.deadener_pct = value,
            SweepAxis::FillRatio => scenario.fill_ratio = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub repetitions: u32,
}

fn one() -> u32 {
    1
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "sweep needs at least one value"));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("values", "sweep values must be strictly increasing"));
        }
        if self.repetitions < 1 {
            return Err(Error::invalid("repetitions", "need at least one repetition"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    scenario: GraspScenario,
    controller: ControllerConfig,
    pneumatics: PneumaticParams,
    contact: ContactParams,
    sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub scenario: GraspScenario,
    pub plant: Plant,
    pub sweep: Option<SweepSpec>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let cfg = Config {
            scenario: file.scenario,
            plant: Plant {
                contact: file.contact,
                pneumatics: file.pneumatics,
                controller: file.controller,
            },
            sweep: file.sweep,
        };
        cfg.validate().map_err(|e| locate(text, e))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.plant.controller.validate()?;
        self.plant.pneumatics.validate()?;
        self.plant.contact.validate()?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }
}

/// 1-based line containing byte `offset`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Attaches the line of the offending key to a validation error, when the
/// key appears in the file.
fn locate(text: &str, err: Error) -> Error {
    let key = match &err {
        Error::InvalidParameter { name, .. } => *name,
        Error::OutOfCalibration(_) => "deadener_pct",
        _ => return err,
    };
    match key_line(text, key) {
        Some(line) => Error::Config {
            line,
            message: err.to_string(),
        },
        None => err,
    }
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}
