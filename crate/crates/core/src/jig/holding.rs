//! Calibrated holding-force lookup and the attachment-break rule.
//!
//! This is not a constitutive model. Holding force is read off anchor curves
//! of (activation force, holding force) per fill ratio, interpolated
//! linearly, held flat past the last anchor, then scaled by a deadener
//! multiplier. Peg diameter is range-checked but does not enter the lookup:
//! all anchors were measured with one peg.

use log::warn;

use crate::contact::Peg;
use crate::error::{Error, Result};
use crate::pneumatics::CLOSED_BETA;

/// Saturated holding force of the reference membrane, N.
pub const F_H_MAX_BASE: f64 = 10.1;
/// Highest calibrated deadener fraction, percent.
pub const MAX_DEADENER_PCT: f64 = 15.0;
/// β above which a jammed grasp lets go.
pub const BREAK_EPSILON: f64 = CLOSED_BETA;

/// Holding force versus activation force at one fill ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorCurve {
    pub fill_ratio: f64,
    /// (activation force in gf, holding force in N), increasing in both.
    pub points: Vec<(f64, f64)>,
}

impl AnchorCurve {
    pub fn eval(&self, f_a: f64) -> f64 {
        interp(&self.points, f_a)
    }
}

fn interp(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    if x <= first.0 {
        return first.1;
    }
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    points[points.len() - 1].1
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldingForceModel {
    pub fill_ratio: f64,
    pub deadener_pct: f64,
    pub f_h_max_base: f64,
    /// Sorted by fill ratio.
    pub curves: Vec<AnchorCurve>,
    /// (deadener percent, multiplier), starting at (0, 1).
    pub deadener_anchors: Vec<(f64, f64)>,
}

impl HoldingForceModel {
    /// Anchors for the 66 % and 90 % fill membranes and the four deadener
    /// mixtures.
    pub fn calibrated(fill_ratio: f64, deadener_pct: f64) -> Result<Self> {
        let base = F_H_MAX_BASE;
        let model = Self {
            fill_ratio,
            deadener_pct,
            f_h_max_base: base,
            curves: vec![
                AnchorCurve {
                    fill_ratio: 0.66,
                    points: vec![(0.0, 0.0), (150.0, 7.5), (250.0, base)],
                },
                AnchorCurve {
                    fill_ratio: 0.90,
                    points: vec![(0.0, 0.0), (150.0, 4.0), (650.0, base)],
                },
            ],
            deadener_anchors: vec![
                (0.0, 1.0),
                (5.0, 12.8 / base),
                (10.0, 13.1 / base),
                (15.0, 15.4 / base),
            ],
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fill_ratio > 0.0 && self.fill_ratio <= 1.0) {
            return Err(Error::invalid("fill_ratio", format!("{} not in (0, 1]", self.fill_ratio)));
        }
        if !(self.deadener_pct >= 0.0) {
            return Err(Error::invalid("deadener_pct", format!("{} < 0", self.deadener_pct)));
        }
        if self.deadener_pct > MAX_DEADENER_PCT {
            return Err(Error::OutOfCalibration(format!(
                "deadener {} % above the calibrated {MAX_DEADENER_PCT} %",
                self.deadener_pct
            )));
        }
        if self.curves.is_empty() || self.curves.iter().any(|c| c.points.is_empty()) {
            return Err(Error::invalid("holding-force anchors", "empty anchor table"));
        }
        Ok(())
    }

    pub fn deadener_multiplier(&self) -> f64 {
        interp(&self.deadener_anchors, self.deadener_pct)
    }

    /// Holding force before the deadener multiplier, N.
    fn base_force(&self, f_a: f64) -> f64 {
        let first = &self.curves[0];
        let last = &self.curves[self.curves.len() - 1];
        let fill = self.fill_ratio;
        if fill < first.fill_ratio || fill > last.fill_ratio {
            warn!(
                "fill ratio {fill} outside calibrated [{}, {}]; using nearest curve",
                first.fill_ratio, last.fill_ratio
            );
        }
        if fill <= first.fill_ratio {
            return first.eval(f_a);
        }
        for w in self.curves.windows(2) {
            let (c0, c1) = (&w[0], &w[1]);
            if fill <= c1.fill_ratio {
                let s = (fill - c0.fill_ratio) / (c1.fill_ratio - c0.fill_ratio);
                return (1.0 - s) * c0.eval(f_a) + s * c1.eval(f_a);
            }
        }
        last.eval(f_a)
    }
}

/// Expected holding force (N) after activating with `f_a` gf.
pub fn predict_holding_force(model: &HoldingForceModel, f_a: f64, d_mm: f64) -> Result<f64> {
    model.validate()?;
    if !(f_a.is_finite() && f_a > 0.0) {
        return Err(Error::invalid("activation force", format!("{f_a} gf")));
    }
    Peg::new(d_mm)?;
    Ok(model.base_force(f_a) * model.deadener_multiplier())
}

/// Whether the payload is still held after this step. `pull` is the
/// measured pull force and `holding` the holding force, both in N.
pub fn attachment_update(attached: bool, pull: f64, holding: f64, beta: f64) -> bool {
    attached && pull < holding && beta <= BREAK_EPSILON
}
