//! Flat `key = value` records for grasp outcomes and fit results.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::jig::GraspOutcome;

use super::numfmt::{full, sig6};

pub fn format_outcome(o: &GraspOutcome) -> String {
    let fields: [(&str, String); 13] = [
        ("success", o.success.to_string()),
        ("activation_force_gf", sig6(o.activation_force_gf)),
        ("min_tracked_force_gf", sig6(o.min_tracked_force_gf)),
        ("F_h_N", sig6(o.f_h_n)),
        ("T_S_s", sig6(o.t_s)),
        ("T_E_s", sig6(o.t_e)),
        ("T_SE_s", sig6(o.evacuation_duration())),
        ("peak_retract_force_N", sig6(o.peak_retract_force_n)),
        ("t_peak_s", sig6(o.t_peak_s)),
        ("t_retract_start_s", sig6(o.t_retract_start_s)),
        ("t_retract_end_s", sig6(o.t_retract_end_s)),
        ("t_opened_s", sig6(o.t_opened_s)),
        ("p_min_crossings", o.p_min_crossings.to_string()),
    ];
    render(&fields)
}

pub fn format_fit(r: &FitResult) -> String {
    let fields: [(&str, String); 11] = [
        ("model", r.model.to_string()),
        ("fitter", r.fitter.clone()),
        ("coefficient", full(r.coefficient)),
        ("exponent", full(r.exponent)),
        ("residual_rms_N", full(r.residual_rms)),
        ("sample_count", r.sample_count.to_string()),
        ("iterations", r.iterations.to_string()),
        ("converged", r.converged.to_string()),
        ("log_coefficient", full(r.log_coefficient)),
        ("log_exponent", full(r.log_exponent)),
        ("log_residual_rms", full(r.log_residual_rms)),
    ];
    render(&fields)
}

fn render(fields: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in fields {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

/// Parses a record back into a map. Blank lines and `#` comments are
/// skipped.
pub fn parse_record(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::ModelKind;

    #[test]
    fn fit_record_round_trips_numbers() {
        let r = FitResult {
            model: ModelKind::Lumped,
            fitter: "gauss-newton".into(),
            coefficient: 25119.75,
            exponent: 1.29,
            residual_rms: 1e-12,
            sample_count: 20,
            iterations: 3,
            converged: true,
            log_coefficient: 25119.75,
            log_exponent: 1.29,
            log_residual_rms: 0.0,
        };
        let text = format_fit(&r);
        let map = parse_record(&text).unwrap();
        assert_eq!(map["model"], "lumped");
        assert_eq!(map["coefficient"].parse::<f64>().unwrap(), 25119.75);
        assert_eq!(map["exponent"].parse::<f64>().unwrap(), 1.29);
    }

    #[test]
    fn malformed_record_line() {
        assert!(matches!(
            parse_record("a = 1\noops\n"),
            Err(Error::Config { line: 2, .. })
        ));
    }
}
