//! CSV logs: grasp timelines, sweep results and force-displacement sweeps.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fit::SweepSample;
use crate::jig::TimelineRow;

use super::numfmt::{full, sig6};
use super::sweep::SweepRow;

pub const TIMELINE_HEADER: [&str; 8] = [
    "t_s",
    "state",
    "beta",
    "P_kpa",
    "x_m",
    "u_feed_mms",
    "F_m_gf",
    "attached",
];

pub const SWEEP_HEADER: [&str; 6] = [
    "axis_value",
    "rep",
    "success",
    "F_h_N",
    "min_tracked_gf",
    "T_SE_s",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Csv {
            row: 0,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_timeline<W: Write>(out: W, rows: &[TimelineRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMELINE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            sig6(r.t_s),
            r.state.code().to_string(),
            sig6(r.beta),
            sig6(r.pressure_kpa),
            sig6(r.x_m),
            sig6(r.u_feed_mms),
            sig6(r.f_m_gf),
            u8::from(r.attached).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_results<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            sig6(r.axis_value),
            r.rep.to_string(),
            u8::from(r.success).to_string(),
            sig6(r.f_h_n),
            sig6(r.min_tracked_gf),
            sig6(r.t_se_s),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `x_m,D_mm,F_N`, dropping the diameter column when no sample has
/// one. Values keep full precision so that fits are reproducible.
pub fn write_samples<W: Write>(out: W, samples: &[SweepSample]) -> Result<()> {
    let with_d = samples.iter().any(|s| s.d.is_some());
    let mut w = csv::Writer::from_writer(out);
    if with_d {
        w.write_record(["x_m", "D_mm", "F_N"]).map_err(csv_err)?;
    } else {
        w.write_record(["x_m", "F_N"]).map_err(csv_err)?;
    }
    for s in samples {
        if with_d {
            let d = s.d.map(full).unwrap_or_default();
            w.write_record([full(s.x), d, full(s.f)]).map_err(csv_err)?;
        } else {
            w.write_record([full(s.x), full(s.f)]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample CSV. Rows are numbered by file line, header = line 1.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<SweepSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Csv {
        row: 1,
        message: e.to_string(),
    })?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Csv {
            row: 1,
            message: "empty file".into(),
        });
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(xi), Some(fi)) = (col("x_m"), col("F_N")) else {
        return Err(Error::Csv {
            row: 1,
            message: format!("header must contain x_m and F_N, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    };
    let di = col("D_mm");

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let num = |idx: usize, name: &str| -> Result<f64> {
            let raw = rec.get(idx).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Csv {
                row,
                message: format!("{name}: `{raw}` is not a number"),
            })
        };
        let d = match di {
            Some(idx) if !rec.get(idx).unwrap_or("").is_empty() => Some(num(idx, "D_mm")?),
            _ => None,
        };
        out.push(SweepSample {
            x: num(xi, "x_m")?,
            d,
            f: num(fi, "F_N")?,
        });
    }
    if out.is_empty() {
        return Err(Error::Csv {
            row: 2,
            message: "no data rows".into(),
        });
    }
    Ok(out)
}
